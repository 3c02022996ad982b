pub mod cm_tiling;
pub mod cyclotomic;
pub mod digitsets;
pub mod error;
pub mod fixtures;
pub mod hadamard;
pub mod measure;
pub mod numtheory;
pub mod par;
pub mod productform;
pub mod report;

pub use error::{Error, Result, SumCollision};
