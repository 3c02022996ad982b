//! One-stage and k-stage product forms, their reductions, and the four-digit construction.

mod four_digit;
mod k_stage;
mod one_stage;
mod reduce;

pub use four_digit::{build_four_digit_form, FourDigitForm};
pub use k_stage::{expand_k_stage, validate_k_stage, KStageForm};
pub use one_stage::{expand_one_stage, validate_one_stage, OneStageForm};
pub use reduce::{
    base_expansion, k_stage_to_one_stage, reduce_r_to_1, translate_and_gcd_normalize, KToOneStage, NormalizedForm,
};

use serde::{Deserialize, Serialize};

/// Either kind of form, as read from JSON.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum AnyForm {
    KStage(KStageForm),
    OneStage(OneStageForm),
}
