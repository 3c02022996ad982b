//! Coven–Meyerowitz conditions, tiling of `Z_N`, modulo product forms and the
//! `p^α q` tile digit set families.

mod modulo;
mod paq;
mod profile;
mod regular;
mod tiles;

pub use modulo::{
    generate_modulo_product_form, modulo_to_k_stage, ModuloGeneration, ModuloProductFormSpec, StageModulus, ZShift,
};
pub use paq::{paq_type_generator, PaqParams, PaqResult, PaqVariant};
pub use profile::{cm_profile, laba_spectrum, CMProfile};
pub use regular::cm_regular_product_triple;
pub use tiles::{
    check_tile_zn, confirm_tiling, exhaustive_tiling, ExhaustiveTiling, TileCheck, TileVerdict, DEFAULT_TILE_BUDGET,
};
