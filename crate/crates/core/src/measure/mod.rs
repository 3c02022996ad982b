//! Fourier transforms of the self-similar measure, the spectrum construction and
//! the numerical checks built on them.

mod checks;
pub mod grid;
mod identity;
mod mask;
mod point;
mod prepared;
mod spectrum;

pub use checks::{
    integer_bound_check, jp_sum, tail_term_check, weakly_periodic_check, IntegerBoundReport, IntegerBoundRow, JpReport,
    JpRow, TailTermReport, TailTermWorst, WeaklyPeriodicReport, BESSEL_TOLERANCE,
};
pub use identity::{finite_level_identity_check, IdentityReport};
pub use mask::{mask_value, mask_value_hp, mu_hat_truncated, MuHat, TruncatedMeasure};
pub use point::{ratio_to_f64, Point, Rational};
pub use prepared::{prepare, PreparedForm};
pub use spectrum::{
    build_spectrum, verify_levels, GammaShift, ShiftPolicy, SpectrumCandidate, SpectrumLevel, SpectrumOptions,
    POSITIVITY_FLOOR,
};
