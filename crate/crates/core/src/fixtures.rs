//! A small corpus of worked cases with known verdicts, used by the CLI and the tests.

use std::time::Instant;

use serde::Serialize;

use crate::cm_tiling::{cm_profile, cm_regular_product_triple, paq_type_generator, PaqParams, PaqVariant};
use crate::cyclotomic::{factor_cyclotomic, MaskPolynomial};
use crate::digitsets::IntSet;
use crate::error::Result;
use crate::hadamard::{find_spectra, verify_triple};
use crate::measure::{
    build_spectrum, finite_level_identity_check, grid::chebyshev_grid, jp_sum, Rational, SpectrumOptions,
};
use crate::par;
use crate::productform::{
    build_four_digit_form, expand_one_stage, k_stage_to_one_stage, validate_one_stage, KStageForm, OneStageForm,
};

fn s(xs: &[i64]) -> IntSet {
    IntSet::from_i64s(xs)
}

/// `({0, 1}, 4, {0, 2} / {0, 6})` with spectra `{0, 2}` and `{0, 1}`; expands to `{0, 1, 8, 25}`.
pub fn mixed_one_stage() -> OneStageForm {
    OneStageForm::new(4, 1, s(&[0, 1]), vec![s(&[0, 2]), s(&[0, 6])], s(&[0, 2]), s(&[0, 1]))
        .expect("two B sets for two digits")
}

/// `{0, 1} ⊕ 4 {0, 2} = {0, 1, 8, 9}`, a tile with spectrum `Z + {0, 1/4}`.
pub fn quarter_tile_one_stage() -> OneStageForm {
    OneStageForm::constant(4, 1, s(&[0, 1]), s(&[0, 2]), s(&[0, 2]), s(&[0, 1]))
}

/// `{0, 2}` over 4 written as a form with trivial `B`.
pub fn half_digits_one_stage() -> OneStageForm {
    OneStageForm::constant(4, 1, s(&[0, 2]), s(&[0]), s(&[0, 1]), s(&[0]))
}

pub fn pair_in_72() -> (IntSet, IntSet) {
    (
        s(&[0, 8, 16, 18, 26, 34]),
        s(&[0, 5, 6, 9, 12, 29, 33, 36, 42, 48, 53, 57]),
    )
}

/// `A ⊕ 72^2 B` for the pair above as a two-stage form with gap 2.
pub fn two_stage_72() -> Result<KStageForm> {
    let (a, b) = pair_in_72();
    let regular = cm_regular_product_triple(72, &[a.clone(), b.clone()])?;
    KStageForm::constant(72, vec![2], vec![a, b], regular.ls)
}

pub fn four_digit_24() -> IntSet {
    s(&[0, 1, 16, 17])
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Observation {
    pub valid: bool,
    pub detail: String,
}

fn observe(valid: bool, detail: impl Into<String>) -> Result<Observation> {
    Ok(Observation {
        valid,
        detail: detail.into(),
    })
}

pub struct Fixture {
    pub id: &'static str,
    pub description: &'static str,
    pub expect_valid: bool,
    pub run: fn() -> Result<Observation>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct FixtureOutcome {
    pub id: String,
    pub description: String,
    pub expected: &'static str,
    pub observed: &'static str,
    pub passed: bool,
    pub detail: String,
}

fn verdict(valid: bool) -> &'static str {
    if valid {
        "valid"
    } else {
        "invalid"
    }
}

fn half_digits_triple() -> Result<Observation> {
    match verify_triple(4, &s(&[0, 2]), &s(&[0, 1])) {
        Ok(_) => observe(true, "exact Hadamard triple"),
        Err(e) => observe(false, e.to_string()),
    }
}

fn half_digits_wrong_spectrum() -> Result<Observation> {
    match verify_triple(4, &s(&[0, 2]), &s(&[0, 2])) {
        Ok(_) => observe(true, "exact Hadamard triple"),
        Err(e) => observe(false, e.to_string()),
    }
}

fn mixed_form() -> Result<Observation> {
    let f = mixed_one_stage();
    let report = validate_one_stage(&f);
    let d = expand_one_stage(&f)?;
    let ok = report.valid && d == s(&[0, 1, 8, 25]);
    observe(ok, format!("expansion {d}, {} checks", report.checks.len()))
}

fn quarter_tile_identity() -> Result<Observation> {
    let f = quarter_tile_one_stage();
    let grid = chebyshev_grid(64);
    let mut worst: f64 = 0.0;
    for p in 1..=3 {
        worst = worst.max(finite_level_identity_check(&f, p, &grid, None)?.max_deviation);
    }
    let ok = validate_one_stage(&f).valid && expand_one_stage(&f)? == s(&[0, 1, 8, 9]) && worst < 1e-9;
    observe(ok, format!("identity deviation {worst:.3e} for p = 1, 2, 3"))
}

fn base24_no_spectrum() -> Result<Observation> {
    let found = find_spectra(24, &four_digit_24(), 1)?;
    observe(!found.is_empty(), format!("{} spectra modulo 24", found.len()))
}

fn base24_t1() -> Result<Observation> {
    let p = cm_profile(&four_digit_24(), 24);
    let mask = MaskPolynomial::from_digits(&four_digit_24())?;
    let factors = factor_cyclotomic(&mask, None).factors;
    observe(
        p.t1,
        format!(
            "prime powers {:?}, T1 {}, cyclotomic factors {factors:?}",
            p.prime_powers, p.t1
        ),
    )
}

fn base24_four_digit() -> Result<Observation> {
    let f = build_four_digit_form(24, 1, 4, 1, 1)?;
    let c = build_spectrum(&f.form, &SpectrumOptions::with_levels(3))?;
    let m = Rational::from_integer(i128::try_from(&f.multiplier).unwrap_or(1));
    let mut last = f64::INFINITY;
    let mut decreasing = true;
    let mut bessel = true;
    for level in 1..=3 {
        let r = jp_sum(
            &f.digits,
            24,
            &c.up_to(level).rescaled(m),
            &[0.0, 0.3, 0.7],
            None,
            f64::INFINITY,
        )?;
        bessel &= r.bessel_ok;
        decreasing &= r.max_deficiency < last;
        last = r.max_deficiency;
    }
    observe(
        f.report.valid && bessel && decreasing,
        format!("form valid, frame sums for {m} times the candidate: Bessel {bessel}, deficiency {last:.3e}"),
    )
}

fn two_stage_72_reduction() -> Result<Observation> {
    let f = two_stage_72()?;
    let out = k_stage_to_one_stage(&f)?;
    observe(
        out.report.valid,
        format!(
            "one-stage form over {} with {} digits",
            out.form.base,
            out.combined.len()
        ),
    )
}

fn paq(variant: PaqVariant, params: PaqParams) -> Result<Observation> {
    let r = paq_type_generator(2, 3, 2, variant, &params)?;
    observe(
        r.report.valid && r.complete_mod_n && r.congruences.valid,
        format!(
            "digits {} over {}, kernel modulus {}",
            r.generation.digits, r.base, r.generation.kernel.modulus
        ),
    )
}

pub fn fixtures() -> Vec<Fixture> {
    vec![
        Fixture {
            id: "half-digits-over-4",
            description: "(4, {0,2}, {0,1}) is a Hadamard triple",
            expect_valid: true,
            run: half_digits_triple,
        },
        Fixture {
            id: "half-digits-wrong-spectrum",
            description: "(4, {0,2}, {0,2}): the rows for 0 and 2 are not orthogonal",
            expect_valid: false,
            run: half_digits_wrong_spectrum,
        },
        Fixture {
            id: "mixed-b-one-stage",
            description: "{0,1} with B sets {0,2} and {0,6} over 4 expands to {0,1,8,25} and validates",
            expect_valid: true,
            run: mixed_form,
        },
        Fixture {
            id: "quarter-tile-identity",
            description: "{0,1} + 4{0,2} over 4: the finite-level identity holds for p = 1, 2, 3",
            expect_valid: true,
            run: quarter_tile_identity,
        },
        Fixture {
            id: "base24-four-digit-no-spectrum",
            description: "{0,1,16,17} has no spectrum in Z_24",
            expect_valid: false,
            run: base24_no_spectrum,
        },
        Fixture {
            id: "base24-four-digit-t1",
            description: "{0,1,16,17} fails T1 modulo 24 (mask Phi_2 Phi_32)",
            expect_valid: false,
            run: base24_t1,
        },
        Fixture {
            id: "base24-four-digit-form",
            description: "3{0,1,16,17} = {0,3} + 24{0,2}: valid form, frame sums converge for the rescaled candidate",
            expect_valid: true,
            run: base24_four_digit,
        },
        Fixture {
            id: "pair-in-72-two-stage",
            description: "A + 72^2 B for the irreducible tiling pair of Z_72 reduces to a valid one-stage form",
            expect_valid: true,
            run: two_stage_72_reduction,
        },
        Fixture {
            id: "paq-12-first-family",
            description: "first factor-set family for 2^2 3",
            expect_valid: true,
            run: || paq(PaqVariant::I, PaqParams::default()),
        },
        Fixture {
            id: "paq-12-second-family",
            description: "second factor-set family for 2^2 3 with weight M_1 = 1",
            expect_valid: true,
            run: || {
                paq(
                    PaqVariant::Ii,
                    PaqParams {
                        m: vec![1],
                        ..PaqParams::default()
                    },
                )
            },
        },
        Fixture {
            id: "paq-12-third-family",
            description: "third factor-set family for 2^2 3",
            expect_valid: true,
            run: || paq(PaqVariant::Iii, PaqParams::default()),
        },
        Fixture {
            id: "paq-12-second-family-extra-q",
            description: "second family multiplied by one more factor of q loses its spectra",
            expect_valid: false,
            run: || {
                paq(
                    PaqVariant::Ii,
                    PaqParams {
                        extra_q: true,
                        ..PaqParams::default()
                    },
                )
            },
        },
    ]
}

/// Runs every fixture; outcomes come back in corpus order with the elapsed seconds.
pub fn run_all_fixtures() -> Vec<(FixtureOutcome, f64)> {
    let all = fixtures();
    par::map(&all, |f| {
        let start = Instant::now();
        let (observed, detail) = match (f.run)() {
            Ok(o) => (o.valid, o.detail),
            Err(e) => (false, format!("error: {e}")),
        };
        let outcome = FixtureOutcome {
            id: f.id.to_string(),
            description: f.description.to_string(),
            expected: verdict(f.expect_valid),
            observed: verdict(observed),
            passed: observed == f.expect_valid,
            detail,
        };
        (outcome, start.elapsed().as_secs_f64())
    })
}

/// `Φ_d` factors of the mask of `digits`, for display.
pub fn mask_factors(digits: &IntSet) -> Result<Vec<(u64, u32)>> {
    let mask = MaskPolynomial::from_digits(digits)?;
    Ok(factor_cyclotomic(&mask, None).factors)
}
