use serde::Serialize;

use super::grid::sampling_grid;
use super::mask::{averaged_energy, TruncatedMeasure};
use super::point::{ratio_to_f64, Point, Rational};
use super::prepared::{prepare, PreparedForm};
use super::spectrum::{SpectrumCandidate, POSITIVITY_FLOOR};
use crate::digitsets::IntSet;
use crate::error::{Error, Result};
use crate::par;
use crate::productform::OneStageForm;

pub const BESSEL_TOLERANCE: f64 = 1e-9;

/// Largest number of rationals `t / N^2` added to a sampling grid.
const MAX_RATIONALS: usize = 4096;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct JpRow {
    pub xi: f64,
    #[serde(rename = "Q_T")]
    pub q_t: f64,
    pub target: f64,
    pub deficiency: f64,
    pub bessel_ok: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct JpReport {
    pub terms: usize,
    pub radius: f64,
    pub rows: Vec<JpRow>,
    pub bessel_ok: bool,
    pub max_deficiency: f64,
}

/// `Q_T(ξ) = Σ |μ̂(ξ + λ)|²` over the candidate elements with `|λ| <= radius`.
pub fn jp_sum(
    digits: &IntSet,
    base: u64,
    candidate: &SpectrumCandidate,
    xi_samples: &[f64],
    depth: Option<u32>,
    radius: f64,
) -> Result<JpReport> {
    let mut measure = TruncatedMeasure::new(base, digits)?;
    if let Some(p) = depth {
        measure = measure.with_depth(p)?;
    }
    let elements: Vec<Rational> = candidate
        .elements()
        .into_iter()
        .filter(|e| ratio_to_f64(e).abs() <= radius)
        .collect();
    let rows: Vec<JpRow> = xi_samples
        .iter()
        .map(|&xi| {
            let x = Point::from_f64(xi);
            let terms = par::map(&elements, |e| measure.abs_sq(&x.shift(e)));
            let q_t = par::pairwise_sum(&terms);
            JpRow {
                xi,
                q_t,
                target: 1.0,
                deficiency: 1.0 - q_t,
                bessel_ok: q_t <= 1.0 + BESSEL_TOLERANCE,
            }
        })
        .collect();
    Ok(JpReport {
        terms: elements.len(),
        radius,
        bessel_ok: rows.iter().all(|r| r.bessel_ok),
        max_deficiency: rows.iter().map(|r| r.deficiency).fold(f64::NEG_INFINITY, f64::max),
        rows,
    })
}

fn generator(c: &SpectrumCandidate) -> Result<&PreparedForm> {
    c.generator
        .as_ref()
        .ok_or_else(|| Error::InvalidParams("candidate has no generating form".into()))
}

fn measure_of(f: &PreparedForm) -> Result<TruncatedMeasure> {
    TruncatedMeasure::new(f.base, &IntSet::new(f.digits.iter().map(|&d| d.into())))
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct IntegerBoundRow {
    pub level: usize,
    pub xi: f64,
    pub sum: f64,
    pub target: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct IntegerBoundReport {
    pub rows: Vec<IntegerBoundRow>,
    /// Largest `sum - target`.
    pub max_excess: f64,
    pub bounded: bool,
    /// Sums never decrease from one level to the next.
    pub monotone: bool,
}

/// `Σ_{λ ∈ Λ_{q_k}} |μ̂(ξ + λ)|² <= (1/n) Σ_s |M_{B_s}(ξ)|²` for every stored level,
/// in the coordinates of the normalized form.
pub fn integer_bound_check(c: &SpectrumCandidate, xi_samples: &[f64], tolerance: f64) -> Result<IntegerBoundReport> {
    let f = generator(c)?;
    let measure = measure_of(f)?;
    let mut rows = Vec::new();
    let mut monotone = true;
    for &xi in xi_samples {
        let x = Point::from_f64(xi);
        let target = averaged_energy(&f.bs, &x);
        let mut last = f64::NEG_INFINITY;
        for (level, l) in c.levels.iter().enumerate() {
            let terms = par::map(&l.elements, |&e| measure.abs_sq(&x.shift(&Rational::from_integer(e))));
            let sum = par::pairwise_sum(&terms);
            if sum < last - tolerance {
                monotone = false;
            }
            last = sum;
            rows.push(IntegerBoundRow { level, xi, sum, target });
        }
    }
    let max_excess = rows.iter().map(|r| r.sum - r.target).fold(f64::NEG_INFINITY, f64::max);
    Ok(IntegerBoundReport {
        bounded: max_excess <= tolerance,
        max_excess,
        monotone,
        rows,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct WeaklyPeriodicReport {
    pub window: i64,
    pub grid_size: usize,
    /// Grid points outside the positivity region.
    pub excluded: usize,
    /// `min_ξ max_{|k| <= window} |μ̂(ξ + k)|`, using the lower end of each tail interval.
    pub min_max: f64,
    pub argmin_xi: Option<f64>,
    pub argmax_k: Option<i64>,
}

/// Looks for points of the weakly periodic set on a grid: `ξ` in the positivity
/// region with `μ̂(ξ + k)` small for every `k` in the window.
pub fn weakly_periodic_check(f: &OneStageForm, window: i64, resolution: usize) -> Result<WeaklyPeriodicReport> {
    if window < 0 {
        return Err(Error::InvalidParams("window must be non-negative".into()));
    }
    let prep = prepare(f)?;
    let measure = measure_of(&prep)?;
    let grid = sampling_grid(resolution, prep.base, MAX_RATIONALS);
    let per_point = par::map(&grid, |x| -> Result<Option<(f64, i64)>> {
        if averaged_energy(&prep.bs, x) <= POSITIVITY_FLOOR {
            return Ok(None);
        }
        let mut best = (f64::NEG_INFINITY, 0_i64);
        for k in -window..=window {
            let v = measure.mu_hat(&x.shift(&Rational::from_integer(k as i128)))?.abs_lower;
            if v > best.0 {
                best = (v, k);
            }
        }
        Ok(Some(best))
    });
    let mut report = WeaklyPeriodicReport {
        window,
        grid_size: grid.len(),
        excluded: 0,
        min_max: f64::INFINITY,
        argmin_xi: None,
        argmax_k: None,
    };
    for (x, r) in grid.iter().zip(per_point) {
        match r? {
            None => report.excluded += 1,
            Some((v, k)) => {
                if v < report.min_max {
                    report.min_max = v;
                    report.argmin_xi = Some(x.value());
                    report.argmax_k = Some(k);
                }
            }
        }
    }
    Ok(report)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TailTermWorst {
    pub level: usize,
    pub lambda: i128,
    pub xi: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TailTermReport {
    pub requested_c: f64,
    /// Smallest ratio `|μ̂((ξ+λ)/N^q)|² / ((1/n) Σ_s |M_{B_s}((ξ+λ)/N^q)|²)` seen.
    pub empirical_c: f64,
    pub passed: bool,
    pub checked: usize,
    pub excluded: usize,
    pub worst: Option<TailTermWorst>,
}

/// The tail-term inequality at every stored `(k, λ)` and every sample `ξ`,
/// with the lower end of the tail interval on the left.
pub fn tail_term_check(c: &SpectrumCandidate, requested_c: f64, xi_samples: &[f64]) -> Result<TailTermReport> {
    let f = generator(c)?;
    let measure = measure_of(f)?;
    let n = f.base as i128;
    let mut jobs = Vec::new();
    for (level, l) in c.levels.iter().enumerate() {
        let pow = n
            .checked_pow(l.q)
            .ok_or_else(|| Error::ModulusOverflow(format!("{n}^{}", l.q)))?;
        for &lambda in &l.elements {
            jobs.push((level, lambda, Rational::new(1, pow)));
        }
    }
    let results = par::map(&jobs, |&(level, lambda, inv)| {
        let mut worst: Option<(f64, f64)> = None;
        let mut excluded = 0;
        for &xi in xi_samples {
            let x = Point::from_f64(xi).shift(&Rational::from_integer(lambda)).scale(&inv);
            let energy = averaged_energy(&f.bs, &x);
            if energy <= POSITIVITY_FLOOR {
                excluded += 1;
                continue;
            }
            let lower = measure.mu_hat(&x)?.abs_lower;
            let ratio = lower * lower / energy;
            if worst.is_none_or(|(r, _)| ratio < r) {
                worst = Some((ratio, xi));
            }
        }
        Ok::<_, Error>((level, lambda, worst, excluded))
    });
    let mut report = TailTermReport {
        requested_c,
        empirical_c: f64::INFINITY,
        passed: true,
        checked: 0,
        excluded: 0,
        worst: None,
    };
    for r in results {
        let (level, lambda, worst, excluded) = r?;
        report.excluded += excluded;
        report.checked += xi_samples.len() - excluded;
        if let Some((ratio, xi)) = worst {
            if ratio < report.empirical_c {
                report.empirical_c = ratio;
                report.worst = Some(TailTermWorst { level, lambda, xi });
            }
        }
    }
    report.passed = report.empirical_c >= requested_c;
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::measure::grid::chebyshev_grid;
    use crate::measure::spectrum::{build_spectrum, ShiftPolicy, SpectrumOptions};

    fn s(xs: &[i64]) -> IntSet {
        IntSet::from_i64s(xs)
    }

    fn plain() -> OneStageForm {
        OneStageForm::constant(4, 1, s(&[0, 2]), s(&[0]), s(&[0, 1]), s(&[0]))
    }

    fn mixed() -> OneStageForm {
        OneStageForm::new(4, 1, s(&[0, 1]), vec![s(&[0, 2]), s(&[0, 6])], s(&[0, 2]), s(&[0, 1])).unwrap()
    }

    #[test]
    fn classical_frame_sums() {
        let c = build_spectrum(&plain(), &SpectrumOptions::with_levels(5)).unwrap();
        let mut last = f64::INFINITY;
        for level in 1..=5 {
            let r = jp_sum(&s(&[0, 2]), 4, &c.up_to(level), &[0.0, 0.3, 0.7], None, f64::INFINITY).unwrap();
            assert!(r.bessel_ok);
            assert!(r.max_deficiency < last);
            last = r.max_deficiency;
        }
        let zero = jp_sum(&s(&[0, 2]), 4, &c, &[0.0], None, f64::INFINITY).unwrap();
        assert!(zero.rows[0].q_t >= 0.999 && zero.rows[0].q_t <= 1.0 + 1e-12, "{zero:?}");
    }

    #[test]
    fn integer_sums_bounded() {
        let c = build_spectrum(&mixed(), &SpectrumOptions::with_levels(3)).unwrap();
        let r = integer_bound_check(&c, &chebyshev_grid(16), 1e-9).unwrap();
        assert!(r.bounded && r.monotone, "{}", r.max_excess);
        let manual = SpectrumCandidate::manual(4, Rational::from_integer(1), vec![], vec![vec![0]]);
        assert!(integer_bound_check(&manual, &[0.1], 1e-9).is_err());
    }

    #[test]
    fn weakly_periodic_set_is_empty() {
        let r = weakly_periodic_check(&mixed(), 16, 128).unwrap();
        assert!(r.min_max > 0.0, "{r:?}");
        assert!(r.excluded > 0);
        assert_eq!(r.grid_size, 128 + 16);
    }

    #[test]
    fn tail_terms() {
        let grid = chebyshev_grid(32);
        let c = build_spectrum(&plain(), &SpectrumOptions::with_levels(3)).unwrap();
        let r = tail_term_check(&c, 1e-3, &grid).unwrap();
        assert!(r.passed && r.empirical_c > 0.0, "{r:?}");
        let zero = tail_term_check(&c.up_to(0), 0.0, &grid).unwrap();
        assert_eq!(zero.checked + zero.excluded, grid.len());
    }

    #[test]
    fn adversarial_candidate_is_flagged() {
        let grid = chebyshev_grid(32);
        let opts = SpectrumOptions {
            levels: 2,
            window: 8,
            policy: ShiftPolicy::ArgMin,
            ..SpectrumOptions::default()
        };
        let good = build_spectrum(&mixed(), &SpectrumOptions::with_levels(2)).unwrap();
        let bad = build_spectrum(&mixed(), &opts).unwrap();
        let good_c = tail_term_check(&good, 1e-3, &grid).unwrap().empirical_c;
        let bad_r = tail_term_check(&bad, 1e-3, &grid).unwrap();
        assert!(bad_r.empirical_c < good_c, "{} {}", bad_r.empirical_c, good_c);
        assert!(!bad_r.passed, "{bad_r:?}");
    }
}
