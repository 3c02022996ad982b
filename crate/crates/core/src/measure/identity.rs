use std::collections::BTreeMap;

use serde::Serialize;

use super::mask::{averaged_energy, mask_at, TruncatedMeasure};
use super::point::Point;
use super::prepared::{prepare, PreparedForm};
use crate::digitsets::IntSet;
use crate::error::{Error, Result};
use crate::par;
use crate::productform::OneStageForm;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct IdentityReport {
    pub p: u32,
    pub samples: usize,
    pub gamma_size: usize,
    pub max_deviation: f64,
    /// `(s, ξ)` where the deviation is largest.
    pub worst: Option<(usize, f64)>,
}

/// Compares `Σ_{λ ∈ Γ̃_p} |μ̂_p(ξ+λ)|² |M_{B_s}((ξ+λ)/N^p)|²` with
/// `(1/n) Σ_i |M_{B_i}(ξ)|²` for every `s` and every sample.
///
/// `tilde_shifts` maps `γ ∈ Γ_p` to the `k` in `γ + N^p k`; missing entries are 0.
pub fn finite_level_identity_check(
    f: &OneStageForm,
    p: u32,
    xi_samples: &[f64],
    tilde_shifts: Option<&BTreeMap<i128, i128>>,
) -> Result<IdentityReport> {
    if p == 0 {
        return Err(Error::InvalidParams("p must be at least 1".into()));
    }
    let prepared = prepare(f)?;
    identity_on(&prepared, p, xi_samples, tilde_shifts)
}

pub(crate) fn identity_on(
    f: &PreparedForm,
    p: u32,
    xi_samples: &[f64],
    tilde_shifts: Option<&BTreeMap<i128, i128>>,
) -> Result<IdentityReport> {
    let n = f.base as i128;
    let period = n
        .checked_pow(p)
        .ok_or_else(|| Error::ModulusOverflow(format!("{n}^{p}")))?;
    let gamma: Vec<i128> = f
        .gamma(p)?
        .into_iter()
        .map(|g| {
            let k = tilde_shifts.and_then(|m| m.get(&g)).copied().unwrap_or(0);
            g + period * k
        })
        .collect();
    let measure = TruncatedMeasure::new(f.base, &IntSet::new(f.digits.iter().map(|&d| d.into())))?;
    let pow_f = (f.base as f64).powi(p as i32);
    let per_xi = par::map(xi_samples, |&xi| {
        let x = Point::from_f64(xi);
        let rhs = averaged_energy(&f.bs, &x);
        let shifted: Vec<Point> = gamma.iter().map(|&g| x.add(&Point::integer(g))).collect();
        let weights: Vec<f64> = shifted.iter().map(|y| measure.product(y, p).norm_sqr()).collect();
        let mut worst = (0.0_f64, 0usize);
        for (s, b) in f.bs.iter().enumerate() {
            let terms: Vec<f64> = shifted
                .iter()
                .zip(&weights)
                .map(|(y, w)| w * mask_at(b, y, Some(period), pow_f).norm_sqr())
                .collect();
            let dev = (par::pairwise_sum(&terms) - rhs).abs();
            if dev > worst.0 {
                worst = (dev, s);
            }
        }
        worst
    });
    let mut report = IdentityReport {
        p,
        samples: xi_samples.len(),
        gamma_size: gamma.len(),
        max_deviation: 0.0,
        worst: None,
    };
    for (&xi, &(dev, s)) in xi_samples.iter().zip(&per_xi) {
        if report.worst.is_none() || dev > report.max_deviation {
            report.max_deviation = dev;
            report.worst = Some((s, xi));
        }
    }
    Ok(report)
}
