use std::collections::BTreeMap;

use serde::{Deserialize, Serialize, Serializer};

use super::mask::{averaged_energy, TruncatedMeasure};
use super::point::{Point, Rational};
use super::prepared::{prepare, PreparedForm};
use crate::digitsets::IntSet;
use crate::error::{Error, Result};
use crate::par;
use crate::productform::OneStageForm;
use crate::report::ValidationReport;

/// Points whose averaged mask energy is below this are outside the positivity region.
pub const POSITIVITY_FLOOR: f64 = 1e-6;

/// How the integer shift `k` of each `γ` is picked.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ShiftPolicy {
    /// Scan `0, 1, -1, 2, -2, …` and take the first `k` whose ratio meets the threshold.
    FirstAboveThreshold,
    /// Take the `k` with the smallest ratio; only useful to produce bad candidates.
    ArgMin,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpectrumOptions {
    pub levels: usize,
    /// `p_k`; the last entry repeats.
    pub pk_schedule: Vec<u32>,
    pub window: i64,
    pub threshold: f64,
    pub epsilon: f64,
    pub policy: ShiftPolicy,
}

impl Default for SpectrumOptions {
    fn default() -> Self {
        SpectrumOptions {
            levels: 3,
            pk_schedule: vec![1],
            window: 128,
            threshold: 1e-3,
            epsilon: 1e-12,
            policy: ShiftPolicy::FirstAboveThreshold,
        }
    }
}

impl SpectrumOptions {
    pub fn with_levels(levels: usize) -> Self {
        SpectrumOptions {
            levels,
            ..Self::default()
        }
    }

    fn p_at(&self, k: usize) -> u32 {
        let i = (k - 1).min(self.pk_schedule.len().saturating_sub(1));
        self.pk_schedule.get(i).copied().unwrap_or(1)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct GammaShift {
    pub gamma: i128,
    pub k: i64,
    /// `|μ̂(γ/N^p + k)|² / ((1/n) Σ_s |M_{B_s}(γ/N^p)|² + ε)`.
    pub ratio: f64,
    pub target: f64,
}

/// `Λ_{q_k} = Λ_{q_{k-1}} + N^{q_{k-1}} Γ̃_{p_k}`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SpectrumLevel {
    pub q: u32,
    pub p: u32,
    pub shifts: Vec<GammaShift>,
    pub elements: Vec<i128>,
}

/// `scale · (fractional + Λ)` with the integer part stored level by level.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SpectrumCandidate {
    pub base: u64,
    #[serde(serialize_with = "ratio_string")]
    pub scale: Rational,
    #[serde(serialize_with = "ratio_strings")]
    pub fractional: Vec<Rational>,
    pub levels: Vec<SpectrumLevel>,
    /// The normalized form the levels were built from.
    pub generator: Option<PreparedForm>,
    pub options: Option<SpectrumOptions>,
}

fn ratio_string<S: Serializer>(r: &Rational, s: S) -> std::result::Result<S::Ok, S::Error> {
    s.serialize_str(&r.to_string())
}

fn ratio_strings<S: Serializer>(rs: &[Rational], s: S) -> std::result::Result<S::Ok, S::Error> {
    s.collect_seq(rs.iter().map(|r| r.to_string()))
}

impl SpectrumCandidate {
    /// A candidate from explicit data; `integer_levels` must be nested.
    pub fn manual(base: u64, scale: Rational, fractional: Vec<Rational>, integer_levels: Vec<Vec<i128>>) -> Self {
        let levels = integer_levels
            .into_iter()
            .enumerate()
            .map(|(q, mut elements)| {
                elements.sort_unstable();
                elements.dedup();
                SpectrumLevel {
                    q: q as u32,
                    p: if q == 0 { 0 } else { 1 },
                    shifts: Vec::new(),
                    elements,
                }
            })
            .collect();
        SpectrumCandidate {
            base,
            scale,
            fractional,
            levels,
            generator: None,
            options: None,
        }
    }

    pub fn top(&self) -> usize {
        self.levels.len().saturating_sub(1)
    }

    /// The candidate cut back to its first `level + 1` integer levels.
    pub fn up_to(&self, level: usize) -> Self {
        let mut out = self.clone();
        out.levels.truncate(level + 1);
        out
    }

    /// Multiplies every element by `factor`.
    pub fn rescaled(&self, factor: Rational) -> Self {
        let mut out = self.clone();
        out.scale *= factor;
        out
    }

    /// `scale · (f + λ)` over the fractional shifts and the top level, sorted.
    pub fn elements(&self) -> Vec<Rational> {
        let top = match self.levels.last() {
            Some(l) => &l.elements,
            None => return Vec::new(),
        };
        let mut out: Vec<Rational> = self
            .fractional
            .iter()
            .flat_map(|f| top.iter().map(move |&l| (f + Rational::from_integer(l)) * self.scale))
            .collect();
        out.sort();
        out.dedup();
        out
    }
}

/// Builds `Λ_{q_1} ⊂ … ⊂ Λ_{q_levels}` for the normalized form of `f` and returns
/// `(1/g) ((1/N) L2 + Λ)`.
pub fn build_spectrum(f: &OneStageForm, opts: &SpectrumOptions) -> Result<SpectrumCandidate> {
    if opts.window < 0 || opts.pk_schedule.contains(&0) {
        return Err(Error::InvalidParams(
            "window must be non-negative and every p_k positive".into(),
        ));
    }
    let prep = prepare(f)?;
    let n = prep.base as i128;
    let measure = TruncatedMeasure::new(prep.base, &IntSet::new(prep.digits.iter().map(|&d| d.into())))?;
    let mut levels = vec![SpectrumLevel {
        q: 0,
        p: 0,
        shifts: Vec::new(),
        elements: vec![0],
    }];
    let mut by_p: BTreeMap<u32, Vec<GammaShift>> = BTreeMap::new();
    for k in 1..=opts.levels {
        let p = opts.p_at(k);
        if let std::collections::btree_map::Entry::Vacant(e) = by_p.entry(p) {
            let gamma = prep.gamma(p)?;
            let period = n
                .checked_pow(p)
                .ok_or_else(|| Error::ModulusOverflow(format!("{n}^{p}")))?;
            let found = par::map(&gamma, |&g| choose_shift(&prep, &measure, g, period, opts));
            e.insert(found.into_iter().collect::<Result<Vec<_>>>()?);
        }
        let shifts = by_p[&p].clone();
        let prev = levels.last().expect("level 0 is present");
        let step = n
            .checked_pow(prev.q)
            .ok_or_else(|| Error::ModulusOverflow(format!("{n}^{}", prev.q)))?;
        let period = n.checked_pow(p).expect("checked when the shifts were built");
        let overflow = || Error::ModulusOverflow(format!("elements of level {k}"));
        let mut elements = Vec::with_capacity(prev.elements.len() * shifts.len());
        for &lambda in &prev.elements {
            for s in &shifts {
                let tilde = period
                    .checked_mul(s.k as i128)
                    .and_then(|v| v.checked_add(s.gamma))
                    .and_then(|v| v.checked_mul(step))
                    .and_then(|v| v.checked_add(lambda))
                    .ok_or_else(overflow)?;
                elements.push(tilde);
            }
        }
        elements.sort_unstable();
        levels.push(SpectrumLevel {
            q: prev.q + p,
            p,
            shifts,
            elements,
        });
    }
    Ok(SpectrumCandidate {
        base: prep.base,
        scale: Rational::new(1, prep.g),
        fractional: prep.l2.iter().map(|&l| Rational::new(l, n)).collect(),
        levels,
        generator: Some(prep),
        options: Some(opts.clone()),
    })
}

fn choose_shift(
    prep: &PreparedForm,
    measure: &TruncatedMeasure,
    gamma: i128,
    period: i128,
    opts: &SpectrumOptions,
) -> Result<GammaShift> {
    let xi = Point::rational(gamma, period);
    let target = averaged_energy(&prep.bs, &xi);
    // Outside the positivity region the identity gives γ no weight, but its element
    // still has to land where the transform is not small.
    let denom = target.max(POSITIVITY_FLOOR) + opts.epsilon;
    let ratio = |k: i64| measure.abs_sq(&xi.shift(&Rational::from_integer(k as i128))) / denom;
    let shift = |k: i64| GammaShift {
        gamma,
        k,
        ratio: ratio(k),
        target,
    };
    if gamma == 0 {
        return Ok(shift(0));
    }
    let order = std::iter::once(0).chain((1..=opts.window).flat_map(|k| [k, -k]));
    match opts.policy {
        ShiftPolicy::FirstAboveThreshold => {
            let mut best = shift(0);
            for k in order {
                let r = ratio(k);
                if r >= opts.threshold {
                    return Ok(GammaShift {
                        gamma,
                        k,
                        ratio: r,
                        target,
                    });
                }
                if r > best.ratio {
                    best = GammaShift {
                        gamma,
                        k,
                        ratio: r,
                        target,
                    };
                }
            }
            if target < POSITIVITY_FLOOR {
                return Ok(best);
            }
            Err(Error::ShiftSearchFailure {
                gamma,
                window: opts.window,
            })
        }
        ShiftPolicy::ArgMin => {
            let mut best = shift(0);
            for k in order.skip(1) {
                let r = ratio(k);
                if r < best.ratio {
                    best = GammaShift {
                        gamma,
                        k,
                        ratio: r,
                        target,
                    };
                }
            }
            Ok(best)
        }
    }
}

/// Exact structural checks of a built candidate: `0 ∈ Λ_{q_k}`, nesting, distinct
/// elements and `Λ_{q_k} ≡ Γ_{q_k} (mod N^{q_k})` as multisets.
pub fn verify_levels(c: &SpectrumCandidate) -> Result<ValidationReport> {
    let prep = c
        .generator
        .as_ref()
        .ok_or_else(|| Error::InvalidParams("candidate has no generating form".into()))?;
    let n = prep.base as i128;
    let mut report = ValidationReport::new();
    for (k, level) in c.levels.iter().enumerate() {
        let els = &level.elements;
        if els.binary_search(&0).is_ok() {
            report.pass(format!("contains 0 [level {k}]"));
        } else {
            report.fail(format!("contains 0 [level {k}]"), "0 missing");
        }
        if els.windows(2).all(|w| w[0] < w[1]) {
            report.pass(format!("distinct [level {k}]"));
        } else {
            report.fail(format!("distinct [level {k}]"), "repeated element");
        }
        if k > 0 {
            let prev = &c.levels[k - 1].elements;
            match prev.iter().find(|x| els.binary_search(x).is_err()) {
                None => report.pass(format!("nested [level {k}]")),
                Some(x) => report.fail(format!("nested [level {k}]"), format!("{x} dropped")),
            }
        }
        let name = format!("residues [level {k}]");
        match (n.checked_pow(level.q), prep.gamma(level.q)) {
            (Some(m), Ok(gamma)) => {
                let mut res: Vec<i128> = els.iter().map(|x| x.rem_euclid(m)).collect();
                res.sort_unstable();
                if res == gamma {
                    report.pass(name);
                } else {
                    report.fail(name, format!("residues modulo {m} differ from Γ_{}", level.q));
                }
            }
            _ => report.fail(name, format!("{n}^{} overflows", level.q)),
        }
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn s(xs: &[i64]) -> IntSet {
        IntSet::from_i64s(xs)
    }

    fn plain() -> OneStageForm {
        OneStageForm::constant(4, 1, s(&[0, 2]), s(&[0]), s(&[0, 1]), s(&[0]))
    }

    #[test]
    fn classical_pattern() {
        let c = build_spectrum(&plain(), &SpectrumOptions::with_levels(3)).unwrap();
        assert_eq!(c.scale, Rational::new(1, 2));
        assert_eq!(c.fractional, vec![Rational::from_integer(0)]);
        assert!(c.levels.iter().flat_map(|l| &l.shifts).all(|s| s.k == 0));
        let els: Vec<Rational> = c.elements();
        let expect: Vec<Rational> = [0, 1, 4, 5, 16, 17, 20, 21]
            .iter()
            .map(|&x| Rational::from_integer(x))
            .collect();
        assert_eq!(els, expect);
        assert!(verify_levels(&c).unwrap().valid);
    }

    #[test]
    fn level_zero_and_mixed_form() {
        let c = build_spectrum(&plain(), &SpectrumOptions::with_levels(0)).unwrap();
        assert_eq!(c.levels.len(), 1);
        assert_eq!(c.elements(), vec![Rational::from_integer(0)]);
        let mixed = OneStageForm::new(4, 1, s(&[0, 1]), vec![s(&[0, 2]), s(&[0, 6])], s(&[0, 2]), s(&[0, 1])).unwrap();
        let c = build_spectrum(&mixed, &SpectrumOptions::with_levels(3)).unwrap();
        assert_eq!(c.levels[3].elements.len(), 64);
        assert_eq!(c.fractional, vec![Rational::from_integer(0), Rational::new(1, 4)]);
        let r = verify_levels(&c).unwrap();
        assert!(r.valid, "{r:?}");
    }

    #[test]
    fn adversarial_shifts() {
        let opts = SpectrumOptions {
            levels: 2,
            window: 4,
            policy: ShiftPolicy::ArgMin,
            ..SpectrumOptions::default()
        };
        let mixed = OneStageForm::new(4, 1, s(&[0, 1]), vec![s(&[0, 2]), s(&[0, 6])], s(&[0, 2]), s(&[0, 1])).unwrap();
        let c = build_spectrum(&mixed, &opts).unwrap();
        assert!(c.levels[1]
            .shifts
            .iter()
            .any(|s| s.ratio < opts.threshold && s.target > POSITIVITY_FLOOR));
        assert!(verify_levels(&c).unwrap().valid);
    }

    #[test]
    fn tiny_window_can_fail() {
        let opts = SpectrumOptions {
            levels: 1,
            window: 0,
            threshold: 2.0,
            ..SpectrumOptions::default()
        };
        assert!(matches!(
            build_spectrum(&plain(), &opts),
            Err(Error::ShiftSearchFailure { window: 0, .. })
        ));
    }
}
