use std::collections::BTreeSet;

use num_bigint::BigInt;
use num_integer::Integer;
use serde::{Deserialize, Serialize};

use super::modulo::{generate_modulo_product_form, ModuloGeneration, ModuloProductFormSpec, ZShift};
use crate::digitsets::{covers_residues_once, IntSet, LayerMap};
use crate::error::{Error, Result};
use crate::numtheory::{big_pow, checked_pow, divisors, is_prime};
use crate::productform::{validate_k_stage, KStageForm};
use crate::report::ValidationReport;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PaqVariant {
    I,
    Ii,
    Iii,
}

impl std::str::FromStr for PaqVariant {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "i" => Ok(PaqVariant::I),
            "ii" => Ok(PaqVariant::Ii),
            "iii" => Ok(PaqVariant::Iii),
            other => Err(Error::InvalidVariantParams(format!("unknown variant {other:?}"))),
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct PaqParams {
    /// `M_1 … M_{α-1}` for the second family, all zero when empty.
    #[serde(default)]
    pub m: Vec<u64>,
    /// Gaps of the generating process, all 1 when absent.
    #[serde(default)]
    pub ells: Option<Vec<u64>>,
    /// Multiply by `q^{M+1}` instead of `q^M`.
    #[serde(default)]
    pub extra_q: bool,
    #[serde(default)]
    pub zshifts: Vec<ZShift>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct PaqResult {
    pub p: u64,
    pub q: u64,
    pub alpha: u32,
    pub variant: PaqVariant,
    pub base: u64,
    pub spec: ModuloProductFormSpec,
    pub generation: ModuloGeneration,
    #[serde(serialize_with = "crate::digitsets::serialize_bigint")]
    pub multiplier: BigInt,
    /// `multiplier · D`, the expansion of `form`.
    pub scaled_digits: IntSet,
    /// The factor sets of `form` reduced mod `N` cover `Z_N` once.
    pub complete_mod_n: bool,
    /// Congruences between the original and multiplied factor sets (second family only).
    pub congruences: ValidationReport,
    pub form: KStageForm,
    pub report: ValidationReport,
}

fn progression(count: u64, step: BigInt) -> IntSet {
    IntSet::progression(count, &step)
}

/// Indices `d > 1` with `Φ_d | P_{c E_r}`, i.e. `d | c r` and `d ∤ c`.
fn scaled_block_indices(c: u64, r: u64) -> Result<Vec<u64>> {
    let cr = c
        .checked_mul(r)
        .ok_or_else(|| Error::ModulusOverflow(format!("{c} * {r}")))?;
    Ok(divisors(cr).into_iter().filter(|d| !c.is_multiple_of(*d)).collect())
}

fn pow(b: u64, e: u64) -> Result<u64> {
    checked_pow(b, e).ok_or_else(|| Error::ModulusOverflow(format!("{b}^{e}")))
}

fn residues_equal(a: &IntSet, b: &IntSet, m: u64) -> bool {
    let ra: BTreeSet<u64> = a.residues(m).into_iter().collect();
    let rb: BTreeSet<u64> = b.residues(m).into_iter().collect();
    ra == rb
}

/// Builds a tile digit set of `N = p^α q` from one of the three factor-set families,
/// its generating data, and the k-stage form of a multiple of it with spectra.
pub fn paq_type_generator(p: u64, q: u64, alpha: u32, variant: PaqVariant, params: &PaqParams) -> Result<PaqResult> {
    if !is_prime(p) || !is_prime(q) || p == q {
        return Err(Error::InvalidVariantParams(format!(
            "p = {p} and q = {q} must be distinct primes"
        )));
    }
    if alpha == 0 {
        return Err(Error::InvalidVariantParams("alpha must be positive".into()));
    }
    let a = alpha as u64;
    let n = pow(p, a)?
        .checked_mul(q)
        .ok_or_else(|| Error::ModulusOverflow(format!("{p}^{alpha} * {q}")))?;
    let big = |x: u64| BigInt::from(x);

    // (scale c, prime r) for each factor set c E_r, the multiplied scales,
    // offsets M'_j and spectra.
    let mut blocks: Vec<(u64, u64)> = Vec::new();
    let mut offsets = vec![0u64; a as usize + 1];
    let mut multiplier_exp = 0u64;
    let mut reduced_scales: Vec<u64> = Vec::new();
    let ls: Vec<IntSet>;
    match variant {
        PaqVariant::I => {
            if !params.m.is_empty() {
                return Err(Error::InvalidVariantParams("M_j only apply to variant ii".into()));
            }
            blocks.push((1, p));
            blocks.push((p, q));
            for j in 1..a {
                blocks.push((pow(p, j)? * q, p));
            }
            let mut l = vec![
                progression(p, big(pow(p, a - 1)? * q)),
                progression(q, big(pow(p, a - 1)?)),
            ];
            for j in 2..=a {
                l.push(progression(p, big(pow(p, a - j)?)));
            }
            ls = l;
        }
        PaqVariant::Iii => {
            if !params.m.is_empty() {
                return Err(Error::InvalidVariantParams("M_j only apply to variant ii".into()));
            }
            blocks.push((1, q));
            for j in 0..a {
                blocks.push((pow(p, j)? * q, p));
            }
            let mut l = vec![progression(q, big(pow(p, a)?))];
            for j in 0..a {
                l.push(progression(p, big(pow(p, a - 1 - j)?)));
            }
            ls = l;
        }
        PaqVariant::Ii => {
            if alpha < 2 {
                return Err(Error::InvalidVariantParams("variant ii needs alpha >= 2".into()));
            }
            let ms: Vec<u64> = if params.m.is_empty() {
                vec![0; a as usize - 1]
            } else if params.m.len() == a as usize - 1 {
                params.m.clone()
            } else {
                return Err(Error::InvalidVariantParams(format!(
                    "{} values of M_j for alpha = {alpha}",
                    params.m.len()
                )));
            };
            let big_m = *ms.iter().max().expect("alpha >= 2");
            let k = ms
                .iter()
                .enumerate()
                .filter(|(_, &v)| v == big_m)
                .map(|(j, _)| j as u64 + 1)
                .max()
                .expect("the maximum is attained");
            blocks.push((1, p));
            blocks.push((pow(p, a * (big_m + 1) + k)?, q));
            for (j, &mj) in ms.iter().enumerate() {
                blocks.push((pow(p, a * mj + j as u64 + 1)?, p));
            }
            offsets[1] = big_m;
            for (j, &mj) in ms.iter().enumerate() {
                offsets[j + 2] = mj;
            }
            multiplier_exp = big_m + u64::from(params.extra_q);
            reduced_scales.push(pow(q, multiplier_exp)?);
            reduced_scales.push(pow(p, a + k)? * pow(q, multiplier_exp - big_m)?);
            for (j, &mj) in ms.iter().enumerate() {
                reduced_scales.push(pow(q, multiplier_exp - mj)? * pow(p, j as u64 + 1)?);
            }
            let mut l = vec![progression(p, big(pow(p, a - 1)? * q)), progression(q, big(1))];
            for j in 2..=a {
                l.push(progression(p, big(pow(p, a - j)? * q)));
            }
            ls = l;
        }
    }
    if variant != PaqVariant::Ii && params.extra_q {
        return Err(Error::InvalidVariantParams("extra_q only applies to variant ii".into()));
    }
    if reduced_scales.is_empty() {
        reduced_scales = blocks.iter().map(|&(c, _)| c).collect();
    }

    let stages = blocks.len() - 1;
    let ells = match &params.ells {
        Some(e) if e.len() == stages => e.clone(),
        Some(e) => {
            return Err(Error::InvalidVariantParams(format!(
                "{} gaps for {stages} stages",
                e.len()
            )))
        }
        None => vec![1; stages],
    };
    let mut t = BTreeSet::new();
    for &(c, r) in &blocks {
        t.extend(scaled_block_indices(c, r)?);
    }
    let spec = ModuloProductFormSpec {
        base: n,
        e: blocks.iter().map(|&(c, r)| progression(r, big(c))).collect(),
        t: t.into_iter().collect(),
        ells: ells.clone(),
        zshifts: params.zshifts.clone(),
    };
    let generation = generate_modulo_product_form(&spec)?;

    let multiplier = big_pow(q, multiplier_exp);
    let reduced: Vec<IntSet> = blocks
        .iter()
        .zip(&reduced_scales)
        .map(|(&(_, r), &c)| progression(r, big(c)))
        .collect();
    let complete_mod_n = {
        let total = reduced.iter().try_fold(IntSet::zero(), |acc, s| acc.direct_sum(s));
        matches!(total, Ok(t) if t.len() as u64 == n && covers_residues_once(&t, n))
    };

    let mut congruences = ValidationReport::new();
    if variant == PaqVariant::Ii {
        let ep = progression(p, big(1));
        congruences.push(
            format!("q^{multiplier_exp} E_p = E_p mod p"),
            residues_equal(&reduced[0], &ep, p),
            None,
        );
        congruences.push(
            "p^(alpha+k) E_q = p^alpha E_q mod q",
            residues_equal(&reduced[1], &progression(q, big(pow(p, a)?)), q),
            None,
        );
        for j in 1..a {
            let target = progression(p, big(pow(p, j)?));
            congruences.push(
                format!("q^(M-M_{j}) p^{j} E_p = p^{j} E_p mod p^{}", j + 1),
                residues_equal(&reduced[j as usize + 1], &target, pow(p, j + 1)?),
                None,
            );
        }
    }

    // Stage exponents of the multiplied digit set.
    let mut exps = Vec::with_capacity(stages + 1);
    let mut acc = 0u64;
    for j in 0..=stages {
        if j > 0 {
            acc += ells[j - 1];
        }
        exps.push(acc + offsets[j]);
    }
    if exps.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::InvalidVariantParams(format!(
            "stage exponents {exps:?} are not increasing; choose larger gaps"
        )));
    }
    let new_ells: Vec<u64> = exps.windows(2).map(|w| w[1] - w[0]).collect();
    let mut layers = Vec::with_capacity(stages);
    for (j, layer) in generation.layers.iter().enumerate() {
        let div = big_pow(n, offsets[j + 1]);
        let mut map = LayerMap::constant(reduced[j + 1].clone());
        for (d, set) in layer {
            let mut out = Vec::with_capacity(set.len());
            for e in set {
                let (quot, rem) = (&multiplier * e).div_rem(&div);
                if rem != BigInt::from(0) {
                    return Err(Error::InvalidVariantParams(format!(
                        "shifted element {e} at stage {} is not divisible after multiplying",
                        j + 1
                    )));
                }
                out.push(quot);
            }
            let out = IntSet::new(out);
            if out != reduced[j + 1] {
                map.by_parent.insert(&multiplier * d, out);
            }
        }
        layers.push(map);
    }
    let form = KStageForm {
        base: n,
        ells: new_ells,
        e0: reduced[0].clone(),
        layers,
        ls,
    };
    form.check_shape()?;
    let scaled_digits = generation.digits.scale(&multiplier);
    let report = validate_k_stage(&form);
    Ok(PaqResult {
        p,
        q,
        alpha,
        variant,
        base: n,
        spec,
        generation,
        multiplier,
        scaled_digits,
        complete_mod_n,
        congruences,
        form,
        report,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::productform::expand_k_stage;

    #[test]
    fn first_family_over_12() {
        let r = paq_type_generator(2, 3, 2, PaqVariant::I, &PaqParams::default()).unwrap();
        assert_eq!(r.base, 12);
        assert!(r.complete_mod_n);
        assert_eq!(r.multiplier, BigInt::from(1));
        assert_eq!(r.spec.e[1], IntSet::from_i64s(&[0, 2, 4]));
        assert_eq!(r.spec.e[2], IntSet::from_i64s(&[0, 6]));
        assert!(r.report.valid, "{:?}", r.report);
        assert_eq!(expand_k_stage(&r.form).unwrap(), r.scaled_digits);
    }

    #[test]
    fn all_families() {
        for (p, q, alpha) in [(2, 3, 2), (2, 3, 3), (3, 2, 2)] {
            for v in [PaqVariant::I, PaqVariant::Ii, PaqVariant::Iii] {
                let r = paq_type_generator(p, q, alpha, v, &PaqParams::default()).unwrap();
                assert!(r.complete_mod_n, "{p} {q} {alpha} {v:?}");
                assert!(r.congruences.valid);
                assert!(r.report.valid, "{p} {q} {alpha} {v:?}: {}", r.report.summary());
                assert_eq!(expand_k_stage(&r.form).unwrap(), r.scaled_digits);
            }
        }
    }

    #[test]
    fn second_family_with_weights() {
        let params = PaqParams {
            m: vec![1],
            ..Default::default()
        };
        let r = paq_type_generator(2, 3, 2, PaqVariant::Ii, &params).unwrap();
        assert_eq!(r.multiplier, BigInt::from(3));
        assert!(r.complete_mod_n);
        assert!(r.congruences.valid);
        assert!(r.report.valid, "{}", r.report.summary());
        assert_eq!(expand_k_stage(&r.form).unwrap(), r.scaled_digits);
    }

    #[test]
    fn extra_factor_of_q() {
        let params = PaqParams {
            m: vec![1],
            extra_q: true,
            ..Default::default()
        };
        let r = paq_type_generator(2, 3, 2, PaqVariant::Ii, &params).unwrap();
        assert_eq!(r.multiplier, BigInt::from(9));
        assert!(!r.report.valid);
    }

    #[test]
    fn bad_parameters() {
        assert!(paq_type_generator(4, 3, 2, PaqVariant::I, &PaqParams::default()).is_err());
        assert!(paq_type_generator(2, 2, 2, PaqVariant::I, &PaqParams::default()).is_err());
        let params = PaqParams {
            m: vec![0, 0],
            ..Default::default()
        };
        assert!(matches!(
            paq_type_generator(2, 3, 2, PaqVariant::Ii, &params),
            Err(Error::InvalidVariantParams(_))
        ));
    }
}
