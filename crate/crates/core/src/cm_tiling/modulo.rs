use std::collections::{BTreeMap, HashSet};

use num_bigint::BigInt;
use num_integer::Integer;
use serde::{Deserialize, Serialize};

use super::profile::cm_profile;
use crate::cyclotomic::{kernel_polynomial, KernelPolynomial};
use crate::digitsets::{deserialize_bigint, serialize_bigint, IntSet, LayerMap};
use crate::error::{Error, Result};
use crate::numtheory::{big_pow, lcm_u64, mod_u64};
use crate::productform::{validate_k_stage, KStageForm};
use crate::report::ValidationReport;

/// Representative shift `e ↦ e + m_j z` for element `e` of `E_j` under parent digit `d`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ZShift {
    pub stage: usize,
    #[serde(serialize_with = "serialize_bigint", deserialize_with = "deserialize_bigint")]
    pub parent: BigInt,
    #[serde(serialize_with = "serialize_bigint", deserialize_with = "deserialize_bigint")]
    pub element: BigInt,
    #[serde(serialize_with = "serialize_bigint", deserialize_with = "deserialize_bigint")]
    pub z: BigInt,
}

/// Factor sets `E_0 … E_k`, cyclotomic indices `T`, gaps `ℓ_1 … ℓ_k` and the
/// representative shifts.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ModuloProductFormSpec {
    pub base: u64,
    #[serde(rename = "E")]
    pub e: Vec<IntSet>,
    #[serde(rename = "T")]
    pub t: Vec<u64>,
    pub ells: Vec<u64>,
    #[serde(default)]
    pub zshifts: Vec<ZShift>,
}

/// Moduli at one stage: `n_j` from the kernel and `m_j N^{ℓ_1+…+ℓ_j}`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct StageModulus {
    pub stage: usize,
    pub exponent: u64,
    pub kernel_modulus: u64,
    pub m: u64,
    #[serde(serialize_with = "serialize_bigint")]
    pub m_times_scale: BigInt,
    /// `n_j = m_j N^{ℓ_1+…+ℓ_j}`.
    pub equal: bool,
    /// `n_j | m_j N^{ℓ_1+…+ℓ_j}`, which makes shifts by `m_j` legal mod `n_j`.
    pub divides: bool,
    /// `D^(j) ≡ D^(j-1) + N^{ℓ_1+…+ℓ_j} E_j (mod n_j)` as multisets of residues.
    pub congruent: bool,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ModuloGeneration {
    pub digits: IntSet,
    pub moduli: Vec<StageModulus>,
    pub kernel: KernelPolynomial,
    /// `layers[j-1][d] = E_j(d)`.
    #[serde(skip)]
    pub layers: Vec<BTreeMap<BigInt, IntSet>>,
}

impl ModuloProductFormSpec {
    pub fn k(&self) -> usize {
        self.e.len().saturating_sub(1)
    }

    fn check(&self) -> Result<()> {
        if self.base < 2 {
            return Err(Error::BaseTooSmall(self.base));
        }
        if self.e.is_empty() {
            return Err(Error::EmptyInput);
        }
        if self.e.iter().any(IntSet::is_empty) {
            return Err(Error::EmptyDigitSet);
        }
        if self.ells.len() + 1 != self.e.len() {
            return Err(Error::InvalidParams(format!(
                "{} gaps for {} factor sets",
                self.ells.len(),
                self.e.len()
            )));
        }
        if self.ells.contains(&0) {
            return Err(Error::InvalidParams("gaps must be positive".into()));
        }
        let mut acc = IntSet::zero();
        for set in &self.e {
            acc = acc
                .direct_sum(set)
                .map_err(|_| Error::InvalidParams("the factor sets do not form a direct sum".into()))?;
        }
        for z in &self.zshifts {
            if z.stage == 0 || z.stage > self.k() {
                return Err(Error::InvalidParams(format!("shift at stage {}", z.stage)));
            }
            if !self.e[z.stage].contains(&z.element) {
                return Err(Error::InvalidParams(format!("{} is not in E_{}", z.element, z.stage)));
            }
        }
        Ok(())
    }

    fn exponent(&self, j: usize) -> u64 {
        self.ells[..j].iter().sum()
    }
}

/// Runs `D^(j) = D^(j-1) + N^{ℓ_1+…+ℓ_j} E_j (mod n_j)` with the representatives
/// `e + m_j z(d, e)` and checks `K^(k) | P_D` exactly.
pub fn generate_modulo_product_form(spec: &ModuloProductFormSpec) -> Result<ModuloGeneration> {
    spec.check()?;
    let n = spec.base;
    let k = spec.k();
    let kernels = (0..=k)
        .map(|j| kernel_polynomial(&spec.e, &spec.t, &spec.ells, n, j))
        .collect::<Result<Vec<_>>>()?;
    let mut shifts: BTreeMap<(usize, BigInt, BigInt), BigInt> = BTreeMap::new();
    for z in &spec.zshifts {
        if shifts
            .insert((z.stage, z.parent.clone(), z.element.clone()), z.z.clone())
            .is_some()
        {
            return Err(Error::InvalidParams(format!(
                "shift for ({}, {}, {}) given twice",
                z.stage, z.parent, z.element
            )));
        }
    }

    let mut moduli = Vec::with_capacity(k + 1);
    let mut layers = Vec::with_capacity(k);
    let mut current = spec.e[0].clone();
    for (j, kernel) in kernels.iter().enumerate() {
        let mut m = 1u64;
        for &d in kernel.selected.iter().flatten() {
            m = lcm_u64(m, d).ok_or_else(|| Error::ModulusOverflow(format!("lcm with {d}")))?;
        }
        let exponent = spec.exponent(j);
        let scale = big_pow(n, exponent);
        let m_times_scale = &scale * m;
        let nj = BigInt::from(kernel.modulus);
        let mut congruent = true;
        if j > 0 {
            let unit = BigInt::from(m);
            let mut seen = HashSet::new();
            let mut next = Vec::new();
            let mut layer = BTreeMap::new();
            let mut plain = Vec::new();
            for d in &current {
                let mut ej = Vec::with_capacity(spec.e[j].len());
                for e in &spec.e[j] {
                    let z = shifts.get(&(j, d.clone(), e.clone()));
                    let x = match z {
                        Some(z) => e + &unit * z,
                        None => e.clone(),
                    };
                    let digit = d + &scale * &x;
                    if !seen.insert(digit.clone()) {
                        return Err(Error::OverlapError { stage: j, digit });
                    }
                    next.push(digit);
                    plain.push(d + &scale * e);
                    ej.push(x);
                }
                layer.insert(d.clone(), IntSet::try_distinct(ej)?);
            }
            let mut a: Vec<u64> = next.iter().map(|x| mod_u64(x, kernel.modulus)).collect();
            let mut b: Vec<u64> = plain.iter().map(|x| mod_u64(x, kernel.modulus)).collect();
            a.sort_unstable();
            b.sort_unstable();
            congruent = a == b;
            current = IntSet::new(next);
            layers.push(layer);
        }
        moduli.push(StageModulus {
            stage: j,
            exponent,
            kernel_modulus: kernel.modulus,
            m,
            equal: m_times_scale == nj,
            divides: m_times_scale.is_multiple_of(&nj),
            m_times_scale,
            congruent,
        });
    }

    let kernel = kernels.into_iter().last().expect("at least one stage");
    let low = current.least().cloned().unwrap_or_default();
    let shifted = current.translate(&-low);
    if !kernel.divides_mask(&shifted)? {
        return Err(Error::KernelDivisibilityFailure(format!(
            "K^({k}) does not divide the mask of {current}"
        )));
    }
    if let Some(bad) = moduli.iter().find(|s| !s.divides || !s.congruent) {
        return Err(Error::KernelDivisibilityFailure(format!(
            "stage {}: n_j = {}, m_j N^L = {}",
            bad.stage, bad.kernel_modulus, bad.m_times_scale
        )));
    }
    Ok(ModuloGeneration {
        digits: current,
        moduli,
        kernel,
        layers,
    })
}

/// The parent-keyed layer tree `E_j(d)` as a k-stage form, with `L_j` supplied or
/// taken from the (T1)/(T2) spectrum of `E_j` mod `N`.
pub fn modulo_to_k_stage(
    spec: &ModuloProductFormSpec,
    ls: Option<Vec<IntSet>>,
) -> Result<(ModuloGeneration, KStageForm, ValidationReport)> {
    let generation = generate_modulo_product_form(spec)?;
    let ls = match ls {
        Some(ls) => ls,
        None => spec
            .e
            .iter()
            .enumerate()
            .map(|(j, e)| {
                cm_profile(e, spec.base)
                    .laba_spectrum
                    .ok_or(Error::SpectrumUnavailable(j))
            })
            .collect::<Result<Vec<_>>>()?,
    };
    let layers = generation
        .layers
        .iter()
        .zip(&spec.e[1..])
        .map(|(layer, plain)| {
            let mut map = LayerMap::constant(plain.clone());
            for (d, set) in layer {
                if set != plain {
                    map.by_parent.insert(d.clone(), set.clone());
                }
            }
            map
        })
        .collect();
    let form = KStageForm {
        base: spec.base,
        ells: spec.ells.clone(),
        e0: spec.e[0].clone(),
        layers,
        ls,
    };
    form.check_shape()?;
    let report = validate_k_stage(&form);
    Ok((generation, form, report))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::productform::expand_k_stage;

    fn s(xs: &[i64]) -> IntSet {
        IntSet::from_i64s(xs)
    }

    fn small_spec(zshifts: Vec<ZShift>) -> ModuloProductFormSpec {
        ModuloProductFormSpec {
            base: 4,
            e: vec![s(&[0, 1]), s(&[0, 2])],
            t: vec![2, 4],
            ells: vec![1],
            zshifts,
        }
    }

    #[test]
    fn without_shifts() {
        let g = generate_modulo_product_form(&small_spec(vec![])).unwrap();
        assert_eq!(g.digits, s(&[0, 1, 8, 9]));
        assert_eq!(g.moduli[1].kernel_modulus, 16);
        assert_eq!(g.moduli[1].m, 4);
        assert!(g.moduli[1].equal);
    }

    #[test]
    fn shifted_representative() {
        let z = ZShift {
            stage: 1,
            parent: BigInt::from(1),
            element: BigInt::from(2),
            z: BigInt::from(1),
        };
        let spec = small_spec(vec![z]);
        let g = generate_modulo_product_form(&spec).unwrap();
        assert_eq!(g.digits, s(&[0, 1, 8, 25]));
        let (_, form, report) = modulo_to_k_stage(&spec, None).unwrap();
        assert!(report.valid, "{report:?}");
        assert_eq!(form.ls, vec![s(&[0, 2]), s(&[0, 1])]);
        assert_eq!(expand_k_stage(&form).unwrap(), g.digits);
        assert_eq!(form.layers[0].by_parent.get(&BigInt::from(1)), Some(&s(&[0, 6])));
    }

    #[test]
    fn single_factor_set() {
        let spec = ModuloProductFormSpec {
            base: 3,
            e: vec![s(&[0, 1, 2])],
            t: vec![3],
            ells: vec![],
            zshifts: vec![],
        };
        assert_eq!(generate_modulo_product_form(&spec).unwrap().digits, s(&[0, 1, 2]));
    }

    #[test]
    fn kernel_modulus_can_be_smaller() {
        let spec = ModuloProductFormSpec {
            base: 6,
            e: vec![s(&[0, 2, 4]), s(&[0, 1])],
            t: vec![2, 3, 6],
            ells: vec![1],
            zshifts: vec![],
        };
        let g = generate_modulo_product_form(&spec).unwrap();
        let last = &g.moduli[1];
        assert_eq!(last.kernel_modulus, 12);
        assert_eq!(last.m, 6);
        assert!(!last.equal && last.divides);
    }

    #[test]
    fn bad_specs() {
        let mut spec = small_spec(vec![]);
        spec.t = vec![2, 3, 4];
        assert!(matches!(
            generate_modulo_product_form(&spec),
            Err(Error::CoverageFailure(_))
        ));
        let mut spec = small_spec(vec![]);
        spec.e[1] = s(&[0, 1]);
        assert!(generate_modulo_product_form(&spec).is_err());
    }
}
