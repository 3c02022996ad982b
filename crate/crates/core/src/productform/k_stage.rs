use std::collections::{HashMap, HashSet};

use num_bigint::BigInt;
use serde::{Deserialize, Serialize};

use crate::digitsets::{IntSet, LayerMap};
use crate::error::{Error, Result};
use crate::hadamard::verify_triple;
use crate::numtheory::big_pow;
use crate::par;
use crate::report::ValidationReport;

/// Layered digit set `D^(j) = ∪_{d ∈ D^(j-1)} (d + N^{ℓ_1+…+ℓ_j} E_j(d))`, `D^(0) = E_0`,
/// with the spectra `L_0 … L_k`.
///
/// `layers[j-1]` holds the sets `E_j(d)`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "KStageJson", into = "KStageJson")]
pub struct KStageForm {
    pub base: u64,
    pub ells: Vec<u64>,
    pub e0: IntSet,
    pub layers: Vec<LayerMap>,
    pub ls: Vec<IntSet>,
}

#[derive(Serialize, Deserialize)]
struct LayerEntry {
    #[serde(default = "first_stage")]
    stage: usize,
    #[serde(default, skip_serializing_if = "Option::is_none", with = "optional_bigint")]
    parent: Option<BigInt>,
    #[serde(rename = "E")]
    e: IntSet,
}

fn first_stage() -> usize {
    1
}

mod optional_bigint {
    use num_bigint::BigInt;
    use serde::{Deserializer, Serializer};

    pub fn serialize<S: Serializer>(x: &Option<BigInt>, s: S) -> Result<S::Ok, S::Error> {
        match x {
            Some(v) => crate::digitsets::serialize_bigint(v, s),
            None => s.serialize_none(),
        }
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Option<BigInt>, D::Error> {
        crate::digitsets::deserialize_bigint(d).map(Some)
    }
}

#[derive(Serialize, Deserialize)]
struct KStageJson {
    base: u64,
    ells: Vec<u64>,
    #[serde(rename = "E0")]
    e0: IntSet,
    layers: Vec<LayerEntry>,
    #[serde(rename = "Ls")]
    ls: Vec<IntSet>,
}

impl TryFrom<KStageJson> for KStageForm {
    type Error = Error;

    fn try_from(raw: KStageJson) -> Result<Self> {
        let k = raw.ells.len();
        let mut layers = vec![LayerMap::default(); k];
        for entry in raw.layers {
            if entry.stage == 0 || entry.stage > k {
                return Err(Error::InvalidForm(format!(
                    "layer stage {} outside 1..={k}",
                    entry.stage
                )));
            }
            let map = &mut layers[entry.stage - 1];
            match entry.parent {
                None => {
                    if map.default.replace(entry.e).is_some() {
                        return Err(Error::InvalidForm(format!(
                            "two default layers at stage {}",
                            entry.stage
                        )));
                    }
                }
                Some(p) => {
                    if map.by_parent.insert(p.clone(), entry.e).is_some() {
                        return Err(Error::InvalidForm(format!(
                            "parent {p} given twice at stage {}",
                            entry.stage
                        )));
                    }
                }
            }
        }
        let form = KStageForm {
            base: raw.base,
            ells: raw.ells,
            e0: raw.e0,
            layers,
            ls: raw.ls,
        };
        form.check_shape()?;
        Ok(form)
    }
}

impl From<KStageForm> for KStageJson {
    fn from(f: KStageForm) -> Self {
        let mut layers = Vec::new();
        for (j, map) in f.layers.into_iter().enumerate() {
            if let Some(e) = map.default {
                layers.push(LayerEntry {
                    stage: j + 1,
                    parent: None,
                    e,
                });
            }
            for (p, e) in map.by_parent {
                layers.push(LayerEntry {
                    stage: j + 1,
                    parent: Some(p),
                    e,
                });
            }
        }
        KStageJson {
            base: f.base,
            ells: f.ells,
            e0: f.e0,
            layers,
            ls: f.ls,
        }
    }
}

impl KStageForm {
    /// Constant layers `E_j(d) = parts[j]`.
    pub fn constant(base: u64, ells: Vec<u64>, parts: Vec<IntSet>, ls: Vec<IntSet>) -> Result<Self> {
        let mut it = parts.into_iter();
        let e0 = it.next().ok_or(Error::EmptyInput)?;
        let form = KStageForm {
            base,
            ells,
            e0,
            layers: it.map(LayerMap::constant).collect(),
            ls,
        };
        form.check_shape()?;
        Ok(form)
    }

    pub fn check_shape(&self) -> Result<()> {
        if self.base < 2 {
            return Err(Error::BaseTooSmall(self.base));
        }
        let k = self.ells.len();
        if self.layers.len() != k {
            return Err(Error::InvalidForm(format!("{} layers for {k} gaps", self.layers.len())));
        }
        if self.ls.len() != k + 1 {
            return Err(Error::InvalidForm(format!(
                "{} spectra for {} factor sets",
                self.ls.len(),
                k + 1
            )));
        }
        if self.ells.contains(&0) {
            return Err(Error::InvalidForm("gaps must be positive".into()));
        }
        Ok(())
    }

    /// Number of stages after `E_0`.
    pub fn k(&self) -> usize {
        self.ells.len()
    }

    /// `ℓ_1 + … + ℓ_j`.
    pub fn exponent(&self, j: usize) -> u64 {
        self.ells[..j].iter().sum()
    }

    /// `E_j(parent)` for `j >= 1`.
    pub fn layer(&self, j: usize, parent: &BigInt) -> Result<&IntSet> {
        self.layers[j - 1].get(parent).ok_or_else(|| Error::MissingLayer {
            stage: j,
            parent: parent.clone(),
        })
    }

    /// Whether every layer is a single set independent of the parent.
    pub fn is_constant(&self) -> bool {
        self.layers.iter().all(LayerMap::is_constant)
    }

    /// `D^(0), …, D^(k)`.
    pub fn levels(&self) -> Result<Vec<IntSet>> {
        let mut out = vec![self.e0.clone()];
        for j in 1..=self.k() {
            let scale = big_pow(self.base, self.exponent(j));
            let prev = &out[j - 1];
            let mut seen = HashSet::new();
            let mut next = Vec::new();
            for d in prev {
                for e in self.layer(j, d)? {
                    let x = d + &scale * e;
                    if !seen.insert(x.clone()) {
                        return Err(Error::OverlapError { stage: j, digit: x });
                    }
                    next.push(x);
                }
            }
            out.push(IntSet::new(next));
        }
        Ok(out)
    }

    /// The same digit set with every gap equal to 1, empty stages filled with `{0}`
    /// layers and `{0}` spectra.
    pub fn padded(&self) -> KStageForm {
        let total = self.exponent(self.k()) as usize;
        let mut layers = vec![LayerMap::constant(IntSet::zero()); total];
        let mut ls = vec![IntSet::zero(); total + 1];
        ls[0] = self.ls[0].clone();
        for j in 1..=self.k() {
            let pos = self.exponent(j) as usize;
            layers[pos - 1] = self.layers[j - 1].clone();
            ls[pos] = self.ls[j].clone();
        }
        KStageForm {
            base: self.base,
            ells: vec![1; total],
            e0: self.e0.clone(),
            layers,
            ls,
        }
    }
}

pub fn expand_k_stage(f: &KStageForm) -> Result<IntSet> {
    f.check_shape()?;
    Ok(f.levels()?.pop().expect("at least E0"))
}

/// The distinct chains of factor sets `E_0, E_1(d_0), …, E_k(d_{k-1})` met along
/// branches of the layer tree, each with the digit `d_{k-1}` of one branch realizing it.
fn branch_classes(f: &KStageForm) -> Result<Vec<(BigInt, Vec<IntSet>)>> {
    let k = f.k();
    if k == 0 {
        return Ok(vec![(BigInt::from(0), vec![f.e0.clone()])]);
    }
    let mut frontier: Vec<(BigInt, Vec<IntSet>)> = f.e0.iter().map(|d| (d.clone(), vec![f.e0.clone()])).collect();
    for j in 1..k {
        let scale = big_pow(f.base, f.exponent(j));
        let mut next = Vec::new();
        for (d, chain) in frontier {
            let e = f.layer(j, &d)?;
            let mut longer = chain;
            longer.push(e.clone());
            for x in e {
                next.push((&d + &scale * x, longer.clone()));
            }
        }
        frontier = next;
    }
    let mut seen = HashSet::new();
    let mut out = Vec::new();
    for (d, mut chain) in frontier {
        chain.push(f.layer(k, &d)?.clone());
        if seen.insert(chain.clone()) {
            out.push((d, chain));
        }
    }
    Ok(out)
}

/// Checks the stage triples and, along every branch of the layer tree, the prefix and
/// suffix products.
///
/// Check names: `shape`, `expansion`, `stage 0 triple`, `stage j triple`,
/// `prefix m`, `suffix m`.
pub fn validate_k_stage(f: &KStageForm) -> ValidationReport {
    let mut report = ValidationReport::new();
    if let Err(e) = f.check_shape() {
        report.fail("shape", e.to_string());
        return report;
    }
    report.pass("shape");
    let levels = match f.levels() {
        Ok(l) => {
            report.pass("expansion");
            l
        }
        Err(e) => {
            report.fail("expansion", e.to_string());
            return report;
        }
    };
    let n = f.base;
    report.record("stage 0 triple", &verify_triple(n, &f.e0, &f.ls[0]));
    for j in 1..=f.k() {
        let mut distinct: Vec<(BigInt, IntSet)> = Vec::new();
        let mut seen = HashSet::new();
        for d in &levels[j - 1] {
            match f.layer(j, d) {
                Ok(e) => {
                    if seen.insert(e.clone()) {
                        distinct.push((d.clone(), e.clone()));
                    }
                }
                Err(e) => {
                    report.fail(format!("stage {j} triple"), e.to_string());
                    return report;
                }
            }
        }
        let outcomes = par::map(&distinct, |(_, e)| verify_triple(n, e, &f.ls[j]));
        match distinct.iter().zip(&outcomes).find(|(_, o)| o.is_err()) {
            Some(((d, _), Err(e))) => report.fail(format!("stage {j} triple"), format!("parent {d}: {e}")),
            _ => report.pass(format!("stage {j} triple")),
        }
    }

    let branches = match branch_classes(f) {
        Ok(b) => b,
        Err(e) => {
            report.fail("branches", e.to_string());
            return report;
        }
    };
    let k = f.k();
    type RangeKey = (Vec<IntSet>, usize, usize);
    let cache: std::sync::Mutex<HashMap<RangeKey, std::result::Result<(), String>>> = Default::default();
    let check_range = |sets: &[IntSet], lo: usize, hi: usize| -> std::result::Result<(), String> {
        let key = (sets[lo..=hi].to_vec(), lo, hi);
        if let Some(r) = cache.lock().unwrap().get(&key) {
            return r.clone();
        }
        let r = sum_range(sets, lo, hi)
            .and_then(|d| sum_range(&f.ls, lo, hi).map(|l| (d, l)))
            .map_err(|e| e.to_string())
            .and_then(|(d, l)| verify_triple(n, &d, &l).map(|_| ()).map_err(|e| e.to_string()));
        cache.lock().unwrap().insert(key, r.clone());
        r
    };
    for m in 1..=k {
        for (lo, hi, label) in [(0, m, "prefix"), (m, k, "suffix")] {
            let outcomes = par::map(&branches, |(_, sets)| check_range(sets, lo, hi));
            match branches.iter().zip(&outcomes).find(|(_, o)| o.is_err()) {
                Some(((d, _), Err(e))) => report.fail(format!("{label} {m}"), format!("branch ending at {d}: {e}")),
                _ => report.pass(format!("{label} {m}")),
            }
        }
    }
    report
}

/// `sets[lo] ⊕ … ⊕ sets[hi]` as a direct sum of integers.
fn sum_range(sets: &[IntSet], lo: usize, hi: usize) -> Result<IntSet> {
    let mut acc = IntSet::zero();
    for s in &sets[lo..=hi] {
        acc = acc.direct_sum(s)?;
    }
    Ok(acc)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn s(xs: &[i64]) -> IntSet {
        IntSet::from_i64s(xs)
    }

    #[test]
    fn constant_two_layer_form() {
        let f = KStageForm::constant(4, vec![1], vec![s(&[0, 1]), s(&[0, 2])], vec![s(&[0, 2]), s(&[0, 1])]).unwrap();
        assert_eq!(expand_k_stage(&f).unwrap(), s(&[0, 1, 8, 9]));
        let report = validate_k_stage(&f);
        assert!(report.valid, "{report:?}");
    }

    #[test]
    fn parent_dependent_layer() {
        let mut f =
            KStageForm::constant(4, vec![1], vec![s(&[0, 1]), s(&[0, 2])], vec![s(&[0, 2]), s(&[0, 1])]).unwrap();
        f.layers[0].by_parent.insert(BigInt::from(1), s(&[0, 6]));
        assert_eq!(expand_k_stage(&f).unwrap(), s(&[0, 1, 8, 25]));
        assert!(validate_k_stage(&f).valid);
        f.layers[0].by_parent.insert(BigInt::from(1), s(&[0, 1]));
        let report = validate_k_stage(&f);
        assert!(!report.valid);
        assert!(!report.check("stage 1 triple").unwrap().passed);
    }

    #[test]
    fn three_factor_sets() {
        // {0,1} + 2·{0,1}·... over base 8: E0 = {0,4}, E1 = {0,2}, E2 = {0,1}
        let f = KStageForm::constant(
            8,
            vec![1, 1],
            vec![s(&[0, 4]), s(&[0, 2]), s(&[0, 1])],
            vec![s(&[0, 1]), s(&[0, 2]), s(&[0, 4])],
        )
        .unwrap();
        assert_eq!(expand_k_stage(&f).unwrap(), s(&[0, 4, 16, 20, 64, 68, 80, 84]));
        let report = validate_k_stage(&f);
        assert!(report.valid, "{report:?}");
    }

    #[test]
    fn padding_keeps_the_digits() {
        let f = KStageForm::constant(3, vec![2], vec![s(&[0, 1]), s(&[0, 2])], vec![s(&[0, 1]), s(&[0, 1])]).unwrap();
        let p = f.padded();
        assert_eq!(p.ells, vec![1, 1]);
        assert_eq!(p.ls[1], s(&[0]));
        assert_eq!(expand_k_stage(&p).unwrap(), expand_k_stage(&f).unwrap());
        assert_eq!(expand_k_stage(&f).unwrap(), s(&[0, 1, 18, 19]));
    }

    #[test]
    fn json_layers() {
        let text = r#"{"base":4,"ells":[1],"E0":[0,1],
            "layers":[{"E":[0,2]},{"stage":1,"parent":1,"E":[0,6]}],"Ls":[[0,2],[0,1]]}"#;
        let f: KStageForm = serde_json::from_str(text).unwrap();
        assert_eq!(expand_k_stage(&f).unwrap(), s(&[0, 1, 8, 25]));
        let again: KStageForm = serde_json::from_str(&serde_json::to_string(&f).unwrap()).unwrap();
        assert_eq!(again, f);
        let bad = r#"{"base":4,"ells":[1],"E0":[0,1],"layers":[{"stage":2,"E":[0,2]}],"Ls":[[0,2],[0,1]]}"#;
        assert!(serde_json::from_str::<KStageForm>(bad).is_err());
    }
}
