use std::collections::{BTreeMap, HashSet};

use num_bigint::BigInt;
use serde::{Deserialize, Serialize};

use crate::digitsets::{parse_bigint, IntSet};
use crate::error::{Error, Result};
use crate::hadamard::verify_triple;
use crate::numtheory::big_pow;
use crate::par;
use crate::report::ValidationReport;

/// `D = ∪_s (a_s + N^r B_s)` together with the spectra `L1` for `A` and `L2` for every `B_s`.
///
/// The sets `B_s` are keyed by the digit `a_s` they hang from.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "OneStageJson", into = "OneStageJson")]
pub struct OneStageForm {
    pub base: u64,
    pub r: u32,
    pub a: IntSet,
    pub bs: BTreeMap<BigInt, IntSet>,
    pub l1: IntSet,
    pub l2: IntSet,
}

#[derive(Serialize, Deserialize)]
struct OneStageJson {
    base: u64,
    r: u32,
    #[serde(rename = "A")]
    a: IntSet,
    #[serde(rename = "Bs")]
    bs: BTreeMap<String, IntSet>,
    #[serde(rename = "L1")]
    l1: IntSet,
    #[serde(rename = "L2")]
    l2: IntSet,
}

impl TryFrom<OneStageJson> for OneStageForm {
    type Error = Error;

    fn try_from(raw: OneStageJson) -> Result<Self> {
        if raw.base < 2 {
            return Err(Error::BaseTooSmall(raw.base));
        }
        let mut bs = BTreeMap::new();
        for (k, v) in raw.bs {
            let key = parse_bigint(&k)?;
            if bs.insert(key.clone(), v).is_some() {
                return Err(Error::InvalidForm(format!("key {key} given twice in Bs")));
            }
        }
        for a in &raw.a {
            if !bs.contains_key(a) {
                return Err(Error::InvalidForm(format!("no B set for a = {a}")));
            }
        }
        if bs.len() != raw.a.len() {
            return Err(Error::InvalidForm("Bs has keys outside A".into()));
        }
        Ok(OneStageForm {
            base: raw.base,
            r: raw.r,
            a: raw.a,
            bs,
            l1: raw.l1,
            l2: raw.l2,
        })
    }
}

impl From<OneStageForm> for OneStageJson {
    fn from(f: OneStageForm) -> Self {
        OneStageJson {
            base: f.base,
            r: f.r,
            a: f.a,
            bs: f.bs.into_iter().map(|(k, v)| (k.to_string(), v)).collect(),
            l1: f.l1,
            l2: f.l2,
        }
    }
}

impl OneStageForm {
    /// Pairs the `B` sets with the elements of `A` in increasing order.
    pub fn new(base: u64, r: u32, a: IntSet, bs: Vec<IntSet>, l1: IntSet, l2: IntSet) -> Result<Self> {
        if bs.len() != a.len() {
            return Err(Error::InvalidForm(format!(
                "{} B sets for {} elements of A",
                bs.len(),
                a.len()
            )));
        }
        let bs = a.iter().cloned().zip(bs).collect();
        Ok(OneStageForm { base, r, a, bs, l1, l2 })
    }

    /// Every `B_s` equal to `b`.
    pub fn constant(base: u64, r: u32, a: IntSet, b: IntSet, l1: IntSet, l2: IntSet) -> Self {
        let bs = a.iter().map(|x| (x.clone(), b.clone())).collect();
        OneStageForm { base, r, a, bs, l1, l2 }
    }

    pub fn n(&self) -> usize {
        self.a.len()
    }

    pub fn b_for(&self, a: &BigInt) -> Result<&IntSet> {
        self.bs.get(a).ok_or_else(|| Error::MissingLayer {
            stage: 1,
            parent: a.clone(),
        })
    }

    /// The `B_s` in the order of `A`.
    pub fn b_list(&self) -> Result<Vec<IntSet>> {
        self.a.iter().map(|a| self.b_for(a).cloned()).collect()
    }

    /// `∪_s (a_s + B_s)`, the digit set with `r = 0`.
    pub fn level_zero_digits(&self) -> Result<IntSet> {
        let mut out = Vec::new();
        for a in &self.a {
            out.extend(self.b_for(a)?.iter().map(|b| a + b));
        }
        Ok(IntSet::new(out))
    }
}

/// `∪_s (a_s + N^r B_s)`; repeated digits are an error.
pub fn expand_one_stage(f: &OneStageForm) -> Result<IntSet> {
    let scale = big_pow(f.base, f.r as u64);
    let mut seen = HashSet::new();
    let mut out = Vec::new();
    for a in &f.a {
        for b in f.b_for(a)? {
            let d = a + &scale * b;
            if !seen.insert(d.clone()) {
                return Err(Error::OverlapError { stage: 1, digit: d });
            }
            out.push(d);
        }
    }
    Ok(IntSet::new(out))
}

/// Checks every Hadamard condition of a one-stage form and reports each one.
///
/// Check names: `keys`, `A triple`, `B sizes`, `B triple [a=…]`,
/// `product triple [a=…]`, `expansion`.
pub fn validate_one_stage(f: &OneStageForm) -> ValidationReport {
    let mut report = ValidationReport::new();
    let n = f.base;
    let missing: Vec<String> =
        f.a.iter()
            .filter(|a| !f.bs.contains_key(*a))
            .map(|a| a.to_string())
            .collect();
    if missing.is_empty() && f.bs.len() == f.a.len() {
        report.pass("keys");
    } else {
        report.fail("keys", format!("A and the keys of Bs differ (missing {missing:?})"));
        return report;
    }
    report.record("A triple", &verify_triple(n, &f.a, &f.l1));

    let sizes: HashSet<usize> = f.bs.values().map(|b| b.len()).collect();
    if sizes.len() <= 1 {
        report.pass("B sizes");
    } else {
        report.fail("B sizes", format!("sizes {sizes:?}"));
    }

    let entries: Vec<(&BigInt, &IntSet)> = f.bs.iter().collect();
    let l_sum = f.l1.direct_sum(&f.l2);
    let per_s = par::map(&entries, |(_, b)| {
        let single = verify_triple(n, b, &f.l2).map(|_| ());
        let product = match (f.a.direct_sum(b), &l_sum) {
            (Ok(ab), Ok(l)) => verify_triple(n, &ab, l).map_err(|e| e.to_string()),
            (Err(e), _) => Err(format!("A + B is not direct: {e}")),
            (_, Err(e)) => Err(format!("L1 + L2 is not direct: {e}")),
        };
        (single, product)
    });
    for ((a, _), (single, _)) in entries.iter().zip(&per_s) {
        report.record(format!("B triple [a={a}]"), single);
    }
    for ((a, _), (_, product)) in entries.iter().zip(&per_s) {
        report.record(format!("product triple [a={a}]"), product);
    }
    report.record("expansion", &expand_one_stage(f));
    report
}

#[cfg(test)]
mod tests {
    use super::*;

    fn s(xs: &[i64]) -> IntSet {
        IntSet::from_i64s(xs)
    }

    fn mixed_form(l2: IntSet) -> OneStageForm {
        OneStageForm::new(4, 1, s(&[0, 1]), vec![s(&[0, 2]), s(&[0, 6])], s(&[0, 2]), l2).unwrap()
    }

    #[test]
    fn expansions() {
        assert_eq!(expand_one_stage(&mixed_form(s(&[0, 1]))).unwrap(), s(&[0, 1, 8, 25]));
        let same = OneStageForm::constant(4, 1, s(&[0, 1]), s(&[0, 2]), s(&[0, 2]), s(&[0, 1]));
        assert_eq!(expand_one_stage(&same).unwrap(), s(&[0, 1, 8, 9]));
        let flat = OneStageForm::constant(4, 0, s(&[0, 1]), s(&[0, 2]), s(&[0, 2]), s(&[0, 1]));
        assert_eq!(expand_one_stage(&flat).unwrap(), s(&[0, 1, 2, 3]));
        let clash = OneStageForm::new(4, 0, s(&[0, 1]), vec![s(&[0, 1]), s(&[0, 2])], s(&[0]), s(&[0])).unwrap();
        assert!(matches!(expand_one_stage(&clash), Err(Error::OverlapError { .. })));
    }

    #[test]
    fn validation() {
        let good = validate_one_stage(&mixed_form(s(&[0, 1])));
        assert!(good.valid, "{good:?}");
        let bad = validate_one_stage(&mixed_form(s(&[0, 2])));
        assert!(!bad.valid);
        assert!(!bad.check("product triple [a=0]").unwrap().passed);
        let trivial = OneStageForm::constant(3, 1, s(&[0]), s(&[0]), s(&[0]), s(&[0]));
        assert!(validate_one_stage(&trivial).valid);
    }

    #[test]
    fn json_round_trip() {
        let f = mixed_form(s(&[0, 1]));
        let text = serde_json::to_string(&f).unwrap();
        assert!(
            text.contains("\"Bs\":{\"0\":[\"0\",\"2\"],\"1\":[\"0\",\"6\"]}"),
            "{text}"
        );
        let back: OneStageForm = serde_json::from_str(&text).unwrap();
        assert_eq!(back, f);
        let missing = r#"{"base":4,"r":1,"A":[0,1],"Bs":{"0":[0,2]},"L1":[0,2],"L2":[0,1]}"#;
        assert!(serde_json::from_str::<OneStageForm>(missing).is_err());
    }
}
