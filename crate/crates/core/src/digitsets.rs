//! Digit sets, residue class sets and the normalizations used on product forms.

use std::collections::{BTreeMap, HashMap, HashSet};
use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{Signed, ToPrimitive, Zero};
use serde::de::{self, Deserializer};
use serde::ser::{SerializeSeq, Serializer};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result, SumCollision};
use crate::numtheory::mod_u64;

/// A finite set of integers, stored sorted and without repeats.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct IntSet {
    elems: Vec<BigInt>,
}

impl IntSet {
    /// Sorts and drops repeats.
    pub fn new<I: IntoIterator<Item = BigInt>>(items: I) -> Self {
        let mut elems: Vec<BigInt> = items.into_iter().collect();
        elems.sort();
        elems.dedup();
        IntSet { elems }
    }

    /// Like [`IntSet::new`] but repeats are an error.
    pub fn try_distinct<I: IntoIterator<Item = BigInt>>(items: I) -> Result<Self> {
        let mut elems: Vec<BigInt> = items.into_iter().collect();
        elems.sort();
        for w in elems.windows(2) {
            if w[0] == w[1] {
                return Err(Error::DuplicateDigit(w[0].clone()));
            }
        }
        Ok(IntSet { elems })
    }

    pub fn from_i64s(xs: &[i64]) -> Self {
        IntSet::new(xs.iter().map(|&x| BigInt::from(x)))
    }

    pub fn zero() -> Self {
        IntSet {
            elems: vec![BigInt::zero()],
        }
    }

    /// `{0, step, 2 step, ..., (count-1) step}`.
    pub fn progression(count: u64, step: &BigInt) -> Self {
        IntSet::new((0..count).map(|i| step * BigInt::from(i)))
    }

    pub fn len(&self) -> usize {
        self.elems.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elems.is_empty()
    }

    pub fn iter(&self) -> std::slice::Iter<'_, BigInt> {
        self.elems.iter()
    }

    pub fn as_slice(&self) -> &[BigInt] {
        &self.elems
    }

    pub fn contains(&self, x: &BigInt) -> bool {
        self.elems.binary_search(x).is_ok()
    }

    pub fn least(&self) -> Option<&BigInt> {
        self.elems.first()
    }

    pub fn greatest(&self) -> Option<&BigInt> {
        self.elems.last()
    }

    pub fn translate(&self, c: &BigInt) -> Self {
        IntSet {
            elems: self.elems.iter().map(|x| x + c).collect(),
        }
    }

    pub fn scale(&self, c: &BigInt) -> Self {
        IntSet::new(self.elems.iter().map(|x| x * c))
    }

    /// Divides every element by `g`, or `None` if some element is not a multiple.
    pub fn div_exact(&self, g: &BigInt) -> Option<Self> {
        if g.is_zero() {
            return None;
        }
        let mut out = Vec::with_capacity(self.len());
        for x in &self.elems {
            let (q, r) = x.div_rem(g);
            if !r.is_zero() {
                return None;
            }
            out.push(q);
        }
        Some(IntSet::new(out))
    }

    /// gcd of all elements; 0 when every element is 0.
    pub fn gcd(&self) -> BigInt {
        self.elems.iter().fold(BigInt::zero(), |acc, x| acc.gcd(x))
    }

    /// The sum set `self + other`, required to have `|self| * |other|` distinct sums.
    pub fn direct_sum(&self, other: &IntSet) -> Result<IntSet> {
        let mut seen: HashMap<BigInt, (BigInt, BigInt)> = HashMap::with_capacity(self.len() * other.len());
        for a in &self.elems {
            for b in &other.elems {
                let s = a + b;
                if let Some((a1, b1)) = seen.get(&s) {
                    return Err(Error::DistinctnessFailure(Box::new(SumCollision {
                        modulus: 0,
                        a1: a1.clone(),
                        b1: b1.clone(),
                        a2: a.clone(),
                        b2: b.clone(),
                    })));
                }
                seen.insert(s, (a.clone(), b.clone()));
            }
        }
        Ok(IntSet::new(seen.into_keys()))
    }

    /// Plain sum set, repeats collapsed.
    pub fn sumset(&self, other: &IntSet) -> IntSet {
        IntSet::new(self.elems.iter().flat_map(|a| other.elems.iter().map(move |b| a + b)))
    }

    /// Residues modulo `m`, in element order.
    pub fn residues(&self, m: u64) -> Vec<u64> {
        self.elems.iter().map(|x| mod_u64(x, m)).collect()
    }

    /// The first pair of elements congruent modulo `m`, if any.
    pub fn residue_collision(&self, m: u64) -> Option<(BigInt, BigInt)> {
        let mut seen: HashMap<u64, &BigInt> = HashMap::with_capacity(self.len());
        for x in &self.elems {
            let r = mod_u64(x, m);
            if let Some(prev) = seen.insert(r, x) {
                return Some((prev.clone(), x.clone()));
            }
        }
        None
    }

    pub fn residue_class_set(&self, m: u64) -> Result<ResidueClassSet> {
        ResidueClassSet::new(m, self.elems.iter().cloned())
    }

    pub fn to_i64_vec(&self) -> Option<Vec<i64>> {
        self.elems.iter().map(|x| x.to_i64()).collect()
    }

    pub fn to_i128_vec(&self) -> Option<Vec<i128>> {
        self.elems.iter().map(|x| x.to_i128()).collect()
    }

    pub fn all_nonnegative(&self) -> bool {
        self.elems.iter().all(|x| !x.is_negative())
    }
}

impl fmt::Display for IntSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{")?;
        for (i, x) in self.elems.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{x}")?;
        }
        write!(f, "}}")
    }
}

impl<'a> IntoIterator for &'a IntSet {
    type Item = &'a BigInt;
    type IntoIter = std::slice::Iter<'a, BigInt>;
    fn into_iter(self) -> Self::IntoIter {
        self.elems.iter()
    }
}

/// Integers in JSON may be numbers or decimal strings.
#[derive(Deserialize)]
#[serde(untagged)]
enum IntRepr {
    Str(String),
    Signed(i64),
    Unsigned(u64),
}

impl IntRepr {
    fn into_bigint<E: de::Error>(self) -> std::result::Result<BigInt, E> {
        match self {
            IntRepr::Str(s) => s
                .trim()
                .parse::<BigInt>()
                .map_err(|_| E::custom(format!("not an integer: {s:?}"))),
            IntRepr::Signed(i) => Ok(BigInt::from(i)),
            IntRepr::Unsigned(u) => Ok(BigInt::from(u)),
        }
    }
}

pub fn serialize_bigint<S: Serializer>(x: &BigInt, s: S) -> std::result::Result<S::Ok, S::Error> {
    s.serialize_str(&x.to_string())
}

pub fn deserialize_bigint<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<BigInt, D::Error> {
    IntRepr::deserialize(d)?.into_bigint()
}

pub fn parse_bigint(s: &str) -> Result<BigInt> {
    s.trim()
        .parse::<BigInt>()
        .map_err(|_| Error::Json(format!("not an integer: {s:?}")))
}

impl Serialize for IntSet {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let mut seq = s.serialize_seq(Some(self.len()))?;
        for x in &self.elems {
            seq.serialize_element(&x.to_string())?;
        }
        seq.end()
    }
}

impl<'de> Deserialize<'de> for IntSet {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let raw = Vec::<IntRepr>::deserialize(d)?;
        let items = raw
            .into_iter()
            .map(IntRepr::into_bigint)
            .collect::<std::result::Result<Vec<_>, D::Error>>()?;
        IntSet::try_distinct(items).map_err(de::Error::custom)
    }
}

/// Digits paired with a base, translated so the least digit is 0.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct DigitSet {
    base: u64,
    digits: IntSet,
    offset: BigInt,
}

/// Sorts, drops repeats and translates so the least digit is 0.
pub fn canonicalize<I: IntoIterator<Item = BigInt>>(raw: I, base: u64) -> Result<DigitSet> {
    if base < 2 {
        return Err(Error::BaseTooSmall(base));
    }
    let set = IntSet::new(raw);
    let offset = set.least().cloned().ok_or(Error::EmptyInput)?;
    let digits = set.translate(&-offset.clone());
    Ok(DigitSet { base, digits, offset })
}

/// Divides a canonical digit set by the gcd of its digits.
///
/// The set `{0}` is returned unchanged with `g = 1`.
pub fn gcd_normalize(d: &DigitSet) -> (DigitSet, BigInt) {
    let g = d.digits.gcd();
    if g.is_zero() || g == BigInt::from(1) {
        return (d.clone(), BigInt::from(1));
    }
    let digits = d.digits.div_exact(&g).expect("gcd divides every digit");
    (
        DigitSet {
            base: d.base,
            digits,
            offset: d.offset.clone(),
        },
        g,
    )
}

impl DigitSet {
    pub fn base(&self) -> u64 {
        self.base
    }

    pub fn digits(&self) -> &IntSet {
        &self.digits
    }

    /// Translation that was removed on construction.
    pub fn offset(&self) -> &BigInt {
        &self.offset
    }

    /// The digits as originally given.
    pub fn original(&self) -> IntSet {
        self.digits.translate(&self.offset)
    }

    pub fn len(&self) -> usize {
        self.digits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.digits.is_empty()
    }
}

#[derive(Serialize, Deserialize)]
struct DigitSetJson {
    base: u64,
    digits: IntSet,
}

impl Serialize for DigitSet {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        DigitSetJson {
            base: self.base,
            digits: self.original(),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for DigitSet {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let raw = DigitSetJson::deserialize(d)?;
        canonicalize(raw.digits.elems, raw.base).map_err(de::Error::custom)
    }
}

/// Distinct residues modulo a fixed modulus.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize)]
pub struct ResidueClassSet {
    modulus: u64,
    residues: Vec<u64>,
}

impl ResidueClassSet {
    /// Reduces each integer; two integers landing on one residue is an error.
    pub fn new<I: IntoIterator<Item = BigInt>>(modulus: u64, items: I) -> Result<Self> {
        if modulus == 0 {
            return Err(Error::InvalidParams("modulus must be positive".into()));
        }
        let mut residues: Vec<u64> = items.into_iter().map(|x| mod_u64(&x, modulus)).collect();
        residues.sort_unstable();
        for w in residues.windows(2) {
            if w[0] == w[1] {
                return Err(Error::DuplicateResidue { modulus, residue: w[0] });
            }
        }
        Ok(ResidueClassSet { modulus, residues })
    }

    pub fn from_u64s(modulus: u64, xs: &[u64]) -> Result<Self> {
        Self::new(modulus, xs.iter().map(|&x| BigInt::from(x)))
    }

    pub fn modulus(&self) -> u64 {
        self.modulus
    }

    pub fn residues(&self) -> &[u64] {
        &self.residues
    }

    pub fn len(&self) -> usize {
        self.residues.len()
    }

    pub fn is_empty(&self) -> bool {
        self.residues.is_empty()
    }
}

/// `A ⊕ B` modulo the shared modulus; reports the first colliding pair.
pub fn direct_sum(a: &ResidueClassSet, b: &ResidueClassSet) -> Result<ResidueClassSet> {
    if a.modulus != b.modulus {
        return Err(Error::ModulusMismatch(a.modulus, b.modulus));
    }
    let m = a.modulus;
    let mut seen: HashMap<u64, (u64, u64)> = HashMap::with_capacity(a.len() * b.len());
    for &x in &a.residues {
        for &y in &b.residues {
            let s = ((x as u128 + y as u128) % m as u128) as u64;
            if let Some(&(x1, y1)) = seen.get(&s) {
                return Err(Error::DistinctnessFailure(Box::new(SumCollision {
                    modulus: m,
                    a1: x1.into(),
                    b1: y1.into(),
                    a2: x.into(),
                    b2: y.into(),
                })));
            }
            seen.insert(s, (x, y));
        }
    }
    let mut residues: Vec<u64> = seen.into_keys().collect();
    residues.sort_unstable();
    Ok(ResidueClassSet { modulus: m, residues })
}

pub fn is_complete_residue_system(s: &ResidueClassSet) -> bool {
    s.residues.len() as u64 == s.modulus && s.residues.iter().enumerate().all(|(i, &r)| r == i as u64)
}

/// Whether the integers of `set` hit every residue modulo `m` exactly once.
pub fn covers_residues_once(set: &IntSet, m: u64) -> bool {
    if set.len() as u64 != m {
        return false;
    }
    let seen: HashSet<u64> = set.residues(m).into_iter().collect();
    seen.len() as u64 == m
}

/// Per-parent sets for one layer of a layered digit set.
///
/// A parent missing from `by_parent` falls back to `default`.
#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub struct LayerMap {
    pub default: Option<IntSet>,
    pub by_parent: BTreeMap<BigInt, IntSet>,
}

impl LayerMap {
    pub fn constant(set: IntSet) -> Self {
        LayerMap {
            default: Some(set),
            by_parent: BTreeMap::new(),
        }
    }

    pub fn get(&self, parent: &BigInt) -> Option<&IntSet> {
        self.by_parent.get(parent).or(self.default.as_ref())
    }

    pub fn is_constant(&self) -> bool {
        self.by_parent.is_empty() && self.default.is_some()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rcs(m: u64, xs: &[u64]) -> ResidueClassSet {
        ResidueClassSet::from_u64s(m, xs).unwrap()
    }

    #[test]
    fn canonicalize_examples() {
        let d = canonicalize([2, 0].map(BigInt::from), 4).unwrap();
        assert_eq!(d.digits(), &IntSet::from_i64s(&[0, 2]));
        assert_eq!(d.offset(), &BigInt::from(0));
        let d = canonicalize([5, 3, 9].map(BigInt::from), 4).unwrap();
        assert_eq!(d.digits(), &IntSet::from_i64s(&[0, 2, 6]));
        assert_eq!(d.offset(), &BigInt::from(3));
        assert_eq!(d.original(), IntSet::from_i64s(&[3, 5, 9]));
        let d = canonicalize([0, 1, 8, 9].map(BigInt::from), 4).unwrap();
        assert_eq!(d.digits(), &IntSet::from_i64s(&[0, 1, 8, 9]));
        assert_eq!(canonicalize(Vec::<BigInt>::new(), 4), Err(Error::EmptyInput));
        assert_eq!(canonicalize([BigInt::from(0)], 1), Err(Error::BaseTooSmall(1)));
    }

    #[test]
    fn gcd_normalize_examples() {
        let d = canonicalize([0, 3, 24, 27].map(BigInt::from), 4).unwrap();
        let (n, g) = gcd_normalize(&d);
        assert_eq!(n.digits(), &IntSet::from_i64s(&[0, 1, 8, 9]));
        assert_eq!(g, BigInt::from(3));
        let d = canonicalize([0, 3, 72, 75].map(BigInt::from), 24).unwrap();
        let (n, g) = gcd_normalize(&d);
        assert_eq!(n.digits(), &IntSet::from_i64s(&[0, 1, 24, 25]));
        assert_eq!(g, BigInt::from(3));
        let z = canonicalize([BigInt::from(7)], 3).unwrap();
        assert_eq!(gcd_normalize(&z).1, BigInt::from(1));
    }

    #[test]
    fn direct_sum_examples() {
        let s = direct_sum(&rcs(4, &[0, 1]), &rcs(4, &[0, 2])).unwrap();
        assert_eq!(s.residues(), &[0, 1, 2, 3]);
        assert!(is_complete_residue_system(&s));
        let x = rcs(7, &[1, 5]);
        assert_eq!(direct_sum(&rcs(7, &[0]), &x).unwrap(), x);
        assert!(matches!(
            direct_sum(&rcs(4, &[0, 2]), &rcs(4, &[0, 2])),
            Err(Error::DistinctnessFailure(_))
        ));
        assert_eq!(
            direct_sum(&rcs(4, &[0]), &rcs(5, &[0])),
            Err(Error::ModulusMismatch(4, 5))
        );
    }

    #[test]
    fn completeness_examples() {
        assert!(is_complete_residue_system(&rcs(4, &[0, 1, 2, 3])));
        let reduced = IntSet::new([0, 1, 8, 9].map(BigInt::from)).residue_class_set(4);
        assert!(matches!(reduced, Err(Error::DuplicateResidue { .. })));
        let a = IntSet::from_i64s(&[0, 8, 16, 18, 26, 34]);
        let b = IntSet::from_i64s(&[0, 5, 6, 9, 12, 29, 33, 36, 42, 48, 53, 57]);
        let s = direct_sum(&a.residue_class_set(72).unwrap(), &b.residue_class_set(72).unwrap()).unwrap();
        assert!(is_complete_residue_system(&s));
        assert!(covers_residues_once(&a.direct_sum(&b).unwrap(), 72));
    }

    #[test]
    fn json_round_trip() {
        let d = canonicalize([3, 5].map(BigInt::from), 4).unwrap();
        let s = serde_json::to_string(&d).unwrap();
        assert_eq!(s, r#"{"base":4,"digits":["3","5"]}"#);
        let back: DigitSet = serde_json::from_str(r#"{"base":4,"digits":[3,"5"]}"#).unwrap();
        assert_eq!(back, d);
        assert!(serde_json::from_str::<IntSet>(r#"[1,1]"#).is_err());
        let big: IntSet = serde_json::from_str(r#"["123456789012345678901234567890"]"#).unwrap();
        assert_eq!(big.len(), 1);
    }

    #[test]
    fn sets_basic() {
        let a = IntSet::from_i64s(&[0, 2]);
        assert_eq!(
            a.direct_sum(&a.scale(&BigInt::from(4))).unwrap(),
            IntSet::from_i64s(&[0, 2, 8, 10])
        );
        assert!(a.direct_sum(&a).is_err());
        assert_eq!(a.gcd(), BigInt::from(2));
        assert_eq!(IntSet::progression(3, &BigInt::from(4)), IntSet::from_i64s(&[0, 4, 8]));
        assert_eq!(a.to_string(), "{0, 2}");
    }
}
