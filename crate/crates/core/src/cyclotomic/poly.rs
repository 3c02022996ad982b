use std::collections::{BTreeMap, HashMap};
use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::ser::{SerializeSeq, Serializer};
use serde::Serialize;

use crate::digitsets::IntSet;
use crate::error::{Error, Result};

/// Sparse integer polynomial: exponent to nonzero coefficient.
#[derive(Clone, Debug, PartialEq, Eq, Default, Hash)]
pub struct MaskPolynomial {
    terms: BTreeMap<u64, BigInt>,
}

impl MaskPolynomial {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn one() -> Self {
        Self::monomial(0, BigInt::one())
    }

    pub fn monomial(exp: u64, coeff: BigInt) -> Self {
        let mut terms = BTreeMap::new();
        if !coeff.is_zero() {
            terms.insert(exp, coeff);
        }
        MaskPolynomial { terms }
    }

    /// Sums coefficients of repeated exponents and drops zeros.
    pub fn from_terms<I: IntoIterator<Item = (u64, BigInt)>>(items: I) -> Self {
        let mut terms: BTreeMap<u64, BigInt> = BTreeMap::new();
        for (e, c) in items {
            *terms.entry(e).or_default() += c;
        }
        terms.retain(|_, c| !c.is_zero());
        MaskPolynomial { terms }
    }

    /// Dense coefficients, constant term first.
    pub fn from_coeffs(coeffs: &[i64]) -> Self {
        Self::from_terms(coeffs.iter().enumerate().map(|(i, &c)| (i as u64, BigInt::from(c))))
    }

    /// `P_A(x) = Σ_{a ∈ A} x^a`.
    pub fn from_digits(set: &IntSet) -> Result<Self> {
        let mut terms = BTreeMap::new();
        for a in set {
            if a.is_negative() {
                return Err(Error::NegativeExponent(a.clone()));
            }
            let e = a.to_u64().ok_or_else(|| Error::ExponentOverflow(a.clone()))?;
            terms.insert(e, BigInt::one());
        }
        Ok(MaskPolynomial { terms })
    }

    pub fn terms(&self) -> impl Iterator<Item = (u64, &BigInt)> + '_ {
        self.terms.iter().map(|(&e, c)| (e, c))
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn degree(&self) -> Option<u64> {
        self.terms.keys().next_back().copied()
    }

    pub fn leading_coeff(&self) -> Option<&BigInt> {
        self.terms.values().next_back()
    }

    pub fn coeff(&self, e: u64) -> BigInt {
        self.terms.get(&e).cloned().unwrap_or_default()
    }

    /// Value at `x = 1`.
    pub fn coeff_sum(&self) -> BigInt {
        self.terms.values().sum()
    }

    pub fn add(&self, other: &Self) -> Self {
        Self::from_terms(self.terms().chain(other.terms()).map(|(e, c)| (e, c.clone())))
    }

    pub fn sub(&self, other: &Self) -> Self {
        Self::from_terms(
            self.terms()
                .map(|(e, c)| (e, c.clone()))
                .chain(other.terms().map(|(e, c)| (e, -c))),
        )
    }

    pub fn mul(&self, other: &Self) -> Self {
        let mut acc: HashMap<u64, BigInt> = HashMap::new();
        for (e1, c1) in self.terms() {
            for (e2, c2) in other.terms() {
                *acc.entry(e1 + e2).or_default() += c1 * c2;
            }
        }
        Self::from_terms(acc)
    }

    pub fn pow(&self, k: u32) -> Self {
        (0..k).fold(Self::one(), |acc, _| acc.mul(self))
    }

    /// `P(x^s)`.
    pub fn compose_power(&self, s: u64) -> Self {
        MaskPolynomial {
            terms: self.terms.iter().map(|(&e, c)| (e * s, c.clone())).collect(),
        }
    }

    /// Quotient and remainder, or `None` when some quotient coefficient is not an integer.
    pub fn div_rem(&self, f: &Self) -> Option<(Self, Self)> {
        let df = f.degree()?;
        let lf = f.leading_coeff()?.clone();
        let lower: Vec<(u64, BigInt)> = f
            .terms
            .iter()
            .filter(|(&e, _)| e < df)
            .map(|(&e, c)| (e, c.clone()))
            .collect();
        let mut r = self.terms.clone();
        let mut q: BTreeMap<u64, BigInt> = BTreeMap::new();
        while let Some((&e, _)) = r.last_key_value() {
            if e < df {
                break;
            }
            let c = r.remove(&e).unwrap();
            let (qc, rem) = c.div_rem(&lf);
            if !rem.is_zero() {
                return None;
            }
            let shift = e - df;
            for (fe, fc) in &lower {
                let slot = r.entry(shift + fe).or_default();
                *slot -= &qc * fc;
                if slot.is_zero() {
                    r.remove(&(shift + fe));
                }
            }
            q.insert(shift, qc);
        }
        Some((MaskPolynomial { terms: q }, MaskPolynomial { terms: r }))
    }

    /// Exact quotient `self / f` in ℤ[x], if it exists.
    pub fn div_exact(&self, f: &Self) -> Option<Self> {
        match self.div_rem(f) {
            Some((q, r)) if r.is_zero() => Some(q),
            _ => None,
        }
    }

    /// Dense coefficients, constant term first.
    pub fn to_dense(&self) -> Vec<BigInt> {
        let Some(d) = self.degree() else {
            return Vec::new();
        };
        let mut out = vec![BigInt::zero(); d as usize + 1];
        for (&e, c) in &self.terms {
            out[e as usize] = c.clone();
        }
        out
    }

    pub fn from_dense(coeffs: &[BigInt]) -> Self {
        Self::from_terms(coeffs.iter().enumerate().map(|(i, c)| (i as u64, c.clone())))
    }

    /// Terms with `i128` coefficients, or `None` if one does not fit.
    pub fn small_terms(&self) -> Option<Vec<(u64, i128)>> {
        self.terms.iter().map(|(&e, c)| Some((e, c.to_i128()?))).collect()
    }
}

/// `true` iff `f | g` in ℤ[x].
pub fn divides(f: &MaskPolynomial, g: &MaskPolynomial) -> bool {
    if g.is_zero() {
        return true;
    }
    g.div_exact(f).is_some()
}

impl fmt::Display for MaskPolynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        for (i, (&e, c)) in self.terms.iter().rev().enumerate() {
            let neg = c.is_negative();
            let mag = c.abs();
            if i == 0 {
                if neg {
                    write!(f, "-")?;
                }
            } else {
                write!(f, " {} ", if neg { "-" } else { "+" })?;
            }
            let unit = mag.is_one();
            match e {
                0 => write!(f, "{mag}")?,
                1 if unit => write!(f, "x")?,
                1 => write!(f, "{mag}*x")?,
                _ if unit => write!(f, "x^{e}")?,
                _ => write!(f, "{mag}*x^{e}")?,
            }
        }
        Ok(())
    }
}

/// Serialized as a list of `[exponent, "coefficient"]` pairs.
impl Serialize for MaskPolynomial {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let mut seq = s.serialize_seq(Some(self.terms.len()))?;
        for (&e, c) in &self.terms {
            seq.serialize_element(&(e, c.to_string()))?;
        }
        seq.end()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(c: &[i64]) -> MaskPolynomial {
        MaskPolynomial::from_coeffs(c)
    }

    #[test]
    fn long_division() {
        let g = MaskPolynomial::from_digits(&IntSet::from_i64s(&[0, 1, 8, 9])).unwrap();
        let q = g.div_exact(&p(&[1, 1])).unwrap();
        assert_eq!(q, MaskPolynomial::from_digits(&IntSet::from_i64s(&[0, 8])).unwrap());
        assert!(divides(&p(&[1, 1]), &MaskPolynomial::zero()));
        assert!(!divides(&p(&[1, 1, 1]), &p(&[1, 1])));
        assert!(!divides(&p(&[1, 2]), &p(&[1, 1])));
        assert!(divides(&p(&[2, 2]), &p(&[4, 4])));
    }

    #[test]
    fn arithmetic() {
        let a = p(&[1, 1]);
        let b = p(&[1, -1]);
        assert_eq!(a.mul(&b), p(&[1, 0, -1]));
        assert_eq!(a.add(&b), p(&[2]));
        assert_eq!(a.sub(&a), MaskPolynomial::zero());
        assert_eq!(a.compose_power(4), p(&[1, 0, 0, 0, 1]));
        assert_eq!(a.pow(2), p(&[1, 2, 1]));
        assert_eq!(p(&[1, 0, -1, 0, 1]).to_string(), "x^4 - x^2 + 1");
        assert_eq!(MaskPolynomial::from_dense(&a.to_dense()), a);
    }

    #[test]
    fn negative_digits_rejected() {
        assert!(matches!(
            MaskPolynomial::from_digits(&IntSet::from_i64s(&[-1, 0])),
            Err(Error::NegativeExponent(_))
        ));
    }
}
