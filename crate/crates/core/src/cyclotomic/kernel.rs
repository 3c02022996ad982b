//! Kernel polynomials `K^(j)(x) = Π_{i<=j} Π_{d ∈ S_i} Φ_d(x^{N^{ℓ_1+…+ℓ_i}})`,
//! kept in factored form.

use std::collections::{BTreeMap, BTreeSet};

use serde::Serialize;

use super::{cyclotomic_arc, cyclotomic_divides, cyclotomic_power_divides_mask, MaskPolynomial};
use crate::digitsets::IntSet;
use crate::error::{Error, Result};
use crate::numtheory::{checked_pow, divisors, gcd_u64, lcm_u64};

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct KernelFactor {
    /// Cyclotomic index `d`.
    pub index: u64,
    /// Factor set it came from.
    pub stage: usize,
    /// `N^{ℓ_1+…+ℓ_stage}`.
    pub scale: u64,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct KernelPolynomial {
    pub stage: usize,
    /// For each factor set `i <= stage`, the indices `d ∈ T` with `Φ_d | P_{E_i}`.
    pub selected: Vec<Vec<u64>>,
    pub factors: Vec<KernelFactor>,
    /// Cyclotomic factorization of the product: index to multiplicity.
    pub orders: BTreeMap<u64, u32>,
    /// lcm of the indices in `orders`.
    pub modulus: u64,
}

/// Indices `o` with `Φ_o | Φ_d(x^m)`: exactly those with `o / gcd(o, m) = d`.
pub fn compose_factor_orders(d: u64, m: u64) -> Result<Vec<u64>> {
    let dm = d
        .checked_mul(m)
        .ok_or_else(|| Error::ModulusOverflow(format!("{d} * {m}")))?;
    Ok(divisors(dm).into_iter().filter(|&o| o / gcd_u64(o, m) == d).collect())
}

impl KernelPolynomial {
    /// Expanded product. Degree is `Σ φ(d) · scale`, so only for small kernels.
    pub fn to_polynomial(&self) -> MaskPolynomial {
        self.factors.iter().fold(MaskPolynomial::one(), |acc, f| {
            acc.mul(&cyclotomic_arc(f.index).compose_power(f.scale))
        })
    }

    /// The same product as `Π Φ_o^{mult}` over `orders`.
    pub fn to_polynomial_from_orders(&self) -> MaskPolynomial {
        self.orders.iter().fold(MaskPolynomial::one(), |acc, (&o, &m)| {
            acc.mul(&cyclotomic_arc(o).pow(m))
        })
    }

    /// Exact test `K | P_D` for a non-negative digit set.
    pub fn divides_mask(&self, digits: &IntSet) -> Result<bool> {
        for (&o, &mult) in &self.orders {
            if !cyclotomic_power_divides_mask(o, digits, mult)? {
                return Ok(false);
            }
        }
        Ok(true)
    }
}

/// Builds `K^(j)` for factor sets `E_0, …, E_k`, indices `T` and gaps `ℓ_1…ℓ_k`.
///
/// At `j = k` every index of `T` must be selected by some factor set.
pub fn kernel_polynomial(e: &[IntSet], t: &[u64], ells: &[u64], n: u64, j: usize) -> Result<KernelPolynomial> {
    if e.is_empty() || j >= e.len() {
        return Err(Error::InvalidParams(format!(
            "stage {j} out of range for {} factor sets",
            e.len()
        )));
    }
    if ells.len() + 1 != e.len() {
        return Err(Error::InvalidParams(format!(
            "{} gaps given for {} factor sets",
            ells.len(),
            e.len()
        )));
    }
    let mut selected = Vec::with_capacity(j + 1);
    let mut factors = Vec::new();
    let mut orders: BTreeMap<u64, u32> = BTreeMap::new();
    let mut exponent = 0u64;
    let check_upto = if j + 1 == e.len() { e.len() } else { j + 1 };
    let mut covered = BTreeSet::new();
    for (i, set) in e.iter().enumerate().take(check_upto) {
        if i > 0 {
            exponent += ells[i - 1];
        }
        let mask = MaskPolynomial::from_digits(set)?;
        let s_i: Vec<u64> = t
            .iter()
            .copied()
            .filter(|&d| d > 1 && cyclotomic_divides(d, &mask))
            .collect();
        covered.extend(s_i.iter().copied());
        if i <= j {
            let scale = checked_pow(n, exponent).ok_or_else(|| Error::ModulusOverflow(format!("{n}^{exponent}")))?;
            for &d in &s_i {
                factors.push(KernelFactor {
                    index: d,
                    stage: i,
                    scale,
                });
                for o in compose_factor_orders(d, scale)? {
                    *orders.entry(o).or_default() += 1;
                }
            }
            selected.push(s_i);
        }
    }
    if j + 1 == e.len() {
        let missing: Vec<u64> = t.iter().copied().filter(|d| *d > 1 && !covered.contains(d)).collect();
        if !missing.is_empty() {
            return Err(Error::CoverageFailure(format!(
                "indices {missing:?} divide no factor set"
            )));
        }
    }
    let mut modulus = 1u64;
    for &o in orders.keys() {
        modulus = lcm_u64(modulus, o).ok_or_else(|| Error::ModulusOverflow(format!("lcm with {o}")))?;
    }
    Ok(KernelPolynomial {
        stage: j,
        selected,
        factors,
        orders,
        modulus,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn set(xs: &[i64]) -> IntSet {
        IntSet::from_i64s(xs)
    }

    #[test]
    fn small_kernel() {
        let e = [set(&[0, 1]), set(&[0, 2])];
        let k = kernel_polynomial(&e, &[2, 4], &[1], 4, 1).unwrap();
        assert_eq!(k.modulus, 16);
        let expect =
            MaskPolynomial::from_coeffs(&[1, 1]).mul(&MaskPolynomial::from_coeffs(&[1, 0, 0, 0, 0, 0, 0, 0, 1]));
        assert_eq!(k.to_polynomial(), expect);
        assert_eq!(k.to_polynomial_from_orders(), expect);
        assert_eq!(k.orders.keys().copied().collect::<Vec<_>>(), vec![2, 16]);

        let k0 = kernel_polynomial(&e, &[2, 4], &[1], 4, 0).unwrap();
        assert_eq!(k0.modulus, 2);
        assert_eq!(k0.to_polynomial(), MaskPolynomial::from_coeffs(&[1, 1]));
        assert!(k.divides_mask(&set(&[0, 1, 8, 9])).unwrap());
        assert!(k.divides_mask(&set(&[0, 1, 8, 25])).unwrap());
        assert!(!k.divides_mask(&set(&[0, 1, 2, 3])).unwrap());
    }

    #[test]
    fn coverage_is_checked_at_top() {
        let e = [set(&[0, 1]), set(&[0, 2])];
        assert!(matches!(
            kernel_polynomial(&e, &[2, 3, 4], &[1], 4, 1),
            Err(Error::CoverageFailure(_))
        ));
    }

    #[test]
    fn composed_orders_multiply_back() {
        for d in 1..=12u64 {
            for m in 1..=12u64 {
                let prod = compose_factor_orders(d, m)
                    .unwrap()
                    .into_iter()
                    .fold(MaskPolynomial::one(), |acc, o| acc.mul(&cyclotomic_arc(o)));
                assert_eq!(prod, cyclotomic_arc(d).compose_power(m), "d = {d}, m = {m}");
            }
        }
    }
}
