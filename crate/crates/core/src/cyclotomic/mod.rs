//! Exact polynomial engine: mask polynomials, cyclotomic polynomials,
//! vanishing sums of roots of unity and common-zero factorizations.

mod gcd;
mod kernel;
mod poly;
mod roots;

use std::collections::HashMap;
use std::sync::{Arc, OnceLock, RwLock};

use num_bigint::BigInt;
use num_traits::{One, ToPrimitive, Zero};
use serde::Serialize;

use crate::digitsets::IntSet;
use crate::error::{Error, Result};
use crate::numtheory::{binomial_big, divisors, euler_phi, mod_u64, radical};

pub use gcd::poly_gcd;
pub use kernel::{compose_factor_orders, kernel_polynomial, KernelFactor, KernelPolynomial};
pub use poly::{divides, MaskPolynomial};
pub use roots::{vanishes_at_primitive_root, vanishes_dense};

fn cache() -> &'static RwLock<HashMap<u64, Arc<MaskPolynomial>>> {
    static CACHE: OnceLock<RwLock<HashMap<u64, Arc<MaskPolynomial>>>> = OnceLock::new();
    CACHE.get_or_init(|| RwLock::new(HashMap::new()))
}

/// `Φ_d`, memoized across threads.
pub fn cyclotomic_arc(d: u64) -> Arc<MaskPolynomial> {
    assert!(d >= 1, "cyclotomic index must be positive");
    if let Some(p) = cache().read().expect("cache lock").get(&d) {
        return p.clone();
    }
    let p = Arc::new(compute_cyclotomic(d));
    cache().write().expect("cache lock").entry(d).or_insert(p).clone()
}

/// `Φ_d` with exact integer coefficients.
pub fn cyclotomic_poly(d: u64) -> MaskPolynomial {
    (*cyclotomic_arc(d)).clone()
}

fn compute_cyclotomic(d: u64) -> MaskPolynomial {
    if d == 1 {
        return MaskPolynomial::from_coeffs(&[-1, 1]);
    }
    let rad = radical(d);
    if rad != d {
        // Φ_d(x) = Φ_rad(x^{d/rad})
        return cyclotomic_arc(rad).compose_power(d / rad);
    }
    let mut acc = MaskPolynomial::from_terms([(d, BigInt::one()), (0, BigInt::from(-1))]);
    for e in divisors(d) {
        if e < d {
            acc = acc
                .div_exact(&cyclotomic_arc(e))
                .expect("x^d - 1 is divisible by each Φ_e, e | d");
        }
    }
    acc
}

/// `Φ_n | P` for a polynomial with small coefficients, decided on roots of unity.
/// Falls back to exact division when coefficients leave `i128`.
pub fn cyclotomic_divides(n: u64, p: &MaskPolynomial) -> bool {
    if let Some(terms) = p.small_terms() {
        if let Some(v) = vanishes_at_primitive_root(&terms, n) {
            return v;
        }
    }
    reduce_mod_xn_minus_one(p, n).div_exact(&cyclotomic_arc(n)).is_some()
}

/// Multiplicity of `Φ_n` in `P`, up to `cap` (`P` nonzero).
pub fn cyclotomic_multiplicity(n: u64, p: &MaskPolynomial, cap: u32) -> u32 {
    let phi = cyclotomic_arc(n);
    let mut cur = p.clone();
    let mut k = 0;
    while k < cap && !cur.is_zero() && cyclotomic_divides(n, &cur) {
        cur = cur.div_exact(&phi).expect("divisibility already decided");
        k += 1;
    }
    k
}

/// Whether `Φ_n^c` divides the mask of a non-negative digit set.
///
/// Uses that `Φ_n` is separable: `Φ_n^c | P` iff the Hasse derivatives
/// `P^{[j]}(ζ_n)` vanish for `j < c`.
pub fn cyclotomic_power_divides_mask(n: u64, digits: &IntSet, c: u32) -> Result<bool> {
    for j in 0..c {
        let mut terms = Vec::with_capacity(digits.len());
        let mut fits = true;
        for x in digits {
            let b = binomial_big(x, j);
            if b.is_zero() {
                continue;
            }
            let e = x - BigInt::from(j);
            match b.to_i128() {
                Some(bc) => terms.push((mod_u64(&e, n), bc)),
                None => {
                    fits = false;
                    break;
                }
            }
        }
        let vanishes = match fits.then(|| vanishes_at_primitive_root(&terms, n)).flatten() {
            Some(v) => v,
            None => {
                let poly = MaskPolynomial::from_digits(digits)?;
                return Ok(divides(&cyclotomic_poly(n).pow(c), &poly));
            }
        };
        if !vanishes {
            return Ok(false);
        }
    }
    Ok(true)
}

/// `P mod (x^n - 1)`.
pub fn reduce_mod_xn_minus_one(p: &MaskPolynomial, n: u64) -> MaskPolynomial {
    MaskPolynomial::from_terms(p.terms().map(|(e, c)| (e % n, c.clone())))
}

/// Decides `Σ_{d ∈ D} e(d t / N) = 0` by testing `Φ_N | Σ x^{d t mod N}`
/// with exact polynomial division.
pub fn vanishing_sum_test(digits: &IntSet, t: &BigInt, n: u64) -> bool {
    assert!(n >= 1, "modulus must be positive");
    let s = MaskPolynomial::from_terms(digits.iter().map(|d| (mod_u64(&(d * t), n), BigInt::one())));
    divides(&cyclotomic_arc(n), &s)
}

/// Cyclotomic part of a polynomial.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct CyclotomicFactorization {
    /// `(d, multiplicity)`, `d` ascending.
    pub factors: Vec<(u64, u32)>,
    pub residual: MaskPolynomial,
    /// Every index `d <= search_bound` with `φ(d) <= deg` was tested.
    pub search_bound: u64,
}

impl CyclotomicFactorization {
    pub fn product(&self) -> MaskPolynomial {
        self.factors
            .iter()
            .fold(self.residual.clone(), |acc, &(d, m)| acc.mul(&cyclotomic_arc(d).pow(m)))
    }

    pub fn multiplicity(&self, d: u64) -> u32 {
        self.factors.iter().find(|f| f.0 == d).map(|f| f.1).unwrap_or(0)
    }
}

/// Largest index `d` that can have `φ(d) <= deg`.
fn index_bound(deg: u64) -> u64 {
    // φ(d) >= sqrt(d/2) always.
    let crude = 2 * deg.saturating_mul(deg) + 2;
    // φ(d) > d / (e^γ ln ln d + 3 / ln ln d) for d >= 3.
    let rs = |x: f64| {
        let ll = x.ln().ln();
        x / (1.781_072_5 * ll + 3.0 / ll)
    };
    let mut x = 64.0f64;
    while rs(x) <= deg as f64 {
        x *= 1.25;
    }
    crude.min(x.ceil() as u64 + 64)
}

/// Cyclotomic factors of `p` over all indices `d` with `φ(d) <= deg p`,
/// optionally capped at `max_index`. The residual times the factors is
/// checked to reproduce `p`.
pub fn factor_cyclotomic(p: &MaskPolynomial, max_index: Option<u64>) -> CyclotomicFactorization {
    let deg = p.degree().unwrap_or(0);
    let mut bound = index_bound(deg);
    if let Some(m) = max_index {
        bound = bound.min(m);
    }
    let mut residual = p.clone();
    let mut factors = Vec::new();
    if !p.is_zero() {
        for d in 1..=bound {
            let rdeg = residual.degree().unwrap_or(0);
            if rdeg == 0 {
                break;
            }
            if euler_phi(d) > rdeg {
                continue;
            }
            if !cyclotomic_divides(d, &residual) {
                continue;
            }
            let phi = cyclotomic_arc(d);
            let mut m = 0;
            while let Some(q) = residual.div_exact(&phi) {
                residual = q;
                m += 1;
                if !cyclotomic_divides(d, &residual) {
                    break;
                }
            }
            factors.push((d, m));
        }
    }
    let out = CyclotomicFactorization {
        factors,
        residual,
        search_bound: bound,
    };
    assert_eq!(&out.product(), p, "factorization must reproduce its input");
    out
}

/// Common factor of several masks and the cofactors.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct CommonZeroFactorization {
    pub common: MaskPolynomial,
    pub quotients: Vec<MaskPolynomial>,
    pub cyclotomic_part: Vec<(u64, u32)>,
    /// Part of the common factor with no cyclotomic divisor; `None` if trivial.
    pub non_cyclotomic_common_factor: Option<MaskPolynomial>,
}

/// `P_{B_s} = F · Q_s` with `F` the gcd in ℤ[x] of all masks.
pub fn common_zero_factorization(bs: &[IntSet]) -> Result<CommonZeroFactorization> {
    if bs.is_empty() {
        return Err(Error::EmptyDigitSet);
    }
    let mut masks = Vec::with_capacity(bs.len());
    for b in bs {
        if b.is_empty() {
            return Err(Error::EmptyDigitSet);
        }
        if !b.contains(&BigInt::zero()) || !b.all_nonnegative() {
            return Err(Error::MissingZero(b.to_string()));
        }
        masks.push(MaskPolynomial::from_digits(b)?);
    }
    let mut common = masks[0].clone();
    for m in &masks[1..] {
        common = poly_gcd(&common, m);
    }
    let quotients = masks
        .iter()
        .map(|m| m.div_exact(&common).expect("gcd divides every mask"))
        .collect();
    let fac = factor_cyclotomic(&common, None);
    let non_cyclotomic_common_factor = (fac.residual.degree().unwrap_or(0) > 0).then(|| fac.residual.clone());
    Ok(CommonZeroFactorization {
        common,
        quotients,
        cyclotomic_part: fac.factors,
        non_cyclotomic_common_factor,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numtheory::mobius;

    fn set(xs: &[i64]) -> IntSet {
        IntSet::from_i64s(xs)
    }

    fn mask(xs: &[i64]) -> MaskPolynomial {
        MaskPolynomial::from_digits(&set(xs)).unwrap()
    }

    /// Φ_d = Π_{e | d} (x^e - 1)^{μ(d/e)}, evaluated by multiplying the
    /// numerator factors and dividing out the denominator ones.
    fn mobius_oracle(d: u64) -> MaskPolynomial {
        let mut num = MaskPolynomial::one();
        let mut den = MaskPolynomial::one();
        for e in divisors(d) {
            let f = MaskPolynomial::from_terms([(e, BigInt::one()), (0, BigInt::from(-1))]);
            match mobius(d / e) {
                1 => num = num.mul(&f),
                -1 => den = den.mul(&f),
                _ => {}
            }
        }
        num.div_exact(&den).unwrap()
    }

    #[test]
    fn cyclotomic_examples() {
        assert_eq!(cyclotomic_poly(2), MaskPolynomial::from_coeffs(&[1, 1]));
        assert_eq!(cyclotomic_poly(32).to_string(), "x^16 + 1");
        assert_eq!(cyclotomic_poly(12).to_string(), "x^4 - x^2 + 1");
        assert_eq!(cyclotomic_poly(1).to_string(), "x - 1");
    }

    #[test]
    fn cyclotomic_matches_mobius_product() {
        for d in 1..=120 {
            assert_eq!(cyclotomic_poly(d), mobius_oracle(d), "d = {d}");
        }
        // 105 has the first coefficient of size 2
        assert!(cyclotomic_poly(105).terms().any(|(_, c)| *c == BigInt::from(-2)));
    }

    #[test]
    fn cyclotomic_cache_is_thread_safe() {
        let handles: Vec<_> = (0..8)
            .map(|i| std::thread::spawn(move || cyclotomic_poly(60 + i % 3)))
            .collect();
        for (i, h) in handles.into_iter().enumerate() {
            assert_eq!(h.join().unwrap(), mobius_oracle(60 + i as u64 % 3));
        }
    }

    #[test]
    fn vanishing_sum_examples() {
        assert!(vanishing_sum_test(&set(&[0, 2]), &BigInt::from(1), 4));
        assert!(!vanishing_sum_test(&set(&[0, 2]), &BigInt::from(2), 4));
        // exponents 0, 6, 0, 6 mod 24: 2 + 2i ≠ 0
        assert!(!vanishing_sum_test(&set(&[0, 1, 8, 9]), &BigInt::from(6), 24));
        assert!(vanishing_sum_test(&set(&[0, 1, 16, 17]), &BigInt::from(12), 24));
    }

    #[test]
    fn divisibility_routes_agree() {
        for n in 1..=40u64 {
            for xs in [&[0, 1, 8, 9][..], &[0, 2, 4], &[0, 3, 5, 6], &[0, 1, 16, 17]] {
                let p = mask(xs);
                assert_eq!(
                    cyclotomic_divides(n, &p),
                    divides(&cyclotomic_poly(n), &p),
                    "n = {n}, {xs:?}"
                );
            }
        }
    }

    #[test]
    fn factor_four_digit_mask() {
        let f = factor_cyclotomic(&mask(&[0, 1, 16, 17]), None);
        assert_eq!(f.factors, vec![(2, 1), (32, 1)]);
        assert_eq!(f.residual, MaskPolynomial::one());
    }

    #[test]
    fn factor_with_multiplicity_and_residual() {
        // (1+x)^2 (x^2 + x - 1)
        let p = MaskPolynomial::from_coeffs(&[1, 1])
            .pow(2)
            .mul(&MaskPolynomial::from_coeffs(&[-1, 1, 1]));
        let f = factor_cyclotomic(&p, None);
        assert_eq!(f.factors, vec![(2, 2)]);
        assert_eq!(f.residual, MaskPolynomial::from_coeffs(&[-1, 1, 1]));
        assert_eq!(cyclotomic_multiplicity(2, &p, 5), 2);
    }

    #[test]
    fn hasse_multiplicity_test() {
        // {0,1,2,3} = (1+x)(1+x^2); {0,1,2} ⊕ {0,2,4}-like sets give squares
        let d = set(&[0, 1, 2, 3]);
        assert!(cyclotomic_power_divides_mask(2, &d, 1).unwrap());
        assert!(!cyclotomic_power_divides_mask(2, &d, 2).unwrap());
        // (1 + x)(1 + x^3) has Φ_2^2
        let sq = set(&[0, 1, 3, 4]);
        assert!(cyclotomic_power_divides_mask(2, &sq, 2).unwrap());
        assert!(!cyclotomic_power_divides_mask(2, &sq, 3).unwrap());
        assert_eq!(cyclotomic_multiplicity(2, &mask(&[0, 1, 3, 4]), 9), 2);
    }

    #[test]
    fn common_zero_examples() {
        let c = common_zero_factorization(&[set(&[0, 2]), set(&[0, 6])]).unwrap();
        assert_eq!(c.common, MaskPolynomial::from_coeffs(&[1, 0, 1]));
        assert_eq!(c.quotients[0], MaskPolynomial::one());
        assert_eq!(c.quotients[1], MaskPolynomial::from_coeffs(&[1, 0, -1, 0, 1]));
        assert_eq!(c.cyclotomic_part, vec![(4, 1)]);
        assert!(c.non_cyclotomic_common_factor.is_none());

        let c = common_zero_factorization(&[set(&[0, 1])]).unwrap();
        assert_eq!(c.common, MaskPolynomial::from_coeffs(&[1, 1]));
        assert_eq!(c.quotients, vec![MaskPolynomial::one()]);

        let c = common_zero_factorization(&[set(&[0, 1]), set(&[0, 2])]).unwrap();
        assert_eq!(c.common, MaskPolynomial::one());
        assert_eq!(c.quotients[1], MaskPolynomial::from_coeffs(&[1, 0, 1]));

        assert_eq!(common_zero_factorization(&[]), Err(Error::EmptyDigitSet));
        assert!(common_zero_factorization(&[set(&[1, 2])]).is_err());
    }

    #[test]
    fn common_zero_flags_non_cyclotomic_factor() {
        // {0,1,3} and {0,1,3,5,6,8}: masks share 1 + x + x^3 (not cyclotomic)
        let a = set(&[0, 1, 3]);
        let b = a.direct_sum(&set(&[0, 5])).unwrap();
        let c = common_zero_factorization(&[a, b]).unwrap();
        assert_eq!(c.common, mask(&[0, 1, 3]));
        assert!(c.non_cyclotomic_common_factor.is_some());
    }
}
