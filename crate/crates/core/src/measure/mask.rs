use std::f64::consts::TAU;

use astro_float::{BigFloat, Consts, Radix, RoundingMode};
use num_bigint::BigInt;
use num_complex::Complex64;
use num_integer::Integer;
use serde::Serialize;

use super::point::{exact_phase, ratio_to_f64, Point, Rational};
use crate::digitsets::IntSet;
use crate::error::{Error, Result};

/// Tail parameters above this make the linearized bound useless.
const MAX_TAIL: f64 = 0.5;
/// Target for the automatic depth: the neglected factors are within this of 1.
const AUTO_TAIL: f64 = 1e-14;
const MAX_DEPTH: u32 = 200;

/// `(1/|D|) Σ e(-d ξ)` in double precision.
pub fn mask_value(digits: &IntSet, xi: f64) -> Complex64 {
    let sum: Complex64 = digits
        .iter()
        .map(|d| {
            let d = i128::try_from(d).map(|d| d as f64).unwrap_or(f64::NAN);
            Complex64::from_polar(1.0, -TAU * (d * xi).rem_euclid(1.0))
        })
        .sum();
    sum / digits.len() as f64
}

/// `M_D(x)` evaluated with a mantissa of `bits` bits, the phases reduced exactly.
pub fn mask_value_hp(digits: &IntSet, x: &Rational, bits: usize) -> Result<Complex64> {
    if digits.is_empty() {
        return Err(Error::EmptyDigitSet);
    }
    let rm = RoundingMode::ToEven;
    let mut cc = Consts::new().map_err(|e| Error::InvalidParams(format!("{e:?}")))?;
    let tau = cc.pi(bits, rm).mul(&BigFloat::from_u8(2, bits), bits, rm);
    let den = BigInt::from(*x.denom());
    let num = BigInt::from(*x.numer());
    let mut re = BigFloat::from_u8(0, bits);
    let mut im = BigFloat::from_u8(0, bits);
    for d in digits {
        let r = (d * &num).mod_floor(&den);
        let r = i128::try_from(&r).expect("residue below an i128 modulus");
        let phase = BigFloat::from_i128(r, bits).div(&BigFloat::from_i128(*x.denom(), bits), bits, rm);
        let angle = tau.mul(&phase, bits, rm);
        re = re.add(&angle.cos(bits, rm, &mut cc), bits, rm);
        im = im.sub(&angle.sin(bits, rm, &mut cc), bits, rm);
    }
    let count = BigFloat::from_u64(digits.len() as u64, bits);
    let re = re.div(&count, bits, rm);
    let im = im.div(&count, bits, rm);
    Ok(Complex64::new(to_f64(&re, &mut cc)?, to_f64(&im, &mut cc)?))
}

fn to_f64(x: &BigFloat, cc: &mut Consts) -> Result<f64> {
    let text = x
        .format(Radix::Dec, RoundingMode::ToEven, cc)
        .map_err(|e| Error::InvalidParams(format!("{e:?}")))?;
    text.parse::<f64>()
        .map_err(|e| Error::InvalidParams(format!("cannot read {text}: {e}")))
}

/// `μ_p`, the convolution of the first `p` scaled copies of the digit measure.
///
/// With `depth = None` the depth is chosen per point so that the neglected
/// factors are within `1e-14` of 1.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TruncatedMeasure {
    pub base: u64,
    pub digits: Vec<i128>,
    pub depth: Option<u32>,
    /// `2π Σ|d| / |D|`, the Lipschitz constant of `M_D` at 0.
    #[serde(skip)]
    lipschitz: f64,
}

/// `μ̂_p(ξ)` with an interval for `|μ̂(ξ)|`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct MuHat {
    pub re: f64,
    pub im: f64,
    pub depth: u32,
    /// `C |ξ| / (N^p (N - 1))`; the tail product has modulus in `[1 - s, 1]`.
    pub tail: f64,
    pub abs_lower: f64,
    pub abs_upper: f64,
}

impl MuHat {
    pub fn value(&self) -> Complex64 {
        Complex64::new(self.re, self.im)
    }
}

impl TruncatedMeasure {
    pub fn new(base: u64, digits: &IntSet) -> Result<Self> {
        if base < 2 {
            return Err(Error::BaseTooSmall(base));
        }
        if digits.is_empty() {
            return Err(Error::EmptyDigitSet);
        }
        let digits = digits
            .to_i128_vec()
            .ok_or_else(|| Error::ModulusOverflow(format!("digits of {digits}")))?;
        let total: f64 = digits.iter().map(|d| d.unsigned_abs() as f64).sum();
        let lipschitz = TAU * total / digits.len() as f64;
        Ok(TruncatedMeasure {
            base,
            digits,
            depth: None,
            lipschitz,
        })
    }

    pub fn with_depth(mut self, p: u32) -> Result<Self> {
        if p == 0 {
            return Err(Error::InvalidParams("depth must be at least 1".into()));
        }
        self.depth = Some(p);
        Ok(self)
    }

    /// `M_D(x / N^j)`.
    pub fn mask_scaled(&self, x: &Point, j: u32) -> Complex64 {
        let n = self.base as i128;
        let pow = n.checked_pow(j);
        mask_at(&self.digits, x, pow, (self.base as f64).powi(j as i32))
    }

    /// `Π_{j=1}^{p} M_D(ξ / N^j)`.
    pub fn product(&self, x: &Point, p: u32) -> Complex64 {
        let mut acc = Complex64::new(1.0, 0.0);
        for j in 1..=p {
            acc *= self.mask_scaled(x, j);
            if acc.norm_sqr() == 0.0 {
                break;
            }
        }
        acc
    }

    pub fn tail_parameter(&self, x: &Point, p: u32) -> f64 {
        let n = self.base as f64;
        self.lipschitz * x.value().abs() / (n.powi(p as i32) * (n - 1.0))
    }

    /// Smallest depth making the tail parameter at most `1e-14`.
    pub fn auto_depth(&self, x: &Point) -> u32 {
        let mut p = 1;
        while p < MAX_DEPTH && self.tail_parameter(x, p) > AUTO_TAIL {
            p += 1;
        }
        p
    }

    pub fn depth_at(&self, x: &Point) -> u32 {
        self.depth.unwrap_or_else(|| self.auto_depth(x))
    }

    /// `μ̂(ξ)` through the truncated product and the tail bound.
    pub fn mu_hat(&self, x: &Point) -> Result<MuHat> {
        let p = self.depth_at(x);
        let tail = self.tail_parameter(x, p);
        if tail > MAX_TAIL {
            return Err(Error::TailBoundUnavailable(tail));
        }
        let v = self.product(x, p);
        let abs = v.norm();
        Ok(MuHat {
            re: v.re,
            im: v.im,
            depth: p,
            tail,
            abs_lower: abs * (1.0 - tail),
            abs_upper: abs,
        })
    }

    /// `|μ̂_p(ξ)|²` at the automatic or fixed depth, tail ignored.
    pub fn abs_sq(&self, x: &Point) -> f64 {
        self.product(x, self.depth_at(x)).norm_sqr()
    }
}

/// Free-function form of [`TruncatedMeasure::mu_hat`].
pub fn mu_hat_truncated(m: &TruncatedMeasure, xi: &Point) -> Result<MuHat> {
    m.mu_hat(xi)
}

/// `M_D(x / pow)`; `pow` is `None` when `N^j` does not fit.
pub(crate) fn mask_at(digits: &[i128], x: &Point, pow: Option<i128>, pow_f: f64) -> Complex64 {
    let den = pow.and_then(|p| x.exact.denom().checked_mul(p));
    let num = *x.exact.numer();
    let approx = ratio_to_f64(&x.exact) / pow_f;
    let t = x.t / pow_f;
    let sum: Complex64 = digits
        .iter()
        .map(|&d| {
            let exact = match den {
                Some(den) => exact_phase(num, den, d),
                None => (d as f64 * approx).rem_euclid(1.0),
            };
            Complex64::from_polar(1.0, -TAU * (exact + d as f64 * t))
        })
        .sum();
    sum / digits.len() as f64
}

/// `(1/n) Σ_s |M_{B_s}(x)|²`.
pub(crate) fn averaged_energy(bs: &[Vec<i128>], x: &Point) -> f64 {
    let total: f64 = bs.iter().map(|b| mask_at(b, x, Some(1), 1.0).norm_sqr()).sum();
    total / bs.len() as f64
}

#[cfg(test)]
mod tests {
    use super::*;

    fn s(xs: &[i64]) -> IntSet {
        IntSet::from_i64s(xs)
    }

    #[test]
    fn mask_values() {
        assert!((mask_value(&s(&[0, 2]), 0.0) - Complex64::new(1.0, 0.0)).norm() < 1e-15);
        assert!(mask_value(&s(&[0, 2]), 0.25).norm() < 1e-15);
        let d = s(&[0, 1, 8, 9]);
        let direct = mask_value(&d, 0.25);
        let split = mask_value(&s(&[0, 1]), 0.25) * mask_value(&s(&[0, 8]), 0.25);
        assert!((direct - split).norm() < 1e-14);
        let hp = mask_value_hp(&d, &Rational::new(1, 4), 170).unwrap();
        assert!((hp - direct).norm() < 1e-14, "{hp} {direct}");
        let hp = mask_value_hp(&s(&[0, 1, 16, 17]), &Rational::new(7, 96), 170).unwrap();
        assert!((hp - mask_value(&s(&[0, 1, 16, 17]), 7.0 / 96.0)).norm() < 1e-13);
    }

    #[test]
    fn truncated_transform() {
        let m = TruncatedMeasure::new(4, &s(&[0, 2])).unwrap();
        for p in 1..6 {
            assert_eq!(m.product(&Point::zero(), p), Complex64::new(1.0, 0.0));
        }
        let x = Point::from_f64(0.3);
        let auto = m.mu_hat(&x).unwrap();
        let deep = m.product(&x, 40);
        assert!((auto.value() - deep).norm() < 1e-13);
        assert!(auto.abs_lower <= deep.norm() && deep.norm() <= auto.abs_upper + 1e-15);
        // zeros at 4^{j-1} times odd integers
        for k in [1, 3, 4, 12] {
            assert!(m.mu_hat(&Point::integer(k)).unwrap().abs_upper < 1e-15, "{k}");
        }
        assert!(m.mu_hat(&Point::integer(2)).unwrap().abs_lower > 0.1);
    }

    #[test]
    fn periodic_in_n_to_the_p() {
        let m = TruncatedMeasure::new(4, &s(&[0, 1, 8, 25])).unwrap();
        for p in 1..4 {
            let period = 4_i128.pow(p);
            for x in [0.1, 0.37, 0.9] {
                let a = m.product(&Point::from_f64(x), p);
                let b = m.product(&Point::from_f64(x).shift(&Rational::from_integer(period)), p);
                assert!((a - b).norm() < 1e-12);
            }
        }
    }

    #[test]
    fn fixed_depth_tail() {
        let m = TruncatedMeasure::new(4, &s(&[0, 2])).unwrap().with_depth(1).unwrap();
        assert!(matches!(
            m.mu_hat(&Point::integer(1000)),
            Err(Error::TailBoundUnavailable(_))
        ));
        assert!(TruncatedMeasure::new(4, &s(&[0, 2])).unwrap().with_depth(0).is_err());
    }
}
