use num_rational::Ratio;
use num_traits::{CheckedAdd, CheckedMul, Zero};

pub type Rational = Ratio<i128>;

/// A real number split into an exact rational part and a small floating offset.
///
/// Spectral points and the rationals `t / N^2` where mask zeros sit are kept exact,
/// so phases `d x / N^j mod 1` lose nothing to cancellation however large `x` is.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Point {
    pub exact: Rational,
    pub t: f64,
}

impl Point {
    pub fn zero() -> Self {
        Point {
            exact: Rational::zero(),
            t: 0.0,
        }
    }

    pub fn rational(num: i128, den: i128) -> Self {
        Point {
            exact: Rational::new(num, den),
            t: 0.0,
        }
    }

    pub fn integer(k: i128) -> Self {
        Point::rational(k, 1)
    }

    /// Integer part exact, the rest as the offset.
    pub fn from_f64(x: f64) -> Self {
        let floor = x.floor();
        Point {
            exact: Rational::from_integer(floor as i128),
            t: x - floor,
        }
    }

    pub fn value(&self) -> f64 {
        ratio_to_f64(&self.exact) + self.t
    }

    pub fn shift(&self, r: &Rational) -> Self {
        match self.exact.checked_add(r) {
            Some(exact) => Point { exact, t: self.t },
            None => Point {
                exact: self.exact,
                t: self.t + ratio_to_f64(r),
            },
        }
    }

    pub fn add(&self, other: &Point) -> Self {
        let mut out = self.shift(&other.exact);
        out.t += other.t;
        out
    }

    pub fn scale(&self, r: &Rational) -> Self {
        match self.exact.checked_mul(r) {
            Some(exact) => Point {
                exact,
                t: self.t * ratio_to_f64(r),
            },
            None => Point {
                exact: Rational::zero(),
                t: self.value() * ratio_to_f64(r),
            },
        }
    }
}

pub fn ratio_to_f64(r: &Rational) -> f64 {
    *r.numer() as f64 / *r.denom() as f64
}

/// `d x mod 1` for `x = num / den`, exact while `d (num mod den)` fits.
pub(crate) fn exact_phase(num: i128, den: i128, d: i128) -> f64 {
    let r = num.rem_euclid(den);
    match d.checked_mul(r) {
        Some(v) => v.rem_euclid(den) as f64 / den as f64,
        None => (d as f64 * (r as f64 / den as f64)).rem_euclid(1.0),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn splitting_and_shifts() {
        let p = Point::from_f64(-1.25);
        assert_eq!(p.exact, Rational::from_integer(-2));
        assert!((p.t - 0.75).abs() < 1e-15);
        assert!((p.value() + 1.25).abs() < 1e-15);
        let q = Point::rational(1, 4).shift(&Rational::new(3, 8));
        assert_eq!(q.exact, Rational::new(5, 8));
        assert_eq!(
            Point::rational(1, 3).scale(&Rational::from_integer(3)).exact,
            Rational::from_integer(1)
        );
    }

    #[test]
    fn phases() {
        assert_eq!(exact_phase(1, 4, 2), 0.5);
        assert_eq!(exact_phase(-1, 4, 1), 0.75);
        let big = 10_i128.pow(30) + 1;
        assert_eq!(exact_phase(big, 10, 3), 0.3);
    }
}
