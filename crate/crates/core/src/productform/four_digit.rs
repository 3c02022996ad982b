use num_bigint::BigInt;
use num_integer::Integer;
use serde::Serialize;

use super::{expand_one_stage, validate_one_stage, OneStageForm};
use crate::digitsets::IntSet;
use crate::error::{Error, Result};
use crate::numtheory::big_pow;
use crate::report::ValidationReport;

/// `D = {0, a, 2^t l, a + 2^t l'}` and the one-stage form of `m^k D` over `N = 2^β m`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct FourDigitForm {
    pub base: u64,
    pub beta: u32,
    pub odd_part: u64,
    /// `t = β k + r`.
    pub k: u32,
    pub r: u32,
    pub digits: IntSet,
    /// `m^k`.
    #[serde(serialize_with = "crate::digitsets::serialize_bigint")]
    pub multiplier: BigInt,
    /// `m^k D`, the expansion of `form`.
    pub scaled: IntSet,
    pub form: OneStageForm,
    pub report: ValidationReport,
}

/// Builds the form `A = {0, a m^k}`, `B_0 = {0, 2^r l}`, `B_{a m^k} = {0, 2^r l'}` with
/// exponent `k`, `L1 = {0, N/2}` and `L2 = {0, N / 2^{r+1}}`.
pub fn build_four_digit_form(n: u64, a: i64, t: u32, l: i64, l2: i64) -> Result<FourDigitForm> {
    if n < 2 || n % 2 == 1 {
        return Err(Error::InvalidParams(format!("N = {n} must be even")));
    }
    for (name, v) in [("a", a), ("l", l), ("l'", l2)] {
        if v % 2 == 0 {
            return Err(Error::InvalidParams(format!("{name} = {v} must be odd")));
        }
    }
    let beta = n.trailing_zeros();
    let odd_part = n >> beta;
    if t.is_multiple_of(beta) {
        return Err(Error::TDivisibleByBeta { t: t as u64, beta });
    }
    let (k, r) = t.div_rem(&beta);
    let multiplier = big_pow(odd_part, k as u64);
    let two_t = big_pow(2, t as u64);
    let a_big = BigInt::from(a);
    let digits = IntSet::try_distinct([BigInt::from(0), a_big.clone(), &two_t * l, &a_big + &two_t * l2])?;
    let two_r = big_pow(2, r as u64);
    let am = &a_big * &multiplier;
    let form = OneStageForm::new(
        n,
        k,
        IntSet::new([BigInt::from(0), am.clone()]),
        if am < BigInt::from(0) {
            vec![
                IntSet::new([BigInt::from(0), &two_r * l2]),
                IntSet::new([BigInt::from(0), &two_r * l]),
            ]
        } else {
            vec![
                IntSet::new([BigInt::from(0), &two_r * l]),
                IntSet::new([BigInt::from(0), &two_r * l2]),
            ]
        },
        IntSet::new([BigInt::from(0), BigInt::from(n / 2)]),
        IntSet::new([BigInt::from(0), BigInt::from(n >> (r + 1))]),
    )?;
    let scaled = expand_one_stage(&form)?;
    if scaled != digits.scale(&multiplier) {
        return Err(Error::ValidationFailure(format!(
            "expansion {scaled} differs from m^k D"
        )));
    }
    let report = validate_one_stage(&form);
    if !report.valid {
        return Err(Error::ValidationFailure(report.summary()));
    }
    Ok(FourDigitForm {
        base: n,
        beta,
        odd_part,
        k,
        r,
        digits,
        multiplier,
        scaled,
        form,
        report,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn s(xs: &[i64]) -> IntSet {
        IntSet::from_i64s(xs)
    }

    #[test]
    fn base_24() {
        let f = build_four_digit_form(24, 1, 4, 1, 1).unwrap();
        assert_eq!(f.digits, s(&[0, 1, 16, 17]));
        assert_eq!(f.multiplier, BigInt::from(3));
        assert_eq!((f.k, f.r), (1, 1));
        assert_eq!(f.form.a, s(&[0, 3]));
        assert!(f.form.bs.values().all(|b| *b == s(&[0, 2])));
        assert_eq!(f.form.l1, s(&[0, 12]));
        assert_eq!(f.form.l2, s(&[0, 6]));
        assert_eq!(f.scaled, s(&[0, 3, 48, 51]));
    }

    #[test]
    fn other_parameters() {
        let f = build_four_digit_form(4, 1, 1, 1, 3).unwrap();
        assert_eq!(f.multiplier, BigInt::from(1));
        assert_eq!(f.form.r, 0);
        assert_eq!(f.digits, s(&[0, 1, 2, 7]));
        assert!(matches!(
            build_four_digit_form(4, 1, 2, 1, 1),
            Err(Error::TDivisibleByBeta { t: 2, beta: 2 })
        ));
        for (n, t) in [(8, 1), (8, 2), (8, 4), (8, 5), (40, 7), (48, 9)] {
            for (a, l, l2) in [(1, 1, 1), (3, 5, 1), (-1, 1, 3)] {
                assert!(build_four_digit_form(n, a, t, l, l2).is_ok(), "{n} {t} {a} {l} {l2}");
            }
        }
    }

    #[test]
    fn doubled_second_spectrum_fails() {
        let f = build_four_digit_form(24, 1, 4, 1, 1).unwrap();
        let mut literal = f.form.clone();
        literal.l2 = s(&[0, 48]);
        assert!(!validate_one_stage(&literal).valid);
    }
}
