use super::profile::cm_profile;
use super::tiles::confirm_tiling;
use crate::digitsets::IntSet;
use crate::error::{Error, Result};
use crate::productform::{validate_k_stage, KStageForm};

fn require_t1_t2(subject: String, set: &IntSet, n: u64) -> Result<IntSet> {
    let p = cm_profile(set, n);
    let condition = if !p.distinct_mod_n {
        "distinct residues"
    } else if !p.t1 {
        "T1"
    } else if !p.t2 {
        "T2"
    } else {
        return Ok(p.laba_spectrum.expect("present when T1 and T2 hold"));
    };
    Err(Error::CMConditionFailure {
        subject,
        condition: condition.into(),
    })
}

/// For `Z_N ≡ A_0 ⊕ … ⊕ A_k`, the k-stage form with constant layers `A_j` and the
/// (T1)/(T2) spectra, after checking (T1) and (T2) on every part and on every
/// prefix and suffix sum.
pub fn cm_regular_product_triple(n: u64, parts: &[IntSet]) -> Result<KStageForm> {
    let (first, rest) = parts.split_first().ok_or(Error::EmptyInput)?;
    if !confirm_tiling(first, &sum(rest)?, n) {
        return Err(Error::NotCompleteResidues(n));
    }
    let mut ls = Vec::with_capacity(parts.len());
    for (j, part) in parts.iter().enumerate() {
        ls.push(require_t1_t2(format!("part {j}"), part, n)?);
    }
    let k = parts.len() - 1;
    for m in 1..=k {
        require_t1_t2(format!("parts 0..={m}"), &sum(&parts[..=m])?, n)?;
        require_t1_t2(format!("parts {m}..={k}"), &sum(&parts[m..])?, n)?;
    }
    let form = KStageForm::constant(n, vec![1; k], parts.to_vec(), ls)?;
    let report = validate_k_stage(&form);
    if !report.valid {
        return Err(Error::ValidationFailure(report.summary()));
    }
    Ok(form)
}

fn sum(sets: &[IntSet]) -> Result<IntSet> {
    sets.iter().try_fold(IntSet::zero(), |acc, s| acc.direct_sum(s))
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_bigint::BigInt;

    fn s(xs: &[i64]) -> IntSet {
        IntSet::from_i64s(xs)
    }

    #[test]
    fn two_parts_of_z4() {
        let f = cm_regular_product_triple(4, &[s(&[0, 1]), s(&[0, 2])]).unwrap();
        assert_eq!(f.ls, vec![s(&[0, 2]), s(&[0, 1])]);
    }

    #[test]
    fn irreducible_pair_in_72() {
        let a = s(&[0, 8, 16, 18, 26, 34]);
        let b = s(&[0, 5, 6, 9, 12, 29, 33, 36, 42, 48, 53, 57]);
        let f = cm_regular_product_triple(72, &[a, b]).unwrap();
        assert_eq!(f.k(), 1);
    }

    #[test]
    fn whole_group_and_failures() {
        let all = IntSet::progression(6, &BigInt::from(1));
        let f = cm_regular_product_triple(6, &[all]).unwrap();
        assert_eq!(f.k(), 0);
        assert!(matches!(
            cm_regular_product_triple(4, &[s(&[0, 1]), s(&[0, 1])]),
            Err(Error::NotCompleteResidues(4))
        ));
    }
}
