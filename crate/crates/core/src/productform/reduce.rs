use std::collections::{BTreeMap, HashMap};

use num_bigint::BigInt;
use num_traits::{One, Zero};
use serde::Serialize;

use super::{expand_one_stage, validate_one_stage, KStageForm, OneStageForm};
use crate::digitsets::IntSet;
use crate::error::{Error, Result};
use crate::numtheory::{big_pow, checked_pow, mod_u64};
use crate::report::ValidationReport;

/// `X ⊕ N X ⊕ … ⊕ N^{r-1} X`.
pub fn base_expansion(n: u64, x: &IntSet, r: u32) -> Result<IntSet> {
    let mut acc = IntSet::zero();
    for j in 0..r {
        acc = acc.direct_sum(&x.scale(&big_pow(n, j as u64)))?;
    }
    Ok(acc)
}

/// Rewrites a form with `r >= 1` as a form over `N^r` with `r = 1` whose digit set is
/// `D + N D + … + N^{r-1} D`.
pub fn reduce_r_to_1(f: &OneStageForm) -> Result<OneStageForm> {
    if f.r == 0 {
        return Err(Error::InvalidForm("r = 0 has no reduction to r = 1".into()));
    }
    if f.r == 1 {
        return Ok(f.clone());
    }
    let r = f.r;
    let big = checked_pow(f.base, r as u64).ok_or_else(|| Error::ModulusOverflow(format!("{}^{r}", f.base)))?;
    let a_list: Vec<BigInt> = f.a.iter().cloned().collect();
    let b_list = f.b_list()?;
    let n = a_list.len();
    let mut bs = BTreeMap::new();
    let mut idx = vec![0usize; r as usize];
    loop {
        let mut key = BigInt::zero();
        let mut b = IntSet::zero();
        for (j, &i) in idx.iter().enumerate() {
            let s = big_pow(f.base, j as u64);
            key += &s * &a_list[i];
            b = b.direct_sum(&b_list[i].scale(&s))?;
        }
        if bs.insert(key.clone(), b).is_some() {
            return Err(Error::InvalidForm(format!(
                "digit {key} of the expanded A arises twice"
            )));
        }
        let mut pos = 0;
        while pos < idx.len() {
            idx[pos] += 1;
            if idx[pos] < n {
                break;
            }
            idx[pos] = 0;
            pos += 1;
        }
        if pos == idx.len() {
            break;
        }
    }
    let a = IntSet::new(bs.keys().cloned());
    let out = OneStageForm {
        base: big,
        r: 1,
        a,
        bs,
        l1: base_expansion(f.base, &f.l1, r)?,
        l2: base_expansion(f.base, &f.l2, r)?,
    };
    let report = validate_one_stage(&out);
    if !report.valid {
        return Err(Error::ValidationFailure(report.summary()));
    }
    Ok(out)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct NormalizedForm {
    pub form: OneStageForm,
    /// Old `a_s` to the `min(B_s)` removed from its `B_s`.
    pub shifts: BTreeMap<String, String>,
    /// Common divisor taken out of the digits; spectra were multiplied by it.
    #[serde(serialize_with = "crate::digitsets::serialize_bigint")]
    pub g: BigInt,
}

/// Moves `min(B_s)` into `a_s` so that `0 ∈ B_s`, then divides by the gcd of
/// `∪_s (a_s + B_s)` and multiplies both spectra by it.
pub fn translate_and_gcd_normalize(f: &OneStageForm) -> Result<NormalizedForm> {
    let scale = big_pow(f.base, f.r as u64);
    let mut shifts = BTreeMap::new();
    let mut moved: BTreeMap<BigInt, IntSet> = BTreeMap::new();
    for a in &f.a {
        let b = f.b_for(a)?;
        let least = b.least().cloned().ok_or(Error::EmptyDigitSet)?;
        let new_a = a + &scale * &least;
        shifts.insert(a.to_string(), least.to_string());
        if moved.insert(new_a.clone(), b.translate(&-least)).is_some() {
            return Err(Error::InvalidForm(format!("translated digit {new_a} arises twice")));
        }
    }
    let level_zero = IntSet::new(moved.iter().flat_map(|(a, b)| b.iter().map(move |x| a + x)));
    let mut g = level_zero.gcd();
    if g.is_zero() {
        g = BigInt::one();
    }
    let div = |s: &IntSet| s.div_exact(&g).expect("gcd divides every digit");
    let bs: BTreeMap<BigInt, IntSet> = moved.iter().map(|(a, b)| (a / &g, div(b))).collect();
    let form = OneStageForm {
        base: f.base,
        r: f.r,
        a: IntSet::new(bs.keys().cloned()),
        bs,
        l1: f.l1.scale(&g),
        l2: f.l2.scale(&g),
    };
    let report = validate_one_stage(&form);
    if !report.valid {
        return Err(Error::ValidationFailure(report.summary()));
    }
    Ok(NormalizedForm { form, shifts, g })
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct KToOneStage {
    /// The input with every gap equal to 1.
    pub padded: KStageForm,
    /// One-stage form over `N^k` with `r = 1`.
    pub form: OneStageForm,
    /// `D + N D + … + N^{k-1} D` for the padded `k`.
    pub combined: IntSet,
    /// Exact checks of the result, labelled by step.
    pub report: ValidationReport,
}

/// Rewrites a k-stage form as a one-stage form over `N^k`, `k` counted after padding.
///
/// The new `A` is `D^(k-1) + N D^(k-2) + … + N^{k-1} D^(0)`, the `B` sets are read off
/// `D + N D + … + N^{k-1} D`, and the spectra are
/// `L1 = ⊕_m N^{k-1-m}(L_0 ⊕ … ⊕ L_m)`, `L2 = ⊕_m N^{k-1-m}(L_k ⊕ … ⊕ L_{m+1})`.
/// Step 1 is the triple for `A`, step 2 those for the `B` sets and step 3 the products.
pub fn k_stage_to_one_stage(f: &KStageForm) -> Result<KToOneStage> {
    f.check_shape()?;
    let padded = f.padded();
    let k = padded.k();
    if k == 0 {
        return Err(Error::InvalidForm("a form with no stages has nothing to reduce".into()));
    }
    let n = f.base;
    let big = checked_pow(n, k as u64).ok_or_else(|| Error::ModulusOverflow(format!("{n}^{k}")))?;
    let levels = padded.levels()?;
    let level = |m: i64| -> IntSet {
        if m < 0 {
            IntSet::zero()
        } else {
            levels[(m as usize).min(k)].clone()
        }
    };
    let stacked = |m: i64| -> Result<IntSet> {
        let mut acc = IntSet::zero();
        for j in 0..k {
            acc = acc.direct_sum(&level(m - j as i64).scale(&big_pow(n, j as u64)))?;
        }
        Ok(acc)
    };
    let a = stacked(k as i64 - 1)?;
    let combined = stacked(2 * k as i64 - 1)?;

    let mut by_residue: HashMap<u64, BigInt> = HashMap::with_capacity(a.len());
    for x in &a {
        if by_residue.insert(mod_u64(x, big), x.clone()).is_some() {
            return Err(Error::ValidationFailure(format!(
                "step 1: A has two digits congruent to {x} modulo {big}"
            )));
        }
    }
    let big_b = BigInt::from(big);
    let mut grouped: BTreeMap<BigInt, Vec<BigInt>> = a.iter().map(|x| (x.clone(), Vec::new())).collect();
    for x in &combined {
        let d = by_residue
            .get(&mod_u64(x, big))
            .ok_or_else(|| Error::ValidationFailure(format!("digit {x} is not congruent to any element of A")))?;
        grouped.get_mut(d).expect("keys are A").push((x - d) / &big_b);
    }
    let bs: BTreeMap<BigInt, IntSet> = grouped.into_iter().map(|(d, b)| (d, IntSet::new(b))).collect();

    let ls = &padded.ls;
    let sum_ls = |lo: usize, hi: usize| -> Result<IntSet> {
        let mut acc = IntSet::zero();
        for l in &ls[lo..=hi] {
            acc = acc.direct_sum(l)?;
        }
        Ok(acc)
    };
    let mut l1 = IntSet::zero();
    let mut l2 = IntSet::zero();
    for m in 0..k {
        let s = big_pow(n, (k - 1 - m) as u64);
        l1 = l1.direct_sum(&sum_ls(0, m)?.scale(&s))?;
        l2 = l2.direct_sum(&sum_ls(m + 1, k)?.scale(&s))?;
    }
    let form = OneStageForm {
        base: big,
        r: 1,
        a,
        bs,
        l1,
        l2,
    };
    if expand_one_stage(&form)? != combined {
        return Err(Error::ValidationFailure(
            "expansion of the one-stage form differs from D + N D + …".into(),
        ));
    }
    let raw = validate_one_stage(&form);
    let mut report = ValidationReport::new();
    for c in raw.checks {
        let name = if c.name == "A triple" {
            format!("step 1: {}", c.name)
        } else if c.name.starts_with("B triple") {
            format!("step 2: {}", c.name)
        } else if c.name.starts_with("product triple") {
            format!("step 3: {}", c.name)
        } else {
            c.name
        };
        report.push(name, c.passed, c.witness);
    }
    if !report.valid {
        return Err(Error::ValidationFailure(report.summary()));
    }
    Ok(KToOneStage {
        padded,
        form,
        combined,
        report,
    })
}
