use serde::Serialize;

use crate::digitsets::IntSet;
use crate::error::{Error, Result};
use crate::productform::{expand_one_stage, reduce_r_to_1, translate_and_gcd_normalize, OneStageForm};

/// A one-stage form brought to `r = 1`, translated and gcd-normalized, in machine integers.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PreparedForm {
    pub base: u64,
    /// `∪_s (a_s + N B_s)` of the normalized form.
    pub digits: Vec<i128>,
    /// The `B_s` in the order of `A`, each containing 0.
    pub bs: Vec<Vec<i128>>,
    /// `L1 ⊕ L2` reduced into `[0, N)` and translated so that it contains 0.
    pub spectrum: Vec<i128>,
    /// `L2` of the normalized form, unreduced.
    pub l2: Vec<i128>,
    /// Common divisor taken out of the digits.
    pub g: i128,
    /// `N^{r-1}`-fold base change applied before normalizing.
    pub r: u32,
}

fn small(s: &IntSet) -> Result<Vec<i128>> {
    s.to_i128_vec()
        .ok_or_else(|| Error::ModulusOverflow(format!("elements of {s}")))
}

pub fn prepare(f: &OneStageForm) -> Result<PreparedForm> {
    let reduced = match f.r {
        0 => return Err(Error::InvalidForm("r = 0 has no spectrum construction".into())),
        1 => f.clone(),
        _ => reduce_r_to_1(f)?,
    };
    let norm = translate_and_gcd_normalize(&reduced)?;
    let form = &norm.form;
    let n = form.base;
    let bs = form.b_list()?.iter().map(small).collect::<Result<Vec<_>>>()?;
    let l = form.l1.direct_sum(&form.l2)?;
    let l = small(&l)?;
    let l0 = l[0];
    let mut spectrum: Vec<i128> = l.iter().map(|x| (x - l0).rem_euclid(n as i128)).collect();
    spectrum.sort_unstable();
    Ok(PreparedForm {
        base: n,
        digits: small(&expand_one_stage(form)?)?,
        bs,
        spectrum,
        l2: small(&form.l2)?,
        g: i128::try_from(&norm.g).map_err(|_| Error::ModulusOverflow(format!("gcd {}", norm.g)))?,
        r: f.r,
    })
}

impl PreparedForm {
    pub fn n(&self) -> usize {
        self.bs.len()
    }

    /// `Γ_p = L + N L + … + N^{p-1} L`, sorted.
    pub fn gamma(&self, p: u32) -> Result<Vec<i128>> {
        let n = self.base as i128;
        let mut acc = vec![0_i128];
        let mut scale = 1_i128;
        for j in 0..p {
            if j > 0 {
                scale = scale
                    .checked_mul(n)
                    .ok_or_else(|| Error::ModulusOverflow(format!("{n}^{j}")))?;
            }
            let mut next = Vec::with_capacity(acc.len() * self.spectrum.len());
            for a in &acc {
                for l in &self.spectrum {
                    next.push(a + scale * l);
                }
            }
            acc = next;
        }
        acc.sort_unstable();
        Ok(acc)
    }
}
