//! Exact verification of Hadamard triples `(N, D, L)` and spectrum search in ℤ_N.
//!
//! The sum `Σ_d e(d t / N)` vanishes or not according to the order `N / gcd(t, N)`
//! of `t` alone, so a triple is checked by computing the set of orders at which
//! the mask of `D` vanishes and the set of orders realised by differences in `L`.

use std::collections::BTreeSet;
use std::fmt;

use num_bigint::BigInt;
use serde::Serialize;

use crate::cyclotomic::vanishes_at_primitive_root;
use crate::digitsets::IntSet;
use crate::error::{Error, Result};
use crate::numtheory::{checked_pow, divisors, gcd_u64, mobius, mod_u64};
use crate::par;

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct HadamardTriple {
    pub base: u64,
    pub digits: IntSet,
    pub spectrum: IntSet,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SetRole {
    Digits,
    Spectrum,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum TripleFailure {
    CardinalityMismatch {
        digits: usize,
        spectrum: usize,
    },
    DuplicateResidue {
        set: SetRole,
        #[serde(serialize_with = "crate::digitsets::serialize_bigint")]
        first: BigInt,
        #[serde(serialize_with = "crate::digitsets::serialize_bigint")]
        second: BigInt,
    },
    OrthogonalityFailure {
        #[serde(serialize_with = "crate::digitsets::serialize_bigint")]
        l1: BigInt,
        #[serde(serialize_with = "crate::digitsets::serialize_bigint")]
        l2: BigInt,
    },
}

impl fmt::Display for TripleFailure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TripleFailure::CardinalityMismatch { digits, spectrum } => {
                write!(f, "|D| = {digits} but |L| = {spectrum}")
            }
            TripleFailure::DuplicateResidue { set, first, second } => {
                let name = match set {
                    SetRole::Digits => "D",
                    SetRole::Spectrum => "L",
                };
                write!(f, "{first} and {second} in {name} share a residue")
            }
            TripleFailure::OrthogonalityFailure { l1, l2 } => {
                write!(f, "rows for {l1} and {l2} are not orthogonal")
            }
        }
    }
}

/// Orders `n | N`, `n > 1`, with `Σ_{d ∈ D} ζ_n^d = 0`.
pub fn zero_orders(n: u64, digits: &IntSet) -> BTreeSet<u64> {
    let divs: Vec<u64> = divisors(n).into_iter().filter(|&m| m > 1).collect();
    let hits = par::map(&divs, |&m| {
        let terms: Vec<(u64, i128)> = digits.iter().map(|d| (mod_u64(d, m), 1)).collect();
        vanishes_at_primitive_root(&terms, m).expect("digit counts fit in i128")
    });
    divs.into_iter().zip(hits).filter_map(|(m, z)| z.then_some(m)).collect()
}

/// For each divisor `g < N`, the number of ordered pairs `ℓ ≠ ℓ'` in `L` with
/// `gcd(ℓ - ℓ', N) = g`. Needs `L` distinct mod `N`.
fn difference_gcd_counts(n: u64, residues: &[u64]) -> Vec<(u64, i128)> {
    let divs = divisors(n);
    let same_class = par::map(&divs, |&g| {
        let mut counts = std::collections::HashMap::<u64, i128>::new();
        for &r in residues {
            *counts.entry(r % g).or_default() += 1;
        }
        counts.values().map(|c| c * c).sum::<i128>() - residues.len() as i128
    });
    divs.iter()
        .enumerate()
        .map(|(i, &g)| {
            let exact: i128 = divs
                .iter()
                .enumerate()
                .skip(i)
                .filter(|(_, &h)| h % g == 0)
                .map(|(j, &h)| mobius(h / g) as i128 * same_class[j])
                .sum();
            (g, exact)
        })
        .collect()
}

/// Checks `|D| = |L|`, distinct residues and exact row orthogonality.
pub fn verify_triple(n: u64, digits: &IntSet, spectrum: &IntSet) -> std::result::Result<HadamardTriple, TripleFailure> {
    assert!(n >= 1, "base must be positive");
    if digits.len() != spectrum.len() {
        return Err(TripleFailure::CardinalityMismatch {
            digits: digits.len(),
            spectrum: spectrum.len(),
        });
    }
    if let Some((first, second)) = digits.residue_collision(n) {
        return Err(TripleFailure::DuplicateResidue {
            set: SetRole::Digits,
            first,
            second,
        });
    }
    if let Some((first, second)) = spectrum.residue_collision(n) {
        return Err(TripleFailure::DuplicateResidue {
            set: SetRole::Spectrum,
            first,
            second,
        });
    }
    let zeros = zero_orders(n, digits);
    let residues = spectrum.residues(n);
    let bad = difference_gcd_counts(n, &residues)
        .into_iter()
        .find(|&(g, count)| g < n && count > 0 && !zeros.contains(&(n / g)));
    if let Some((g, _)) = bad {
        let elems = spectrum.as_slice();
        for i in 0..elems.len() {
            for j in i + 1..elems.len() {
                let diff = (residues[j] + n - residues[i]) % n;
                if gcd_u64(diff, n) == g {
                    return Err(TripleFailure::OrthogonalityFailure {
                        l1: elems[i].clone(),
                        l2: elems[j].clone(),
                    });
                }
            }
        }
        unreachable!("a pair with gcd {g} was counted");
    }
    Ok(HadamardTriple {
        base: n,
        digits: digits.clone(),
        spectrum: spectrum.clone(),
    })
}

pub fn is_hadamard_triple(n: u64, digits: &IntSet, spectrum: &IntSet) -> bool {
    verify_triple(n, digits, spectrum).is_ok()
}

/// Sets `L ⊆ {0, …, N-1}` with `0 ∈ L` and `(N, D, L)` a Hadamard triple,
/// in lexicographic order, at most `limit` of them.
///
/// Shifted copies of one spectrum are all listed.
pub fn find_spectra(n: u64, digits: &IntSet, limit: usize) -> Result<Vec<IntSet>> {
    if digits.is_empty() {
        return Err(Error::EmptyDigitSet);
    }
    if let Some((a, _)) = digits.residue_collision(n) {
        return Err(Error::DuplicateResidue {
            modulus: n,
            residue: mod_u64(&a, n),
        });
    }
    let size = digits.len();
    if limit == 0 || size as u64 > n {
        return Ok(Vec::new());
    }
    if size == 1 {
        return Ok(vec![IntSet::zero()]);
    }
    let zeros = zero_orders(n, digits);
    let good: Vec<bool> = (0..n).map(|t| t != 0 && zeros.contains(&(n / gcd_u64(t, n)))).collect();
    let first: Vec<u64> = (1..n).filter(|&t| good[t as usize]).collect();

    let per_branch = par::map_range(first.len(), |i| {
        let v = first[i];
        let cands: Vec<u64> = first[i + 1..]
            .iter()
            .copied()
            .filter(|&w| good[(w - v) as usize])
            .collect();
        let mut out = Vec::new();
        let mut chosen = vec![0, v];
        extend_clique(n, &good, &mut chosen, &cands, size, limit, &mut out);
        out
    });
    let mut all = Vec::new();
    for branch in per_branch {
        for clique in branch {
            if all.len() == limit {
                break;
            }
            all.push(IntSet::new(clique.into_iter().map(BigInt::from)));
        }
    }
    Ok(all)
}

fn extend_clique(
    n: u64,
    good: &[bool],
    chosen: &mut Vec<u64>,
    cands: &[u64],
    size: usize,
    limit: usize,
    out: &mut Vec<Vec<u64>>,
) {
    if out.len() >= limit {
        return;
    }
    if chosen.len() == size {
        out.push(chosen.clone());
        return;
    }
    let need = size - chosen.len();
    for (i, &v) in cands.iter().enumerate() {
        if cands.len() - i < need || out.len() >= limit {
            return;
        }
        let next: Vec<u64> = cands[i + 1..]
            .iter()
            .copied()
            .filter(|&w| good[((w + n - v) % n) as usize])
            .collect();
        if next.len() + 1 < need {
            continue;
        }
        chosen.push(v);
        extend_clique(n, good, chosen, &next, size, limit, out);
        chosen.pop();
    }
}

/// Whether every `(N, B_s, L2)` is a Hadamard triple.
pub fn verify_equivalent_pairs(n: u64, bs: &[IntSet], l2: &IntSet) -> bool {
    par::map(bs, |b| is_hadamard_triple(n, b, l2)).into_iter().all(|ok| ok)
}

/// Lifts layer triples `(N, C_m, L_m)`, `m = 0…k-1`, to
/// `(N^k, Σ N^m C_m, Σ N^{k-1-m} L_m)` and verifies the result.
pub fn lifted_triple(n: u64, layers: &[(IntSet, IntSet)]) -> Result<HadamardTriple> {
    let k = layers.len() as u64;
    let big_n = checked_pow(n, k).ok_or_else(|| Error::ModulusOverflow(format!("{n}^{k}")))?;
    let mut digits = IntSet::zero();
    let mut spectrum = IntSet::zero();
    for (m, (c, l)) in layers.iter().enumerate() {
        if let Err(f) = verify_triple(n, c, l) {
            return Err(Error::ValidationFailure(format!("layer {m}: {f}")));
        }
        let up = crate::numtheory::big_pow(n, m as u64);
        let down = crate::numtheory::big_pow(n, k - 1 - m as u64);
        digits = digits.sumset(&c.scale(&up));
        spectrum = spectrum.sumset(&l.scale(&down));
    }
    verify_triple(big_n, &digits, &spectrum).map_err(|f| Error::ValidationFailure(format!("lifted triple: {f}")))
}

/// `Σ_{ℓ ∈ L} |M_{D/N}(ξ + ℓ)|²` in floating point; equals 1 for a Hadamard triple.
pub fn unitarity_sum(n: u64, digits: &[i64], spectrum: &[i64], xi: f64) -> f64 {
    let count = digits.len() as f64;
    let sums: Vec<f64> = spectrum
        .iter()
        .map(|&l| {
            let (mut re, mut im) = (0.0, 0.0);
            for &d in digits {
                let phase = -2.0 * std::f64::consts::PI * d as f64 * (xi + l as f64) / n as f64;
                re += phase.cos();
                im += phase.sin();
            }
            (re * re + im * im) / (count * count)
        })
        .collect();
    par::pairwise_sum(&sums)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn s(xs: &[i64]) -> IntSet {
        IntSet::from_i64s(xs)
    }

    #[test]
    fn small_triples() {
        assert!(verify_triple(4, &s(&[0, 2]), &s(&[0, 1])).is_ok());
        assert!(verify_triple(7, &s(&[0]), &s(&[0])).is_ok());
        assert!(matches!(
            verify_triple(4, &s(&[0, 1, 8, 9]), &s(&[0, 1, 2, 3])),
            Err(TripleFailure::DuplicateResidue {
                set: SetRole::Digits,
                ..
            })
        ));
        assert!(matches!(
            verify_triple(4, &s(&[0, 2]), &s(&[0, 2])),
            Err(TripleFailure::OrthogonalityFailure { .. })
        ));
        assert!(matches!(
            verify_triple(4, &s(&[0, 2]), &s(&[0])),
            Err(TripleFailure::CardinalityMismatch { .. })
        ));
    }

    #[test]
    fn orthogonality_witness_names_the_pair() {
        assert!(verify_triple(8, &s(&[0, 2, 4, 6]), &s(&[0, 1, 2, 3])).is_ok());
        match verify_triple(8, &s(&[0, 2, 4, 6]), &s(&[0, 1, 2, 4])) {
            Err(TripleFailure::OrthogonalityFailure { l1, l2 }) => {
                assert_eq!((l1, l2), (BigInt::from(0), BigInt::from(4)));
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn spectra_of_small_sets() {
        let found = find_spectra(4, &s(&[0, 2]), 10).unwrap();
        assert_eq!(found, vec![s(&[0, 1]), s(&[0, 3])]);
        let found = find_spectra(4, &s(&[0, 1]), 10).unwrap();
        assert_eq!(found, vec![s(&[0, 2])]);
        assert!(find_spectra(24, &s(&[0, 1, 16, 17]), 10).unwrap().is_empty());
        assert_eq!(find_spectra(6, &s(&[0, 1, 2, 3, 4, 5]), 10).unwrap().len(), 1);
    }

    #[test]
    fn lift_of_two_layers() {
        let t = lifted_triple(4, &[(s(&[0, 2]), s(&[0, 1])), (s(&[0, 2]), s(&[0, 1]))]).unwrap();
        assert_eq!(t.base, 16);
        assert_eq!(t.digits, s(&[0, 2, 8, 10]));
        assert_eq!(t.spectrum, s(&[0, 1, 4, 5]));
        let t = lifted_triple(5, &[(s(&[0]), s(&[0])), (s(&[0]), s(&[0]))]).unwrap();
        assert_eq!((t.base, t.digits, t.spectrum), (25, s(&[0]), s(&[0])));
    }

    #[test]
    fn unitarity_float_check() {
        for xi in [0.0, 0.13, 0.5, 0.97] {
            assert!((unitarity_sum(4, &[0, 2], &[0, 1], xi) - 1.0).abs() < 1e-12);
            assert!((unitarity_sum(6, &[0, 1, 2], &[0, 2, 4], xi) - 1.0).abs() < 1e-12);
        }
    }
}
