//! Exact vanishing test for integer combinations of n-th roots of unity.
//!
//! Writes `n = p^k m` with `p ∤ m` and splits each exponent by CRT into a
//! `p^k`-part and an `m`-part. Over ℚ(ζ_m) the powers `ζ_{p^k}^j` with
//! `j < (p-1)p^{k-1}` form a basis and the remaining powers are fixed by
//! `Σ_a ζ_{p^k}^{a p^{k-1} + b} = 0`. So the sum vanishes iff for every `b`
//! the `p` coefficient sums `T_{a p^{k-1} + b}` agree in ℤ[ζ_m]. Recursing on
//! `m` costs `O(terms · ω(n))`.

use std::collections::BTreeMap;

use crate::numtheory::{factorize, mod_inverse};

/// Whether `Σ c ζ^e = 0` for a primitive `n`-th root of unity `ζ`.
///
/// Returns `None` only if an intermediate coefficient overflows `i128`.
pub fn vanishes_at_primitive_root(terms: &[(u64, i128)], n: u64) -> Option<bool> {
    assert!(n >= 1, "order must be positive");
    let primes = factorize(n);
    let reduced: Vec<(u64, i128)> = terms.iter().map(|&(e, c)| (e % n, c)).collect();
    vanish(reduced, n, &primes)
}

/// Dense form: `coeffs[i]` multiplies `ζ^i`.
pub fn vanishes_dense(coeffs: &[i128], n: u64) -> Option<bool> {
    let terms: Vec<(u64, i128)> = coeffs
        .iter()
        .enumerate()
        .filter(|(_, &c)| c != 0)
        .map(|(i, &c)| (i as u64, c))
        .collect();
    vanishes_at_primitive_root(&terms, n)
}

fn merge(mut terms: Vec<(u64, i128)>) -> Option<Vec<(u64, i128)>> {
    terms.sort_unstable_by_key(|t| t.0);
    let mut out: Vec<(u64, i128)> = Vec::with_capacity(terms.len());
    for (e, c) in terms {
        match out.last_mut() {
            Some(last) if last.0 == e => last.1 = last.1.checked_add(c)?,
            _ => out.push((e, c)),
        }
    }
    out.retain(|t| t.1 != 0);
    Some(out)
}

fn vanish(terms: Vec<(u64, i128)>, n: u64, primes: &[(u64, u32)]) -> Option<bool> {
    let terms = merge(terms)?;
    if terms.is_empty() {
        return Some(true);
    }
    let Some((&(p, k), rest)) = primes.split_first() else {
        return Some(false);
    };
    let pk = p.pow(k);
    let m = n / pk;
    let block = pk / p;
    let inv_m = mod_inverse(m % pk, pk).expect("coprime parts");
    let inv_pk = mod_inverse(pk % m.max(1), m.max(1)).unwrap_or(0);

    // b -> a -> terms over ζ_m
    let mut groups: BTreeMap<u64, BTreeMap<u64, Vec<(u64, i128)>>> = BTreeMap::new();
    for (e, c) in terms {
        let j = ((e as u128 * inv_m as u128) % pk as u128) as u64;
        let l = if m == 1 {
            0
        } else {
            ((e as u128 * inv_pk as u128) % m as u128) as u64
        };
        groups
            .entry(j % block)
            .or_default()
            .entry(j / block)
            .or_default()
            .push((l, c));
    }
    for (_, by_a) in groups {
        if (by_a.len() as u64) < p {
            // Some class is empty, so every class must vanish on its own.
            for (_, t) in by_a {
                if !vanish(t, m, rest)? {
                    return Some(false);
                }
            }
        } else {
            let last = &by_a[&(p - 1)];
            for (&a, t) in &by_a {
                if a == p - 1 {
                    continue;
                }
                let mut diff = t.clone();
                for &(l, c) in last {
                    diff.push((l, c.checked_neg()?));
                }
                if !vanish(diff, m, rest)? {
                    return Some(false);
                }
            }
        }
    }
    Some(true)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn float_sum(terms: &[(u64, i128)], n: u64) -> f64 {
        let (mut re, mut im) = (0.0, 0.0);
        for &(e, c) in terms {
            let th = 2.0 * std::f64::consts::PI * (e % n) as f64 / n as f64;
            re += c as f64 * th.cos();
            im += c as f64 * th.sin();
        }
        (re * re + im * im).sqrt()
    }

    #[test]
    fn simple_cases() {
        assert_eq!(vanishes_dense(&[1, 0, 1, 0], 4), Some(true));
        assert_eq!(vanishes_dense(&[2], 4), Some(false));
        assert_eq!(vanishes_dense(&[1, 1, 1], 3), Some(true));
        assert_eq!(vanishes_dense(&[1, 1, 1, 1, 1, 1], 6), Some(true));
        assert_eq!(vanishes_dense(&[1, 0, 0, 1, 0, 0], 6), Some(true));
        assert_eq!(vanishes_dense(&[1, 1, 0, 0, 0, 0], 6), Some(false));
        assert_eq!(vanishes_dense(&[], 7), Some(true));
        assert_eq!(vanishes_dense(&[5], 1), Some(false));
    }

    #[test]
    fn mixed_relation_order_30() {
        // ζ^0 + ζ^10 + ζ^20 (a 3-cycle) minus ζ^6 + … (a 5-cycle) plus a 2-cycle
        let mut terms = vec![(0, 1), (10, 1), (20, 1)];
        terms.extend([(3, 1), (9, 1), (15, 1), (21, 1), (27, 1)]);
        terms.extend([(1, 1), (16, 1)]);
        assert_eq!(vanishes_at_primitive_root(&terms, 30), Some(true));
        terms.push((2, 1));
        assert_eq!(vanishes_at_primitive_root(&terms, 30), Some(false));
    }

    #[test]
    fn agrees_with_floats_on_small_orders() {
        let mut state = 0x2545F4914F6CDD1Du64;
        let mut next = move || {
            state ^= state << 13;
            state ^= state >> 7;
            state ^= state << 17;
            state
        };
        for _ in 0..3000 {
            let n = next() % 60 + 1;
            let count = (next() % 6) as usize;
            let terms: Vec<(u64, i128)> = (0..count).map(|_| (next() % n, (next() % 5) as i128 - 2)).collect();
            let exact = vanishes_at_primitive_root(&terms, n).unwrap();
            assert_eq!(exact, float_sum(&terms, n) < 1e-9, "{terms:?} mod {n}");
        }
    }
}
