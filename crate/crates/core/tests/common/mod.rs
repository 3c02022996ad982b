//! Oracles shared by the integration tests and the acceptance run.
#![allow(dead_code)]

use std::f64::consts::TAU;

use num_bigint::BigInt;
use spectral_forge::digitsets::IntSet;
use spectral_forge::hadamard::find_spectra;

/// `Σ_d e(d t / N) = 0`, evaluated in floating point.
pub fn vanishing_table(n: u64, digits: &[u64]) -> Vec<bool> {
    (0..n)
        .map(|t| {
            let (mut re, mut im) = (0.0f64, 0.0f64);
            for &d in digits {
                let a = TAU * ((d * t) % n) as f64 / n as f64;
                re += a.cos();
                im += a.sin();
            }
            re.hypot(im) < 1e-9
        })
        .collect()
}

pub fn combinations(pool: &[u64], k: usize, out: &mut Vec<Vec<u64>>, cur: &mut Vec<u64>, start: usize) {
    if cur.len() == k {
        out.push(cur.clone());
        return;
    }
    for i in start..pool.len() {
        cur.push(pool[i]);
        combinations(pool, k, out, cur, i + 1);
        cur.pop();
    }
}

/// Every `L ⊆ Z_N` with `0 ∈ L` and pairwise differences in the zero set of the mask.
pub fn brute_spectra(n: u64, digits: &[u64]) -> Vec<Vec<u64>> {
    let zero = vanishing_table(n, digits);
    let pool: Vec<u64> = (1..n).collect();
    let mut rest = Vec::new();
    combinations(&pool, digits.len() - 1, &mut rest, &mut Vec::new(), 0);
    rest.into_iter()
        .map(|r| std::iter::once(0).chain(r).collect::<Vec<u64>>())
        .filter(|l| {
            l.iter()
                .enumerate()
                .all(|(i, &a)| l[i + 1..].iter().all(|&b| zero[((b + n - a) % n) as usize]))
        })
        .collect()
}

pub fn as_u64s(s: &IntSet) -> Vec<u64> {
    s.iter().map(|x| u64::try_from(x).unwrap()).collect()
}

/// Runs the subset-enumeration oracle against `find_spectra` for every `D ∋ 0`
/// in `Z_N`, `N ≤ max_n`, `2 ≤ |D| ≤ max_size`; returns the number of sets compared.
pub fn compare_with_oracle(max_n: u64, max_size: usize) -> Result<usize, String> {
    let mut compared = 0;
    for n in 2..=max_n {
        for size in 2..=max_size.min(n as usize) {
            let pool: Vec<u64> = (1..n).collect();
            let mut rests = Vec::new();
            combinations(&pool, size - 1, &mut rests, &mut Vec::new(), 0);
            for rest in rests {
                let d: Vec<u64> = std::iter::once(0).chain(rest).collect();
                let set = IntSet::new(d.iter().map(|&x| BigInt::from(x)));
                let found: Vec<Vec<u64>> = find_spectra(n, &set, usize::MAX)
                    .map_err(|e| e.to_string())?
                    .iter()
                    .map(as_u64s)
                    .collect();
                if found != brute_spectra(n, &d) {
                    return Err(format!("N = {n}, D = {d:?}"));
                }
                compared += 1;
            }
        }
    }
    Ok(compared)
}
