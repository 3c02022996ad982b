use std::collections::BTreeMap;

use num_bigint::BigInt;
use serde::Serialize;

use crate::digitsets::IntSet;
use crate::hadamard::{verify_triple, zero_orders};
use crate::numtheory::{divisors, prime_power};

/// Prime powers `s | N` with `Φ_s | P_A`, the conditions (T1) and (T2), and the
/// spectrum they certify.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct CMProfile {
    pub digits: IntSet,
    pub base: u64,
    /// `A mod N`, on which everything below is computed.
    pub residues: IntSet,
    pub distinct_mod_n: bool,
    pub prime_powers: Vec<u64>,
    pub t1: bool,
    pub t2: bool,
    /// First product of distinct prime powers `s_1 … s_k` with `Φ_{s_1…s_k} ∤ P_A`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub t2_witness: Option<Vec<u64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub laba_spectrum: Option<IntSet>,
}

impl CMProfile {
    pub fn t1_t2(&self) -> bool {
        self.t1 && self.t2
    }
}

/// `{Σ ε_s N/s : 0 <= ε_s < p}` over `s = p^a` in `prime_powers`.
pub fn laba_spectrum(n: u64, prime_powers: &[u64]) -> IntSet {
    let mut acc = vec![0u64];
    for &s in prime_powers {
        let (p, _) = prime_power(s).expect("prime power");
        let step = n / s;
        acc = acc.iter().flat_map(|&x| (0..p).map(move |e| x + e * step)).collect();
    }
    IntSet::new(acc.into_iter().map(BigInt::from))
}

/// Exact profile of `A mod N`.
pub fn cm_profile(digits: &IntSet, n: u64) -> CMProfile {
    let residues = IntSet::new(digits.residues(n).into_iter().map(BigInt::from));
    let distinct_mod_n = residues.len() == digits.len();
    let zeros = zero_orders(n, &residues);
    let prime_powers: Vec<u64> = divisors(n)
        .into_iter()
        .filter(|&s| prime_power(s).is_some() && zeros.contains(&s))
        .collect();
    let primes: Vec<u64> = prime_powers
        .iter()
        .map(|&s| prime_power(s).expect("prime power").0)
        .collect();
    let t1 = primes.iter().product::<u64>() == residues.len() as u64;

    // Products of prime powers from pairwise distinct primes, at least two factors.
    let mut by_prime: BTreeMap<u64, Vec<u64>> = BTreeMap::new();
    for (&s, &p) in prime_powers.iter().zip(&primes) {
        by_prime.entry(p).or_default().push(s);
    }
    let mut choices: Vec<Vec<u64>> = vec![Vec::new()];
    for powers in by_prime.values() {
        let mut next = Vec::new();
        for c in &choices {
            next.push(c.clone());
            for &s in powers {
                let mut longer = c.clone();
                longer.push(s);
                next.push(longer);
            }
        }
        choices = next;
    }
    let t2_witness = choices
        .into_iter()
        .filter(|c| c.len() >= 2)
        .find(|c| !zeros.contains(&c.iter().product::<u64>()));
    let t2 = t2_witness.is_none();

    let laba = (t1 && t2).then(|| laba_spectrum(n, &prime_powers));
    if let Some(l) = &laba {
        assert!(
            verify_triple(n, &residues, l).is_ok(),
            "(T1) and (T2) hold but the spectrum {l} fails for {residues} mod {n}"
        );
    }
    CMProfile {
        digits: digits.clone(),
        base: n,
        residues,
        distinct_mod_n,
        prime_powers,
        t1,
        t2,
        t2_witness,
        laba_spectrum: laba,
    }
}
