use num_bigint::BigInt;
use serde::Serialize;

use super::profile::{cm_profile, CMProfile};
use crate::digitsets::{covers_residues_once, IntSet};
use crate::par;

/// Default node budget per search branch.
pub const DEFAULT_TILE_BUDGET: u64 = 10_000;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum TileVerdict {
    TilesByT1T2,
    NotTileByT1Failure,
    Unknown,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ExhaustiveTiling {
    /// `None` when the budget ran out before an answer.
    pub tiles: Option<bool>,
    /// A set `B` with `0 ∈ B` and `A ⊕ B = Z_N`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub complement: Option<IntSet>,
    pub nodes: u64,
    pub budget: u64,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct TileCheck {
    pub verdict: TileVerdict,
    pub profile: CMProfile,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub exhaustive: Option<ExhaustiveTiling>,
}

impl TileCheck {
    /// The exact answer if one is known.
    pub fn tiles(&self) -> Option<bool> {
        match (&self.exhaustive, self.verdict) {
            (Some(ExhaustiveTiling { tiles: Some(t), .. }), _) => Some(*t),
            (_, TileVerdict::TilesByT1T2) => Some(self.profile.distinct_mod_n),
            (_, TileVerdict::NotTileByT1Failure) => Some(false),
            _ => None,
        }
    }
}

/// (T1) with (T2) gives a tiling; a failure of (T1) rules one out. With a budget,
/// an exhaustive search for a complement runs as well.
pub fn check_tile_zn(digits: &IntSet, n: u64, budget: Option<u64>) -> TileCheck {
    let profile = cm_profile(digits, n);
    let verdict = if !profile.distinct_mod_n || !profile.t1 {
        TileVerdict::NotTileByT1Failure
    } else if profile.t2 {
        TileVerdict::TilesByT1T2
    } else {
        TileVerdict::Unknown
    };
    let exhaustive = budget.map(|b| exhaustive_tiling(digits, n, b));
    TileCheck {
        verdict,
        profile,
        exhaustive,
    }
}

/// `A ⊕ B` is direct and covers every residue mod `N` once.
pub fn confirm_tiling(a: &IntSet, b: &IntSet, n: u64) -> bool {
    match a.direct_sum(b) {
        Ok(sum) => sum.len() as u64 == n && covers_residues_once(&sum, n),
        Err(_) => false,
    }
}

struct Search<'a> {
    n: usize,
    a: &'a [usize],
    covered: Vec<bool>,
    chosen: Vec<usize>,
    nodes: u64,
    budget: u64,
}

impl Search<'_> {
    fn fits(&self, b: usize) -> bool {
        self.a.iter().all(|&x| !self.covered[(x + b) % self.n])
    }

    fn mark(&mut self, b: usize, value: bool) {
        for &x in self.a {
            self.covered[(x + b) % self.n] = value;
        }
    }

    /// `Some(true)` on a full cover, `Some(false)` when none exists below this node,
    /// `None` when the budget ran out.
    fn run(&mut self) -> Option<bool> {
        let Some(x) = self.covered.iter().position(|c| !c) else {
            return Some(true);
        };
        self.nodes += 1;
        if self.nodes > self.budget {
            return None;
        }
        let mut exhausted = false;
        for i in 0..self.a.len() {
            let b = (x + self.n - self.a[i]) % self.n;
            if !self.fits(b) {
                continue;
            }
            self.mark(b, true);
            self.chosen.push(b);
            match self.run() {
                Some(true) => return Some(true),
                Some(false) => {}
                None => exhausted = true,
            }
            self.chosen.pop();
            self.mark(b, false);
            if exhausted {
                return None;
            }
        }
        Some(false)
    }
}

/// Exact-cover search for `B` with `A ⊕ B ≡ Z_N`.
///
/// Translating `B` lets the residue `0` be covered by the first element of `A`;
/// the choices for the next uncovered residue are searched in parallel, each with
/// its own node budget, and the first success in order is reported.
pub fn exhaustive_tiling(digits: &IntSet, n: u64, budget: u64) -> ExhaustiveTiling {
    let a: Vec<usize> = digits.residues(n).into_iter().map(|r| r as usize).collect();
    let mut distinct = a.clone();
    distinct.sort_unstable();
    distinct.dedup();
    let n_us = n as usize;
    if distinct.len() != a.len() || a.is_empty() || !n_us.is_multiple_of(a.len()) {
        return ExhaustiveTiling {
            tiles: Some(false),
            complement: None,
            nodes: 0,
            budget,
        };
    }
    let a = distinct;
    let first = (n_us - a[0]) % n_us;
    let mut root = Search {
        n: n_us,
        a: &a,
        covered: vec![false; n_us],
        chosen: vec![first],
        nodes: 1,
        budget,
    };
    root.mark(first, true);
    let Some(x) = root.covered.iter().position(|c| !c) else {
        return finish(Some(true), &root.chosen, n_us, 1, budget);
    };
    let branches: Vec<usize> = a
        .iter()
        .map(|&ai| (x + n_us - ai) % n_us)
        .filter(|&b| root.fits(b))
        .collect();
    let outcomes = par::map(&branches, |&b| {
        let mut s = Search {
            n: n_us,
            a: &a,
            covered: root.covered.clone(),
            chosen: root.chosen.clone(),
            nodes: 0,
            budget,
        };
        s.mark(b, true);
        s.chosen.push(b);
        let r = s.run();
        (r, s.chosen, s.nodes)
    });
    let nodes = 1 + outcomes.iter().map(|(_, _, k)| k).sum::<u64>();
    if let Some((_, chosen, _)) = outcomes.iter().find(|(r, _, _)| *r == Some(true)) {
        return finish(Some(true), chosen, n_us, nodes, budget);
    }
    let answer = if outcomes.iter().any(|(r, _, _)| r.is_none()) {
        None
    } else {
        Some(false)
    };
    finish(answer, &[], n_us, nodes, budget)
}

fn finish(tiles: Option<bool>, chosen: &[usize], n: usize, nodes: u64, budget: u64) -> ExhaustiveTiling {
    let complement = (tiles == Some(true)).then(|| {
        let base = *chosen.iter().min().expect("nonempty complement");
        IntSet::new(chosen.iter().map(|&b| BigInt::from((b + n - base) % n)))
    });
    ExhaustiveTiling {
        tiles,
        complement,
        nodes,
        budget,
    }
}
