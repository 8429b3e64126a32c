//! Exhaustive enumeration of pairwise-stable `(g, M)` states on small
//! populations.
//!
//! Stability is a conjunction over pairs, and the clause for an unlinked
//! pair depends on the memory matrix only through that pair's own entry.
//! For each graph the stable memory matrices therefore form a product set:
//! every unlinked pair independently admits "known", "unknown", both or
//! neither. [`StableFamily`] stores that product without materialising it.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::beliefs::BeliefTable;
use crate::error::{Error, Result};
use crate::graph::BitMatrix;
use crate::model::{CostStructure, DistanceMatrix, NetworkState, PairJudge, Population};

pub const MAX_ENUMERATION_AGENTS: usize = 8;

/// Unordered pairs of `0..n` in lexicographic order; bit `p` of a pair mask
/// refers to `pairs(n)[p]`.
pub fn pairs(n: usize) -> Vec<(usize, usize)> {
    (0..n).flat_map(|i| ((i + 1)..n).map(move |j| (i, j))).collect()
}

pub fn pair_index(n: usize, i: usize, j: usize) -> usize {
    let (i, j) = if i < j { (i, j) } else { (j, i) };
    i * n - i * (i + 1) / 2 + (j - i - 1)
}

/// A single `(g, M)` state; `known` is a superset of `edges`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct StableState {
    pub n: usize,
    pub edges: u64,
    pub known: u64,
}

impl StableState {
    pub fn network(&self) -> NetworkState {
        let mut memory = BitMatrix::identity(self.n);
        for (p, (i, j)) in pairs(self.n).into_iter().enumerate() {
            if self.known >> p & 1 == 1 {
                memory.set(i, j);
                memory.set(j, i);
            }
        }
        NetworkState::from_parts(self.n, &self.edge_list(), Some(memory)).expect("valid enumerated state")
    }

    pub fn edge_list(&self) -> Vec<(usize, usize)> {
        mask_pairs(self.n, self.edges)
    }

    pub fn knows(&self, i: usize, j: usize) -> bool {
        i == j || self.known >> pair_index(self.n, i, j) & 1 == 1
    }

    pub fn has_isolated_agent(&self) -> bool {
        (0..self.n).any(|i| (0..self.n).all(|j| i == j || self.edges >> pair_index(self.n, i, j) & 1 == 0))
    }
}

fn mask_pairs(n: usize, mask: u64) -> Vec<(usize, usize)> {
    pairs(n).into_iter().enumerate().filter(|&(p, _)| mask >> p & 1 == 1).map(|(_, e)| e).collect()
}

/// All stable states sharing one graph.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct StableFamily {
    pub n: usize,
    pub edges: u64,
    /// Unlinked pairs that may be acquainted.
    pub known_ok: u64,
    /// Unlinked pairs that may be strangers.
    pub unknown_ok: u64,
}

impl StableFamily {
    fn unlinked(&self) -> u64 {
        let all = if self.n < 2 { 0 } else { (1u64 << (self.n * (self.n - 1) / 2)) - 1 };
        all & !self.edges
    }

    pub fn state_count(&self) -> u128 {
        let both = (self.known_ok & self.unknown_ok).count_ones();
        1u128 << both
    }

    /// Stable with every pair acquainted, i.e. under complete information.
    pub fn complete_info_stable(&self) -> bool {
        self.known_ok & self.unlinked() == self.unlinked()
    }

    /// Whether pair `ij` can be a pair of strangers in a stable state.
    pub fn admits_strangers(&self, i: usize, j: usize) -> bool {
        self.unknown_ok >> pair_index(self.n, i, j) & 1 == 1
    }

    pub fn contains(&self, s: &StableState) -> bool {
        if s.n != self.n || s.edges != self.edges {
            return false;
        }
        let unlinked = self.unlinked();
        let known = s.known & unlinked;
        let unknown = !s.known & unlinked;
        known & !self.known_ok == 0 && unknown & !self.unknown_ok == 0
    }

    pub fn full_memory_state(&self) -> StableState {
        StableState { n: self.n, edges: self.edges, known: self.edges | self.unlinked() }
    }

    /// Every state of the family, in increasing order of `known`.
    pub fn states(&self) -> impl Iterator<Item = StableState> + '_ {
        let forced = self.edges | (self.known_ok & !self.unknown_ok);
        let free: Vec<usize> = (0..64).filter(|&p| (self.known_ok & self.unknown_ok) >> p & 1 == 1).collect();
        (0..1u64 << free.len()).map(move |choice| {
            let known = free
                .iter()
                .enumerate()
                .filter(|&(b, _)| choice >> b & 1 == 1)
                .fold(forced, |acc, (_, &p)| acc | 1 << p);
            StableState { n: self.n, edges: self.edges, known }
        })
    }
}

fn check_size(pop: &Population, max_n: usize) -> Result<()> {
    let max = max_n.min(MAX_ENUMERATION_AGENTS);
    if pop.n() > max {
        return Err(Error::TooLarge { n: pop.n(), max });
    }
    Ok(())
}

fn family_of(
    edges: u64,
    all_pairs: &[(usize, usize)],
    pop: &Population,
    costs: &CostStructure,
    beliefs: &BeliefTable,
) -> Option<StableFamily> {
    let n = pop.n();
    let edge_list = mask_pairs(n, edges);
    let strangers = NetworkState::from_parts(n, &edge_list, None).ok()?;
    let informed = NetworkState::from_parts(n, &edge_list, Some(BitMatrix::ones(n))).ok()?;
    let dist = DistanceMatrix::new(&strangers);
    let mut judge = PairJudge::new(pop, costs, beliefs);
    let (mut known_ok, mut unknown_ok) = (0u64, 0u64);
    for (p, &(i, j)) in all_pairs.iter().enumerate() {
        if edges >> p & 1 == 1 {
            judge.judge(&strangers, &dist, i, j).is_none().then_some(())?;
        } else {
            let k = judge.judge(&informed, &dist, i, j).is_none();
            let u = judge.judge(&strangers, &dist, i, j).is_none();
            if !k && !u {
                return None;
            }
            known_ok |= (k as u64) << p;
            unknown_ok |= (u as u64) << p;
        }
    }
    Some(StableFamily { n, edges, known_ok, unknown_ok })
}

/// Stable families for every graph on `pop.n()` agents, ordered by edge mask.
pub fn stable_families(
    pop: &Population,
    costs: &CostStructure,
    beliefs: &BeliefTable,
    max_n: usize,
) -> Result<Vec<StableFamily>> {
    check_size(pop, max_n)?;
    let all_pairs = pairs(pop.n());
    let graphs = 1u64 << all_pairs.len();
    Ok((0..graphs)
        .into_par_iter()
        .filter_map(|edges| family_of(edges, &all_pairs, pop, costs, beliefs))
        .collect())
}

/// Every pairwise-stable `(g, M)` with `M` symmetric, unit-diagonal and
/// containing the links of `g`.
pub fn enumerate_stable_states(
    pop: &Population,
    costs: &CostStructure,
    beliefs: &BeliefTable,
    max_n: usize,
) -> Result<Vec<StableState>> {
    let families = stable_families(pop, costs, beliefs, max_n)?;
    Ok(families.iter().flat_map(|f| f.states().collect::<Vec<_>>()).collect())
}
