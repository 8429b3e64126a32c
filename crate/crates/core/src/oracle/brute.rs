//! Literal evaluation of utilities and both stability clauses on adjacency
//! matrices, written independently of the incremental machinery in
//! [`crate::model`]: every utility is recomputed from a fresh BFS on an
//! explicitly modified copy of the graph.

use std::collections::VecDeque;

use crate::beliefs::BeliefTable;
use crate::model::{CostStructure, NetworkState, Population};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DenseState {
    pub adj: Vec<Vec<bool>>,
    pub memory: Vec<Vec<bool>>,
}

impl DenseState {
    pub fn from_network(net: &NetworkState) -> Self {
        let n = net.n();
        DenseState {
            adj: (0..n).map(|i| (0..n).map(|j| net.has_link(i, j)).collect()).collect(),
            memory: (0..n).map(|i| (0..n).map(|j| net.knows(i, j)).collect()).collect(),
        }
    }

    pub fn n(&self) -> usize {
        self.adj.len()
    }
}

fn distances(adj: &[Vec<bool>], src: usize) -> Vec<Option<usize>> {
    let n = adj.len();
    let mut dist = vec![None; n];
    dist[src] = Some(0);
    let mut queue = VecDeque::from([src]);
    while let Some(v) = queue.pop_front() {
        let d = dist[v].unwrap();
        for w in 0..n {
            if adj[v][w] && dist[w].is_none() {
                dist[w] = Some(d + 1);
                queue.push_back(w);
            }
        }
    }
    dist
}

fn benefits(adj: &[Vec<bool>], delta: f64, i: usize) -> f64 {
    distances(adj, i)
        .iter()
        .enumerate()
        .filter(|&(k, _)| k != i)
        .map(|(_, d)| d.map_or(0.0, |d| delta.powi(d as i32)))
        .sum()
}

pub fn utility(adj: &[Vec<bool>], pop: &Population, costs: &CostStructure, i: usize) -> f64 {
    let link_costs: f64 = (0..adj.len())
        .filter(|&j| adj[i][j])
        .map(|j| costs.cost(pop.kind(i), pop.kind(j)))
        .sum();
    benefits(adj, costs.delta, i) - link_costs
}

/// Belief-weighted cost over `j`'s possible types. `i` puts mass `p` on its
/// own type; every other type costs `c_high`, so the remaining `1 - p` is
/// priced at `c_high` however it is split.
fn expected_cost(
    state: &DenseState,
    pop: &Population,
    costs: &CostStructure,
    beliefs: &BeliefTable,
    i: usize,
    j: usize,
) -> f64 {
    if state.memory[i][j] {
        return costs.cost(pop.kind(i), pop.kind(j));
    }
    let p = beliefs.get(i, pop.group(j));
    p * costs.c_low + (1.0 - p) * costs.c_high
}

/// `E_i[u_i(g+ij)] - u_i(g)` with `E_i[u_i(g+ij)]` taken term by term: the
/// direct link's benefit less its expected cost, plus everything else in
/// `g + ij` at its realised value.
pub fn expected_gain(
    state: &DenseState,
    pop: &Population,
    costs: &CostStructure,
    beliefs: &BeliefTable,
    i: usize,
    j: usize,
) -> f64 {
    let mut plus = state.adj.clone();
    plus[i][j] = true;
    plus[j][i] = true;
    let dist = distances(&plus, i);
    let direct = costs.delta - expected_cost(state, pop, costs, beliefs, i, j);
    let rest_benefit: f64 = (0..state.n())
        .filter(|&k| k != i && k != j)
        .map(|k| dist[k].map_or(0.0, |d| costs.delta.powi(d as i32)))
        .sum();
    let rest_cost: f64 = (0..state.n())
        .filter(|&k| k != j && state.adj[i][k])
        .map(|k| costs.cost(pop.kind(i), pop.kind(k)))
        .sum();
    direct + rest_benefit - rest_cost - utility(&state.adj, pop, costs, i)
}

/// Both clauses, evaluated literally over every pair.
pub fn is_stable(state: &DenseState, pop: &Population, costs: &CostStructure, beliefs: &BeliefTable) -> bool {
    let n = state.n();
    for i in 0..n {
        for j in (i + 1)..n {
            if state.adj[i][j] {
                let mut minus = state.adj.clone();
                minus[i][j] = false;
                minus[j][i] = false;
                for a in [i, j] {
                    if utility(&minus, pop, costs, a) > utility(&state.adj, pop, costs, a) {
                        return false;
                    }
                }
            } else if expected_gain(state, pop, costs, beliefs, i, j) >= 0.0
                && expected_gain(state, pop, costs, beliefs, j, i) >= 0.0
            {
                return false;
            }
        }
    }
    true
}

/// Sum of realised utilities.
pub fn total_utility(adj: &[Vec<bool>], pop: &Population, costs: &CostStructure) -> f64 {
    (0..adj.len()).map(|i| utility(adj, pop, costs, i)).sum()
}

/// Connected component containing `i`.
pub fn component(adj: &[Vec<bool>], i: usize) -> Vec<usize> {
    distances(adj, i)
        .iter()
        .enumerate()
        .filter(|(_, d)| d.is_some())
        .map(|(k, _)| k)
        .collect()
}

/// Decayed benefit `i` gains when `ij` is added, by direct recomputation.
pub fn benefit_gain(adj: &[Vec<bool>], delta: f64, i: usize, j: usize) -> f64 {
    let mut plus = adj.to_vec();
    plus[i][j] = true;
    plus[j][i] = true;
    benefits(&plus, delta, i) - benefits(adj, delta, i)
}
