//! Base belief tables for the three information regimes.
//!
//! `base[i][k]` is agent `i`'s prior that a member of group `k` shares `i`'s
//! hidden type. Rational priors are the census share of `i`'s own type in
//! group `k`. Biased priors shift that anchor toward 1 for `i`'s own group
//! and toward 0 for every other group by a per-agent factor drawn from a
//! Beta distribution.

use std::io::Write;

use rand::Rng;
use rand_distr::{Beta, Distribution};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{NetworkState, Population};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BeliefTable {
    n: usize,
    groups: usize,
    base: Vec<f64>,
    gamma: Vec<f64>,
}

impl BeliefTable {
    /// Table from an explicit row-major `n x groups` matrix.
    pub fn from_matrix(n: usize, groups: usize, base: Vec<f64>, gamma: Vec<f64>) -> Result<Self> {
        if base.len() != n * groups || gamma.len() != n {
            return Err(Error::Beliefs(format!(
                "expected {} beliefs and {n} adjustment factors, got {} and {}",
                n * groups,
                base.len(),
                gamma.len()
            )));
        }
        if let Some(bad) = base.iter().chain(&gamma).find(|p| !(0.0..=1.0).contains(*p)) {
            return Err(Error::Beliefs(format!("entry {bad} outside [0, 1]")));
        }
        Ok(BeliefTable { n, groups, base, gamma })
    }

    /// Every agent holds belief `p` about every group.
    pub fn uniform(n: usize, groups: usize, p: f64) -> Result<Self> {
        BeliefTable::from_matrix(n, groups, vec![p; n * groups], vec![0.0; n])
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn group_count(&self) -> usize {
        self.groups
    }

    #[inline]
    pub fn get(&self, agent: usize, group: usize) -> f64 {
        self.base[agent * self.groups + group]
    }

    pub fn set(&mut self, agent: usize, group: usize, p: f64) -> Result<()> {
        if !(0.0..=1.0).contains(&p) {
            return Err(Error::Beliefs(format!("entry {p} outside [0, 1]")));
        }
        self.base[agent * self.groups + group] = p;
        Ok(())
    }

    pub fn gamma(&self, agent: usize) -> f64 {
        self.gamma[agent]
    }

    /// Write `agent,group,gamma,belief_g0,belief_g1,...` rows.
    pub fn write_csv<W: Write>(&self, pop: &Population, mut out: W) -> std::io::Result<()> {
        write!(out, "agent,group,gamma")?;
        for k in 0..self.groups {
            write!(out, ",belief_g{k}")?;
        }
        writeln!(out)?;
        for i in 0..self.n {
            write!(out, "{i},{},{}", pop.group(i), self.gamma[i])?;
            for k in 0..self.groups {
                write!(out, ",{}", self.get(i, k))?;
            }
            writeln!(out)?;
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BiasParams {
    pub alpha: f64,
    pub beta: f64,
}

impl Default for BiasParams {
    fn default() -> Self {
        BiasParams { alpha: 1.0, beta: 7.0 }
    }
}

impl BiasParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.alpha > 0.0 && self.alpha.is_finite() && self.beta > 0.0) {
            return Err(Error::Beliefs(format!(
                "Beta shapes must be positive (alpha finite), got ({}, {})",
                self.alpha, self.beta
            )));
        }
        Ok(())
    }
}

/// Share of agent `i`'s own type among members of `group`.
fn anchor(pop: &Population, i: usize, group: usize) -> f64 {
    pop.group_type_count(group, pop.kind(i)) as f64 / pop.group_sizes()[group] as f64
}

pub fn rational_base_beliefs(pop: &Population) -> BeliefTable {
    let (n, k) = (pop.n(), pop.group_count());
    let base = (0..n).flat_map(|i| (0..k).map(move |g| anchor(pop, i, g))).collect();
    BeliefTable { n, groups: k, base, gamma: vec![0.0; n] }
}

/// Shift rational anchors by per-agent adjustment factors `gamma`.
pub fn biased_from_gamma(pop: &Population, gamma: Vec<f64>) -> Result<BeliefTable> {
    let (n, k) = (pop.n(), pop.group_count());
    if gamma.len() != n {
        return Err(Error::Beliefs(format!("{} adjustment factors for {n} agents", gamma.len())));
    }
    let mut base = Vec::with_capacity(n * k);
    for i in 0..n {
        let g = gamma[i];
        for group in 0..k {
            let r = anchor(pop, i, group);
            base.push(if group == pop.group(i) { r + (1.0 - r) * g } else { r - r * g });
        }
    }
    BeliefTable::from_matrix(n, k, base, gamma)
}

/// One `gamma ~ Beta(alpha, beta)` per agent, drawn in agent order. An
/// infinite `beta` is the degenerate limit `gamma = 0`.
pub fn draw_gamma<R: Rng + ?Sized>(n: usize, params: BiasParams, rng: &mut R) -> Result<Vec<f64>> {
    params.validate()?;
    if params.beta.is_infinite() {
        return Ok(vec![0.0; n]);
    }
    let dist = Beta::new(params.alpha, params.beta).map_err(|e| Error::Beliefs(e.to_string()))?;
    Ok((0..n).map(|_| dist.sample(rng)).collect())
}

pub fn biased_base_beliefs<R: Rng + ?Sized>(pop: &Population, params: BiasParams, rng: &mut R) -> Result<BeliefTable> {
    let gamma = draw_gamma(pop.n(), params, rng)?;
    biased_from_gamma(pop, gamma)
}

/// Memory matrix for the complete-information regime: everyone known.
pub fn complete_info_memory(pop: &Population) -> NetworkState {
    NetworkState::fully_informed(pop.n())
}

/// Belief after memory: certainty once the pair has met, the base prior
/// otherwise.
pub fn effective_belief(i: usize, j: usize, base: &BeliefTable, net: &NetworkState, pop: &Population) -> f64 {
    if net.knows(i, j) {
        if pop.kind(i) == pop.kind(j) {
            1.0
        } else {
            0.0
        }
    } else {
        base.get(i, pop.group(j))
    }
}

#[cfg(test)]
mod tests {
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    use super::*;
    use crate::metrics::discovery;

    fn base_pop() -> Population {
        Population::from_composition(&[vec![12, 12], vec![12, 12]]).unwrap()
    }

    #[test]
    fn rational_on_base_population_is_half() {
        let t = rational_base_beliefs(&base_pop());
        assert!((0..48).all(|i| t.get(i, 0) == 0.5 && t.get(i, 1) == 0.5));
    }

    #[test]
    fn rational_on_correlated_population() {
        let pop = Population::from_composition(&[vec![18, 6], vec![6, 18]]).unwrap();
        let t = rational_base_beliefs(&pop);
        // agent 0: group 0, type 0
        assert_eq!(t.get(0, 0), 0.75);
        assert_eq!(t.get(0, 1), 0.25);
    }

    #[test]
    fn single_type_group_is_certain() {
        let pop = Population::from_composition(&[vec![3, 0], vec![1, 1]]).unwrap();
        assert_eq!(rational_base_beliefs(&pop).get(0, 0), 1.0);
    }

    #[test]
    fn zero_gamma_is_rational() {
        let pop = base_pop();
        assert_eq!(
            biased_from_gamma(&pop, vec![0.0; 48]).unwrap().base,
            rational_base_beliefs(&pop).base
        );
    }

    #[test]
    fn unit_gamma_is_maximal_bias() {
        let pop = base_pop();
        let t = biased_from_gamma(&pop, vec![1.0; 48]).unwrap();
        assert_eq!(t.get(0, 0), 1.0);
        assert_eq!(t.get(0, 1), 0.0);
    }

    #[test]
    fn same_seed_same_table() {
        let pop = base_pop();
        let a = biased_base_beliefs(&pop, BiasParams::default(), &mut ChaCha8Rng::seed_from_u64(9)).unwrap();
        let b = biased_base_beliefs(&pop, BiasParams::default(), &mut ChaCha8Rng::seed_from_u64(9)).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn effective_belief_resolves_on_meeting() {
        let pop = Population::from_labels(vec![0, 0, 1], vec![0, 0, 1]).unwrap();
        let t = BeliefTable::uniform(3, 2, 0.3).unwrap();
        let mut net = NetworkState::empty(3);
        assert_eq!(effective_belief(0, 1, &t, &net, &pop), 0.3);
        net.add_link(0, 1).unwrap();
        net.add_link(0, 2).unwrap();
        assert_eq!(effective_belief(0, 1, &t, &net, &pop), 1.0);
        assert_eq!(effective_belief(0, 2, &t, &net, &pop), 0.0);
        net.remove_link(0, 1).unwrap();
        assert_eq!(effective_belief(0, 1, &t, &net, &pop), 1.0);
    }

    #[test]
    fn complete_memory_is_all_ones() {
        let pop = Population::from_labels(vec![0, 0, 1], vec![0, 1, 1]).unwrap();
        let net = complete_info_memory(&pop);
        assert_eq!(net.memory_ones(), 9);
        assert_eq!(discovery(&net), 1.0);
    }

    #[test]
    fn rejects_out_of_range_entries() {
        assert!(BeliefTable::uniform(2, 1, 1.5).is_err());
        assert!(BiasParams { alpha: 1.0, beta: 0.0 }.validate().is_err());
    }
}
