//! Period-by-period network formation.
//!
//! Each period visits every unordered pair in a fresh uniformly random order
//! and modifies the first unstable pair it meets: a link is cut when either
//! endpoint strictly gains, a missing link is added (and both types revealed)
//! when both endpoints expect a non-negative gain. A period that visits every
//! pair without finding one is a certificate of pairwise stability.
//!
//! The memory matrix only grows, so any cycle of the process happens at a
//! fixed memory. Revisit detection therefore keys on the graph alone and is
//! reset whenever memory grows.

use std::collections::HashMap;
use std::io::Write;

use rand::seq::SliceRandom;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::beliefs::BeliefTable;
use crate::error::Result;
use crate::model::{CostStructure, DistanceMatrix, NetworkState, PairJudge, Population, Witness};
use crate::rng::{stream, Stream};

#[derive(Clone, Debug)]
pub struct SimState {
    pub net: NetworkState,
    pub pop: Population,
    pub costs: CostStructure,
    pub beliefs: BeliefTable,
    pub period: u64,
    pub seed: u64,
    rng: ChaCha8Rng,
}

impl SimState {
    /// The pair-selection stream is derived from `seed`.
    pub fn new(net: NetworkState, pop: Population, costs: CostStructure, beliefs: BeliefTable, seed: u64) -> Self {
        SimState { net, pop, costs, beliefs, period: 0, seed, rng: stream(seed, Stream::PairSelection) }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Action {
    Add,
    Delete,
}

impl Action {
    pub fn as_str(self) -> &'static str {
        match self {
            Action::Add => "add",
            Action::Delete => "delete",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum StepOutcome {
    Modified { pair: (usize, usize), action: Action },
    Stable,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TraceEvent {
    pub period: u64,
    pub i: usize,
    pub j: usize,
    pub action: Action,
    /// Ones in the memory matrix after the event.
    pub m_ones: usize,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum RunStatus {
    Converged,
    PresumedCycle,
    BudgetExhausted,
}

impl RunStatus {
    pub fn as_str(self) -> &'static str {
        match self {
            RunStatus::Converged => "converged",
            RunStatus::PresumedCycle => "presumed_cycle",
            RunStatus::BudgetExhausted => "budget_exhausted",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Limits {
    pub max_periods: u64,
    pub cycle_window: u64,
}

impl Limits {
    /// `10 n^2` periods, revisits detected within `n^2` periods.
    pub fn for_agents(n: usize) -> Self {
        let n2 = (n * n) as u64;
        Limits { max_periods: 10 * n2, cycle_window: n2 }
    }
}

#[derive(Clone, Debug)]
pub struct RunOutcome {
    pub status: RunStatus,
    pub final_state: SimState,
    pub trace: Option<Vec<TraceEvent>>,
}

impl RunOutcome {
    pub fn periods(&self) -> u64 {
        self.final_state.period
    }
}

/// A run in progress: the state plus the all-pairs distance cache and the
/// pair list reshuffled every period.
pub struct Simulation {
    state: SimState,
    dist: DistanceMatrix,
    pairs: Vec<(usize, usize)>,
    trace: Option<Vec<TraceEvent>>,
}

impl Simulation {
    pub fn new(state: SimState) -> Self {
        let n = state.net.n();
        let dist = DistanceMatrix::new(&state.net);
        let pairs = (0..n).flat_map(|i| ((i + 1)..n).map(move |j| (i, j))).collect();
        Simulation { state, dist, pairs, trace: None }
    }

    pub fn with_trace(mut self) -> Self {
        self.trace = Some(Vec::new());
        self
    }

    pub fn state(&self) -> &SimState {
        &self.state
    }

    /// Link `ij` and reveal both types. Returns whether memory grew.
    pub fn apply_meeting(&mut self, i: usize, j: usize) -> Result<bool> {
        let grew = self.state.net.add_link(i, j)?;
        self.dist.link_added(i, j);
        Ok(grew)
    }

    fn apply_deletion(&mut self, i: usize, j: usize) -> Result<()> {
        self.state.net.remove_link(i, j)?;
        self.dist.recompute(&self.state.net);
        Ok(())
    }

    /// One period.
    pub fn step(&mut self) -> StepOutcome {
        let SimState { net, pop, costs, beliefs, rng, .. } = &mut self.state;
        self.pairs.shuffle(rng);
        let mut judge = PairJudge::new(pop, costs, beliefs);
        let found = self.pairs.iter().find_map(|&(i, j)| judge.judge(net, &self.dist, i, j));
        drop(judge);
        self.state.period += 1;

        let Some(witness) = found else {
            return StepOutcome::Stable;
        };
        let (i, j) = witness.pair();
        let action = match witness {
            Witness::Delete { .. } => {
                self.apply_deletion(i, j).expect("judged link exists");
                Action::Delete
            }
            Witness::Add { .. } => {
                self.apply_meeting(i, j).expect("judged pair is unlinked");
                Action::Add
            }
        };
        if let Some(trace) = self.trace.as_mut() {
            trace.push(TraceEvent {
                period: self.state.period,
                i,
                j,
                action,
                m_ones: self.state.net.memory_ones(),
            });
        }
        StepOutcome::Modified { pair: (i, j), action }
    }

    pub fn run(mut self, limits: Limits) -> RunOutcome {
        let mut seen: HashMap<Vec<u64>, u64> = HashMap::new();
        let mut m_ones = self.state.net.memory_ones();
        seen.insert(self.state.net.adjacency().as_words().to_vec(), self.state.period);

        let status = loop {
            if self.state.period >= limits.max_periods {
                break RunStatus::BudgetExhausted;
            }
            match self.step() {
                StepOutcome::Stable => break RunStatus::Converged,
                StepOutcome::Modified { .. } => {
                    let now = self.state.net.memory_ones();
                    if now > m_ones {
                        m_ones = now;
                        seen.clear();
                    }
                    let key = self.state.net.adjacency().as_words().to_vec();
                    let period = self.state.period;
                    if let Some(&first) = seen.get(&key) {
                        if period - first <= limits.cycle_window {
                            break RunStatus::PresumedCycle;
                        }
                    }
                    seen.insert(key, period);
                }
            }
        };
        RunOutcome { status, final_state: self.state, trace: self.trace }
    }
}

/// Convenience wrapper: build a simulation from `state` and run it.
pub fn run(state: SimState, limits: Limits, trace: bool) -> RunOutcome {
    let sim = Simulation::new(state);
    let sim = if trace { sim.with_trace() } else { sim };
    sim.run(limits)
}

pub fn write_trace_csv<W: Write>(events: &[TraceEvent], mut out: W) -> std::io::Result<()> {
    writeln!(out, "period,i,j,action,m_ones")?;
    for e in events {
        writeln!(out, "{},{},{},{},{}", e.period, e.i, e.j, e.action.as_str(), e.m_ones)?;
    }
    Ok(())
}
