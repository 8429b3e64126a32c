//! Executable checks of the stability results: belief thresholds for
//! meeting and refusal, instability of the empty network, the inclusion of
//! complete-information stable networks, and segregated but inefficient
//! equilibria.

use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::brute::{self, DenseState};
use super::enumerate::{pair_index, pairs, stable_families, StableFamily, StableState};
use super::thresholds::{belief_thresholds, component_reach, refuse_threshold};
use crate::beliefs::{rational_base_beliefs, BeliefTable};
use crate::dynamics::{self, Action, Limits, RunStatus, SimState};
use crate::error::{Error, Result};
use crate::graph::BitMatrix;
use crate::model::{is_pairwise_stable, CostStructure, NetworkState, Population};
use crate::rng::{derive_seed, stream, Stream};

/// Largest population the claim checks enumerate over.
pub const CLAIM_MAX_AGENTS: usize = 6;
/// Largest population for the inclusion check between information regimes.
pub const SUBSET_MAX_AGENTS: usize = 5;
pub const DEFAULT_TRIALS: usize = 100;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Claim {
    /// Sufficiently optimistic pairs must know each other.
    P1,
    /// Beliefs exist that make any two agents meet, however high `c_H`.
    C1,
    /// Exact condition for the empty, ignorant network to be unstable.
    P2,
    /// Discovery from the empty network: none, some, or complete.
    C2,
    /// Pessimistic agents refuse to link into another component.
    L1,
    /// Complete-information stable networks are stable under incomplete
    /// information.
    P3i,
    /// ... but not conversely.
    P3ii,
    /// Segregated equilibria that are not efficient.
    P4,
    /// Inclusion of the stable sets, reported by [`check_subset_relation`].
    T1,
}

impl Claim {
    pub const ALL: [Claim; 8] =
        [Claim::P1, Claim::C1, Claim::P2, Claim::C2, Claim::L1, Claim::P3i, Claim::P3ii, Claim::P4];
}

impl fmt::Display for Claim {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Debug::fmt(self, f)
    }
}

impl FromStr for Claim {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        let all = Claim::ALL.iter().chain(std::iter::once(&Claim::T1));
        all.copied()
            .find(|c| c.to_string().eq_ignore_ascii_case(s))
            .ok_or_else(|| Error::Config(format!("unknown claim {s:?}")))
    }
}

/// Population, costs and base beliefs a claim is checked on.
#[derive(Clone, Debug)]
pub struct Scenario {
    pub name: String,
    pub pop: Population,
    pub costs: CostStructure,
    pub beliefs: BeliefTable,
}

impl Scenario {
    pub fn new(name: &str, groups: Vec<usize>, types: Vec<usize>, costs: (f64, f64, f64)) -> Result<Self> {
        let pop = Population::from_labels(groups, types)?;
        let costs = CostStructure::new(costs.0, costs.1, costs.2)?;
        let beliefs = rational_base_beliefs(&pop);
        Ok(Scenario { name: name.to_string(), pop, costs, beliefs })
    }

    /// Same belief `p` about every group.
    pub fn with_uniform_beliefs(mut self, p: f64) -> Result<Self> {
        self.beliefs = BeliefTable::uniform(self.pop.n(), self.pop.group_count(), p)?;
        Ok(self)
    }

    /// Belief `own` about one's own group and `other` about every other.
    pub fn with_group_beliefs(mut self, own: f64, other: f64) -> Result<Self> {
        let (n, k) = (self.pop.n(), self.pop.group_count());
        let mut table = BeliefTable::uniform(n, k, other)?;
        for i in 0..n {
            table.set(i, self.pop.group(i), own)?;
        }
        self.beliefs = table;
        Ok(self)
    }

    fn min_belief(&self, i: usize, j: usize) -> f64 {
        let b = &self.beliefs;
        b.get(i, self.pop.group(j)).min(b.get(j, self.pop.group(i)))
    }

    fn cost_close(&self) -> f64 {
        let d = self.costs.delta;
        d - d * d
    }

    fn params(&self) -> ReportParams {
        let n = self.pop.n();
        ReportParams {
            scenario: self.name.clone(),
            n,
            delta: self.costs.delta,
            c_low: self.costs.c_low,
            c_high: self.costs.c_high,
            groups: self.pop.groups().to_vec(),
            types: self.pop.types().to_vec(),
            beliefs: (0..n).map(|i| (0..self.pop.group_count()).map(|k| self.beliefs.get(i, k)).collect()).collect(),
        }
    }
}

/// The parameterisations each claim is confirmed on.
pub fn presets(claim: Claim) -> Result<Vec<Scenario>> {
    let base = (0.7, 0.2, 1.0);
    Ok(match claim {
        Claim::P1 => vec![
            Scenario::new("p1-optimistic", vec![0, 0, 0, 1, 1], vec![0, 1, 0, 1, 0], base)?
                .with_uniform_beliefs(0.99)?,
            // c_H <= delta - delta^2: any beliefs at all
            Scenario::new("p1-cheap-inter-type", vec![0, 0, 0, 1, 1], vec![0, 1, 0, 1, 0], (0.7, 0.1, 0.2))?
                .with_group_beliefs(0.1, 0.0)?,
        ],
        Claim::C1 => vec![Scenario::new("c1", vec![0, 0, 1, 1], vec![0, 1, 0, 1], base)?],
        Claim::P2 => vec![
            Scenario::new("p2-rational", vec![0, 0, 1, 1], vec![0, 1, 0, 1], base)?,
            Scenario::new("p2-cheap-inter-type", vec![0, 0, 1, 1], vec![0, 1, 0, 1], (0.7, 0.2, 0.6))?
                .with_uniform_beliefs(0.0)?,
        ],
        Claim::C2 => vec![
            Scenario::new("c2-pessimistic", vec![0, 0, 0, 1, 1], vec![0, 1, 0, 1, 1], base)?
                .with_uniform_beliefs(0.3)?,
            Scenario::new("c2-one-optimistic-group", vec![0, 0, 0, 1, 1], vec![0, 1, 0, 1, 1], base)?
                .with_group_beliefs(0.5, 0.3)?,
            Scenario::new("c2-optimistic", vec![0, 0, 0, 1, 1], vec![0, 1, 0, 1, 1], base)?
                .with_uniform_beliefs(0.99)?,
        ],
        Claim::L1 => {
            // agent 0 alone in its group; reach(5) = 2.66 < c_H, refusal below 0.4875
            let mut s = Scenario::new("l1-outsider", vec![0, 1, 1, 1, 1, 1], vec![0; 6], (0.7, 0.2, 5.0))?
                .with_uniform_beliefs(1.0)?;
            s.beliefs.set(0, 1, 0.45)?;
            vec![s]
        }
        Claim::P3i => vec![
            Scenario::new("p3i-two-types", vec![0, 0, 0, 1, 1], vec![0, 1, 1, 0, 1], base)?
                .with_uniform_beliefs(0.99)?,
            Scenario::new("p3i-one-type", vec![0, 0, 1], vec![0, 0, 0], base)?.with_uniform_beliefs(1.0)?,
        ],
        Claim::P3ii => {
            // refusal below (3 - 1.68) / 2.8 = 0.4714 for a 3-agent component
            let mut s = Scenario::new("p3ii-singleton", vec![0, 1, 1, 1], vec![0; 4], (0.7, 0.2, 3.0))?
                .with_uniform_beliefs(1.0)?;
            s.beliefs.set(0, 1, 0.2)?;
            vec![s]
        }
        Claim::P4 => vec![
            // within-group belief 1 >= 0.9964, across 0.3 < 0.4714
            Scenario::new("p4-two-triangles", vec![0, 0, 0, 1, 1, 1], vec![0; 6], (0.7, 0.2, 3.0))?
                .with_group_beliefs(1.0, 0.3)?,
        ],
        Claim::T1 => vec![
            Scenario::new("t1-one-type", vec![0, 0, 1], vec![0, 0, 0], base)?.with_uniform_beliefs(1.0)?,
            Scenario::new("t1-two-types", vec![0, 0, 1, 1], vec![0, 1, 0, 1], base)?.with_uniform_beliefs(0.99)?,
        ],
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Verdict {
    Confirmed,
    Violated,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReportParams {
    pub scenario: String,
    pub n: usize,
    pub delta: f64,
    pub c_low: f64,
    pub c_high: f64,
    pub groups: Vec<usize>,
    pub types: Vec<usize>,
    pub beliefs: Vec<Vec<f64>>,
}

/// A concrete state refuting a claim, or for existential claims the extent
/// of the search that found nothing.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Counterexample {
    pub edges: Vec<(usize, usize)>,
    /// Acquainted pairs beyond the links themselves.
    pub known: Vec<(usize, usize)>,
    pub pair: Option<(usize, usize)>,
    pub note: String,
}

impl Counterexample {
    fn from_state(net: &NetworkState, pair: Option<(usize, usize)>, note: String) -> Self {
        let n = net.n();
        let known = pairs(n).into_iter().filter(|&(i, j)| net.knows(i, j) && !net.has_link(i, j)).collect();
        Counterexample { edges: net.edges(), known, pair, note }
    }

    /// Rebuild the `(g, M)` state for replay.
    pub fn network(&self, n: usize) -> Result<NetworkState> {
        let mut memory = BitMatrix::identity(n);
        for &(i, j) in &self.known {
            memory.set(i, j);
            memory.set(j, i);
        }
        NetworkState::from_parts(n, &self.edges, Some(memory))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VerificationReport {
    pub claim: Claim,
    pub params: ReportParams,
    pub verdict: Verdict,
    pub counterexample: Option<Counterexample>,
    pub seed: u64,
    pub trials: usize,
    /// Individual assertions evaluated.
    pub checks: u64,
    pub notes: Vec<String>,
}

struct Checker {
    checks: u64,
    counterexample: Option<Counterexample>,
    notes: Vec<String>,
}

impl Checker {
    fn new() -> Self {
        Checker { checks: 0, counterexample: None, notes: Vec::new() }
    }

    /// Record one assertion; keeps the first failure.
    fn check(&mut self, ok: bool, fail: impl FnOnce() -> Counterexample) {
        self.checks += 1;
        if !ok && self.counterexample.is_none() {
            self.counterexample = Some(fail());
        }
    }

    fn report(self, claim: Claim, s: &Scenario, seed: u64, trials: usize) -> VerificationReport {
        VerificationReport {
            claim,
            params: s.params(),
            verdict: if self.counterexample.is_some() { Verdict::Violated } else { Verdict::Confirmed },
            counterexample: self.counterexample,
            seed,
            trials,
            checks: self.checks,
            notes: self.notes,
        }
    }
}

fn reject(claim: Claim, reason: String) -> Error {
    Error::Precondition { claim: claim.to_string(), reason }
}

fn require(claim: Claim, ok: bool, reason: impl FnOnce() -> String) -> Result<()> {
    if ok {
        Ok(())
    } else {
        Err(reject(claim, reason()))
    }
}

fn require_small(claim: Claim, s: &Scenario, max: usize) -> Result<()> {
    require(claim, s.pop.n() <= max, || format!("n = {} exceeds {max}", s.pop.n()))
}

fn require_cheap_intra(claim: Claim, s: &Scenario) -> Result<()> {
    let close = s.cost_close();
    require(claim, s.costs.c_low <= close, || {
        format!("c_L = {} > delta - delta^2 = {close}", s.costs.c_low)
    })
}

/// Runs from the empty, ignorant network with per-trial seeds.
fn trial_runs(s: &Scenario, trials: usize, seed: u64, trace: bool) -> Vec<(u64, dynamics::RunOutcome)> {
    let n = s.pop.n();
    (0..trials as u64)
        .map(|t| {
            let run_seed = derive_seed(seed, 0, t);
            let state = SimState::new(NetworkState::empty(n), s.pop.clone(), s.costs, s.beliefs.clone(), run_seed);
            (run_seed, dynamics::run(state, Limits::for_agents(n), trace))
        })
        .collect()
}

/// A state of `family` in which pair `p` are strangers, other free pairs
/// acquainted where allowed.
fn stranger_state(family: &StableFamily, p: usize) -> StableState {
    let mut s = family.full_memory_state();
    s.known &= !(1 << p);
    for (q, _) in pairs(family.n).iter().enumerate() {
        if q != p && family.edges >> q & 1 == 0 && family.known_ok >> q & 1 == 0 {
            s.known &= !(1 << q);
        }
    }
    s
}

/// All stable states admit acquaintance of every pair in `must_know`.
fn check_must_know(c: &mut Checker, families: &[StableFamily], must_know: &[(usize, usize)]) {
    for f in families {
        for &(i, j) in must_know {
            let p = pair_index(f.n, i, j);
            c.check(f.edges >> p & 1 == 1 || !f.admits_strangers(i, j), || {
                Counterexample::from_state(
                    &stranger_state(f, p).network(),
                    Some((i, j)),
                    "stable state with an above-threshold pair unacquainted".into(),
                )
            });
        }
    }
}

fn check_p1(s: &Scenario, trials: usize, seed: u64) -> Result<VerificationReport> {
    let claim = Claim::P1;
    require_small(claim, s, CLAIM_MAX_AGENTS)?;
    require_cheap_intra(claim, s)?;
    let t = belief_thresholds(&s.costs, None).meet_always;
    let must_know: Vec<_> =
        pairs(s.pop.n()).into_iter().filter(|&(i, j)| !t.valid || s.min_belief(i, j) >= t.value).collect();
    require(claim, !must_know.is_empty(), || format!("no pair with mutual belief >= {}", t.value))?;

    let mut c = Checker::new();
    let families = stable_families(&s.pop, &s.costs, &s.beliefs, CLAIM_MAX_AGENTS)?;
    c.notes.push(format!("{} stable graphs enumerated", families.len()));
    check_must_know(&mut c, &families, &must_know);

    let mut converged = 0;
    for (run_seed, out) in trial_runs(s, trials, seed, false) {
        if out.status != RunStatus::Converged {
            continue;
        }
        converged += 1;
        let net = &out.final_state.net;
        for &(i, j) in &must_know {
            c.check(net.knows(i, j), || {
                Counterexample::from_state(net, Some((i, j)), format!("converged run {run_seed} left pair unacquainted"))
            });
        }
    }
    c.notes.push(format!("{converged}/{trials} runs converged"));
    Ok(c.report(claim, s, seed, trials))
}

fn check_c1(s: &Scenario, seed: u64) -> Result<VerificationReport> {
    let claim = Claim::C1;
    require_small(claim, s, CLAIM_MAX_AGENTS)?;
    require_cheap_intra(claim, s)?;
    require(claim, s.costs.c_high > s.cost_close(), || {
        format!("c_H = {} <= delta - delta^2", s.costs.c_high)
    })?;
    let mut c = Checker::new();
    let all = pairs(s.pop.n());
    for scale in [1.0, 10.0, 100.0, 1e4] {
        let costs = CostStructure::new(s.costs.delta, s.costs.c_low, s.costs.c_high * scale)?;
        let t = belief_thresholds(&costs, None).meet_always;
        c.check(t.value <= 1.0, || Counterexample {
            edges: vec![],
            known: vec![],
            pair: None,
            note: format!("threshold {} > 1 at c_H = {}", t.value, costs.c_high),
        });
        let p = 0.5 * (t.value + 1.0);
        let beliefs = BeliefTable::uniform(s.pop.n(), s.pop.group_count(), p)?;
        let families = stable_families(&s.pop, &costs, &beliefs, CLAIM_MAX_AGENTS)?;
        check_must_know(&mut c, &families, &all);
        c.notes.push(format!("c_H = {}: belief {p} forces every meeting", costs.c_high));
    }
    Ok(c.report(claim, s, seed, 0))
}

fn check_p2(s: &Scenario, trials: usize, seed: u64) -> Result<VerificationReport> {
    let claim = Claim::P2;
    let n = s.pop.n();
    let t = belief_thresholds(&s.costs, None).empty_unstable;
    let empty = NetworkState::empty(n);
    let dense = DenseState::from_network(&empty);
    let mut rng = stream(seed, Stream::Oracle);
    let mut c = Checker::new();
    let mut unstable_seen = 0;
    for trial in 0..trials.max(1) {
        let beliefs = if trial == 0 {
            s.beliefs.clone()
        } else {
            let k = s.pop.group_count();
            let centre = if t.valid { t.value } else { 0.5 };
            let base = (0..n * k).map(|_| (centre + rng.gen_range(-0.25..0.25)).clamp(0.0, 1.0)).collect();
            BeliefTable::from_matrix(n, k, base, vec![0.0; n])?
        };
        let scenario = Scenario { beliefs, ..s.clone() };
        let predicted = !t.valid || pairs(n).into_iter().any(|(i, j)| scenario.min_belief(i, j) >= t.value);
        let report = is_pairwise_stable(&empty, &s.pop, &s.costs, &scenario.beliefs);
        let naive = brute::is_stable(&dense, &s.pop, &s.costs, &scenario.beliefs);
        unstable_seen += usize::from(!report.stable);
        c.check(predicted == !report.stable && report.stable == naive, || {
            Counterexample::from_state(
                &empty,
                report.witness.map(|w| w.pair()),
                format!("trial {trial}: predicted unstable = {predicted}, found stable = {}", report.stable),
            )
        });
    }
    c.notes.push(format!("empty network unstable in {unstable_seen} of {} belief tables", trials.max(1)));
    Ok(c.report(claim, s, seed, trials))
}

fn check_c2(s: &Scenario, trials: usize, seed: u64) -> Result<VerificationReport> {
    let claim = Claim::C2;
    let (d, close) = (s.costs.delta, s.cost_close());
    require(claim, s.costs.c_low <= close && d < s.costs.c_high, || {
        format!("need c_L <= delta - delta^2 < delta < c_H, got c_L = {}, c_H = {}", s.costs.c_low, s.costs.c_high)
    })?;
    let n = s.pop.n();
    let t = belief_thresholds(&s.costs, None);
    let all = pairs(n);
    let each_below = (0..n).all(|i| (0..n).all(|j| i == j || s.beliefs.get(i, s.pop.group(j)) < t.empty_unstable.value));
    let some_above = all.iter().any(|&(i, j)| s.min_belief(i, j) >= t.empty_unstable.value);
    let all_meet = all.iter().all(|&(i, j)| s.min_belief(i, j) >= t.meet_always.value);

    let mut c = Checker::new();
    c.notes.push(format!("parts: none={each_below} some={some_above} all={all_meet}"));
    let mut converged = 0;
    for (run_seed, out) in trial_runs(s, trials, seed, false) {
        if out.status != RunStatus::Converged {
            continue;
        }
        converged += 1;
        let net = &out.final_state.net;
        let ones = net.memory_ones();
        let fail = |what: &str| Counterexample::from_state(net, None, format!("run {run_seed}: {what}"));
        if each_below {
            c.check(ones == n, || fail("discovery despite pessimistic beliefs"));
        }
        if some_above {
            c.check(ones > n, || fail("no discovery despite an optimistic pair"));
        }
        if all_meet {
            c.check(ones == n * n, || fail("incomplete discovery despite universal optimism"));
        }
    }
    c.notes.push(format!("{converged}/{trials} runs converged"));
    Ok(c.report(claim, s, seed, trials))
}

fn check_l1(s: &Scenario, trials: usize, seed: u64) -> Result<VerificationReport> {
    let claim = Claim::L1;
    let n = s.pop.n();
    let refusing: Vec<(usize, usize)> = (0..n)
        .flat_map(|i| (0..s.pop.group_count()).map(move |g| (i, g)))
        .filter(|&(i, g)| {
            let t = refuse_threshold(&s.costs, s.pop.group_sizes()[g]);
            g != s.pop.group(i) && t.valid && s.beliefs.get(i, g) < t.value
        })
        .collect();
    require(claim, !refusing.is_empty(), || "no agent is pessimistic enough about another group".into())?;

    let mut c = Checker::new();

    // best-case geometry: joining a component of m agents never gains more
    // than delta + (m - 1) delta^2, and a star attains it
    let geo_n = n.min(5);
    let geo_pairs = pairs(geo_n);
    let mut attained = BTreeSet::new();
    for edges in 0..1u64 << geo_pairs.len() {
        let mut adj = vec![vec![false; geo_n]; geo_n];
        for (p, &(a, b)) in geo_pairs.iter().enumerate() {
            if edges >> p & 1 == 1 {
                adj[a][b] = true;
                adj[b][a] = true;
            }
        }
        for i in 0..geo_n {
            for j in 0..geo_n {
                let comp = brute::component(&adj, j);
                if comp.contains(&i) {
                    continue;
                }
                let gain = brute::benefit_gain(&adj, s.costs.delta, i, j);
                let bound = component_reach(&s.costs, comp.len());
                c.check(gain <= bound + 1e-12, || Counterexample {
                    edges: StableState { n: geo_n, edges, known: edges }.edge_list(),
                    known: vec![],
                    pair: Some((i, j)),
                    note: format!("gain {gain} exceeds best case {bound}"),
                });
                if (gain - bound).abs() < 1e-12 {
                    attained.insert(comp.len());
                }
            }
        }
    }
    c.notes.push(format!("best case attained for component sizes {attained:?}"));

    // every meeting in every run respects the refusal bound at that moment
    let mut meetings = 0;
    for (run_seed, out) in trial_runs(s, trials, seed, true) {
        let mut net = NetworkState::empty(n);
        for e in out.trace.iter().flatten() {
            if e.action == Action::Add && !net.knows(e.i, e.j) {
                meetings += 1;
                let dense = DenseState::from_network(&net);
                for (a, b) in [(e.i, e.j), (e.j, e.i)] {
                    let size = brute::component(&dense.adj, b).len();
                    let t = refuse_threshold(&s.costs, size);
                    let p = s.beliefs.get(a, s.pop.group(b));
                    c.check(!(t.valid && p < t.value), || {
                        Counterexample::from_state(
                            &net,
                            Some((a, b)),
                            format!("run {run_seed}: agent {a} with belief {p} < {} joined a {size}-component", t.value),
                        )
                    });
                }
            }
            match e.action {
                Action::Add => {
                    net.add_link(e.i, e.j)?;
                }
                Action::Delete => {
                    net.remove_link(e.i, e.j)?;
                }
            }
        }
        for &(i, g) in &refusing {
            if s.pop.group_sizes()[g] + 1 == n {
                let linked = (0..n).any(|j| s.pop.group(j) == g && out.final_state.net.has_link(i, j));
                c.check(!linked, || {
                    Counterexample::from_state(&out.final_state.net, None, format!("run {run_seed}: agent {i} linked into group {g}"))
                });
            }
        }
    }
    c.notes.push(format!("{meetings} meetings checked across {trials} runs"));
    Ok(c.report(claim, s, seed, trials))
}

fn complete_info_graphs(s: &Scenario, max: usize) -> Result<BTreeSet<u64>> {
    let n = s.pop.n();
    require(Claim::T1, n <= max, || format!("n = {n} exceeds {max}"))?;
    let all = pairs(n);
    let rational = rational_base_beliefs(&s.pop);
    let mut graphs = BTreeSet::new();
    for edges in 0..1u64 << all.len() {
        let e = StableState { n, edges, known: edges }.edge_list();
        let net = NetworkState::from_parts(n, &e, Some(BitMatrix::ones(n)))?;
        if is_pairwise_stable(&net, &s.pop, &s.costs, &rational).stable {
            graphs.insert(edges);
        }
    }
    Ok(graphs)
}

/// Every network stable under complete information stays stable under the
/// given (incomplete-information) beliefs. Requires every pair to expect a
/// non-negative gain from meeting.
pub fn check_subset_relation(
    pop: &Population,
    costs: &CostStructure,
    beliefs: &BeliefTable,
    max_n: usize,
) -> Result<VerificationReport> {
    let claim = Claim::T1;
    let s = Scenario { name: "subset".into(), pop: pop.clone(), costs: *costs, beliefs: beliefs.clone() };
    let max = max_n.min(SUBSET_MAX_AGENTS);
    require_small(claim, &s, max)?;
    require_cheap_intra(claim, &s)?;
    let t = belief_thresholds(costs, None).meet_always;
    if let Some((i, j)) = pairs(pop.n()).into_iter().find(|&(i, j)| t.valid && s.min_belief(i, j) < t.value) {
        return Err(reject(claim, format!("pair ({i}, {j}) has mutual belief {} < {}", s.min_belief(i, j), t.value)));
    }

    let mut c = Checker::new();
    let complete = complete_info_graphs(&s, max)?;
    let families = stable_families(pop, costs, beliefs, max)?;
    let incomplete: BTreeSet<u64> = families.iter().map(|f| f.edges).collect();
    for &edges in &complete {
        let state = StableState { n: pop.n(), edges, known: 0 };
        let full = StableState { known: (1u64 << pairs(pop.n()).len()) - 1, ..state };
        let net = full.network();
        let stable = is_pairwise_stable(&net, pop, costs, beliefs).stable;
        let enumerated = families.iter().any(|f| f.contains(&full));
        c.check(stable && enumerated, || {
            Counterexample::from_state(&net, None, "complete-information stable network fails under beliefs".into())
        });
    }
    let ic_states: u128 = families.iter().map(StableFamily::state_count).sum();
    c.notes.push(format!(
        "complete-information stable graphs {}, incomplete-information stable graphs {}, states {ic_states}, strict {}",
        complete.len(),
        incomplete.len(),
        incomplete.len() > complete.len()
    ));
    Ok(c.report(claim, &s, 0, 0))
}

fn check_p3i(s: &Scenario) -> Result<VerificationReport> {
    let mut report = check_subset_relation(&s.pop, &s.costs, &s.beliefs, SUBSET_MAX_AGENTS)
        .map_err(|e| match e {
            Error::Precondition { reason, .. } => reject(Claim::P3i, reason),
            other => other,
        })?;
    report.claim = Claim::P3i;
    report.params.scenario = s.name.clone();
    Ok(report)
}

fn check_p3ii(s: &Scenario, seed: u64) -> Result<VerificationReport> {
    let claim = Claim::P3ii;
    require_small(claim, s, SUBSET_MAX_AGENTS)?;
    require_cheap_intra(claim, s)?;
    let mut c = Checker::new();
    let complete = complete_info_graphs(s, SUBSET_MAX_AGENTS)?;
    let families = stable_families(&s.pop, &s.costs, &s.beliefs, SUBSET_MAX_AGENTS)?;
    let witness = families
        .iter()
        .filter(|f| !complete.contains(&f.edges))
        .flat_map(|f| f.states().take(1))
        .find(StableState::has_isolated_agent);
    match witness {
        Some(w) => {
            let net = w.network();
            let informed = StableState { known: (1u64 << pairs(s.pop.n()).len()) - 1, ..w }.network();
            let ic = is_pairwise_stable(&net, &s.pop, &s.costs, &s.beliefs).stable;
            let cc = is_pairwise_stable(&informed, &s.pop, &s.costs, &s.beliefs).stable;
            c.check(ic && !cc, || Counterexample::from_state(&net, None, "witness failed replay".into()));
            c.notes.push(format!("witness edges {:?}, known {:?}", w.edge_list(), Counterexample::from_state(&net, None, String::new()).known));
        }
        None => c.check(false, || Counterexample {
            edges: vec![],
            known: vec![],
            pair: None,
            note: format!("no singleton state among {} stable graphs outside the complete-information set", families.len()),
        }),
    }
    Ok(c.report(claim, s, seed, 0))
}

fn check_p4(s: &Scenario, trials: usize, seed: u64) -> Result<VerificationReport> {
    let claim = Claim::P4;
    require_small(claim, s, CLAIM_MAX_AGENTS)?;
    require_cheap_intra(claim, s)?;
    let n = s.pop.n();
    require(claim, s.pop.types().iter().all(|&t| t == s.pop.kind(0)), || "agents of more than one type".into())?;
    let t = belief_thresholds(&s.costs, None).meet_always;
    for (i, j) in pairs(n) {
        let (gi, gj) = (s.pop.group(i), s.pop.group(j));
        if gi == gj {
            require(claim, s.min_belief(i, j) >= t.value, || {
                format!("within-group pair ({i}, {j}) below {}", t.value)
            })?;
        } else {
            for (a, g) in [(i, gj), (j, gi)] {
                let r = refuse_threshold(&s.costs, s.pop.group_sizes()[g]);
                require(claim, r.valid && s.beliefs.get(a, g) < r.value, || {
                    format!("agent {a} not pessimistic enough about group {g} (threshold {})", r.value)
                })?;
            }
        }
    }

    let mut c = Checker::new();
    let segregated: Vec<(usize, usize)> = pairs(n).into_iter().filter(|&(i, j)| s.pop.group(i) == s.pop.group(j)).collect();
    let complete_adj = vec![vec![true; n]; n];
    let complete_adj: Vec<Vec<bool>> =
        complete_adj.into_iter().enumerate().map(|(i, mut r)| {
            r[i] = false;
            r
        }).collect();
    let best_total = brute::total_utility(&complete_adj, &s.pop, &s.costs);

    let mut converged = 0;
    for (run_seed, out) in trial_runs(s, trials, seed, false) {
        if out.status != RunStatus::Converged {
            continue;
        }
        converged += 1;
        let net = &out.final_state.net;
        c.check(net.edges() == segregated, || {
            Counterexample::from_state(net, None, format!("run {run_seed} did not end in intra-group cliques"))
        });
        let total = brute::total_utility(&DenseState::from_network(net).adj, &s.pop, &s.costs);
        c.check(total < best_total, || {
            Counterexample::from_state(net, None, format!("run {run_seed}: total utility {total} not below {best_total}"))
        });
    }
    c.notes.push(format!("{converged}/{trials} runs converged"));

    // exhaustive efficiency: no graph beats the complete one
    let all = pairs(n);
    let mut argmax = (f64::NEG_INFINITY, 0u64);
    for edges in 0..1u64 << all.len() {
        let mut adj = vec![vec![false; n]; n];
        for (p, &(a, b)) in all.iter().enumerate() {
            if edges >> p & 1 == 1 {
                adj[a][b] = true;
                adj[b][a] = true;
            }
        }
        let total = brute::total_utility(&adj, &s.pop, &s.costs);
        if total > argmax.0 {
            argmax = (total, edges);
        }
    }
    let full = (1u64 << all.len()) - 1;
    c.check(argmax.1 == full, || Counterexample {
        edges: StableState { n, edges: argmax.1, known: argmax.1 }.edge_list(),
        known: vec![],
        pair: None,
        note: format!("graph with total utility {} beats the complete graph", argmax.0),
    });
    c.notes.push(format!("efficient total utility {best_total}, {} graphs scanned", 1u64 << all.len()));
    Ok(c.report(claim, s, seed, trials))
}

/// Check `claim` on scenario `s`. Randomised parts use `trials` runs seeded
/// from `seed`.
pub fn check_proposition(claim: Claim, s: &Scenario, trials: usize, seed: u64) -> Result<VerificationReport> {
    let report = match claim {
        Claim::P1 => check_p1(s, trials, seed)?,
        Claim::C1 => check_c1(s, seed)?,
        Claim::P2 => check_p2(s, trials, seed)?,
        Claim::C2 => check_c2(s, trials, seed)?,
        Claim::L1 => check_l1(s, trials, seed)?,
        Claim::P3i => check_p3i(s)?,
        Claim::P3ii => check_p3ii(s, seed)?,
        Claim::P4 => check_p4(s, trials, seed)?,
        Claim::T1 => {
            let mut r = check_subset_relation(&s.pop, &s.costs, &s.beliefs, SUBSET_MAX_AGENTS)?;
            r.params.scenario = s.name.clone();
            r
        }
    };
    Ok(report)
}

/// Check every preset of `claim`.
pub fn check_presets(claim: Claim, trials: usize, seed: u64) -> Result<Vec<VerificationReport>> {
    presets(claim)?.iter().map(|s| check_proposition(claim, s, trials, seed)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn claim_names_round_trip() {
        for c in Claim::ALL {
            assert_eq!(c.to_string().parse::<Claim>().unwrap(), c);
        }
        assert_eq!("p3ii".parse::<Claim>().unwrap(), Claim::P3ii);
        assert!("P9".parse::<Claim>().is_err());
    }

    #[test]
    fn p2_confirmed_at_base_with_rational_beliefs() {
        let s = &presets(Claim::P2).unwrap()[0];
        assert_eq!(s.beliefs.get(0, 1), 0.5);
        let r = check_proposition(Claim::P2, s, 20, 1).unwrap();
        assert_eq!(r.verdict, Verdict::Confirmed, "{r:?}");
        assert!(!is_pairwise_stable(&NetworkState::empty(4), &s.pop, &s.costs, &s.beliefs).stable);
    }

    #[test]
    fn c2_pessimistic_leaves_everyone_ignorant() {
        let s = &presets(Claim::C2).unwrap()[0];
        let r = check_proposition(Claim::C2, s, 10, 3).unwrap();
        assert_eq!(r.verdict, Verdict::Confirmed, "{r:?}");
    }

    #[test]
    fn p1_rejects_expensive_intra_type_links() {
        let s = Scenario::new("bad", vec![0, 1], vec![0, 0], (0.7, 0.3, 1.0)).unwrap().with_uniform_beliefs(1.0).unwrap();
        assert!(matches!(check_proposition(Claim::P1, &s, 1, 0), Err(Error::Precondition { .. })));
    }

    #[test]
    fn p1_violated_below_threshold_has_replayable_witness() {
        // beliefs 0.9 < 0.9875: strangers two hops apart can stay apart, so
        // forcing the claim onto every pair must fail
        let s = Scenario::new("weak", vec![0, 0, 0], vec![0, 0, 0], (0.7, 0.2, 1.0)).unwrap().with_uniform_beliefs(0.9).unwrap();
        let families = stable_families(&s.pop, &s.costs, &s.beliefs, 6).unwrap();
        let mut c = Checker::new();
        check_must_know(&mut c, &families, &pairs(3));
        let cx = c.counterexample.expect("violation");
        let net = cx.network(3).unwrap();
        let (i, j) = cx.pair.unwrap();
        assert!(!net.knows(i, j));
        assert!(is_pairwise_stable(&net, &s.pop, &s.costs, &s.beliefs).stable);
    }

    #[test]
    fn subset_sets_equal_for_certain_beliefs() {
        let s = &presets(Claim::T1).unwrap()[0];
        let r = check_subset_relation(&s.pop, &s.costs, &s.beliefs, 5).unwrap();
        assert_eq!(r.verdict, Verdict::Confirmed);
        assert!(r.notes[0].contains("strict false"), "{:?}", r.notes);
    }

    #[test]
    fn subset_rejects_pessimistic_beliefs() {
        let s = &presets(Claim::P3ii).unwrap()[0];
        assert!(matches!(
            check_subset_relation(&s.pop, &s.costs, &s.beliefs, 5),
            Err(Error::Precondition { .. })
        ));
    }

    #[test]
    fn report_serialises_to_json() {
        let s = &presets(Claim::P3ii).unwrap()[0];
        let r = check_proposition(Claim::P3ii, s, 0, 0).unwrap();
        let json = serde_json::to_string(&r).unwrap();
        assert!(json.contains("\"claim\":\"P3ii\""));
        assert!(json.contains("\"verdict\":\"Confirmed\""));
    }
}
