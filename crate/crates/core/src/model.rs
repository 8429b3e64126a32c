//! Population, network state, costs and the utility arithmetic that every
//! other module builds on.
//!
//! Agents carry an observable social group and a hidden type. Benefits decay
//! as `delta^d` with geodesic distance `d`; a direct link costs `c_low`
//! between agents of equal type and `c_high` otherwise. Agents that have
//! never met price a prospective link at the belief-weighted average of the
//! two costs.

use serde::{Deserialize, Serialize};

use crate::beliefs::BeliefTable;
use crate::error::{Error, Result};
use crate::graph::{bfs, BfsScratch, BitMatrix, UNREACHABLE};

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "PopulationLabels", into = "PopulationLabels")]
pub struct Population {
    groups: Vec<usize>,
    types: Vec<usize>,
    group_sizes: Vec<usize>,
    /// `group_type_counts[s][t]`: agents of group `s` with type `t`.
    group_type_counts: Vec<Vec<usize>>,
}

#[derive(Serialize, Deserialize)]
struct PopulationLabels {
    groups: Vec<usize>,
    types: Vec<usize>,
}

impl TryFrom<PopulationLabels> for Population {
    type Error = Error;
    fn try_from(l: PopulationLabels) -> Result<Self> {
        Population::from_labels(l.groups, l.types)
    }
}

impl From<Population> for PopulationLabels {
    fn from(p: Population) -> Self {
        PopulationLabels { groups: p.groups, types: p.types }
    }
}

impl Population {
    /// Build from per-agent labels. Group labels must cover `0..K` with no
    /// empty group; type labels may leave gaps.
    pub fn from_labels(groups: Vec<usize>, types: Vec<usize>) -> Result<Self> {
        if groups.len() != types.len() {
            return Err(Error::Population(format!(
                "{} group labels but {} type labels",
                groups.len(),
                types.len()
            )));
        }
        if groups.is_empty() {
            return Err(Error::Population("no agents".into()));
        }
        let k = groups.iter().max().map_or(0, |g| g + 1);
        let t = types.iter().max().map_or(0, |t| t + 1);
        let mut group_sizes = vec![0; k];
        let mut group_type_counts = vec![vec![0; t]; k];
        for (&g, &ty) in groups.iter().zip(&types) {
            group_sizes[g] += 1;
            group_type_counts[g][ty] += 1;
        }
        if let Some(empty) = group_sizes.iter().position(|&s| s == 0) {
            return Err(Error::Population(format!("group {empty} has no members")));
        }
        Ok(Population { groups, types, group_sizes, group_type_counts })
    }

    /// Build from a census: `composition[s][t]` agents of group `s` and type
    /// `t`. Agents are laid out group-major, type-minor.
    pub fn from_composition(composition: &[Vec<usize>]) -> Result<Self> {
        let mut groups = Vec::new();
        let mut types = Vec::new();
        for (g, row) in composition.iter().enumerate() {
            for (t, &count) in row.iter().enumerate() {
                groups.extend(std::iter::repeat_n(g, count));
                types.extend(std::iter::repeat_n(t, count));
            }
        }
        Population::from_labels(groups, types)
    }

    pub fn n(&self) -> usize {
        self.groups.len()
    }

    pub fn group_count(&self) -> usize {
        self.group_sizes.len()
    }

    pub fn type_count(&self) -> usize {
        self.group_type_counts.first().map_or(0, Vec::len)
    }

    #[inline]
    pub fn group(&self, i: usize) -> usize {
        self.groups[i]
    }

    #[inline]
    pub fn kind(&self, i: usize) -> usize {
        self.types[i]
    }

    pub fn groups(&self) -> &[usize] {
        &self.groups
    }

    pub fn types(&self) -> &[usize] {
        &self.types
    }

    pub fn group_sizes(&self) -> &[usize] {
        &self.group_sizes
    }

    pub fn group_type_count(&self, group: usize, kind: usize) -> usize {
        self.group_type_counts[group].get(kind).copied().unwrap_or(0)
    }

    /// Sizes of the classes of `partition`, for segregation indices.
    pub fn class_sizes(&self, partition: Partition) -> Vec<usize> {
        match partition {
            Partition::ByGroup => self.group_sizes.clone(),
            Partition::ByType => {
                let mut sizes = vec![0; self.type_count()];
                for &t in &self.types {
                    sizes[t] += 1;
                }
                sizes
            }
        }
    }

    pub fn class_of(&self, i: usize, partition: Partition) -> usize {
        match partition {
            Partition::ByGroup => self.groups[i],
            Partition::ByType => self.types[i],
        }
    }
}

/// Which agent attribute a segregation index partitions on.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Partition {
    #[default]
    ByGroup,
    ByType,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CostStructure {
    pub delta: f64,
    pub c_low: f64,
    pub c_high: f64,
}

impl CostStructure {
    pub fn new(delta: f64, c_low: f64, c_high: f64) -> Result<Self> {
        let costs = CostStructure { delta, c_low, c_high };
        costs.validate()?;
        Ok(costs)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.delta > 0.0 && self.delta < 1.0) {
            return Err(Error::Costs(format!("decay {} outside (0, 1)", self.delta)));
        }
        if !(self.c_low > 0.0) {
            return Err(Error::Costs(format!("c_low {} must be positive", self.c_low)));
        }
        if !(self.c_high > self.c_low) {
            return Err(Error::Costs(format!(
                "c_high {} must exceed c_low {}",
                self.c_high, self.c_low
            )));
        }
        Ok(())
    }

    #[inline]
    pub fn cost(&self, t_i: usize, t_j: usize) -> f64 {
        if t_i == t_j {
            self.c_low
        } else {
            self.c_high
        }
    }

    /// Cost of a link priced with probability `p` of a type match.
    #[inline]
    pub fn belief_weighted(&self, p: f64) -> f64 {
        p * self.c_low + (1.0 - p) * self.c_high
    }
}

/// `delta^d` lookup; unreachable agents contribute exactly zero.
#[derive(Clone, Debug)]
pub struct DecayTable {
    pow: Vec<f64>,
}

impl DecayTable {
    pub fn new(delta: f64, n: usize) -> Self {
        let mut pow = Vec::with_capacity(n + 1);
        let mut p = 1.0;
        for _ in 0..=n {
            pow.push(p);
            p *= delta;
        }
        DecayTable { pow }
    }

    #[inline]
    pub fn benefit(&self, d: u32) -> f64 {
        if d == UNREACHABLE {
            0.0
        } else {
            self.pow[d as usize]
        }
    }
}

/// Undirected simple graph plus the symmetric memory matrix recording which
/// agents know each other's type.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct NetworkState {
    adj: BitMatrix,
    memory: BitMatrix,
    links: usize,
}

impl NetworkState {
    /// No links; every agent knows only itself.
    pub fn empty(n: usize) -> Self {
        NetworkState { adj: BitMatrix::zeros(n), memory: BitMatrix::identity(n), links: 0 }
    }

    /// No links; every agent knows everyone's type.
    pub fn fully_informed(n: usize) -> Self {
        NetworkState { adj: BitMatrix::zeros(n), memory: BitMatrix::ones(n), links: 0 }
    }

    /// Build from an edge list and an optional memory matrix. Linked pairs
    /// are added to memory; the diagonal is always set.
    pub fn from_parts(n: usize, edges: &[(usize, usize)], memory: Option<BitMatrix>) -> Result<Self> {
        let mut net = NetworkState::empty(n);
        if let Some(m) = memory {
            if m.dim() != n {
                return Err(Error::Population(format!("memory is {}x{}, expected {n}", m.dim(), m.dim())));
            }
            if !m.is_symmetric() {
                return Err(Error::Population("memory matrix is not symmetric".into()));
            }
            net.memory = m;
            for i in 0..n {
                net.memory.set(i, i);
            }
        }
        for &(i, j) in edges {
            net.add_link(i, j)?;
        }
        Ok(net)
    }

    pub fn n(&self) -> usize {
        self.adj.dim()
    }

    #[inline]
    pub fn has_link(&self, i: usize, j: usize) -> bool {
        self.adj.get(i, j)
    }

    #[inline]
    pub fn knows(&self, i: usize, j: usize) -> bool {
        self.memory.get(i, j)
    }

    pub fn link_count(&self) -> usize {
        self.links
    }

    pub fn degree(&self, i: usize) -> usize {
        self.adj.row_count(i)
    }

    /// Number of ones in the memory matrix.
    pub fn memory_ones(&self) -> usize {
        self.memory.count_ones()
    }

    pub fn adjacency(&self) -> &BitMatrix {
        &self.adj
    }

    pub fn memory(&self) -> &BitMatrix {
        &self.memory
    }

    pub fn edges(&self) -> Vec<(usize, usize)> {
        let n = self.n();
        (0..n)
            .flat_map(|i| ((i + 1)..n).map(move |j| (i, j)))
            .filter(|&(i, j)| self.adj.get(i, j))
            .collect()
    }

    fn check_pair(&self, i: usize, j: usize) -> Result<()> {
        let n = self.n();
        for a in [i, j] {
            if a >= n {
                return Err(Error::AgentOutOfRange { agent: a, n });
            }
        }
        if i == j {
            return Err(Error::SelfPair(i));
        }
        Ok(())
    }

    /// Add link `ij` and record the mutual type revelation. Returns whether
    /// the memory matrix grew.
    pub fn add_link(&mut self, i: usize, j: usize) -> Result<bool> {
        self.check_pair(i, j)?;
        if self.adj.get(i, j) {
            return Err(Error::LinkPresent(i, j));
        }
        self.adj.set(i, j);
        self.adj.set(j, i);
        self.links += 1;
        Ok(self.meet(i, j))
    }

    /// Remove link `ij` if present. Memory is untouched.
    pub fn remove_link(&mut self, i: usize, j: usize) -> Result<bool> {
        self.check_pair(i, j)?;
        if !self.adj.get(i, j) {
            return Ok(false);
        }
        self.adj.clear(i, j);
        self.adj.clear(j, i);
        self.links -= 1;
        Ok(true)
    }

    pub(crate) fn meet(&mut self, i: usize, j: usize) -> bool {
        let grew = !self.memory.get(i, j);
        self.memory.set(i, j);
        self.memory.set(j, i);
        grew
    }

    /// Check the structural invariants: symmetric adjacency without loops,
    /// symmetric memory with unit diagonal, and links contained in memory.
    pub fn validate(&self) -> Result<()> {
        let n = self.n();
        if !self.adj.is_symmetric() || (0..n).any(|i| self.adj.get(i, i)) {
            return Err(Error::Population("adjacency must be symmetric without self-loops".into()));
        }
        if !self.memory.is_symmetric() || (0..n).any(|i| !self.memory.get(i, i)) {
            return Err(Error::Population("memory must be symmetric with unit diagonal".into()));
        }
        if !self.memory.contains(&self.adj) {
            return Err(Error::Population("linked agents must know each other".into()));
        }
        Ok(())
    }
}

pub fn geodesic_distances(net: &NetworkState, i: usize) -> Vec<u32> {
    let n = net.n();
    let mut out = vec![UNREACHABLE; n];
    bfs(net.adjacency(), i, None, &mut BfsScratch::new(n), &mut out);
    out
}

/// Realised utility: decayed benefits from everyone reachable minus the true
/// cost of each direct link.
pub fn actual_utility(net: &NetworkState, pop: &Population, costs: &CostStructure, i: usize) -> f64 {
    let decay = DecayTable::new(costs.delta, net.n());
    let dist = geodesic_distances(net, i);
    utility_from_distances(net, pop, costs, &decay, i, &dist)
}

pub(crate) fn utility_from_distances(
    net: &NetworkState,
    pop: &Population,
    costs: &CostStructure,
    decay: &DecayTable,
    i: usize,
    dist: &[u32],
) -> f64 {
    let benefit: f64 = dist.iter().enumerate().filter(|&(j, _)| j != i).map(|(_, &d)| decay.benefit(d)).sum();
    let cost: f64 = crate::graph::iter_bits(net.adjacency().row(i))
        .map(|j| costs.cost(pop.kind(i), pop.kind(j)))
        .sum();
    benefit - cost
}

/// Cost agent `i` attaches to a link with `j`: the true cost once they have
/// met, otherwise the belief-weighted average.
pub fn expected_cost(
    i: usize,
    j: usize,
    base: &BeliefTable,
    net: &NetworkState,
    pop: &Population,
    costs: &CostStructure,
) -> f64 {
    if net.knows(i, j) {
        costs.cost(pop.kind(i), pop.kind(j))
    } else {
        costs.belief_weighted(base.get(i, pop.group(j)))
    }
}

/// Change in `i`'s decayed benefits when `ij` is added, given `i`'s and
/// `j`'s distance vectors in the current graph. A shortest path from `i`
/// uses the new edge at most once and only as its first hop, so the new
/// distance to `k` is `min(d_ik, 1 + d_jk)`.
#[inline]
pub(crate) fn addition_gain(dist_i: &[u32], dist_j: &[u32], decay: &DecayTable) -> f64 {
    let mut gain = 0.0;
    for (&d_ik, &d_jk) in dist_i.iter().zip(dist_j) {
        let via = d_jk.saturating_add(1);
        if via < d_ik {
            gain += decay.benefit(via) - decay.benefit(d_ik);
        }
    }
    gain
}

/// Decayed benefit lost moving from distances `before` to `after`.
#[inline]
pub(crate) fn deletion_loss(before: &[u32], after: &[u32], decay: &DecayTable) -> f64 {
    let mut loss = 0.0;
    for (&b, &a) in before.iter().zip(after) {
        if a != b {
            loss += decay.benefit(b) - decay.benefit(a);
        }
    }
    loss
}

/// `E_i[u_ij]`: the change in `i`'s utility `i` expects from adding `ij`.
/// Geometry is observed exactly; only `j`'s type is uncertain.
pub fn expected_incremental_utility(
    net: &NetworkState,
    pop: &Population,
    costs: &CostStructure,
    base: &BeliefTable,
    i: usize,
    j: usize,
) -> Result<f64> {
    net.check_pair(i, j)?;
    if net.has_link(i, j) {
        return Err(Error::LinkPresent(i, j));
    }
    let decay = DecayTable::new(costs.delta, net.n());
    let di = geodesic_distances(net, i);
    let dj = geodesic_distances(net, j);
    Ok(addition_gain(&di, &dj, &decay) - expected_cost(i, j, base, net, pop, costs))
}

/// Why a state fails pairwise stability.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Witness {
    /// `agent` strictly gains by cutting `link`.
    Delete { link: (usize, usize), agent: usize, gain: f64 },
    /// Both ends expect a non-negative gain from adding `pair`.
    Add { pair: (usize, usize), value_i: f64, value_j: f64 },
}

impl Witness {
    pub fn pair(&self) -> (usize, usize) {
        match *self {
            Witness::Delete { link, .. } => link,
            Witness::Add { pair, .. } => pair,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StabilityReport {
    pub stable: bool,
    pub witness: Option<Witness>,
}

impl StabilityReport {
    fn from_witness(witness: Option<Witness>) -> Self {
        StabilityReport { stable: witness.is_none(), witness }
    }
}

/// Evaluates single pairs against the two stability clauses, given the
/// all-pairs distance matrix of the current graph.
pub(crate) struct PairJudge<'a> {
    pub pop: &'a Population,
    pub costs: &'a CostStructure,
    pub beliefs: &'a BeliefTable,
    pub decay: DecayTable,
    scratch: BfsScratch,
    after: Vec<u32>,
}

impl<'a> PairJudge<'a> {
    pub fn new(pop: &'a Population, costs: &'a CostStructure, beliefs: &'a BeliefTable) -> Self {
        let n = pop.n();
        PairJudge {
            pop,
            costs,
            beliefs,
            decay: DecayTable::new(costs.delta, n),
            scratch: BfsScratch::new(n),
            after: vec![UNREACHABLE; n],
        }
    }

    /// Strict gain for `agent` from cutting the existing link `ij`, if any.
    pub fn deletion_gain(
        &mut self,
        net: &NetworkState,
        dist: &[u32],
        agent: usize,
        other: usize,
    ) -> f64 {
        bfs(net.adjacency(), agent, Some((agent, other)), &mut self.scratch, &mut self.after);
        let loss = deletion_loss(dist, &self.after, &self.decay);
        self.costs.cost(self.pop.kind(agent), self.pop.kind(other)) - loss
    }

    pub fn addition_value(&self, net: &NetworkState, dist_i: &[u32], dist_j: &[u32], i: usize, j: usize) -> f64 {
        addition_gain(dist_i, dist_j, &self.decay)
            - expected_cost(i, j, self.beliefs, net, self.pop, self.costs)
    }

    /// First violated clause for pair `ij`, or `None` if the pair is stable.
    pub fn judge(&mut self, net: &NetworkState, dist: &DistanceMatrix, i: usize, j: usize) -> Option<Witness> {
        if net.has_link(i, j) {
            for (a, b) in [(i, j), (j, i)] {
                let gain = self.deletion_gain(net, dist.row(a), a, b);
                if gain > 0.0 {
                    return Some(Witness::Delete { link: (i, j), agent: a, gain });
                }
            }
            None
        } else {
            let value_i = self.addition_value(net, dist.row(i), dist.row(j), i, j);
            if value_i < 0.0 {
                return None;
            }
            let value_j = self.addition_value(net, dist.row(j), dist.row(i), j, i);
            (value_j >= 0.0).then_some(Witness::Add { pair: (i, j), value_i, value_j })
        }
    }
}

/// All-pairs hop distances, kept current across link changes.
#[derive(Clone, Debug)]
pub(crate) struct DistanceMatrix {
    n: usize,
    d: Vec<u32>,
    scratch: BfsScratch,
}

impl DistanceMatrix {
    pub fn new(net: &NetworkState) -> Self {
        let n = net.n();
        let mut m = DistanceMatrix { n, d: vec![UNREACHABLE; n * n], scratch: BfsScratch::new(n) };
        m.recompute(net);
        m
    }

    #[inline]
    pub fn row(&self, i: usize) -> &[u32] {
        &self.d[i * self.n..(i + 1) * self.n]
    }

    pub fn recompute(&mut self, net: &NetworkState) {
        for i in 0..self.n {
            bfs(net.adjacency(), i, None, &mut self.scratch, &mut self.d[i * self.n..(i + 1) * self.n]);
        }
    }

    /// Update after `ij` was added: `d'(a,b) = min(d(a,b), d(a,i)+1+d(j,b), d(a,j)+1+d(i,b))`.
    pub fn link_added(&mut self, i: usize, j: usize) {
        let n = self.n;
        let di: Vec<u32> = self.row(i).to_vec();
        let dj: Vec<u32> = self.row(j).to_vec();
        for a in 0..n {
            let (dai, daj) = (di[a], dj[a]);
            if dai == UNREACHABLE && daj == UNREACHABLE {
                continue;
            }
            let row = &mut self.d[a * n..(a + 1) * n];
            for b in 0..n {
                let through_ij = dai.saturating_add(1).saturating_add(dj[b]);
                let through_ji = daj.saturating_add(1).saturating_add(di[b]);
                let best = through_ij.min(through_ji);
                if best < row[b] {
                    row[b] = best;
                }
            }
        }
    }
}

/// Pairwise stability: no linked agent strictly gains by cutting a link, and
/// no unlinked pair both expect a non-negative gain from linking.
pub fn is_pairwise_stable(
    net: &NetworkState,
    pop: &Population,
    costs: &CostStructure,
    base: &BeliefTable,
) -> StabilityReport {
    let dist = DistanceMatrix::new(net);
    let mut judge = PairJudge::new(pop, costs, base);
    let n = net.n();
    for i in 0..n {
        for j in (i + 1)..n {
            if let Some(w) = judge.judge(net, &dist, i, j) {
                return StabilityReport::from_witness(Some(w));
            }
        }
    }
    StabilityReport::from_witness(None)
}
