use serde::{Deserialize, Serialize};

use crate::model::CostStructure;

/// A belief cut-off together with whether its cost precondition holds.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Threshold {
    pub value: f64,
    pub valid: bool,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Thresholds {
    /// Mutual belief at or above which two agents must know each other in
    /// any stable state: `(c_H - (delta - delta^2)) / (c_H - c_L)`.
    pub meet_always: Threshold,
    /// Mutual belief at or above which the empty, ignorant network is
    /// unstable: `(c_H - delta) / (c_H - c_L)`.
    pub empty_unstable: Threshold,
    /// Belief below which an agent refuses to join a component of the given
    /// size: `(c_H - (delta + (m - 1) delta^2)) / (c_H - c_L)`.
    pub refuse_component: Option<Threshold>,
}

/// Best-case benefit of linking into a component of `size` agents: the
/// partner is adjacent to every other member.
pub fn component_reach(costs: &CostStructure, size: usize) -> f64 {
    let d = costs.delta;
    d + (size.saturating_sub(1)) as f64 * d * d
}

pub fn refuse_threshold(costs: &CostStructure, size: usize) -> Threshold {
    let reach = component_reach(costs, size);
    Threshold {
        value: (costs.c_high - reach) / (costs.c_high - costs.c_low),
        valid: costs.c_high > reach,
    }
}

pub fn belief_thresholds(costs: &CostStructure, component_size: Option<usize>) -> Thresholds {
    let d = costs.delta;
    let spread = costs.c_high - costs.c_low;
    let close = d - d * d;
    Thresholds {
        meet_always: Threshold { value: (costs.c_high - close) / spread, valid: costs.c_high > close },
        empty_unstable: Threshold { value: (costs.c_high - d) / spread, valid: costs.c_high > d },
        refuse_component: component_size.map(|m| refuse_threshold(costs, m)),
    }
}
