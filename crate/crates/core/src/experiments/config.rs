//! Experiment configuration: a versioned TOML document plus the named
//! presets for the base case and the compositional variants.
//!
//! ```toml
//! version = 1
//! name = "base"
//! delta = 0.7
//! c_low = 0.2                 # held fixed while the other cost varies
//! c_high = 1.0
//! regimes = ["biased", "rational", "complete"]
//! repeats = 30
//! seed_base = 20240101
//! partition = "by_group"
//! export_repeats = 1          # repeats per point with snapshots written
//!
//! [population]
//! composition = [[12, 12], [12, 12]]   # per group, agents of each type
//!
//! [bias]
//! alpha = 1.0
//! beta = [7.0]                # inf gives gamma = 0
//!
//! [[axes]]
//! vary = "c_low"
//! values = [0.05, 0.1, 0.15]
//!
//! [limits]                    # optional; defaults scale with n
//! max_periods = 23040
//! cycle_window = 2304
//! ```

use std::fmt;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::beliefs::BiasParams;
use crate::dynamics::Limits;
use crate::error::{Error, Result};
use crate::model::{CostStructure, Partition, Population};

pub const CONFIG_VERSION: u32 = 1;
pub const DEFAULT_REPEATS: usize = 30;
pub const DEFAULT_SEED_BASE: u64 = 20240101;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Regime {
    Biased,
    Rational,
    Complete,
}

impl Regime {
    pub const ALL: [Regime; 3] = [Regime::Biased, Regime::Rational, Regime::Complete];

    pub fn as_str(self) -> &'static str {
        match self {
            Regime::Biased => "biased",
            Regime::Rational => "rational",
            Regime::Complete => "complete",
        }
    }
}

impl fmt::Display for Regime {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Regime {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        Regime::ALL
            .into_iter()
            .find(|r| r.as_str() == s)
            .ok_or_else(|| Error::Config(format!("unknown regime {s:?}")))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CostAxis {
    CLow,
    CHigh,
}

impl CostAxis {
    pub fn as_str(self) -> &'static str {
        match self {
            CostAxis::CLow => "c_low",
            CostAxis::CHigh => "c_high",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Axis {
    pub vary: CostAxis,
    pub values: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PopulationSpec {
    /// `composition[s][t]`: number of agents of group `s` with type `t`.
    pub composition: Vec<Vec<usize>>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BiasSpec {
    #[serde(default = "default_alpha")]
    pub alpha: f64,
    pub beta: Vec<f64>,
}

fn default_alpha() -> f64 {
    1.0
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LimitsSpec {
    pub max_periods: Option<u64>,
    pub cycle_window: Option<u64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub version: u32,
    pub name: String,
    pub delta: f64,
    pub c_low: f64,
    pub c_high: f64,
    #[serde(default = "default_regimes")]
    pub regimes: Vec<Regime>,
    #[serde(default = "default_repeats")]
    pub repeats: usize,
    #[serde(default = "default_seed_base")]
    pub seed_base: u64,
    #[serde(default)]
    pub partition: Partition,
    #[serde(default = "default_export_repeats")]
    pub export_repeats: usize,
    pub population: PopulationSpec,
    pub bias: BiasSpec,
    #[serde(default)]
    pub axes: Vec<Axis>,
    #[serde(default)]
    pub limits: LimitsSpec,
}

fn default_regimes() -> Vec<Regime> {
    Regime::ALL.to_vec()
}

fn default_repeats() -> usize {
    DEFAULT_REPEATS
}

fn default_seed_base() -> u64 {
    DEFAULT_SEED_BASE
}

fn default_export_repeats() -> usize {
    1
}

/// One cell of the cost grid. `index` numbers cost cells across all axes
/// and enters the run seeds; bias levels share it.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CostPoint {
    pub index: usize,
    pub axis: Option<CostAxis>,
    pub c_low: f64,
    pub c_high: f64,
}

/// A cost cell at one bias level.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GridPoint {
    pub cost: CostPoint,
    pub beta: f64,
}

impl ExperimentConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        let cfg: ExperimentConfig = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let cfg: ExperimentConfig =
            toml::from_str(&text).map_err(|e| Error::Parse { path: path.into(), message: e.to_string() })?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("configuration serialises")
    }

    pub fn validate(&self) -> Result<()> {
        let fail = |msg: String| Err(Error::Config(msg));
        if self.version != CONFIG_VERSION {
            return fail(format!("version {} unsupported, expected {CONFIG_VERSION}", self.version));
        }
        if self.repeats == 0 {
            return fail("repeats must be at least 1".into());
        }
        if self.regimes.is_empty() {
            return fail("at least one regime required".into());
        }
        let mut seen = self.regimes.clone();
        seen.sort();
        seen.dedup();
        if seen.len() != self.regimes.len() {
            return fail("regimes listed twice".into());
        }
        CostStructure::new(self.delta, self.c_low, self.c_high)?;
        self.population()?;
        if self.bias.beta.is_empty() {
            return fail("bias.beta grid is empty".into());
        }
        for &beta in &self.bias.beta {
            BiasParams { alpha: self.bias.alpha, beta }.validate()?;
        }
        for axis in &self.axes {
            if axis.values.is_empty() {
                return fail(format!("{} grid is empty", axis.vary.as_str()));
            }
        }
        for point in self.cost_points() {
            CostStructure::new(self.delta, point.c_low, point.c_high).map_err(|e| {
                Error::Config(format!("grid point {} ({}): {e}", point.index, axis_label(point.axis)))
            })?;
        }
        if self.limits.max_periods == Some(0) || self.limits.cycle_window == Some(0) {
            return fail("limits must be positive".into());
        }
        Ok(())
    }

    pub fn population(&self) -> Result<Population> {
        Population::from_composition(&self.population.composition)
    }

    pub fn limits(&self, n: usize) -> Limits {
        let d = Limits::for_agents(n);
        Limits {
            max_periods: self.limits.max_periods.unwrap_or(d.max_periods),
            cycle_window: self.limits.cycle_window.unwrap_or(d.cycle_window),
        }
    }

    /// Cost cells in axis order; a config without axes has the single base
    /// cell.
    pub fn cost_points(&self) -> Vec<CostPoint> {
        if self.axes.is_empty() {
            return vec![CostPoint { index: 0, axis: None, c_low: self.c_low, c_high: self.c_high }];
        }
        let mut points = Vec::new();
        for axis in &self.axes {
            for &v in &axis.values {
                let (c_low, c_high) = match axis.vary {
                    CostAxis::CLow => (v, self.c_high),
                    CostAxis::CHigh => (self.c_low, v),
                };
                points.push(CostPoint { index: points.len(), axis: Some(axis.vary), c_low, c_high });
            }
        }
        points
    }

    /// Cost cells crossed with the bias levels, cost-major.
    pub fn grid(&self) -> Vec<GridPoint> {
        self.cost_points()
            .into_iter()
            .flat_map(|cost| self.bias.beta.iter().map(move |&beta| GridPoint { cost, beta }))
            .collect()
    }
}

fn axis_label(axis: Option<CostAxis>) -> &'static str {
    axis.map_or("base", CostAxis::as_str)
}

pub const PRESETS: [&str; 6] = ["base", "groups4", "imbalanced-groups", "types4", "imbalanced-types", "correlated"];

/// `c_L` from 0.05 to 0.80 in steps of 0.05, past `delta = 0.7`.
pub fn c_low_grid() -> Vec<f64> {
    (1..=16).map(|k| k as f64 * 0.05).map(round6).collect()
}

/// `c_H` from 0.8 to 3.6 in steps of 0.2.
pub fn c_high_grid() -> Vec<f64> {
    (4..=18).map(|k| k as f64 * 0.2).map(round6).collect()
}

fn round6(x: f64) -> f64 {
    (x * 1e6).round() / 1e6
}

/// The base case and its compositional variants: 48 agents, `delta = 0.7`,
/// `c_L = 0.2`, `c_H = 1.0`, both cost axes, `Beta(1, 7)` bias.
pub fn preset(name: &str) -> Result<ExperimentConfig> {
    let composition = match name {
        "base" => vec![vec![12, 12], vec![12, 12]],
        "groups4" => vec![vec![6, 6]; 4],
        "imbalanced-groups" => vec![vec![6, 6], vec![18, 18]],
        "types4" => vec![vec![6, 6, 6, 6], vec![6, 6, 6, 6]],
        "imbalanced-types" => vec![vec![18, 6], vec![18, 6]],
        "correlated" => vec![vec![18, 6], vec![6, 18]],
        other => {
            return Err(Error::Config(format!("unknown preset {other:?}, expected one of {}", PRESETS.join(", "))))
        }
    };
    let cfg = ExperimentConfig {
        version: CONFIG_VERSION,
        name: name.to_string(),
        delta: 0.7,
        c_low: 0.2,
        c_high: 1.0,
        regimes: default_regimes(),
        repeats: DEFAULT_REPEATS,
        seed_base: DEFAULT_SEED_BASE,
        partition: Partition::ByGroup,
        export_repeats: 1,
        population: PopulationSpec { composition },
        bias: BiasSpec { alpha: 1.0, beta: vec![7.0] },
        axes: vec![
            Axis { vary: CostAxis::CLow, values: c_low_grid() },
            Axis { vary: CostAxis::CHigh, values: c_high_grid() },
        ],
        limits: LimitsSpec::default(),
    };
    cfg.validate()?;
    Ok(cfg)
}
