//! Paired-seed regime comparisons over cost and bias grids.
//!
//! Every (cost cell, repeat) shares one run seed across regimes and bias
//! levels, so the rational and complete-information runs are the baselines
//! of the biased run with the same pair-selection stream. Belief draws use a
//! separate stream of the same seed.

pub mod config;
pub mod export;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

pub use config::{preset, CostAxis, CostPoint, ExperimentConfig, GridPoint, Regime, PRESETS};

use crate::beliefs::{biased_base_beliefs, rational_base_beliefs, BeliefTable, BiasParams};
use crate::dynamics::{self, Limits, RunStatus, SimState};
use crate::error::Result;
use crate::metrics::{incremental_segregation, MetricsRecord};
use crate::model::{CostStructure, NetworkState, Partition, Population};
use crate::rng::{derive_seed, stream, Stream, RNG_ALGORITHM};

#[derive(Clone, Debug)]
pub struct RunRecord {
    pub point: GridPoint,
    pub repeat: usize,
    pub seed: u64,
    pub rng: &'static str,
    pub regime: Regime,
    pub status: RunStatus,
    pub periods: u64,
    pub metrics: MetricsRecord,
    pub net: NetworkState,
    /// Base beliefs the run used; `None` under complete information.
    pub beliefs: Option<BeliefTable>,
}

/// Everything a paired run needs besides its seed.
#[derive(Clone, Debug)]
pub struct PointSetup {
    pub pop: Population,
    pub costs: CostStructure,
    pub alpha: f64,
    pub regimes: Vec<Regime>,
    pub limits: Limits,
    pub partition: Partition,
}

fn simulate(setup: &PointSetup, net: NetworkState, beliefs: BeliefTable, seed: u64) -> Result<RunOutcomeSummary> {
    let state = SimState::new(net, setup.pop.clone(), setup.costs, beliefs, seed);
    let out = dynamics::run(state, setup.limits, false);
    let periods = out.periods();
    let final_state = out.final_state;
    Ok(RunOutcomeSummary {
        status: out.status,
        periods,
        metrics: MetricsRecord::of(&final_state.net, &setup.pop, setup.partition)?,
        net: final_state.net,
        beliefs: Some(final_state.beliefs),
    })
}

/// One record per regime and bias level, bias-level-major, regimes in
/// [`Regime::ALL`] order. Rational and complete runs do not depend on the
/// bias level and are computed once.
pub fn run_paired_levels(setup: &PointSetup, betas: &[f64], seed: u64) -> Result<Vec<Vec<(Regime, RunOutcomeSummary)>>> {
    let n = setup.pop.n();
    let rational = rational_base_beliefs(&setup.pop);
    let wants = |r| setup.regimes.contains(&r);
    let biased_on = wants(Regime::Biased);

    // baselines are needed for the incremental indices even when not reported
    let rational_run = if wants(Regime::Rational) || biased_on {
        Some(simulate(setup, NetworkState::empty(n), rational.clone(), seed)?)
    } else {
        None
    };
    let complete_run = if wants(Regime::Complete) || biased_on {
        let mut run = simulate(setup, NetworkState::fully_informed(n), rational, seed)?;
        run.beliefs = None;
        Some(run)
    } else {
        None
    };

    let mut levels = Vec::with_capacity(betas.len());
    for &beta in betas {
        let mut records = Vec::new();
        for regime in Regime::ALL {
            if !wants(regime) {
                continue;
            }
            let summary = match regime {
                Regime::Biased => {
                    let params = BiasParams { alpha: setup.alpha, beta };
                    let beliefs = biased_base_beliefs(&setup.pop, params, &mut stream(seed, Stream::Beliefs))?;
                    let mut run = simulate(setup, NetworkState::empty(n), beliefs, seed)?;
                    let p = run.metrics.p_inter;
                    run.metrics.s_is_vs_rational =
                        incremental_segregation(rational_run.as_ref().and_then(|b| b.metrics.p_inter), p);
                    run.metrics.s_is_vs_complete =
                        incremental_segregation(complete_run.as_ref().and_then(|b| b.metrics.p_inter), p);
                    run
                }
                Regime::Rational => rational_run.clone().expect("rational run"),
                Regime::Complete => complete_run.clone().expect("complete run"),
            };
            records.push((regime, summary));
        }
        levels.push(records);
    }
    Ok(levels)
}

/// The per-regime payload of a [`RunRecord`].
#[derive(Clone, Debug)]
pub struct RunOutcomeSummary {
    pub status: RunStatus,
    pub periods: u64,
    pub metrics: MetricsRecord,
    pub net: NetworkState,
    pub beliefs: Option<BeliefTable>,
}

/// Paired records at a single grid point, in [`Regime::ALL`] order.
pub fn run_paired(setup: &PointSetup, point: GridPoint, repeat: usize, seed: u64) -> Result<Vec<RunRecord>> {
    let mut levels = run_paired_levels(setup, &[point.beta], seed)?;
    Ok(levels
        .pop()
        .unwrap_or_default()
        .into_iter()
        .map(|(regime, s)| record(point, repeat, seed, regime, s))
        .collect())
}

fn record(point: GridPoint, repeat: usize, seed: u64, regime: Regime, s: RunOutcomeSummary) -> RunRecord {
    RunRecord {
        point,
        repeat,
        seed,
        rng: RNG_ALGORITHM,
        regime,
        status: s.status,
        periods: s.periods,
        metrics: s.metrics,
        net: s.net,
        beliefs: s.beliefs,
    }
}

impl ExperimentConfig {
    pub fn setup(&self, cost: &CostPoint) -> Result<PointSetup> {
        let pop = self.population()?;
        let limits = self.limits(pop.n());
        Ok(PointSetup {
            pop,
            costs: CostStructure::new(self.delta, cost.c_low, cost.c_high)?,
            alpha: self.bias.alpha,
            regimes: self.regimes.clone(),
            limits,
            partition: self.partition,
        })
    }

    /// Seed of `repeat` at cost cell `cost_index`.
    pub fn run_seed(&self, cost_index: usize, repeat: usize) -> u64 {
        derive_seed(self.seed_base, cost_index as u64, repeat as u64)
    }
}

#[derive(Clone, Debug)]
pub struct SweepResult {
    pub config: ExperimentConfig,
    pub points: Vec<GridPoint>,
    /// Ordered by grid point, then repeat, then regime.
    pub records: Vec<RunRecord>,
}

/// Run the whole grid. Cells and repeats run in parallel; the output order
/// does not depend on scheduling.
pub fn sweep(config: &ExperimentConfig) -> Result<SweepResult> {
    config.validate()?;
    let costs = config.cost_points();
    let betas = &config.bias.beta;
    let jobs: Vec<(usize, usize)> =
        (0..costs.len()).flat_map(|c| (0..config.repeats).map(move |r| (c, r))).collect();
    let done: Vec<Vec<Vec<RunRecord>>> = jobs
        .par_iter()
        .map(|&(c, repeat)| {
            let cost = costs[c];
            let setup = config.setup(&cost)?;
            let seed = config.run_seed(cost.index, repeat);
            let levels = run_paired_levels(&setup, betas, seed)?;
            Ok(levels
                .into_iter()
                .zip(betas)
                .map(|(level, &beta)| {
                    let point = GridPoint { cost, beta };
                    level.into_iter().map(|(regime, s)| record(point, repeat, seed, regime, s)).collect()
                })
                .collect())
        })
        .collect::<Result<_>>()?;

    // jobs are cost-major, repeat-minor; regroup as point-major
    let mut records = Vec::with_capacity(done.len() * betas.len() * config.regimes.len());
    for c in 0..costs.len() {
        for b in 0..betas.len() {
            for r in 0..config.repeats {
                records.extend(done[c * config.repeats + r][b].iter().cloned());
            }
        }
    }
    Ok(SweepResult { config: config.clone(), points: config.grid(), records })
}

/// Mean and standard deviation over the defined values of one metric.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Stat {
    pub mean: Option<f64>,
    pub sd: Option<f64>,
    pub defined: usize,
    pub undefined: usize,
}

impl Stat {
    pub fn of(values: impl IntoIterator<Item = Option<f64>>) -> Self {
        let mut xs = Vec::new();
        let mut undefined = 0;
        for v in values {
            match v {
                Some(x) => xs.push(x),
                None => undefined += 1,
            }
        }
        let k = xs.len();
        if k == 0 {
            return Stat { mean: None, sd: None, defined: 0, undefined };
        }
        let mean = xs.iter().sum::<f64>() / k as f64;
        let sd = if k > 1 {
            Some((xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (k - 1) as f64).sqrt())
        } else {
            None
        };
        Stat { mean: Some(mean), sd, defined: k, undefined }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PointSummary {
    pub point: GridPoint,
    pub regime: Regime,
    pub runs: usize,
    pub converged: usize,
    pub freeman: Stat,
    /// Runs whose network ended without links.
    pub collapsed: usize,
    pub p_inter: Stat,
    pub s_is_rational: Stat,
    pub s_is_complete: Stat,
    pub mean_degree: Stat,
    pub discovery: Stat,
    pub periods: Stat,
}

impl SweepResult {
    pub fn records_at(&self, point: usize, regime: Regime) -> impl Iterator<Item = &RunRecord> {
        let per_point = self.config.repeats * self.config.regimes.len();
        self.records[point * per_point..(point + 1) * per_point].iter().filter(move |r| r.regime == regime)
    }

    /// Per grid point and regime, in record order.
    pub fn summaries(&self) -> Vec<PointSummary> {
        let mut out = Vec::new();
        for (k, &point) in self.points.iter().enumerate() {
            for regime in Regime::ALL.into_iter().filter(|r| self.config.regimes.contains(r)) {
                let rs: Vec<&RunRecord> = self.records_at(k, regime).collect();
                let stat = |f: &dyn Fn(&RunRecord) -> Option<f64>| Stat::of(rs.iter().map(|r| f(r)));
                out.push(PointSummary {
                    point,
                    regime,
                    runs: rs.len(),
                    converged: rs.iter().filter(|r| r.status == RunStatus::Converged).count(),
                    freeman: stat(&|r| Some(r.metrics.freeman.value)),
                    collapsed: rs.iter().filter(|r| r.metrics.freeman.collapsed).count(),
                    p_inter: stat(&|r| r.metrics.p_inter),
                    s_is_rational: stat(&|r| r.metrics.s_is_vs_rational),
                    s_is_complete: stat(&|r| r.metrics.s_is_vs_complete),
                    mean_degree: stat(&|r| Some(r.metrics.mean_degree)),
                    discovery: stat(&|r| Some(r.metrics.discovery)),
                    periods: stat(&|r| Some(r.periods as f64)),
                });
            }
        }
        out
    }
}
