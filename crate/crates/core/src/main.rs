use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use netform::beliefs::{biased_base_beliefs, rational_base_beliefs, BiasParams};
use netform::dynamics::{self, write_trace_csv, SimState};
use netform::experiments::export::{export_sweep, write_edge_list, write_file, write_metrics_csv, Snapshot};
use netform::experiments::{preset, sweep, ExperimentConfig, GridPoint, Regime, RunRecord};
use netform::metrics::MetricsRecord;
use netform::model::{NetworkState, Partition};
use netform::oracle::claims::{check_presets, Claim, Verdict, DEFAULT_TRIALS};
use netform::rng::{stream, Stream, RNG_ALGORITHM};
use netform::{Error, Result};

#[derive(Parser)]
#[command(name = "netform", version, about = "Network formation under incomplete information")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// Experiment configuration (TOML).
    #[arg(long, conflicts_with = "preset")]
    config: Option<PathBuf>,
    /// Named configuration: base, groups4, imbalanced-groups, types4,
    /// imbalanced-types, correlated.
    #[arg(long)]
    preset: Option<String>,
    /// Override the seed base.
    #[arg(long)]
    seed: Option<u64>,
    /// Output directory.
    #[arg(long, default_value = "out")]
    out: PathBuf,
    /// Override the number of repeats.
    #[arg(long)]
    repeats: Option<usize>,
}

impl Common {
    fn config(&self) -> Result<ExperimentConfig> {
        let mut cfg = match (&self.config, &self.preset) {
            (Some(path), _) => ExperimentConfig::load(path)?,
            (None, Some(name)) => preset(name)?,
            (None, None) => preset("base")?,
        };
        if let Some(seed) = self.seed {
            cfg.seed_base = seed;
        }
        if let Some(r) = self.repeats {
            cfg.repeats = r;
        }
        cfg.validate()?;
        Ok(cfg)
    }
}

#[derive(Subcommand)]
enum Command {
    /// One run at the configuration's base costs, with its full event trace.
    Simulate {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value = "biased")]
        regime: String,
    },
    /// The configured grid experiment.
    Sweep {
        #[command(flatten)]
        common: Common,
    },
    /// Check the stability results on their preset parameterisations.
    Verify {
        /// Claim to check (all when omitted).
        #[arg(long)]
        claim: Option<String>,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        /// Randomised trials per claim.
        #[arg(long, default_value_t = DEFAULT_TRIALS)]
        repeats: usize,
        /// Write the reports as JSON here.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Recompute metrics from a snapshot file.
    Metrics {
        snapshot: PathBuf,
        #[arg(long, default_value = "by_group")]
        partition: String,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn simulate(common: &Common, regime: &str) -> Result<()> {
    let cfg = common.config()?;
    let regime: Regime = regime.parse()?;
    let cost = cfg.cost_points()[0];
    let cost = netform::experiments::CostPoint { axis: None, c_low: cfg.c_low, c_high: cfg.c_high, ..cost };
    let setup = cfg.setup(&cost)?;
    let pop = setup.pop.clone();
    let n = pop.n();
    let seed = cfg.run_seed(0, 0);
    let beta = cfg.bias.beta[0];
    let (net, beliefs) = match regime {
        Regime::Biased => {
            let params = BiasParams { alpha: cfg.bias.alpha, beta };
            (NetworkState::empty(n), biased_base_beliefs(&pop, params, &mut stream(seed, Stream::Beliefs))?)
        }
        Regime::Rational => (NetworkState::empty(n), rational_base_beliefs(&pop)),
        Regime::Complete => (NetworkState::fully_informed(n), rational_base_beliefs(&pop)),
    };
    let out = dynamics::run(SimState::new(net, pop.clone(), setup.costs, beliefs, seed), setup.limits, true);
    let dir = &common.out;
    let trace = out.trace.clone().unwrap_or_default();
    write_file(&dir.join("trace.csv"), |w| write_trace_csv(&trace, w))?;
    let record = RunRecord {
        point: GridPoint { cost, beta },
        repeat: 0,
        seed,
        rng: RNG_ALGORITHM,
        regime,
        status: out.status,
        periods: out.periods(),
        metrics: MetricsRecord::of(&out.final_state.net, &pop, cfg.partition)?,
        net: out.final_state.net.clone(),
        beliefs: (regime != Regime::Complete).then(|| out.final_state.beliefs.clone()),
    };
    write_file(&dir.join("metrics.csv"), |w| write_metrics_csv(std::slice::from_ref(&record), w))?;
    let json = serde_json::to_string_pretty(&Snapshot::of_record(&record, &pop)).expect("snapshot serialises");
    write_file(&dir.join("snapshot.json"), |w| std::io::Write::write_all(w, json.as_bytes()))?;
    write_file(&dir.join("edges.csv"), |w| write_edge_list(&record.net, &pop, w))?;
    if let Some(b) = &record.beliefs {
        write_file(&dir.join("beliefs.csv"), |w| b.write_csv(&pop, w))?;
    }
    println!(
        "{} after {} periods: {} links, {} events, seed {seed}",
        record.status.as_str(),
        record.periods,
        record.net.link_count(),
        trace.len()
    );
    Ok(())
}

fn run_sweep(common: &Common) -> Result<()> {
    let cfg = common.config()?;
    let result = sweep(&cfg)?;
    let files = export_sweep(&result, &common.out)?;
    println!(
        "{}: {} grid points, {} records, {} files in {}",
        cfg.name,
        result.points.len(),
        result.records.len(),
        files.len(),
        common.out.display()
    );
    Ok(())
}

fn verify(claim: Option<&str>, seed: u64, trials: usize, out: Option<&Path>) -> Result<bool> {
    let claims: Vec<Claim> = match claim {
        Some(c) => vec![c.parse()?],
        None => Claim::ALL.to_vec(),
    };
    let mut reports = Vec::new();
    for c in claims {
        reports.extend(check_presets(c, trials, seed)?);
    }
    for r in &reports {
        println!("{:<5} {:<26} {:?} ({} checks)", r.claim.to_string(), r.params.scenario, r.verdict, r.checks);
        if let Some(cx) = &r.counterexample {
            println!("      counterexample: {}", serde_json::to_string(cx).expect("serialises"));
        }
    }
    if let Some(path) = out {
        let json = serde_json::to_string_pretty(&reports).expect("reports serialise");
        write_file(path, |w| std::io::Write::write_all(w, json.as_bytes()))?;
    }
    Ok(reports.iter().all(|r| r.verdict == Verdict::Confirmed))
}

fn metrics(snapshot: &Path, partition: &str, out: Option<&Path>) -> Result<()> {
    let partition = match partition {
        "by_group" => Partition::ByGroup,
        "by_type" => Partition::ByType,
        other => return Err(Error::Config(format!("unknown partition {other:?}"))),
    };
    let snap = Snapshot::load(snapshot)?;
    let net = snap.network()?;
    let record = MetricsRecord::of(&net, &snap.population()?, partition)?;
    let json = serde_json::to_string_pretty(&record).expect("metrics serialise");
    match out {
        Some(path) => write_file(path, |w| std::io::Write::write_all(w, json.as_bytes()))?,
        None => println!("{json}"),
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Simulate { common, regime } => simulate(common, regime).map(|_| true),
        Command::Sweep { common } => run_sweep(common).map(|_| true),
        Command::Verify { claim, seed, repeats, out } => verify(claim.as_deref(), *seed, *repeats, out.as_deref()),
        Command::Metrics { snapshot, partition, out } => metrics(snapshot, partition, out.as_deref()).map(|_| true),
    };
    match result {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
