//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! non-zero if any fails. Tolerances are fixed here.

use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use netform::beliefs::{draw_gamma, BeliefTable, BiasParams};
use netform::dynamics::{self, Limits, RunStatus, SimState};
use netform::experiments::export::write_metrics_csv;
use netform::experiments::{preset, sweep, CostAxis, ExperimentConfig, Regime, SweepResult};
use netform::metrics::{discovery, freeman_index, mean_degree};
use netform::model::{is_pairwise_stable, CostStructure, NetworkState, Partition, Population};
use netform::oracle::brute::{self, DenseState};
use netform::oracle::claims::{check_presets, Claim, Verdict};
use netform::oracle::thresholds::belief_thresholds;
use netform::rng::{stream, Stream};

const BETA_FRACTION_TOL: f64 = 0.01;
const KS_TOL: f64 = 0.02;
const THRESHOLD_TOL: f64 = 1e-12;
const BISECTION_TOL: f64 = 1e-9;
const CLAIM_TRIALS: usize = 100;
const ORACLE_CONFIGS: usize = 500;
const TRACKING_TOL: f64 = 0.15;
const METRIC_TOL: f64 = 1e-12;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome { pass, detail: detail.into() }
}

/// Beta(1, 7) calibration: shares of agents within 10% and 20% of the
/// rational anchor, plus a KS distance against `1 - (1 - x)^7`.
fn beta_calibration() -> Outcome {
    let draws = 100_000;
    let mut g = draw_gamma(draws, BiasParams { alpha: 1.0, beta: 7.0 }, &mut stream(7, Stream::Beliefs)).unwrap();
    let share = |x: f64| g.iter().filter(|&&v| v <= x).count() as f64 / draws as f64;
    let (f1, f2) = (share(0.1), share(0.2));
    let (e1, e2) = (0.52, 0.79);
    g.sort_by(f64::total_cmp);
    let cdf = |x: f64| 1.0 - (1.0 - x).powi(7);
    let ks = g
        .iter()
        .enumerate()
        .map(|(k, &x)| {
            let c = cdf(x);
            (c - k as f64 / draws as f64).abs().max(((k + 1) as f64 / draws as f64 - c).abs())
        })
        .fold(0.0, f64::max);
    let pass = (f1 - e1).abs() <= BETA_FRACTION_TOL && (f2 - e2).abs() <= BETA_FRACTION_TOL && ks <= KS_TOL;
    outcome(pass, format!("P(g<=0.1)={f1:.4} P(g<=0.2)={f2:.4} KS={ks:.4} over {draws} draws"))
}

/// Smallest belief at which `stable(p)` turns false, assuming it is true at
/// `lo` and false at `hi`.
fn flip_point(mut lo: f64, mut hi: f64, stable: impl Fn(f64) -> bool) -> f64 {
    assert!(stable(lo) && !stable(hi));
    while hi - lo > BISECTION_TOL / 4.0 {
        let mid = 0.5 * (lo + hi);
        if stable(mid) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    hi
}

fn threshold_exactness() -> Outcome {
    let costs = CostStructure::new(0.7, 0.2, 1.0).unwrap();
    let t = belief_thresholds(&costs, None);
    // independent evaluation: (c_H - (d - d^2)) / (c_H - c_L), (c_H - d) / (c_H - c_L)
    let (d, cl, ch) = (0.7f64, 0.2f64, 1.0f64);
    let meet = (ch - (d - d * d)) / (ch - cl);
    let empty = (ch - d) / (ch - cl);
    let formula_ok = (t.meet_always.value - meet).abs() < THRESHOLD_TOL
        && (t.empty_unstable.value - empty).abs() < THRESHOLD_TOL
        && (meet - 0.9875).abs() < THRESHOLD_TOL
        && (empty - 0.375).abs() < THRESHOLD_TOL;

    // n = 2, nobody acquainted: stable until both expect to gain from meeting
    let pop2 = Population::from_labels(vec![0, 1], vec![0, 1]).unwrap();
    let empty2 = NetworkState::empty(2);
    let dense2 = DenseState::from_network(&empty2);
    let beliefs2 = |p: f64| BeliefTable::uniform(2, 2, p).unwrap();
    let e_brute = flip_point(0.0, 1.0, |p| brute::is_stable(&dense2, &pop2, &costs, &beliefs2(p)));
    let e_engine = flip_point(0.0, 1.0, |p| is_pairwise_stable(&empty2, &pop2, &costs, &beliefs2(p)).stable);

    // n = 3 path 0-1-2 of one type, ends unacquainted
    let pop3 = Population::from_labels(vec![0, 0, 1], vec![0, 0, 0]).unwrap();
    let mut path = NetworkState::empty(3);
    path.add_link(0, 1).unwrap();
    path.add_link(1, 2).unwrap();
    let dense3 = DenseState::from_network(&path);
    let beliefs3 = |p: f64| BeliefTable::uniform(3, 2, p).unwrap();
    let m_brute = flip_point(0.5, 1.0, |p| brute::is_stable(&dense3, &pop3, &costs, &beliefs3(p)));
    let m_engine = flip_point(0.5, 1.0, |p| is_pairwise_stable(&path, &pop3, &costs, &beliefs3(p)).stable);

    let close = |x: f64, y: f64| (x - y).abs() <= BISECTION_TOL;
    let pass = formula_ok && close(e_brute, empty) && close(e_engine, empty) && close(m_brute, meet) && close(m_engine, meet);
    outcome(
        pass,
        format!(
            "meet={:.10} empty={:.10}; flips n=2 at {e_brute:.10}/{e_engine:.10}, n=3 path at {m_brute:.10}/{m_engine:.10}",
            t.meet_always.value, t.empty_unstable.value
        ),
    )
}

fn proposition_suite() -> Outcome {
    let mut lines = Vec::new();
    let mut pass = true;
    for claim in Claim::ALL {
        let reports = match check_presets(claim, CLAIM_TRIALS, 2024) {
            Ok(r) => r,
            Err(e) => {
                pass = false;
                lines.push(format!("{claim}: error {e}"));
                continue;
            }
        };
        let ok = reports.iter().all(|r| r.verdict == Verdict::Confirmed);
        pass &= ok;
        let checks: u64 = reports.iter().map(|r| r.checks).sum();
        lines.push(format!("{claim}:{}({checks})", if ok { "ok" } else { "VIOLATED" }));
    }
    outcome(pass, lines.join(" "))
}

fn random_config(rng: &mut ChaCha8Rng) -> (Population, CostStructure, BeliefTable, NetworkState) {
    let n = rng.gen_range(2..=6);
    let k = rng.gen_range(1..=3usize.min(n));
    let mut groups: Vec<usize> = (0..k).collect();
    groups.extend((k..n).map(|_| rng.gen_range(0..k)));
    let types: Vec<usize> = (0..n).map(|_| rng.gen_range(0..3)).collect();
    let pop = Population::from_labels(groups, types).unwrap();
    let delta = rng.gen_range(0.3..0.95);
    let c_low = rng.gen_range(0.01..0.9);
    let c_high = c_low + rng.gen_range(0.01..3.0);
    let costs = CostStructure::new(delta, c_low, c_high).unwrap();
    let base = (0..n * k).map(|_| rng.gen_range(0.0..=1.0)).collect();
    let beliefs = BeliefTable::from_matrix(n, k, base, vec![0.0; n]).unwrap();
    let mut net = NetworkState::empty(n);
    if rng.gen_bool(0.5) {
        for i in 0..n {
            for j in (i + 1)..n {
                if rng.gen_bool(0.3) {
                    net.add_link(i, j).unwrap();
                }
            }
        }
    }
    (pop, costs, beliefs, net)
}

fn oracle_equivalence() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let (mut converged, mut other, mut bad) = (0, 0, 0);
    for c in 0..ORACLE_CONFIGS {
        let (pop, costs, beliefs, net) = random_config(&mut rng);
        let n = pop.n();
        let state = SimState::new(net, pop.clone(), costs, beliefs.clone(), c as u64);
        let out = dynamics::run(state, Limits::for_agents(n), false);
        if out.status != RunStatus::Converged {
            other += 1;
            continue;
        }
        converged += 1;
        let dense = DenseState::from_network(&out.final_state.net);
        if !brute::is_stable(&dense, &pop, &costs, &beliefs) {
            bad += 1;
        }
    }
    outcome(bad == 0 && converged > 0, format!("{converged} converged, {other} other, {bad} discrepancies"))
}

fn axis_points(res: &SweepResult, axis: CostAxis) -> Vec<usize> {
    (0..res.points.len()).filter(|&k| res.points[k].cost.axis == Some(axis)).collect()
}

fn all_linked(res: &SweepResult, k: usize, regime: Regime) -> bool {
    res.records_at(k, regime).all(|r| r.net.link_count() > 0)
}

fn mean(xs: impl IntoIterator<Item = f64>) -> Option<f64> {
    let v: Vec<f64> = xs.into_iter().collect();
    (!v.is_empty()).then(|| v.iter().sum::<f64>() / v.len() as f64)
}

fn mean_at(res: &SweepResult, k: usize, regime: Regime, f: impl Fn(&netform::experiments::RunRecord) -> Option<f64>) -> Option<f64> {
    mean(res.records_at(k, regime).filter_map(f))
}

/// First index on the axis from which every run of `regime` has no links.
fn collapse_index(res: &SweepResult, pts: &[usize], regime: Regime) -> Option<usize> {
    let empty = |k: usize| res.records_at(k, regime).all(|r| r.net.link_count() == 0);
    (0..pts.len()).find(|&s| pts[s..].iter().all(|&k| empty(k)))
}

fn fig1_trends(base: &SweepResult) -> Outcome {
    let mut pass = true;
    let mut notes = Vec::new();
    for axis in [CostAxis::CLow, CostAxis::CHigh] {
        let pts = axis_points(base, axis);
        // (a) Freeman positive wherever biased networks have links
        let neg: Vec<usize> = pts
            .iter()
            .filter_map(|&k| {
                let f = mean(base.records_at(k, Regime::Biased).filter(|r| r.net.link_count() > 0).map(|r| r.metrics.freeman.value))?;
                (f <= 0.0).then_some(k)
            })
            .collect();
        pass &= neg.is_empty();

        // (b) incremental indices track Freeman before collapse
        let pre: Vec<usize> = pts
            .iter()
            .copied()
            .filter(|&k| Regime::ALL.iter().all(|&r| all_linked(base, k, r)))
            .collect();
        let avg = |f: &dyn Fn(usize) -> Option<f64>| mean(pre.iter().filter_map(|&k| f(k)));
        let fr = avg(&|k| mean_at(base, k, Regime::Biased, |r| Some(r.metrics.freeman.value)));
        let sr = avg(&|k| mean_at(base, k, Regime::Biased, |r| r.metrics.s_is_vs_rational));
        let sc = avg(&|k| mean_at(base, k, Regime::Biased, |r| r.metrics.s_is_vs_complete));
        let tracks = match (fr, sr, sc) {
            (Some(f), Some(r), Some(c)) => r > 0.0 && c > 0.0 && (r - f).abs() <= TRACKING_TOL && (c - f).abs() <= TRACKING_TOL,
            _ => false,
        };
        pass &= tracks;

        // (c) later collapse under biased beliefs
        let cb = collapse_index(base, &pts, Regime::Biased);
        let cr = collapse_index(base, &pts, Regime::Rational);
        let later = matches!((cb, cr), (Some(b), Some(r)) if b > r);
        pass &= later;
        let at = |c: Option<usize>| c.map_or("none".to_string(), |s| {
            let p = base.points[pts[s]].cost;
            format!("{}", if axis == CostAxis::CLow { p.c_low } else { p.c_high })
        });
        notes.push(format!(
            "{}: F<=0 at {:?}; {} pre-collapse pts F={:.3} SIS_r={:.3} SIS_c={:.3}; collapse biased {} rational {}",
            axis.as_str(),
            neg,
            pre.len(),
            fr.unwrap_or(f64::NAN),
            sr.unwrap_or(f64::NAN),
            sc.unwrap_or(f64::NAN),
            at(cb),
            at(cr)
        ));
    }
    // (d) flat complete-information degree over c_H
    let n = base.config.population().unwrap().n();
    let degrees: Vec<f64> = axis_points(base, CostAxis::CHigh)
        .into_iter()
        .filter_map(|k| mean_at(base, k, Regime::Complete, |r| Some(r.metrics.mean_degree)))
        .collect();
    let spread = degrees.iter().cloned().fold(f64::MIN, f64::max) - degrees.iter().cloned().fold(f64::MAX, f64::min);
    let flat = base.config.c_low < base.config.delta && spread < 1.0 / (n - 1) as f64;
    pass &= flat;
    notes.push(format!("complete degree spread over c_H {spread:.4} (< {:.4})", 1.0 / (n - 1) as f64));
    outcome(pass, notes.join("; "))
}

fn fig2_trend(cfg: &ExperimentConfig) -> Outcome {
    let res = sweep(cfg).unwrap();
    let levels = cfg.bias.beta.len();
    let mut checked = 0;
    let mut bad = Vec::new();
    // points are cost-major with the bias levels adjacent
    for cell in 0..res.points.len() / levels {
        let ks: Vec<usize> = (0..levels).map(|b| cell * levels + b).collect();
        if !ks.iter().all(|&k| all_linked(&res, k, Regime::Biased)) {
            continue;
        }
        checked += 1;
        let f: Vec<f64> =
            ks.iter().map(|&k| mean_at(&res, k, Regime::Biased, |r| Some(r.metrics.freeman.value)).unwrap()).collect();
        if f.windows(2).any(|w| w[1] < w[0]) {
            let c = res.points[ks[0]].cost;
            bad.push(format!("({}, {}): {:.3?}", c.c_low, c.c_high, f));
        }
    }
    let betas = &cfg.bias.beta;
    outcome(
        bad.is_empty() && checked > 0,
        format!("beta {betas:?}: {checked} pre-collapse cells, non-monotone at [{}]", bad.join(" ")),
    )
}

fn appendix_trends(base: &SweepResult, types4: &SweepResult, correlated: &SweepResult) -> Outcome {
    let mut pass = true;
    let mut notes = Vec::new();
    for axis in [CostAxis::CLow, CostAxis::CHigh] {
        let pts = axis_points(base, axis);
        let c4 = collapse_index(types4, &pts, Regime::Biased);
        let cb = collapse_index(base, &pts, Regime::Biased);
        let early = matches!((c4, cb), (Some(a), Some(b)) if a < b);
        pass &= early;

        let matched: Vec<usize> =
            pts.iter().copied().filter(|&k| all_linked(base, k, Regime::Biased) && all_linked(correlated, k, Regime::Biased)).collect();
        let f = |res: &SweepResult, k| mean_at(res, k, Regime::Biased, |r| Some(r.metrics.freeman.value)).unwrap();
        let below: Vec<usize> = matched.iter().copied().filter(|&k| f(correlated, k) <= f(base, k)).collect();
        pass &= below.is_empty() && !matched.is_empty();
        notes.push(format!(
            "{}: collapse index types4 {:?} base {:?}; correlated above base at {}/{} matched pts",
            axis.as_str(),
            c4,
            cb,
            matched.len() - below.len(),
            matched.len()
        ));
    }
    outcome(pass, notes.join("; "))
}

fn csv_bytes(res: &SweepResult) -> Vec<u8> {
    let mut buf = Vec::new();
    write_metrics_csv(&res.records, &mut buf).unwrap();
    buf
}

fn determinism(base: &SweepResult) -> Outcome {
    let again = sweep(&base.config).unwrap();
    let (a, b) = (csv_bytes(base), csv_bytes(&again));
    outcome(a == b, format!("{} bytes, {} rows each", a.len(), base.records.len()))
}

fn metric_examples() -> Outcome {
    let pop = Population::from_labels(vec![0, 0, 1, 1], vec![0, 1, 0, 1]).unwrap();
    let complete = NetworkState::from_parts(4, &[(0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3)], None).unwrap();
    let intra = NetworkState::from_parts(4, &[(0, 1), (2, 3)], None).unwrap();
    let sf_complete = freeman_index(&complete, &pop, Partition::ByGroup).unwrap().value;
    let sf_intra = freeman_index(&intra, &pop, Partition::ByGroup).unwrap().value;
    let disc = discovery(&NetworkState::empty(4));
    let deg = mean_degree(&complete);
    let pass = sf_complete.abs() < METRIC_TOL
        && (sf_intra - 1.0).abs() < METRIC_TOL
        && (disc - 0.25).abs() < METRIC_TOL
        && (deg - 1.0).abs() < METRIC_TOL;
    outcome(pass, format!("S_F complete={sf_complete} intra={sf_intra}; discovery={disc}; degree={deg}"))
}

fn main() {
    let mut failed = 0;
    let mut report = |id: &str, name: &str, start: Instant, o: Outcome| {
        let secs = start.elapsed().as_secs_f64();
        println!("{} [{id}] {name} ({secs:.1}s): {}", if o.pass { "PASS" } else { "FAIL" }, o.detail);
        if !o.pass {
            failed += 1;
        }
    };

    let t = Instant::now();
    report("1", "beta bias calibration", t, beta_calibration());
    let t = Instant::now();
    report("2", "threshold exactness", t, threshold_exactness());
    let t = Instant::now();
    report("3", "proposition suite", t, proposition_suite());
    let t = Instant::now();
    report("4", "oracle equivalence", t, oracle_equivalence());

    let t = Instant::now();
    let base = sweep(&preset("base").unwrap()).unwrap();
    report("5", "base sweep trends", t, fig1_trends(&base));

    let t = Instant::now();
    let mut fig2 = preset("base").unwrap();
    fig2.bias.beta = vec![15.0, 7.0, 3.0];
    fig2.regimes = vec![Regime::Biased];
    report("6", "bias strength trend", t, fig2_trend(&fig2));

    let t = Instant::now();
    let biased_only = |name: &str| {
        let mut cfg = preset(name).unwrap();
        cfg.regimes = vec![Regime::Biased];
        sweep(&cfg).unwrap()
    };
    let types4 = biased_only("types4");
    let correlated = biased_only("correlated");
    report("7", "composition trends", t, appendix_trends(&base, &types4, &correlated));

    let t = Instant::now();
    report("8", "determinism", t, determinism(&base));
    let t = Instant::now();
    report("9", "metric examples", t, metric_examples());

    if failed > 0 {
        println!("{failed} criteria failed");
        std::process::exit(1);
    }
    println!("all criteria passed");
}
