//! File output: per-run metric rows, per-point summaries, network snapshots,
//! attributed edge lists and belief tables.
//!
//! Floats are written in Rust's shortest round-trip form so that reruns are
//! byte-identical; undefined values are written as `NA`.

use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::{PointSummary, RunRecord, Stat, SweepResult};
use crate::error::{Error, Result};
use crate::graph::BitMatrix;
use crate::model::{NetworkState, Population};

pub const METRICS_HEADER: &str =
    "seed,regime,c_L,c_H,beta,p_inter,freeman,s_is_rational,s_is_complete,mean_degree,discovery,status";

fn opt(v: Option<f64>) -> String {
    v.map_or_else(|| "NA".to_string(), |x| x.to_string())
}

pub fn write_metrics_csv<W: Write>(records: &[RunRecord], mut out: W) -> std::io::Result<()> {
    writeln!(out, "{METRICS_HEADER}")?;
    for r in records {
        let m = &r.metrics;
        writeln!(
            out,
            "{},{},{},{},{},{},{},{},{},{},{},{}",
            r.seed,
            r.regime,
            r.point.cost.c_low,
            r.point.cost.c_high,
            r.point.beta,
            opt(m.p_inter),
            m.freeman.value,
            opt(m.s_is_vs_rational),
            opt(m.s_is_vs_complete),
            m.mean_degree,
            m.discovery,
            r.status.as_str(),
        )?;
    }
    Ok(())
}

pub fn write_summary_csv<W: Write>(summaries: &[PointSummary], mut out: W) -> std::io::Result<()> {
    let stats = ["freeman", "p_inter", "s_is_rational", "s_is_complete", "mean_degree", "discovery", "periods"];
    write!(out, "point,axis,regime,c_L,c_H,beta,runs,converged,collapsed")?;
    for s in stats {
        write!(out, ",{s}_mean,{s}_sd,{s}_undefined")?;
    }
    writeln!(out)?;
    for s in summaries {
        let p = &s.point;
        write!(
            out,
            "{},{},{},{},{},{},{},{},{}",
            p.cost.index,
            p.cost.axis.map_or("base", |a| a.as_str()),
            s.regime,
            p.cost.c_low,
            p.cost.c_high,
            p.beta,
            s.runs,
            s.converged,
            s.collapsed
        )?;
        let all: [&Stat; 7] =
            [&s.freeman, &s.p_inter, &s.s_is_rational, &s.s_is_complete, &s.mean_degree, &s.discovery, &s.periods];
        for st in all {
            write!(out, ",{},{},{}", opt(st.mean), opt(st.sd), st.undefined)?;
        }
        writeln!(out)?;
    }
    Ok(())
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct AgentInfo {
    pub id: usize,
    pub group: usize,
    #[serde(rename = "type")]
    pub kind: usize,
}

/// A final network in a form external tools can read back.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Snapshot {
    pub agents: Vec<AgentInfo>,
    pub edges: Vec<(usize, usize)>,
    /// Rows of the memory matrix as `0`/`1` strings.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub memory: Option<Vec<String>>,
    /// No agent has a link.
    pub singleton: bool,
    pub components: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub run: Option<RunInfo>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunInfo {
    pub seed: u64,
    pub rng: String,
    pub regime: String,
    pub status: String,
    pub periods: u64,
    pub c_low: f64,
    pub c_high: f64,
    pub beta: f64,
}

fn count_components(net: &NetworkState) -> usize {
    let n = net.n();
    let mut seen = vec![false; n];
    let mut count = 0;
    for s in 0..n {
        if seen[s] {
            continue;
        }
        count += 1;
        let mut stack = vec![s];
        seen[s] = true;
        while let Some(v) = stack.pop() {
            for w in 0..n {
                if net.has_link(v, w) && !seen[w] {
                    seen[w] = true;
                    stack.push(w);
                }
            }
        }
    }
    count
}

impl Snapshot {
    pub fn of(net: &NetworkState, pop: &Population, with_memory: bool) -> Self {
        let n = net.n();
        let memory = with_memory.then(|| {
            (0..n).map(|i| (0..n).map(|j| if net.knows(i, j) { '1' } else { '0' }).collect()).collect()
        });
        Snapshot {
            agents: (0..n).map(|id| AgentInfo { id, group: pop.group(id), kind: pop.kind(id) }).collect(),
            edges: net.edges(),
            memory,
            singleton: net.link_count() == 0,
            components: count_components(net),
            run: None,
        }
    }

    pub fn of_record(r: &RunRecord, pop: &Population) -> Self {
        let mut s = Snapshot::of(&r.net, pop, true);
        s.run = Some(RunInfo {
            seed: r.seed,
            rng: r.rng.to_string(),
            regime: r.regime.to_string(),
            status: r.status.as_str().to_string(),
            periods: r.periods,
            c_low: r.point.cost.c_low,
            c_high: r.point.cost.c_high,
            beta: r.point.beta,
        });
        s
    }

    pub fn population(&self) -> Result<Population> {
        Population::from_labels(self.agents.iter().map(|a| a.group).collect(), self.agents.iter().map(|a| a.kind).collect())
    }

    /// The network, with memory if recorded (links only otherwise).
    pub fn network(&self) -> Result<NetworkState> {
        let n = self.agents.len();
        let memory = match &self.memory {
            None => None,
            Some(rows) => {
                if rows.len() != n {
                    return Err(Error::Config(format!("memory has {} rows for {n} agents", rows.len())));
                }
                let mut m = BitMatrix::zeros(n);
                for (i, row) in rows.iter().enumerate() {
                    if row.len() != n {
                        return Err(Error::Config(format!("memory row {i} has length {}", row.len())));
                    }
                    for (j, c) in row.chars().enumerate() {
                        match c {
                            '1' => m.set(i, j),
                            '0' => {}
                            _ => return Err(Error::Config(format!("memory row {i} holds {c:?}"))),
                        }
                    }
                }
                Some(m)
            }
        };
        NetworkState::from_parts(n, &self.edges, memory)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        serde_json::from_str(&text).map_err(|e| Error::Parse { path: path.into(), message: e.to_string() })
    }
}

/// `i,j` plus both endpoints' group and type, one row per link.
pub fn write_edge_list<W: Write>(net: &NetworkState, pop: &Population, mut out: W) -> std::io::Result<()> {
    writeln!(out, "source,target,source_group,source_type,target_group,target_type")?;
    for (i, j) in net.edges() {
        writeln!(out, "{i},{j},{},{},{},{}", pop.group(i), pop.kind(i), pop.group(j), pop.kind(j))?;
    }
    Ok(())
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    if let Some(dir) = path.parent() {
        fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    }
    File::create(path).map(BufWriter::new).map_err(|e| Error::io(path, e))
}

/// Create `path` and fill it with `write`, attaching the path to any error.
pub fn write_file(path: &Path, write: impl FnOnce(&mut BufWriter<File>) -> std::io::Result<()>) -> Result<()> {
    let mut out = create(path)?;
    write(&mut out).and_then(|_| out.flush()).map_err(|e| Error::io(path, e))
}

fn run_stem(r: &RunRecord, point: usize) -> String {
    format!("p{point:03}_r{:02}_{}", r.repeat, r.regime)
}

/// Write a sweep below `dir`: `metrics.csv`, `summary.csv`, `config.toml`,
/// and for the first `export_repeats` repeats of each point a snapshot,
/// an edge list and (for belief-driven regimes) the belief table. Returns
/// the files written.
pub fn export_sweep(result: &SweepResult, dir: &Path) -> Result<Vec<PathBuf>> {
    let mut written = Vec::new();
    let mut put = |path: PathBuf, write: &dyn Fn(&mut BufWriter<File>) -> std::io::Result<()>| -> Result<()> {
        write_file(&path, write)?;
        written.push(path);
        Ok(())
    };
    put(dir.join("metrics.csv"), &|out| write_metrics_csv(&result.records, out))?;
    let summaries = result.summaries();
    put(dir.join("summary.csv"), &|out| write_summary_csv(&summaries, out))?;
    let cfg = result.config.to_toml();
    put(dir.join("config.toml"), &|out| out.write_all(cfg.as_bytes()))?;

    let pop = result.config.population()?;
    let per_point = result.config.repeats * result.config.regimes.len();
    for (k, r) in result.records.iter().enumerate() {
        if r.repeat >= result.config.export_repeats {
            continue;
        }
        let stem = run_stem(r, k / per_point);
        let json = serde_json::to_string_pretty(&Snapshot::of_record(r, &pop)).expect("snapshot serialises");
        put(dir.join("snapshots").join(format!("{stem}.json")), &|out| out.write_all(json.as_bytes()))?;
        put(dir.join("edges").join(format!("{stem}.csv")), &|out| write_edge_list(&r.net, &pop, out))?;
        if let Some(beliefs) = &r.beliefs {
            put(dir.join("beliefs").join(format!("{stem}.csv")), &|out| beliefs.write_csv(&pop, out))?;
        }
    }
    Ok(written)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::experiments::{preset, sweep, Regime};

    fn pop() -> Population {
        Population::from_labels(vec![0, 0, 0, 1, 1, 1], vec![0; 6]).unwrap()
    }

    #[test]
    fn two_clique_snapshot() {
        let net = NetworkState::from_parts(6, &[(0, 1), (0, 2), (1, 2), (3, 4), (3, 5), (4, 5)], None).unwrap();
        let s = Snapshot::of(&net, &pop(), true);
        assert_eq!(s.components, 2);
        assert!(!s.singleton);
        let json = serde_json::to_string(&s).unwrap();
        let back: Snapshot = serde_json::from_str(&json).unwrap();
        assert_eq!(back.network().unwrap(), net);
        assert_eq!(back.population().unwrap(), pop());
    }

    #[test]
    fn empty_snapshot_is_flagged() {
        let s = Snapshot::of(&NetworkState::empty(6), &pop(), false);
        assert!(s.edges.is_empty());
        assert!(s.singleton);
        assert_eq!(s.components, 6);
        assert!(!serde_json::to_string(&s).unwrap().contains("memory"));
    }

    #[test]
    fn rejects_malformed_memory() {
        let mut s = Snapshot::of(&NetworkState::empty(6), &pop(), true);
        s.memory.as_mut().unwrap()[2] = "0010x0".into();
        assert!(s.network().is_err());
    }

    #[test]
    fn edge_list_rows() {
        let net = NetworkState::from_parts(6, &[(2, 3)], None).unwrap();
        let mut buf = Vec::new();
        write_edge_list(&net, &pop(), &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(text.lines().nth(1), Some("2,3,0,0,1,0"));
    }

    #[test]
    fn metrics_rows_mark_undefined() {
        let mut cfg = preset("base").unwrap();
        cfg.population.composition = vec![vec![2, 2], vec![2, 2]];
        cfg.repeats = 2;
        cfg.axes.truncate(1);
        cfg.axes[0].values = vec![0.75];
        let res = sweep(&cfg).unwrap();
        let mut buf = Vec::new();
        write_metrics_csv(&res.records, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let mut lines = text.lines();
        assert_eq!(lines.next(), Some(METRICS_HEADER));
        let rows: Vec<&str> = lines.collect();
        assert_eq!(rows.len(), 6);
        // c_L above delta: no links anywhere
        for row in &rows {
            let cols: Vec<&str> = row.split(',').collect();
            assert_eq!(cols.len(), 12);
            assert_eq!((cols[2], cols[3], cols[4]), ("0.75", "1", "7"));
            assert_eq!((cols[5], cols[6], cols[9]), ("NA", "1", "0"));
            assert_eq!(cols[11], "converged");
        }
        assert!(rows[0].starts_with(&format!("{},biased,", res.records[0].seed)));
        assert_eq!(res.records[2].regime, Regime::Complete);
    }

    #[test]
    fn io_errors_carry_the_path() {
        let dir = std::env::temp_dir().join(format!("netform-export-{}", std::process::id()));
        fs::create_dir_all(&dir).unwrap();
        let blocker = dir.join("file");
        fs::write(&blocker, "x").unwrap();
        let err = write_file(&blocker.join("inner.csv"), |_| Ok(())).unwrap_err();
        assert!(err.to_string().contains("file"), "{err}");
        fs::remove_dir_all(&dir).unwrap();
    }
}
