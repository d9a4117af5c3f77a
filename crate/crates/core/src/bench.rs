//! Batch benchmarking, deviation reports and pool analysis.

use std::collections::HashSet;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::driver::{run_observed, xpd, FpbsParams, RunRecord};
use crate::elite::{pattern_length, similarity};
use crate::error::{Error, Result};
use crate::fpmine::mine_patterns;
use crate::qap::Assignment;
use crate::qaplib::{BkvRegistry, QapInstance};
use crate::seed::run_seed;

/// Elite pool and mining settings captured at the end of a run.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PoolSnapshot {
    pub instance: String,
    pub n: usize,
    pub theta: u32,
    pub m: usize,
    pub members: Vec<SnapshotMember>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SnapshotMember {
    pub value: i64,
    /// 1-indexed locations.
    pub solution: Vec<usize>,
}

impl PoolSnapshot {
    pub fn pis(&self) -> Vec<Vec<usize>> {
        self.members
            .iter()
            .map(|m| m.solution.iter().map(|&p| p - 1).collect())
            .collect()
    }

    pub fn read(path: &Path) -> Result<Self> {
        Ok(serde_json::from_str(&fs::read_to_string(path)?)?)
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        fs::write(path, serde_json::to_string_pretty(self)?)?;
        Ok(())
    }
}

#[derive(Clone, Debug)]
pub struct RunArtifacts {
    pub record: RunRecord,
    pub snapshot: PoolSnapshot,
}

#[derive(Clone, Debug)]
pub struct BatchRun {
    pub instance: usize,
    pub run: usize,
    pub seed: u64,
    pub result: std::result::Result<RunArtifacts, String>,
}

/// One seeded run, returning its record and final pool.
pub fn run_once(inst: &QapInstance, params: &FpbsParams) -> Result<RunArtifacts> {
    let out = run_observed(inst, params, |_| {})?;
    let snapshot = PoolSnapshot {
        instance: inst.name().to_string(),
        n: inst.n(),
        theta: params.theta,
        m: params.m,
        members: out
            .pool
            .members()
            .iter()
            .map(|a| SnapshotMember {
                value: a.value(),
                solution: a.one_indexed(),
            })
            .collect(),
    };
    Ok(RunArtifacts {
        record: out.record,
        snapshot,
    })
}

/// Runs every instance `runs` times with seeds derived from `master_seed`,
/// spread over `workers` threads. Results come back in (instance, run) order
/// and do not depend on the worker count. A failing run is kept as an error
/// entry and does not affect the others.
pub fn run_batch(
    instances: &[QapInstance],
    runs: usize,
    master_seed: u64,
    params: &FpbsParams,
    workers: usize,
) -> Result<Vec<BatchRun>> {
    if instances.is_empty() {
        return Err(Error::InvalidParameter("no instances given".into()));
    }
    if runs < 1 {
        return Err(Error::InvalidParameter("runs must be >= 1".into()));
    }
    let mut seen = HashSet::new();
    let mut jobs = Vec::with_capacity(instances.len() * runs);
    for i in 0..instances.len() {
        for j in 0..runs {
            let seed = run_seed(master_seed, i, j);
            if !seen.insert(seed) {
                return Err(Error::SeedCollision { instance: i, run: j });
            }
            jobs.push((i, j, seed));
        }
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers.max(1))
        .build()
        .map_err(|e| Error::InvalidParameter(e.to_string()))?;
    let results = pool.install(|| {
        jobs.par_iter()
            .map(|&(i, j, seed)| {
                let mut p = params.clone();
                p.seed = seed;
                BatchRun {
                    instance: i,
                    run: j,
                    seed,
                    result: run_once(&instances[i], &p).map_err(|e| e.to_string()),
                }
            })
            .collect()
    });
    Ok(results)
}

/// One line of `runs.csv`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunRow {
    pub instance: String,
    pub seed: u64,
    pub best: i64,
    pub xpd: Option<f64>,
    pub time_to_best: f64,
    pub iterations: u64,
    pub minings: u64,
}

impl RunRow {
    pub fn from_record(record: &RunRecord, bkv: Option<i64>) -> Self {
        Self {
            instance: record.instance.clone(),
            seed: record.seed,
            best: record.best_value,
            xpd: bkv.and_then(|b| xpd(record.best_value as f64, b).ok()),
            time_to_best: record.time_to_best,
            iterations: record.iterations,
            minings: record.mining_invocations,
        }
    }
}

pub fn write_runs_csv(path: &Path, rows: &[RunRow]) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    for r in rows {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_runs_csv(path: &Path) -> Result<Vec<RunRow>> {
    let mut r = csv::Reader::from_path(path)?;
    r.deserialize().map(|row| row.map_err(Error::from)).collect()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReportRow {
    pub name: String,
    pub bkv: Option<i64>,
    pub runs: usize,
    pub failures: Vec<String>,
    pub best_value: Option<i64>,
    pub worst_value: Option<i64>,
    pub bpd: Option<f64>,
    pub apd: Option<f64>,
    pub wpd: Option<f64>,
    /// Runs whose best value is at or below the BKV.
    pub hits: usize,
    /// Mean seconds until each run found its final best.
    pub mean_time_to_best: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BenchmarkReport {
    pub rows: Vec<ReportRow>,
    pub avg_bpd: Option<f64>,
    pub avg_apd: Option<f64>,
    pub avg_wpd: Option<f64>,
    pub avg_time_to_best: Option<f64>,
}

fn mean(xs: impl IntoIterator<Item = f64>) -> Option<f64> {
    let (sum, count) = xs.into_iter().fold((0.0, 0usize), |(s, c), x| (s + x, c + 1));
    (count > 0).then(|| sum / count as f64)
}

impl BenchmarkReport {
    pub fn from_batch(instances: &[QapInstance], results: &[BatchRun], bkvs: &BkvRegistry) -> Self {
        let rows = instances
            .iter()
            .enumerate()
            .map(|(i, inst)| {
                let mine: Vec<&BatchRun> = results.iter().filter(|r| r.instance == i).collect();
                let records: Vec<&RunRecord> = mine
                    .iter()
                    .filter_map(|r| r.result.as_ref().ok().map(|a| &a.record))
                    .collect();
                let failures = mine
                    .iter()
                    .filter_map(|r| r.result.as_ref().err().map(|e| format!("run {}: {e}", r.run)))
                    .collect();
                Self::row(inst.name(), bkvs.lookup(inst.name()), mine.len(), &records, failures)
            })
            .collect();
        Self::from_rows(rows)
    }

    pub fn row(name: &str, bkv: Option<i64>, runs: usize, records: &[&RunRecord], failures: Vec<String>) -> ReportRow {
        let values: Vec<i64> = records.iter().map(|r| r.best_value).collect();
        let best_value = values.iter().copied().min();
        let worst_value = values.iter().copied().max();
        let dev = |x: f64| bkv.and_then(|b| xpd(x, b).ok());
        let avg_value = mean(values.iter().map(|&v| v as f64));
        ReportRow {
            name: name.to_string(),
            bkv,
            runs,
            failures,
            best_value,
            worst_value,
            bpd: best_value.and_then(|v| dev(v as f64)),
            apd: mean(values.iter().filter_map(|&v| dev(v as f64))).or_else(|| avg_value.and_then(dev)),
            wpd: worst_value.and_then(|v| dev(v as f64)),
            hits: bkv.map_or(0, |b| values.iter().filter(|&&v| v <= b).count()),
            mean_time_to_best: mean(records.iter().map(|r| r.time_to_best)),
        }
    }

    pub fn from_rows(rows: Vec<ReportRow>) -> Self {
        Self {
            avg_bpd: mean(rows.iter().filter_map(|r| r.bpd)),
            avg_apd: mean(rows.iter().filter_map(|r| r.apd)),
            avg_wpd: mean(rows.iter().filter_map(|r| r.wpd)),
            avg_time_to_best: mean(rows.iter().filter_map(|r| r.mean_time_to_best)),
            rows,
        }
    }

    pub fn to_csv(&self) -> Result<String> {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record([
            "name",
            "bkv",
            "runs",
            "failures",
            "best",
            "worst",
            "bpd",
            "apd",
            "wpd",
            "hits",
            "mean_time_to_best",
        ])?;
        let opt = |v: Option<f64>| v.map(|x| x.to_string()).unwrap_or_default();
        for r in &self.rows {
            w.write_record([
                r.name.clone(),
                r.bkv.map(|b| b.to_string()).unwrap_or_default(),
                r.runs.to_string(),
                r.failures.len().to_string(),
                r.best_value.map(|b| b.to_string()).unwrap_or_default(),
                r.worst_value.map(|b| b.to_string()).unwrap_or_default(),
                opt(r.bpd),
                opt(r.apd),
                opt(r.wpd),
                r.hits.to_string(),
                opt(r.mean_time_to_best),
            ])?;
        }
        w.write_record([
            "average".to_string(),
            String::new(),
            String::new(),
            String::new(),
            String::new(),
            String::new(),
            opt(self.avg_bpd),
            opt(self.avg_apd),
            opt(self.avg_wpd),
            String::new(),
            opt(self.avg_time_to_best),
        ])?;
        let bytes = w.into_inner().map_err(|e| Error::Format(e.to_string()))?;
        String::from_utf8(bytes).map_err(|e| Error::Format(e.to_string()))
    }

    /// Fixed-width table; deviations to 3 decimals, BPD followed by the hit count.
    pub fn to_table(&self) -> String {
        let f3 = |v: Option<f64>| v.map_or("-".to_string(), |x| format!("{x:.3}"));
        let mut out = String::new();
        let _ = writeln!(
            out,
            "{:<12} {:>12} {:>14} {:>10} {:>10} {:>14}",
            "instance", "bkv", "bpd(hits)", "apd", "wpd", "time_to_best"
        );
        for r in &self.rows {
            let bpd = match r.bpd {
                Some(b) => format!("{b:.3}({})", r.hits),
                None => r.best_value.map_or("-".into(), |v| v.to_string()),
            };
            let _ = writeln!(
                out,
                "{:<12} {:>12} {:>14} {:>10} {:>10} {:>14}",
                r.name,
                r.bkv.map_or("-".into(), |b| b.to_string()),
                bpd,
                f3(r.apd),
                f3(r.wpd),
                r.mean_time_to_best.map_or("-".into(), |t| format!("{t:.1}")),
            );
            for f in &r.failures {
                let _ = writeln!(out, "  failed {f}");
            }
        }
        let _ = writeln!(
            out,
            "{:<12} {:>12} {:>14} {:>10} {:>10} {:>14}",
            "average",
            "",
            f3(self.avg_bpd),
            f3(self.avg_apd),
            f3(self.avg_wpd),
            self.avg_time_to_best.map_or("-".into(), |t| format!("{t:.1}")),
        );
        out
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Stats {
    pub max: f64,
    pub avg: f64,
    pub min: f64,
}

impl Stats {
    fn of(xs: &[f64]) -> Option<Self> {
        Some(Self {
            max: xs.iter().copied().reduce(f64::max)?,
            avg: mean(xs.iter().copied())?,
            min: xs.iter().copied().reduce(f64::min)?,
        })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PoolAnalysis {
    pub instance: String,
    pub members: usize,
    /// Over all unordered member pairs.
    pub similarity: Stats,
    /// Over the patterns mined from the pool.
    pub pattern_length: Stats,
    pub patterns: usize,
}

/// Pairwise similarity and mined pattern length statistics of a pool snapshot.
pub fn analyze_pool(snapshot: &PoolSnapshot) -> Result<PoolAnalysis> {
    let pis = snapshot.pis();
    if pis.len() < 2 {
        return Err(Error::InvalidParameter(format!(
            "pool analysis needs at least 2 solutions, got {}",
            pis.len()
        )));
    }
    let n = snapshot.n;
    let mut sims = Vec::new();
    for (i, a) in pis.iter().enumerate() {
        for b in &pis[i + 1..] {
            sims.push(similarity(a, b));
        }
    }
    let members: Vec<Assignment> = pis
        .into_iter()
        .zip(&snapshot.members)
        .map(|(pi, m)| Assignment::with_value(pi, m.value))
        .collect::<Result<_>>()?;
    let patterns = mine_patterns(&members, snapshot.theta, snapshot.m)?;
    let lengths: Vec<f64> = patterns.iter().map(|p| pattern_length(p, n)).collect();
    Ok(PoolAnalysis {
        instance: snapshot.instance.clone(),
        members: members.len(),
        similarity: Stats::of(&sims).expect("at least one pair"),
        pattern_length: Stats::of(&lengths).expect("at least one pattern"),
        patterns: patterns.len(),
    })
}

pub fn analyses_to_csv(analyses: &[PoolAnalysis]) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record([
        "instance",
        "members",
        "sim_max",
        "sim_avg",
        "sim_min",
        "len_max",
        "len_avg",
        "len_min",
        "patterns",
    ])?;
    for a in analyses {
        w.write_record([
            a.instance.clone(),
            a.members.to_string(),
            a.similarity.max.to_string(),
            a.similarity.avg.to_string(),
            a.similarity.min.to_string(),
            a.pattern_length.max.to_string(),
            a.pattern_length.avg.to_string(),
            a.pattern_length.min.to_string(),
            a.patterns.to_string(),
        ])?;
    }
    let bytes = w.into_inner().map_err(|e| Error::Format(e.to_string()))?;
    String::from_utf8(bytes).map_err(|e| Error::Format(e.to_string()))
}

pub fn sweep_dir(root: &Path, m: usize) -> PathBuf {
    root.join(format!("m_{m}"))
}

/// XPD samples per `m`, read from `m_<m>/runs.csv` subdirectories, sorted by `m`.
pub fn read_sweep(root: &Path) -> Result<Vec<(usize, Vec<RunRow>)>> {
    let mut out = Vec::new();
    for entry in fs::read_dir(root)? {
        let entry = entry?;
        let name = entry.file_name();
        let Some(m) = name.to_str().and_then(|s| s.strip_prefix("m_")).and_then(|s| s.parse().ok()) else {
            continue;
        };
        let csv_path = entry.path().join("runs.csv");
        if csv_path.is_file() {
            out.push((m, read_runs_csv(&csv_path)?));
        }
    }
    if out.is_empty() {
        return Err(Error::Format(format!("no m_<m>/runs.csv found under {}", root.display())));
    }
    out.sort_by_key(|(m, _)| *m);
    Ok(out)
}

/// Tidy `m,instance,seed,xpd` rows for box plots.
pub fn sweep_to_csv(sweep: &[(usize, Vec<RunRow>)]) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["m", "instance", "seed", "xpd"])?;
    for (m, rows) in sweep {
        for r in rows {
            w.write_record([
                m.to_string(),
                r.instance.clone(),
                r.seed.to_string(),
                r.xpd.map(|x| x.to_string()).unwrap_or_default(),
            ])?;
        }
    }
    let bytes = w.into_inner().map_err(|e| Error::Format(e.to_string()))?;
    String::from_utf8(bytes).map_err(|e| Error::Format(e.to_string()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::driver::Budget;

    fn record(best: i64, ttb: f64) -> RunRecord {
        RunRecord {
            instance: "x".into(),
            n: 3,
            seed: 0,
            best_value: best,
            best_solution: vec![1, 2, 3],
            time_to_best: ttb,
            elapsed: ttb,
            iterations: 1,
            mining_invocations: 1,
            events: Vec::new(),
        }
    }

    #[test]
    fn single_run_row() {
        let r = record(110, 2.0);
        let row = BenchmarkReport::row("x", Some(100), 1, &[&r], Vec::new());
        assert_eq!(row.bpd, row.apd);
        assert_eq!(row.apd, row.wpd);
        assert_eq!(row.bpd, Some(10.0));
        assert_eq!(row.hits, 0);
    }

    #[test]
    fn all_hits_and_footer() {
        let rs: Vec<RunRecord> = (0..4).map(|i| record(100, i as f64)).collect();
        let refs: Vec<&RunRecord> = rs.iter().collect();
        let a = BenchmarkReport::row("a", Some(100), 4, &refs, Vec::new());
        assert_eq!(a.bpd, Some(0.0));
        assert_eq!(a.hits, 4);
        assert_eq!(a.mean_time_to_best, Some(1.5));
        let b = BenchmarkReport::row("b", Some(100), 1, &[&rs[0]], Vec::new());
        let b = ReportRow { bpd: Some(2.0), apd: Some(3.0), wpd: Some(4.0), ..b };
        let rep = BenchmarkReport::from_rows(vec![a, b]);
        assert_eq!(rep.avg_bpd, Some(1.0));
        assert_eq!(rep.avg_wpd, Some(2.0));
        assert!(rep.to_table().contains("0.000(4)"));
        assert!(rep.to_csv().unwrap().lines().count() == 4);
    }

    #[test]
    fn identical_pool_similarity_is_one() {
        let snap = PoolSnapshot {
            instance: "x".into(),
            n: 4,
            theta: 2,
            m: 11,
            members: vec![
                SnapshotMember { value: 5, solution: vec![2, 1, 4, 3] };
                3
            ],
        };
        let a = analyze_pool(&snap).unwrap();
        assert_eq!(a.similarity, Stats { max: 1.0, avg: 1.0, min: 1.0 });
        assert_eq!(a.pattern_length.max, 1.0);
        let one = PoolSnapshot { members: vec![snap.members[0].clone()], ..snap };
        assert!(analyze_pool(&one).is_err());
    }

    #[test]
    fn batch_rejects_bad_input() {
        let p = FpbsParams {
            budget: Budget::Iterations(0),
            ..FpbsParams::default()
        };
        assert!(run_batch(&[], 1, 0, &p, 1).is_err());
    }
}
