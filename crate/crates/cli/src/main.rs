use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::str::FromStr;
use std::time::Duration;

use anyhow::{anyhow, bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use fpbs::bench::{
    analyses_to_csv, analyze_pool, read_sweep, run_batch, run_once, sweep_dir, sweep_to_csv, write_runs_csv,
    BenchmarkReport, PoolAnalysis, PoolSnapshot, RunRow,
};
use fpbs::qaplib::{read_instance, write_solution};
use fpbs::{xpd, BkvRegistry, Budget, FpbsParams, QapInstance};

const OUT_DIR_ENV: &str = "FPBS_OUT_DIR";
const DEFAULT_OUT_DIR: &str = "fpbs-out";

#[derive(Parser)]
#[command(name = "fpbs", version, about = "Frequent pattern based search for the quadratic assignment problem")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Solve one instance once.
    Solve(SolveArgs),
    /// Repeated seeded runs over several instances.
    Bench(BenchArgs),
    /// Similarity and pattern statistics of pool snapshots, or XPD samples of an m sweep.
    Analyze(AnalyzeArgs),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Format {
    Table,
    Csv,
    Json,
}

#[derive(Args, Debug, Default)]
struct Common {
    /// Extra `name,bkv` CSV merged over the bundled best-known values.
    #[arg(long)]
    bkv_file: Option<PathBuf>,
    /// Wall-clock budget per run, e.g. 90s, 30m, 2h (plain numbers are seconds).
    #[arg(long, conflicts_with = "iters")]
    time_limit: Option<String>,
    /// Iteration budget per run instead of a time limit.
    #[arg(long)]
    iters: Option<u64>,
    #[arg(long)]
    seed: Option<u64>,
    /// Elite pool size.
    #[arg(long)]
    k: Option<usize>,
    /// Number of patterns kept per mining call.
    #[arg(long)]
    m: Option<usize>,
    /// Minimum support.
    #[arg(long)]
    theta: Option<u32>,
    /// Tournament size.
    #[arg(long)]
    lambda: Option<usize>,
    /// Guided completion threshold as a fraction of n.
    #[arg(long)]
    beta: Option<f64>,
    #[arg(long)]
    max_no_update: Option<u32>,
    #[arg(long)]
    bls_max_iter: Option<u64>,
    /// Output directory [default: $FPBS_OUT_DIR or ./fpbs-out].
    #[arg(long)]
    out_dir: Option<PathBuf>,
    #[arg(long, value_enum)]
    format: Option<Format>,
    /// `key = value` file with defaults for the options above; flags win.
    #[arg(long)]
    config: Option<PathBuf>,
}

#[derive(Args)]
struct SolveArgs {
    #[arg(long)]
    instance: PathBuf,
    #[command(flatten)]
    common: Common,
}

#[derive(Args)]
struct BenchArgs {
    /// Instance files.
    #[arg(long = "instances", alias = "instance", num_args = 1.., required = true)]
    instances: Vec<PathBuf>,
    #[arg(long)]
    runs: Option<usize>,
    /// Worker threads [default: available cores].
    #[arg(long)]
    workers: Option<usize>,
    /// Repeat the batch for each of these m values, e.g. 1,3,5.
    #[arg(long, value_delimiter = ',')]
    sweep_m: Vec<usize>,
    #[command(flatten)]
    common: Common,
}

#[derive(Args)]
struct AnalyzeArgs {
    /// Pool snapshot files, run directories containing `pools/`, or sweep
    /// directories containing `m_<m>/runs.csv`.
    #[arg(required = true)]
    inputs: Vec<PathBuf>,
    #[arg(long, value_enum)]
    format: Option<Format>,
}

fn parse_duration(s: &str) -> Result<Duration> {
    let s = s.trim();
    let (num, scale) = match s.chars().last() {
        Some('s') => (&s[..s.len() - 1], 1.0),
        Some('m') => (&s[..s.len() - 1], 60.0),
        Some('h') => (&s[..s.len() - 1], 3600.0),
        _ => (s, 1.0),
    };
    let v: f64 = num.trim().parse().map_err(|_| anyhow!("bad time limit {s:?}; use e.g. 90s, 30m, 2h"))?;
    if v.is_nan() || v < 0.0 || v.is_infinite() {
        bail!("time limit must be non-negative, got {s:?}");
    }
    Ok(Duration::from_secs_f64(v * scale))
}

fn read_config(path: &Path) -> Result<BTreeMap<String, String>> {
    let text = fs::read_to_string(path).with_context(|| format!("file not found: {}", path.display()))?;
    let mut map = BTreeMap::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| anyhow!("{}:{}: expected `key = value`", path.display(), i + 1))?;
        map.insert(k.trim().replace('_', "-"), v.trim().to_string());
    }
    Ok(map)
}

/// Options after merging flags over the config file over defaults.
struct Resolved {
    params: FpbsParams,
    bkvs: BkvRegistry,
    out_dir: PathBuf,
    format: Format,
    config: BTreeMap<String, String>,
}

impl Resolved {
    fn get<T: FromStr>(&self, key: &str) -> Result<Option<T>> {
        match self.config.get(key) {
            None => Ok(None),
            Some(v) => v
                .parse()
                .map(Some)
                .map_err(|_| anyhow!("config key {key}: cannot parse {v:?}")),
        }
    }
}

fn pick<T: FromStr>(r: &Resolved, flag: Option<T>, key: &str, default: T) -> Result<T> {
    Ok(match flag {
        Some(v) => v,
        None => r.get(key)?.unwrap_or(default),
    })
}

fn resolve(c: Common) -> Result<Resolved> {
    let config = match &c.config {
        Some(p) => read_config(p)?,
        None => BTreeMap::new(),
    };
    let mut r = Resolved {
        params: FpbsParams::default(),
        bkvs: BkvRegistry::builtin(),
        out_dir: PathBuf::new(),
        format: Format::Table,
        config,
    };
    let d = FpbsParams::default();
    let budget = if let Some(i) = c.iters {
        Budget::Iterations(i)
    } else if let Some(t) = &c.time_limit {
        Budget::Time(parse_duration(t)?)
    } else if let Some(i) = r.get::<u64>("iters")? {
        Budget::Iterations(i)
    } else if let Some(t) = r.config.get("time-limit") {
        Budget::Time(parse_duration(t)?)
    } else {
        d.budget
    };
    r.params = FpbsParams {
        budget,
        seed: pick(&r, c.seed, "seed", d.seed)?,
        k: pick(&r, c.k, "k", d.k)?,
        m: pick(&r, c.m, "m", d.m)?,
        theta: pick(&r, c.theta, "theta", d.theta)?,
        lambda: pick(&r, c.lambda, "lambda", d.lambda)?,
        beta: pick(&r, c.beta, "beta", d.beta)?,
        max_no_update: pick(&r, c.max_no_update, "max-no-update", d.max_no_update)?,
        bls_max_iter: pick(&r, c.bls_max_iter, "bls-max-iter", d.bls_max_iter)?,
        ..d
    };
    let bkv_file = c.bkv_file.or_else(|| r.config.get("bkv-file").map(PathBuf::from));
    if let Some(p) = bkv_file {
        let text = fs::read_to_string(&p).with_context(|| format!("file not found: {}", p.display()))?;
        r.bkvs.extend(BkvRegistry::from_csv(&text)?);
    }
    r.out_dir = c
        .out_dir
        .or_else(|| r.config.get("out-dir").map(PathBuf::from))
        .or_else(|| std::env::var_os(OUT_DIR_ENV).map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from(DEFAULT_OUT_DIR));
    r.format = match c.format {
        Some(f) => f,
        None => match r.config.get("format") {
            Some(s) => Format::from_str(s, true).map_err(|e| anyhow!("config key format: {e}"))?,
            None => Format::Table,
        },
    };
    Ok(r)
}

fn load_instance(path: &Path) -> Result<QapInstance> {
    if !path.is_file() {
        bail!("file not found: {}", path.display());
    }
    read_instance(path).with_context(|| format!("cannot read instance {}", path.display()))
}

fn write_snapshot(snapshot: &PoolSnapshot, json_path: &Path, member_dir: &Path) -> Result<()> {
    snapshot.write(json_path)?;
    fs::create_dir_all(member_dir)?;
    for (i, m) in snapshot.members.iter().enumerate() {
        let pi: Vec<usize> = m.solution.iter().map(|&p| p - 1).collect();
        fs::write(
            member_dir.join(format!("member_{i:02}.sol")),
            write_solution(&snapshot.instance, m.value, &pi),
        )?;
    }
    Ok(())
}

fn solve(args: SolveArgs) -> Result<()> {
    let inst = load_instance(&args.instance)?;
    let r = resolve(args.common)?;
    let out = run_once(&inst, &r.params)?;
    let rec = &out.record;
    fs::create_dir_all(&r.out_dir).with_context(|| format!("cannot create {}", r.out_dir.display()))?;
    let name = inst.name();
    fs::write(
        r.out_dir.join(format!("{name}.sol")),
        write_solution(name, rec.best_value, &rec.best_pi()),
    )?;
    fs::write(r.out_dir.join(format!("{name}.json")), serde_json::to_string_pretty(rec)?)?;
    write_snapshot(
        &out.snapshot,
        &r.out_dir.join(format!("{name}.pool.json")),
        &r.out_dir.join(format!("{name}_pool")),
    )?;

    let dev = r.bkvs.lookup(name).map(|b| xpd(rec.best_value as f64, b)).transpose()?;
    match r.format {
        Format::Json => println!("{}", serde_json::to_string_pretty(rec)?),
        Format::Csv => {
            println!("instance,seed,best,xpd,time_to_best,iterations,minings");
            let row = RunRow::from_record(rec, r.bkvs.lookup(name));
            println!(
                "{},{},{},{},{},{},{}",
                row.instance,
                row.seed,
                row.best,
                row.xpd.map(|x| x.to_string()).unwrap_or_default(),
                row.time_to_best,
                row.iterations,
                row.minings
            );
        }
        Format::Table => {
            println!("instance      {name}");
            println!("best          {}", rec.best_value);
            if let Some(d) = dev {
                println!("xpd           {d:.3}");
            }
            println!("time_to_best  {:.3}s", rec.time_to_best);
            println!("iterations    {}", rec.iterations);
            println!("minings       {}", rec.mining_invocations);
        }
    }
    Ok(())
}

fn bench_into(
    dir: &Path,
    insts: &[QapInstance],
    runs: usize,
    workers: usize,
    params: &FpbsParams,
    bkvs: &BkvRegistry,
) -> Result<BenchmarkReport> {
    let results = run_batch(insts, runs, params.seed, params, workers)?;
    let report = BenchmarkReport::from_batch(insts, &results, bkvs);
    fs::create_dir_all(dir.join("pools"))?;
    let mut rows = Vec::new();
    for r in &results {
        let Ok(a) = &r.result else { continue };
        let inst = &insts[r.instance];
        rows.push(RunRow::from_record(&a.record, bkvs.lookup(inst.name())));
        let stem = format!("{}_run{:02}", inst.name(), r.run);
        write_snapshot(&a.snapshot, &dir.join("pools").join(format!("{stem}.json")), &dir.join("pools").join(stem))?;
    }
    write_runs_csv(&dir.join("runs.csv"), &rows)?;
    fs::write(dir.join("report.csv"), report.to_csv()?)?;
    fs::write(dir.join("report.txt"), report.to_table())?;
    fs::write(dir.join("report.json"), report.to_json()?)?;
    Ok(report)
}

fn print_report(report: &BenchmarkReport, format: Format) -> Result<()> {
    match format {
        Format::Table => print!("{}", report.to_table()),
        Format::Csv => print!("{}", report.to_csv()?),
        Format::Json => println!("{}", report.to_json()?),
    }
    Ok(())
}

fn bench(args: BenchArgs) -> Result<()> {
    let insts = args
        .instances
        .iter()
        .map(|p| load_instance(p))
        .collect::<Result<Vec<_>>>()?;
    let r = resolve(args.common)?;
    let runs = match args.runs {
        Some(v) => v,
        None => r.get("runs")?.unwrap_or(10),
    };
    let workers = match args.workers {
        Some(v) => v,
        None => r
            .get("workers")?
            .unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get())),
    };
    if args.sweep_m.is_empty() {
        let report = bench_into(&r.out_dir, &insts, runs, workers, &r.params, &r.bkvs)?;
        print_report(&report, r.format)?;
    } else {
        for &m in &args.sweep_m {
            let params = FpbsParams { m, ..r.params.clone() };
            let report = bench_into(&sweep_dir(&r.out_dir, m), &insts, runs, workers, &params, &r.bkvs)?;
            println!("m = {m}");
            print_report(&report, r.format)?;
        }
    }
    Ok(())
}

fn snapshot_paths(dir: &Path) -> Result<Vec<PathBuf>> {
    let mut out: Vec<PathBuf> = fs::read_dir(dir)?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|x| x == "json"))
        .collect();
    out.sort();
    Ok(out)
}

fn analyze(args: AnalyzeArgs) -> Result<()> {
    let format = args.format.unwrap_or(Format::Csv);
    let mut analyses: Vec<PoolAnalysis> = Vec::new();
    for input in &args.inputs {
        if input.is_file() {
            analyses.push(analyze_pool(&PoolSnapshot::read(input)?).with_context(|| input.display().to_string())?);
        } else if input.join("pools").is_dir() {
            for p in snapshot_paths(&input.join("pools"))? {
                analyses.push(analyze_pool(&PoolSnapshot::read(&p)?).with_context(|| p.display().to_string())?);
            }
        } else if input.is_dir() {
            let sweep = read_sweep(input)?;
            match format {
                Format::Json => {
                    let map: BTreeMap<usize, Vec<Option<f64>>> =
                        sweep.iter().map(|(m, rows)| (*m, rows.iter().map(|r| r.xpd).collect())).collect();
                    println!("{}", serde_json::to_string_pretty(&map)?);
                }
                _ => print!("{}", sweep_to_csv(&sweep)?),
            }
        } else {
            bail!("file not found: {}", input.display());
        }
    }
    if !analyses.is_empty() {
        match format {
            Format::Json => println!("{}", serde_json::to_string_pretty(&analyses)?),
            Format::Csv => print!("{}", analyses_to_csv(&analyses)?),
            Format::Table => {
                println!(
                    "{:<16} {:>7} {:>8} {:>8} {:>8} {:>8} {:>8} {:>8}",
                    "instance", "members", "sim_max", "sim_avg", "sim_min", "len_max", "len_avg", "len_min"
                );
                for a in &analyses {
                    println!(
                        "{:<16} {:>7} {:>8.3} {:>8.3} {:>8.3} {:>8.3} {:>8.3} {:>8.3}",
                        a.instance,
                        a.members,
                        a.similarity.max,
                        a.similarity.avg,
                        a.similarity.min,
                        a.pattern_length.max,
                        a.pattern_length.avg,
                        a.pattern_length.min
                    );
                }
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let res = match cli.command {
        Command::Solve(a) => solve(a),
        Command::Bench(a) => bench(a),
        Command::Analyze(a) => analyze(a),
    };
    match res {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
