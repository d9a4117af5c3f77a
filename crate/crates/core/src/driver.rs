//! The FPBS main loop: initialize the pool, mine, then repeatedly construct,
//! improve and insert, re-mining whenever the pool stagnates.

use std::time::{Duration, Instant};

use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use crate::bls::{bls_run, BlsParams};
use crate::construct::{build_solution, BuildTrace, ConstructParams};
use crate::elite::ElitePool;
use crate::error::{Error, Result};
use crate::fpmine::{mine_patterns_with, MineOptions, Pattern};
use crate::qap::{full_evaluate, Assignment};
use crate::qaplib::QapInstance;
use crate::seed::{self, Stream};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Budget {
    /// Wall-clock limit, checked before each iteration.
    Time(Duration),
    /// Fixed number of construct-and-improve iterations; machine independent.
    Iterations(u64),
}

/// How new starting solutions are produced.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ConstructionMode {
    #[default]
    Patterns,
    /// No mining; every iteration restarts BLS from a random permutation.
    RandomRestart,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FpbsParams {
    pub budget: Budget,
    pub k: usize,
    pub m: usize,
    pub theta: u32,
    pub lambda: usize,
    pub beta: f64,
    pub max_no_update: u32,
    pub bls_max_iter: u64,
    /// Full BLS settings; when absent they are derived from the instance size.
    pub bls: Option<BlsParams>,
    pub seed: u64,
    pub mode: ConstructionMode,
    pub use_array: bool,
    /// Stop early once the best value is at or below this.
    pub target: Option<i64>,
}

impl Default for FpbsParams {
    fn default() -> Self {
        Self {
            budget: Budget::Time(Duration::from_secs(30 * 60)),
            k: 15,
            m: 11,
            theta: 2,
            lambda: 3,
            beta: 0.75,
            max_no_update: 15,
            bls_max_iter: 10_000,
            bls: None,
            seed: 1,
            mode: ConstructionMode::Patterns,
            use_array: true,
            target: None,
        }
    }
}

impl FpbsParams {
    pub fn bls_params(&self, n: usize) -> BlsParams {
        self.bls
            .clone()
            .unwrap_or_else(|| BlsParams::for_size(n).with_max_iter(self.bls_max_iter))
    }

    pub fn validate(&self, n: usize) -> Result<()> {
        let bad = |msg: &str| Err(Error::InvalidParameter(msg.into()));
        if self.k < 1 {
            return bad("k must be >= 1");
        }
        if self.m < 1 {
            return bad("m must be >= 1");
        }
        if self.theta < 1 {
            return bad("theta must be >= 1");
        }
        if self.lambda < 1 {
            return bad("lambda must be >= 1");
        }
        if !(0.0..=1.0).contains(&self.beta) {
            return bad("beta must lie in [0, 1]");
        }
        if self.mode == ConstructionMode::Patterns && self.k < self.theta as usize {
            return bad("k must be at least theta");
        }
        self.bls_params(n).validate(n)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum EventKind {
    Initialized { best: i64 },
    Mined { patterns: usize, longest: usize, stagnation: bool },
    NewBest { value: i64 },
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Event {
    pub iteration: u64,
    #[serde(flatten)]
    pub kind: EventKind,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub instance: String,
    pub n: usize,
    pub seed: u64,
    pub best_value: i64,
    /// 1-indexed locations.
    pub best_solution: Vec<usize>,
    /// Seconds from the start of the run until `best_value` was first reached.
    pub time_to_best: f64,
    pub elapsed: f64,
    pub iterations: u64,
    pub mining_invocations: u64,
    pub events: Vec<Event>,
}

impl RunRecord {
    /// JSON with the timing fields zeroed, for reproducibility comparisons.
    pub fn to_json_without_timing(&self) -> Result<String> {
        let mut r = self.clone();
        r.time_to_best = 0.0;
        r.elapsed = 0.0;
        Ok(serde_json::to_string(&r)?)
    }

    pub fn best_pi(&self) -> Vec<usize> {
        self.best_solution.iter().map(|&p| p - 1).collect()
    }
}

/// Per-iteration snapshot handed to observers.
#[derive(Clone, Debug)]
pub struct IterationInfo<'a> {
    pub iteration: u64,
    pub trace: Option<&'a BuildTrace>,
    pub improved: &'a Assignment,
    pub inserted: bool,
    pub remined: bool,
    pub no_update: u32,
    pub best_value: i64,
    pub pool: &'a ElitePool,
}

/// Final state of a run besides its record.
#[derive(Clone, Debug)]
pub struct RunOutcome {
    pub record: RunRecord,
    pub pool: ElitePool,
    /// Patterns from the last mining call.
    pub patterns: Vec<Pattern>,
}

fn mine(pool: &ElitePool, params: &FpbsParams) -> Result<Vec<Pattern>> {
    mine_patterns_with(
        pool.members(),
        params.theta,
        params.m,
        MineOptions {
            use_array: params.use_array,
        },
    )
}

pub fn run(inst: &QapInstance, params: &FpbsParams) -> Result<RunRecord> {
    Ok(run_observed(inst, params, |_| {})?.record)
}

pub fn run_observed(
    inst: &QapInstance,
    params: &FpbsParams,
    mut observer: impl FnMut(&IterationInfo<'_>),
) -> Result<RunOutcome> {
    let start = Instant::now();
    let n = inst.n();
    params.validate(n)?;
    let bls = params.bls_params(n);
    let construct = ConstructParams {
        lambda: params.lambda,
        beta: params.beta,
    };
    let mut init_rng = seed::stream(params.seed, Stream::Init);
    let mut bls_rng = seed::stream(params.seed, Stream::Bls);
    let mut select_rng = seed::stream(params.seed, Stream::Tournament);
    let mut complete_rng = seed::stream(params.seed, Stream::Completion);

    let mut pool = ElitePool::initialize(inst, params.k, &bls, &mut init_rng, &mut bls_rng)?;
    let mut best = pool.best().expect("pool is non-empty").clone();
    let mut time_to_best = start.elapsed();
    let mut events = vec![Event {
        iteration: 0,
        kind: EventKind::Initialized { best: best.value() },
    }];

    let mining = params.mode == ConstructionMode::Patterns;
    let mut patterns = Vec::new();
    let mut minings = 0u64;
    if mining {
        patterns = mine(&pool, params)?;
        minings += 1;
        events.push(Event {
            iteration: 0,
            kind: EventKind::Mined {
                patterns: patterns.len(),
                longest: patterns.iter().map(Pattern::len).max().unwrap_or(0),
                stagnation: false,
            },
        });
    }
    pool.no_update = 0;

    let mut iterations = 0u64;
    loop {
        let done = match params.budget {
            Budget::Time(limit) => start.elapsed() >= limit,
            Budget::Iterations(limit) => iterations >= limit,
        } || params.target.is_some_and(|t| best.value() <= t);
        if done {
            break;
        }

        let (candidate, trace) = if mining {
            let (a, t) = build_solution(inst, &patterns, &pool, &construct, &mut select_rng, &mut complete_rng)?;
            (a, Some(t))
        } else {
            let mut pi: Vec<usize> = (0..n).collect();
            pi.shuffle(&mut complete_rng);
            (Assignment::new(inst, pi)?, None)
        };
        let improved = bls_run(inst, candidate, &bls, &mut bls_rng)?;
        iterations += 1;

        if improved.value() < best.value() {
            best = improved.clone();
            time_to_best = start.elapsed();
            events.push(Event {
                iteration: iterations,
                kind: EventKind::NewBest { value: best.value() },
            });
        }

        let inserted = pool.try_insert(&improved);
        if inserted {
            pool.no_update = 0;
        } else {
            pool.no_update += 1;
        }

        let mut remined = false;
        if mining && pool.no_update > params.max_no_update {
            patterns = mine(&pool, params)?;
            minings += 1;
            pool.no_update = 0;
            remined = true;
            events.push(Event {
                iteration: iterations,
                kind: EventKind::Mined {
                    patterns: patterns.len(),
                    longest: patterns.iter().map(Pattern::len).max().unwrap_or(0),
                    stagnation: true,
                },
            });
        }

        observer(&IterationInfo {
            iteration: iterations,
            trace: trace.as_ref(),
            improved: &improved,
            inserted,
            remined,
            no_update: pool.no_update,
            best_value: best.value(),
            pool: &pool,
        });
    }

    debug_assert_eq!(best.value(), full_evaluate(inst, best.pi()));
    let record = RunRecord {
        instance: inst.name().to_string(),
        n,
        seed: params.seed,
        best_value: best.value(),
        best_solution: best.one_indexed(),
        time_to_best: time_to_best.as_secs_f64(),
        elapsed: start.elapsed().as_secs_f64(),
        iterations,
        mining_invocations: minings,
        events,
    };
    Ok(RunOutcome { record, pool, patterns })
}

/// Percentage deviation `100 (x - bkv) / bkv`.
pub fn xpd(x: f64, bkv: i64) -> Result<f64> {
    if bkv <= 0 {
        return Err(Error::NonPositiveBkv(bkv));
    }
    Ok(100.0 * (x - bkv as f64) / bkv as f64)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn xpd_examples() {
        assert_eq!(xpd(3139370.0, 3139370).unwrap(), 0.0);
        let v = xpd(3141510.0, 3139370).unwrap();
        assert!((v - 0.068166).abs() < 1e-5, "{v}");
        assert_eq!(xpd(200.0, 100).unwrap(), 100.0);
        assert!(xpd(1.0, 0).is_err());
        assert!(xpd(1.0, -5).is_err());
    }

    #[test]
    fn params_validation() {
        let p = FpbsParams::default();
        p.validate(40).unwrap();
        let mut bad = p.clone();
        bad.k = 1;
        assert!(bad.validate(40).is_err());
        bad.mode = ConstructionMode::RandomRestart;
        bad.validate(40).unwrap();
        let mut bad = p.clone();
        bad.beta = 1.5;
        assert!(bad.validate(40).is_err());
    }
}
