//! Multi-trial experiment runner.
//!
//! Trials are numbered `0..trials`; trial `t` derives its generator seed
//! and solver seed by adding `t` to the configured base seeds, so results
//! depend only on the config, never on scheduling. Workers pull trial
//! indices from a shared counter and a reorder buffer writes records in
//! trial order, which makes parallel output byte-identical to serial.

use std::collections::BTreeMap;
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::PathBuf;
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::mpsc;
use std::thread;
use std::time::Instant;

use efx_core::anneal::init_random_allocation;
use efx_core::rng::solver_rng;
use efx_core::{
    anneal_solve, anneal_solve_warm, brute_force_efx, descent_solve, is_efx, n_plus_one_pick,
    round_robin, welfare_max_allocation, AnnealParams, GenKind, GenSpec, DEFAULT_BRUTE_FORCE_CAP,
};

use crate::error::HarnessError;
use crate::formats::record_to_line;
use crate::stats::{summarize, SummaryStats, TrialRecord};

/// Environment variable consulted for the worker count when no explicit
/// flag is given.
pub const WORKERS_ENV: &str = "EFX_WORKERS";

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SolverKind {
    Anneal,
    Descent,
    RoundRobin,
    NPlusOne,
    BruteForce,
}

#[derive(Debug, Clone)]
pub struct ExperimentConfig {
    pub gen: GenSpec,
    pub solver: SolverKind,
    /// Annealing knobs; ignored by the other solvers.
    pub params: AnnealParams,
    pub trials: u64,
    pub workers: usize,
    /// Start annealing from the welfare maximizer instead of random.
    pub warm_start: bool,
    /// State cap for the brute-force solver.
    pub brute_cap: u128,
    /// Report `elapsed_ms = 0` in every record, for byte-reproducible output.
    pub zero_elapsed: bool,
    /// Stream per-trial records here as JSON Lines; in-memory only when absent.
    pub output_path: Option<PathBuf>,
}

impl ExperimentConfig {
    pub fn new(gen: GenSpec, solver: SolverKind) -> Self {
        ExperimentConfig {
            gen,
            solver,
            params: AnnealParams::default(),
            trials: 1,
            workers: 1,
            warm_start: false,
            brute_cap: DEFAULT_BRUTE_FORCE_CAP,
            zero_elapsed: false,
            output_path: None,
        }
    }

    pub fn validate(&self) -> Result<(), HarnessError> {
        if self.trials == 0 {
            return Err(HarnessError::Config("trials must be at least 1".into()));
        }
        if self.workers == 0 {
            return Err(HarnessError::Config("workers must be at least 1".into()));
        }
        self.gen.validate()?;
        if self.solver == SolverKind::Anneal {
            self.params.validate()?;
        }
        if self.solver == SolverKind::Descent && self.gen.kind != GenKind::Identical {
            return Err(HarnessError::Config(
                "the descent solver requires identical valuations (generator kind `identical`)"
                    .into(),
            ));
        }
        if self.solver == SolverKind::NPlusOne && self.gen.m != self.gen.n + 1 {
            return Err(HarnessError::Config(format!(
                "the n-plus-one solver needs m = n + 1 goods, got n = {} and m = {}",
                self.gen.n, self.gen.m
            )));
        }
        if self.warm_start && self.solver != SolverKind::Anneal {
            return Err(HarnessError::Config(
                "warm starts only apply to the annealing solver".into(),
            ));
        }
        Ok(())
    }
}

/// Resolves the worker count: explicit flag, then the `EFX_WORKERS`
/// environment variable, then 1.
pub fn effective_workers(flag: Option<usize>) -> Result<usize, HarnessError> {
    if let Some(w) = flag {
        if w == 0 {
            return Err(HarnessError::Config("workers must be at least 1".into()));
        }
        return Ok(w);
    }
    match std::env::var(WORKERS_ENV) {
        Ok(text) => match text.trim().parse::<usize>() {
            Ok(w) if w >= 1 => Ok(w),
            _ => Err(HarnessError::Config(format!(
                "{WORKERS_ENV} must be a positive integer, got {text:?}"
            ))),
        },
        Err(std::env::VarError::NotPresent) => Ok(1),
        Err(e) => Err(HarnessError::Config(format!("{WORKERS_ENV}: {e}"))),
    }
}

/// Runs one trial of `config`. Deterministic given `(config, index)`
/// except for `elapsed_ms`, which `zero_elapsed` suppresses.
pub fn run_trial(config: &ExperimentConfig, index: u64) -> Result<TrialRecord, HarnessError> {
    let mut gen = config.gen.clone();
    gen.seed = config.gen.seed.wrapping_add(index);
    let solver_seed = config.params.seed.wrapping_add(index);
    let started = Instant::now();
    let (solved, steps, restarts) = match config.solver {
        SolverKind::Anneal => {
            let inst = gen.generate()?;
            let mut params = config.params.clone();
            params.seed = solver_seed;
            let result = if config.warm_start {
                let start = welfare_max_allocation(&inst);
                anneal_solve_warm(&inst, &params, &start)?
            } else {
                anneal_solve(&inst, &params)?
            };
            debug_assert!(!result.solved || is_efx(&inst, &result.allocation)?);
            (result.solved, result.steps, result.restarts)
        }
        SolverKind::Descent => {
            let ident = gen.generate_identical()?;
            let inst = ident.to_instance();
            let start = init_random_allocation(
                &mut solver_rng(solver_seed),
                ident.num_agents(),
                ident.num_goods(),
            );
            let trace = descent_solve(&ident, &start)?;
            debug_assert!(is_efx(&inst, &trace.allocation)?);
            (true, trace.moves.len() as u64, 0)
        }
        SolverKind::RoundRobin => {
            let inst = gen.generate()?;
            let alloc = round_robin(&inst);
            (is_efx(&inst, &alloc)?, 0, 0)
        }
        SolverKind::NPlusOne => {
            let inst = gen.generate()?;
            let alloc = n_plus_one_pick(&inst)?;
            (is_efx(&inst, &alloc)?, 0, 0)
        }
        SolverKind::BruteForce => {
            let inst = gen.generate()?;
            let found = brute_force_efx(&inst, config.brute_cap)?;
            (found.is_some(), 0, 0)
        }
    };
    let elapsed_ms = if config.zero_elapsed { 0 } else { started.elapsed().as_millis() as u64 };
    Ok(TrialRecord { trial: index, seed: gen.seed, solved, steps, restarts, elapsed_ms })
}

/// Runs all trials, streaming records to `config.output_path` (if set) in
/// trial order as they complete, each line flushed so a crash loses at
/// most the in-flight trial.
pub fn run_experiment(
    config: &ExperimentConfig,
) -> Result<(SummaryStats, Vec<TrialRecord>), HarnessError> {
    config.validate()?;
    let mut writer = match &config.output_path {
        Some(path) => Some(BufWriter::new(File::create(path)?)),
        None => None,
    };
    let worker_count = config.workers.min(config.trials as usize).max(1);
    let next = AtomicU64::new(0);
    let (tx, rx) = mpsc::channel();
    let records = thread::scope(|s| -> Result<Vec<TrialRecord>, HarnessError> {
        for _ in 0..worker_count {
            let tx = tx.clone();
            let next = &next;
            s.spawn(move || loop {
                let index = next.fetch_add(1, Ordering::Relaxed);
                if index >= config.trials {
                    break;
                }
                // A closed channel means the consumer bailed on an error.
                if tx.send((index, run_trial(config, index))).is_err() {
                    break;
                }
            });
        }
        drop(tx);
        let mut pending = BTreeMap::new();
        let mut ordered = Vec::with_capacity(config.trials as usize);
        let mut next_write = 0u64;
        for (index, outcome) in rx {
            pending.insert(index, outcome);
            while let Some(outcome) = pending.remove(&next_write) {
                let record = outcome?;
                if let Some(w) = writer.as_mut() {
                    writeln!(w, "{}", record_to_line(&record))?;
                    w.flush()?;
                }
                ordered.push(record);
                next_write += 1;
            }
        }
        Ok(ordered)
    })?;
    let summary = summarize(&records)?;
    Ok((summary, records))
}
