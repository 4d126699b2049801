//! Monte Carlo escape-window trials and an exact finite-window oracle.

mod oracle;

use std::collections::HashMap;
use std::rc::Rc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::model::{ModelError, Real, StateId, TransitionSystem, Variant};

pub use oracle::{exact_reachability, expected_exit_time, Reachability};

/// Trials are run in chunks that share a transition cache.
const CHUNK: u64 = 2048;
/// Normal quantile for the reported confidence half-width.
const Z95: f64 = 1.96;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum SimError {
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error("start state {0} is a target")]
    StartIsTarget(StateId),
    #[error("start state {state} already has V = {v} ≥ H = {horizon}")]
    StartOutsideWindow { state: StateId, v: String, horizon: String },
    #[error("window truncated after {0} states; the oracle does not approximate")]
    Truncated(usize),
    #[error("{0}")]
    Unsolvable(String),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Adversary {
    UniformRandom,
    FirstChoice,
    /// Choice indices used in turn, cycling; reduced modulo the number of
    /// available choices.
    Scripted(Vec<usize>),
}

#[derive(Clone, Debug)]
pub struct SimConfig {
    pub trials: u64,
    pub horizon: Real,
    pub max_steps: u64,
    pub adversary: Adversary,
    pub seed: u64,
    pub record_trace: bool,
}

impl SimConfig {
    pub fn new(trials: u64, horizon: Real, seed: u64) -> Self {
        SimConfig { trials, horizon, max_steps: 1_000_000, adversary: Adversary::UniformRandom, seed, record_trace: false }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Outcome {
    Hit,
    Escaped,
    StillRunning,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct TrialRecord {
    pub trial: u64,
    pub outcome: Outcome,
    pub steps: u64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SimResult {
    pub trials: u64,
    pub hits_target: u64,
    pub escaped_high: u64,
    pub still_running: u64,
    /// Mean and max step counts over trials that finished.
    pub mean_steps: f64,
    pub max_steps: u64,
    /// `hits / (hits + escaped)`; absent if no trial finished.
    pub z_hat: Option<f64>,
    pub half_width: f64,
    /// More than 1% of trials hit `max_steps`.
    pub still_running_flag: bool,
    #[serde(skip)]
    pub trace: Option<Vec<TrialRecord>>,
}

struct Cached {
    target: bool,
    outside: bool,
    /// Per choice: successors with cumulative probabilities.
    choices: Vec<(Vec<StateId>, Vec<f64>)>,
}

struct Walker<'a> {
    sys: &'a TransitionSystem,
    v: &'a Variant,
    horizon: f64,
    horizon_exact: &'a Real,
    cache: HashMap<StateId, Rc<Cached>>,
}

impl<'a> Walker<'a> {
    fn lookup(&mut self, s: &StateId) -> Result<Rc<Cached>, ModelError> {
        if let Some(c) = self.cache.get(s) {
            return Ok(c.clone());
        }
        let target = self.sys.is_target(s);
        let val = self.v.eval(s)?;
        let outside = !target && at_or_above(&val, self.horizon_exact, self.horizon);
        let choices = if target || outside {
            Vec::new()
        } else {
            self.sys
                .transitions(s)?
                .iter()
                .map(|d| {
                    let mut acc = 0.0;
                    let mut states = Vec::with_capacity(d.len());
                    let mut cum = Vec::with_capacity(d.len());
                    for (t, p) in d.iter() {
                        acc += p.to_f64();
                        states.push(t.clone());
                        cum.push(acc);
                    }
                    (states, cum)
                })
                .collect()
        };
        let c = Rc::new(Cached { target, outside, choices });
        self.cache.insert(s.clone(), c.clone());
        Ok(c)
    }
}

fn at_or_above(v: &Real, h_exact: &Real, h: f64) -> bool {
    if v.is_exact() && h_exact.is_exact() {
        v >= h_exact
    } else {
        v.to_f64() >= h
    }
}

fn run_trial(w: &mut Walker, cfg: &SimConfig, from: &StateId, trial: u64) -> Result<TrialRecord, ModelError> {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    rng.set_stream(trial);
    let mut s = from.clone();
    let mut steps = 0u64;
    loop {
        let c = w.lookup(&s)?;
        if c.target {
            return Ok(TrialRecord { trial, outcome: Outcome::Hit, steps });
        }
        if c.outside {
            return Ok(TrialRecord { trial, outcome: Outcome::Escaped, steps });
        }
        if steps >= cfg.max_steps {
            return Ok(TrialRecord { trial, outcome: Outcome::StillRunning, steps });
        }
        let k = c.choices.len();
        let j = match &cfg.adversary {
            Adversary::FirstChoice => 0,
            Adversary::UniformRandom if k == 1 => 0,
            Adversary::UniformRandom => rng.random_range(0..k),
            Adversary::Scripted(seq) => seq[(steps as usize) % seq.len()] % k,
        };
        let (states, cum) = &c.choices[j];
        let u: f64 = rng.random::<f64>() * cum.last().copied().unwrap_or(1.0);
        let idx = cum.partition_point(|&x| x <= u).min(states.len() - 1);
        s = states[idx].clone();
        steps += 1;
    }
}

/// Runs `cfg.trials` walks from `from`, each until it hits a target,
/// reaches `V ≥ H`, or exhausts `max_steps`. Trial `i` draws from the
/// ChaCha stream `i` of `seed`, so results replay exactly regardless of
/// thread count.
pub fn simulate(sys: &TransitionSystem, v: &Variant, cfg: &SimConfig, from: &StateId) -> Result<SimResult, SimError> {
    if sys.is_target(from) {
        return Err(SimError::StartIsTarget(from.clone()));
    }
    if cfg.trials == 0 {
        return Err(SimError::Unsolvable("at least one trial is needed".into()));
    }
    if let Adversary::Scripted(seq) = &cfg.adversary {
        if seq.is_empty() {
            return Err(SimError::Unsolvable("scripted adversary needs at least one index".into()));
        }
    }
    let h = cfg.horizon.to_f64();
    let chunks: Vec<(u64, u64)> =
        (0..cfg.trials.div_ceil(CHUNK)).map(|c| (c * CHUNK, ((c + 1) * CHUNK).min(cfg.trials))).collect();
    let results: Vec<Result<Vec<TrialRecord>, ModelError>> = chunks
        .par_iter()
        .map(|&(a, b)| {
            let mut w = Walker { sys, v, horizon: h, horizon_exact: &cfg.horizon, cache: HashMap::new() };
            (a..b).map(|t| run_trial(&mut w, cfg, from, t)).collect()
        })
        .collect();
    let mut records = Vec::with_capacity(cfg.trials as usize);
    for r in results {
        records.extend(r?);
    }
    Ok(summarize(cfg, records))
}

fn summarize(cfg: &SimConfig, records: Vec<TrialRecord>) -> SimResult {
    let count = |o: Outcome| records.iter().filter(|r| r.outcome == o).count() as u64;
    let hits = count(Outcome::Hit);
    let escaped = count(Outcome::Escaped);
    let still = count(Outcome::StillRunning);
    let finished: Vec<&TrialRecord> = records.iter().filter(|r| r.outcome != Outcome::StillRunning).collect();
    let mean_steps = if finished.is_empty() {
        0.0
    } else {
        finished.iter().map(|r| r.steps as f64).sum::<f64>() / finished.len() as f64
    };
    let max_steps = finished.iter().map(|r| r.steps).max().unwrap_or(0);
    let n = hits + escaped;
    let (z_hat, half_width) = if n == 0 {
        (None, f64::INFINITY)
    } else {
        let z = hits as f64 / n as f64;
        (Some(z), Z95 * (z * (1.0 - z) / n as f64).sqrt())
    };
    SimResult {
        trials: cfg.trials,
        hits_target: hits,
        escaped_high: escaped,
        still_running: still,
        mean_steps,
        max_steps,
        z_hat,
        half_width,
        still_running_flag: still * 100 > cfg.trials,
        trace: cfg.record_trace.then_some(records),
    }
}
