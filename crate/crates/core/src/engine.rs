//! Seeded replicates of the policy-versus-environment loop and their
//! aggregation into cooperation indices.
//!
//! A replicate draws from `RngStream::derive(master_seed, cell, replicate)`.
//! A plain batch is cell 0; sweeps hand out one cell index per grid point.
//! Aggregation only adds integer counts and walks replicates in index order,
//! so results do not depend on how rayon schedules the work.

use rayon::prelude::*;
use serde::Serialize;

use crate::env::{OpponentStrategy, ReputationEnv, ReputationState};
use crate::error::ModelError;
use crate::game::{Action, GameParams};
use crate::policy::{Policy, PolicySpec};
use crate::rng::RngStream;

pub const DEFAULT_ROUNDS: u32 = 2000;
pub const DEFAULT_REPLICATES: u32 = 500;
pub const DEFAULT_TRACE_WINDOW: u32 = 50;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SimConfig {
    pub policy: PolicySpec,
    pub strategy: OpponentStrategy,
    pub game: GameParams,
    pub rounds: u32,
    pub replicates: u32,
    pub master_seed: u64,
    /// What the first opponent is taken to have observed.
    pub initial_reputation: Action,
    /// Rounds per time-course window; the last window may be shorter.
    pub trace_window: u32,
}

impl SimConfig {
    /// Defaults to 2000 rounds, 500 replicates, seed 0, an initial reputation of
    /// C and 50-round windows.
    pub fn new(policy: PolicySpec, strategy: OpponentStrategy, game: GameParams) -> Self {
        Self {
            policy,
            strategy,
            game,
            rounds: DEFAULT_ROUNDS,
            replicates: DEFAULT_REPLICATES,
            master_seed: 0,
            initial_reputation: Action::Cooperate,
            trace_window: DEFAULT_TRACE_WINDOW,
        }
    }

    pub fn with_rounds(mut self, rounds: u32) -> Self {
        self.rounds = rounds;
        self
    }

    pub fn with_replicates(mut self, replicates: u32) -> Self {
        self.replicates = replicates;
        self
    }

    pub fn with_seed(mut self, master_seed: u64) -> Self {
        self.master_seed = master_seed;
        self
    }

    pub fn with_trace_window(mut self, trace_window: u32) -> Self {
        self.trace_window = trace_window;
        self
    }

    pub fn with_initial_reputation(mut self, action: Action) -> Self {
        self.initial_reputation = action;
        self
    }

    pub fn validate(&self) -> Result<(), ModelError> {
        self.policy.validate()?;
        for (field, value) in [
            ("rounds", self.rounds),
            ("replicates", self.replicates),
            ("trace_window", self.trace_window),
        ] {
            if value == 0 {
                return Err(ModelError::InvalidParameter {
                    field,
                    value: 0.0,
                    reason: "must be at least 1",
                });
            }
        }
        Ok(())
    }

    pub fn window_count(&self) -> usize {
        self.rounds.div_ceil(self.trace_window) as usize
    }
}

/// Per-round record of one replicate.
#[derive(Debug, Clone, PartialEq)]
pub struct ReplicateTrace {
    pub actions: Vec<Action>,
    pub opponent_actions: Vec<Action>,
    pub rewards: Vec<f64>,
}

/// Windowed cooperation over all replicates.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct WindowStat {
    pub window_index: usize,
    pub start_round: u32,
    pub len: u32,
    pub mean_i: f64,
    pub mean_i_r: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunResult {
    /// Fraction of all rounds in which the policy cooperated.
    pub cooperation_index: f64,
    /// Fraction of all rounds in which the opponent cooperated.
    pub received_cooperation_index: f64,
    /// Standard error of the per-replicate cooperation index.
    pub stderr_i: f64,
    pub windows: Vec<WindowStat>,
    pub per_replicate_i: Vec<f64>,
    pub config: SimConfig,
}

fn simulate(
    config: &SimConfig,
    cell: u32,
    replicate: u32,
    mut observe: impl FnMut(u32, Action, Action, f64),
) -> Result<(), ModelError> {
    let mut rng = RngStream::derive(config.master_seed, cell, replicate);
    let mut policy = Policy::new(config.policy, config.game)?;
    let mut env = ReputationEnv::new(
        config.strategy,
        config.game,
        ReputationState::new(config.initial_reputation),
    );
    for round in 0..config.rounds {
        let action = policy.select_action(&mut rng);
        let step = env.step(action, &mut rng);
        policy.update(action, step.reward, &mut rng)?;
        observe(round, action, step.opponent_action, step.reward);
    }
    Ok(())
}

/// Replays replicate `replicate_index` of a plain batch and keeps every round.
pub fn run_replicate(config: &SimConfig, replicate_index: u32) -> Result<ReplicateTrace, ModelError> {
    config.validate()?;
    if replicate_index >= config.replicates {
        return Err(ModelError::ReplicateOutOfRange {
            index: replicate_index,
            replicates: config.replicates,
        });
    }
    let n = config.rounds as usize;
    let mut trace = ReplicateTrace {
        actions: Vec::with_capacity(n),
        opponent_actions: Vec::with_capacity(n),
        rewards: Vec::with_capacity(n),
    };
    simulate(config, 0, replicate_index, |_, a, o, r| {
        trace.actions.push(a);
        trace.opponent_actions.push(o);
        trace.rewards.push(r);
    })?;
    Ok(trace)
}

struct ReplicateCounts {
    cooperated: u64,
    received: u64,
    window_cooperated: Vec<u32>,
    window_received: Vec<u32>,
}

fn count_replicate(config: &SimConfig, cell: u32, replicate: u32) -> Result<ReplicateCounts, ModelError> {
    let windows = config.window_count();
    let mut counts = ReplicateCounts {
        cooperated: 0,
        received: 0,
        window_cooperated: vec![0; windows],
        window_received: vec![0; windows],
    };
    let w = config.trace_window;
    simulate(config, cell, replicate, |round, a, o, _| {
        let k = (round / w) as usize;
        if a.is_cooperate() {
            counts.cooperated += 1;
            counts.window_cooperated[k] += 1;
        }
        if o.is_cooperate() {
            counts.received += 1;
            counts.window_received[k] += 1;
        }
    })?;
    Ok(counts)
}

pub(crate) fn run_cell(config: &SimConfig, cell: u32) -> Result<RunResult, ModelError> {
    config.validate()?;
    let per_replicate = (0..config.replicates)
        .into_par_iter()
        .map(|r| count_replicate(config, cell, r))
        .collect::<Result<Vec<_>, _>>()?;

    let rounds = config.rounds as u64;
    let total = rounds * config.replicates as u64;
    let windows = config.window_count();
    let mut cooperated = 0u64;
    let mut received = 0u64;
    let mut window_cooperated = vec![0u64; windows];
    let mut window_received = vec![0u64; windows];
    for counts in &per_replicate {
        cooperated += counts.cooperated;
        received += counts.received;
        for k in 0..windows {
            window_cooperated[k] += counts.window_cooperated[k] as u64;
            window_received[k] += counts.window_received[k] as u64;
        }
    }

    let per_replicate_i: Vec<f64> = per_replicate
        .iter()
        .map(|c| c.cooperated as f64 / rounds as f64)
        .collect();

    let windows = (0..windows)
        .map(|k| {
            let start_round = k as u32 * config.trace_window;
            let len = config.trace_window.min(config.rounds - start_round);
            let denom = len as f64 * config.replicates as f64;
            WindowStat {
                window_index: k,
                start_round,
                len,
                mean_i: window_cooperated[k] as f64 / denom,
                mean_i_r: window_received[k] as f64 / denom,
            }
        })
        .collect();

    Ok(RunResult {
        cooperation_index: cooperated as f64 / total as f64,
        received_cooperation_index: received as f64 / total as f64,
        stderr_i: standard_error(&per_replicate_i),
        windows,
        per_replicate_i,
        config: *config,
    })
}

/// Runs every replicate of `config` and aggregates them.
pub fn run_batch(config: &SimConfig) -> Result<RunResult, ModelError> {
    run_cell(config, 0)
}

/// Sample standard deviation over `sqrt(n)`; zero for fewer than two samples.
fn standard_error(xs: &[f64]) -> f64 {
    let n = xs.len();
    if n < 2 {
        return 0.0;
    }
    let mean = xs.iter().sum::<f64>() / n as f64;
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
    (var / n as f64).sqrt()
}
