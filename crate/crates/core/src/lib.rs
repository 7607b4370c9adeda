//! Bandit learners playing a repeated, reputation-conditioned Stag Hunt.
//!
//! The algorithm faces a fresh opponent every round. That opponent watched the
//! algorithm's previous move and cooperates with probability `p` if it saw a
//! cooperation and `q` if it saw a defection. Three classic bandit learners
//! (ε-greedy, UCB1 and Thompson sampling) are run against this environment and
//! scored by how often they choose to cooperate.
//!
//! Module map:
//!
//! - [`game`]: actions and the Stag Hunt payoff family parameterized by `b`.
//! - [`env`]: opponent strategies and the chained reputation environment.
//! - [`rng`]: seed-derived deterministic random streams.
//! - [`policy`]: the three bandit policies behind one interface.
//! - [`engine`]: seeded replicates, batches and cooperation metrics.
//! - [`sweep`]: parameter sweeps, hyperparameter tuning and time courses.

/// Engine version, recorded alongside generated results.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");

pub mod engine;
pub mod env;
pub mod error;
pub mod game;
pub mod policy;
pub mod rng;
pub mod sweep;

pub use engine::{run_batch, run_replicate, ReplicateTrace, RunResult, SimConfig, WindowStat};
pub use env::{OpponentStrategy, ReputationEnv, ReputationState, Step};
pub use error::ModelError;
pub use game::{Action, GameParams, PayoffPair, BASELINE_ENDOWMENT};
pub use policy::{dominance_threshold, init_state, Dominance, Policy, PolicySpec, PolicyState};
pub use rng::RngStream;
pub use sweep::{
    sweep_b, sweep_pq, time_course, tune_hyperparameters, SweepAxis, SweepCell, SweepResult,
    Tuning,
};
