//! The chained interaction environment.
//!
//! In round `t` the algorithm plays against the agent that observed round
//! `t - 1`. That observer conditions its cooperation on the algorithm's
//! previous action only: probability `p` after a cooperation, `q` after a
//! defection. Opponents come from an infinite population and carry no memory.

use serde::{Deserialize, Serialize};

use crate::error::ModelError;
use crate::game::{Action, GameParams};
use crate::rng::RngStream;

/// Reputation-conditioned cooperation probabilities of the opponent population.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct OpponentStrategy {
    p: f64,
    q: f64,
}

impl OpponentStrategy {
    /// Always Trust.
    pub const AT: OpponentStrategy = OpponentStrategy { p: 1.0, q: 1.0 };
    /// Never Trust.
    pub const NT: OpponentStrategy = OpponentStrategy { p: 0.0, q: 0.0 };
    /// Trust Cooperators: cooperate only after seeing a cooperation.
    pub const TC: OpponentStrategy = OpponentStrategy { p: 1.0, q: 0.0 };
    /// Trust Defectors: cooperate only after seeing a defection.
    pub const TD: OpponentStrategy = OpponentStrategy { p: 0.0, q: 1.0 };

    pub fn new(p: f64, q: f64) -> Result<Self, ModelError> {
        check_probability("p", p)?;
        check_probability("q", q)?;
        Ok(Self { p, q })
    }

    pub fn p(&self) -> f64 {
        self.p
    }

    pub fn q(&self) -> f64 {
        self.q
    }

    pub fn cooperation_probability(&self, observed: Action) -> f64 {
        match observed {
            Action::Cooperate => self.p,
            Action::Defect => self.q,
        }
    }

    /// Draws the opponent's move given what it observed. Always consumes
    /// exactly one uniform draw.
    #[inline]
    pub fn act(&self, state: ReputationState, rng: &mut RngStream) -> Action {
        if rng.bernoulli(self.cooperation_probability(state.last_algorithm_action)) {
            Action::Cooperate
        } else {
            Action::Defect
        }
    }
}

pub(crate) fn check_probability(field: &'static str, value: f64) -> Result<(), ModelError> {
    if (0.0..=1.0).contains(&value) {
        Ok(())
    } else {
        Err(ModelError::InvalidParameter {
            field,
            value,
            reason: "must lie in [0, 1]",
        })
    }
}

/// The algorithm action seen by the opponent of the current round.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ReputationState {
    pub last_algorithm_action: Action,
}

impl ReputationState {
    pub fn new(last_algorithm_action: Action) -> Self {
        Self {
            last_algorithm_action,
        }
    }
}

impl Default for ReputationState {
    fn default() -> Self {
        Self::new(Action::Cooperate)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Step {
    pub reward: f64,
    pub opponent_action: Action,
    pub next_state: ReputationState,
}

/// Plays one round. The opponent reacts to `state`, the reputation carried in
/// from the previous round; the returned state records `algorithm_action`.
#[inline]
pub fn step(
    strategy: &OpponentStrategy,
    state: ReputationState,
    algorithm_action: Action,
    params: &GameParams,
    rng: &mut RngStream,
) -> Step {
    let opponent_action = strategy.act(state, rng);
    Step {
        reward: params.payoff(algorithm_action, opponent_action).robot_payoff,
        opponent_action,
        next_state: ReputationState::new(algorithm_action),
    }
}

/// [`step`] with the strategy, game and reputation held together.
#[derive(Debug, Clone)]
pub struct ReputationEnv {
    strategy: OpponentStrategy,
    game: GameParams,
    state: ReputationState,
}

impl ReputationEnv {
    pub fn new(strategy: OpponentStrategy, game: GameParams, initial: ReputationState) -> Self {
        Self {
            strategy,
            game,
            state: initial,
        }
    }

    pub fn state(&self) -> ReputationState {
        self.state
    }

    #[inline]
    pub fn step(&mut self, algorithm_action: Action, rng: &mut RngStream) -> Step {
        let out = step(&self.strategy, self.state, algorithm_action, &self.game, rng);
        self.state = out.next_state;
        out
    }
}
