//! Two-armed bandit policies over `{C, D}`.
//!
//! Each policy alternates [`Policy::select_action`] and [`Policy::update`].
//! The spec and its matching state travel together inside [`Policy`], so a
//! state can never be driven by the wrong algorithm.

mod epsilon_greedy;
mod thompson;
mod ucb1;

pub use epsilon_greedy::{EpsilonGreedyState, GreedyStart};
pub use thompson::ThompsonState;
pub use ucb1::Ucb1State;

use serde::Serialize;

use crate::env::check_probability;
use crate::error::ModelError;
use crate::game::{Action, GameParams};
use crate::rng::RngStream;

pub const DEFAULT_EPSILON: f64 = 1.0 / 128.0;
pub const DEFAULT_UCB_C: f64 = 4.0;
pub const DEFAULT_THOMPSON_PRIOR: f64 = 0.5;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum PolicySpec {
    EpsilonGreedy {
        epsilon: f64,
        #[serde(default)]
        start: GreedyStart,
    },
    Ucb1 { c: f64 },
    /// `prior` seeds both Beta shape parameters of both arms.
    ThompsonSampling { prior: f64 },
}

impl PolicySpec {
    /// ε-greedy with the default [`GreedyStart::Cooperative`] start.
    pub fn epsilon_greedy(epsilon: f64) -> Result<Self, ModelError> {
        let spec = PolicySpec::EpsilonGreedy {
            epsilon,
            start: GreedyStart::default(),
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn ucb1(c: f64) -> Result<Self, ModelError> {
        let spec = PolicySpec::Ucb1 { c };
        spec.validate()?;
        Ok(spec)
    }

    pub fn thompson(prior: f64) -> Result<Self, ModelError> {
        let spec = PolicySpec::ThompsonSampling { prior };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<(), ModelError> {
        match *self {
            PolicySpec::EpsilonGreedy { epsilon, .. } => check_probability("epsilon", epsilon),
            PolicySpec::Ucb1 { c } if !(c.is_finite() && c >= 0.0) => {
                Err(ModelError::InvalidParameter {
                    field: "c",
                    value: c,
                    reason: "must be a finite number >= 0",
                })
            }
            PolicySpec::ThompsonSampling { prior } if !(prior.is_finite() && prior > 0.0) => {
                Err(ModelError::InvalidParameter {
                    field: "prior",
                    value: prior,
                    reason: "must be a finite number > 0",
                })
            }
            _ => Ok(()),
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            PolicySpec::EpsilonGreedy { .. } => "epsilon-greedy",
            PolicySpec::Ucb1 { .. } => "ucb1",
            PolicySpec::ThompsonSampling { .. } => "thompson-sampling",
        }
    }

    pub fn epsilon(&self) -> Option<f64> {
        match *self {
            PolicySpec::EpsilonGreedy { epsilon, .. } => Some(epsilon),
            _ => None,
        }
    }

    pub fn c(&self) -> Option<f64> {
        match *self {
            PolicySpec::Ucb1 { c } => Some(c),
            _ => None,
        }
    }

    pub fn prior(&self) -> Option<f64> {
        match *self {
            PolicySpec::ThompsonSampling { prior } => Some(prior),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub enum PolicyState {
    EpsilonGreedy(EpsilonGreedyState),
    Ucb1(Ucb1State),
    ThompsonSampling(ThompsonState),
}

/// Fresh learning state for `spec`.
///
/// ε-greedy starts from its [`GreedyStart`] values, UCB1 starts empty and
/// Thompson sampling starts at `Beta(prior, prior)` on both arms.
pub fn init_state(spec: &PolicySpec, params: &GameParams) -> PolicyState {
    match *spec {
        PolicySpec::EpsilonGreedy { start, .. } => {
            PolicyState::EpsilonGreedy(EpsilonGreedyState::new(start, params.max_payoff()))
        }
        PolicySpec::Ucb1 { .. } => PolicyState::Ucb1(Ucb1State::default()),
        PolicySpec::ThompsonSampling { prior } => {
            PolicyState::ThompsonSampling(ThompsonState::with_prior(prior))
        }
    }
}

/// A policy spec bound to its state and the game it is learning.
#[derive(Debug, Clone)]
pub struct Policy {
    spec: PolicySpec,
    game: GameParams,
    state: PolicyState,
}

impl Policy {
    pub fn new(spec: PolicySpec, game: GameParams) -> Result<Self, ModelError> {
        spec.validate()?;
        Ok(Self {
            state: init_state(&spec, &game),
            spec,
            game,
        })
    }

    pub fn spec(&self) -> &PolicySpec {
        &self.spec
    }

    pub fn state(&self) -> &PolicyState {
        &self.state
    }

    #[inline]
    pub fn select_action(&self, rng: &mut RngStream) -> Action {
        match (&self.spec, &self.state) {
            (PolicySpec::EpsilonGreedy { epsilon, .. }, PolicyState::EpsilonGreedy(s)) => {
                s.select(*epsilon, rng)
            }
            (PolicySpec::Ucb1 { c }, PolicyState::Ucb1(s)) => s.select(*c, rng),
            (PolicySpec::ThompsonSampling { .. }, PolicyState::ThompsonSampling(s)) => {
                s.select(rng)
            }
            _ => unreachable!("policy state always matches its spec"),
        }
    }

    /// Feeds back the reward earned by `action`. Rewards outside the payoff
    /// table are rejected without touching the state.
    #[inline]
    pub fn update(
        &mut self,
        action: Action,
        reward: f64,
        rng: &mut RngStream,
    ) -> Result<(), ModelError> {
        if !self.game.is_payoff(reward) {
            return Err(ModelError::InvalidReward {
                reward,
                b: self.game.b(),
            });
        }
        match &mut self.state {
            PolicyState::EpsilonGreedy(s) => s.record(action, reward),
            PolicyState::Ucb1(s) => s.record(action, reward),
            PolicyState::ThompsonSampling(s) => {
                s.record(action, reward / self.game.max_payoff(), rng)
            }
        }
        Ok(())
    }
}

/// Index of the larger value; an exact tie costs one uniform draw.
#[inline]
pub(crate) fn argmax_with_ties(values: [f64; 2], rng: &mut RngStream) -> Action {
    if values[0] > values[1] {
        Action::Cooperate
    } else if values[1] > values[0] {
        Action::Defect
    } else if rng.bernoulli(0.5) {
        Action::Cooperate
    } else {
        Action::Defect
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Dominance {
    pub holds: bool,
    pub margin: f64,
}

/// Closed-form condition under which cooperation payoff-dominates defection
/// for ε-greedy: `((1 - ε/2) p + (ε/2) q)(b + 3) > 3`.
///
/// While exploiting C the opponent saw a C except after the `ε/2` share of
/// exploratory defections, which is where the mixture of `p` and `q` comes from.
pub fn dominance_threshold(p: f64, q: f64, params: &GameParams, epsilon: f64) -> Dominance {
    let half = epsilon / 2.0;
    let margin = ((1.0 - half) * p + half * q) * params.max_payoff() - crate::BASELINE_ENDOWMENT;
    Dominance {
        holds: margin > 0.0,
        margin,
    }
}
