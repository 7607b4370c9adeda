use serde::Serialize;

use crate::game::Action;
use crate::rng::RngStream;

/// Beta posterior per arm. Rewards are rescaled to `[0, 1]` and turned into a
/// Bernoulli trial whose outcome bumps either `alpha` or `beta` by one.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ThompsonState {
    pub alpha: [f64; 2],
    pub beta: [f64; 2],
}

impl ThompsonState {
    pub fn with_prior(prior: f64) -> Self {
        Self {
            alpha: [prior; 2],
            beta: [prior; 2],
        }
    }

    /// Samples C's posterior, then D's; the larger draw wins and an exact tie
    /// goes to C.
    #[inline]
    pub fn select(&self, rng: &mut RngStream) -> Action {
        let theta_c = rng.beta(self.alpha[0], self.beta[0]);
        let theta_d = rng.beta(self.alpha[1], self.beta[1]);
        if theta_c >= theta_d {
            Action::Cooperate
        } else {
            Action::Defect
        }
    }

    /// `scaled_reward` must already lie in `[0, 1]`.
    #[inline]
    pub fn record(&mut self, action: Action, scaled_reward: f64, rng: &mut RngStream) {
        let i = action.index();
        if rng.bernoulli(scaled_reward) {
            self.alpha[i] += 1.0;
        } else {
            self.beta[i] += 1.0;
        }
    }
}
