use serde::{Deserialize, Serialize};

use super::argmax_with_ties;
use crate::game::Action;
use crate::rng::RngStream;

/// Initial action values and greedy tie rule for ε-greedy.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum GreedyStart {
    /// Both arms start at 0 and greedy ties go to C. The learner opens by
    /// cooperating and keeps cooperating until an exploratory D shows
    /// defection is worth more.
    #[default]
    Cooperative,
    /// Both arms start at `b + 3` and greedy ties are a fair coin.
    Optimistic,
}

/// Running mean reward and pull count per arm.
///
/// The first observed reward of an arm replaces its initial value outright, so
/// long-run means contain observations only.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EpsilonGreedyState {
    pub q_value: [f64; 2],
    pub count: [u64; 2],
    pub start: GreedyStart,
}

impl EpsilonGreedyState {
    pub fn new(start: GreedyStart, max_payoff: f64) -> Self {
        let initial = match start {
            GreedyStart::Cooperative => 0.0,
            GreedyStart::Optimistic => max_payoff,
        };
        Self {
            q_value: [initial; 2],
            count: [0; 2],
            start,
        }
    }

    /// Coin first, then the exploratory action only when exploring. A greedy
    /// tie draws once more under [`GreedyStart::Optimistic`] only.
    #[inline]
    pub fn select(&self, epsilon: f64, rng: &mut RngStream) -> Action {
        if rng.bernoulli(epsilon) {
            if rng.bernoulli(0.5) {
                Action::Cooperate
            } else {
                Action::Defect
            }
        } else {
            match self.start {
                GreedyStart::Cooperative => {
                    if self.q_value[1] > self.q_value[0] {
                        Action::Defect
                    } else {
                        Action::Cooperate
                    }
                }
                GreedyStart::Optimistic => argmax_with_ties(self.q_value, rng),
            }
        }
    }

    #[inline]
    pub fn record(&mut self, action: Action, reward: f64) {
        let i = action.index();
        self.count[i] += 1;
        self.q_value[i] += (reward - self.q_value[i]) / self.count[i] as f64;
    }
}
