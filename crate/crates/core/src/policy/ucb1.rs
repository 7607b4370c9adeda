use serde::Serialize;

use super::argmax_with_ties;
use crate::game::Action;
use crate::rng::RngStream;

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct Ucb1State {
    pub q_value: [f64; 2],
    pub count: [u64; 2],
    /// Total pulls, always `count[0] + count[1]`.
    pub t: u64,
}

impl Ucb1State {
    /// Unpulled arms go first (C before D); afterwards the arm maximising
    /// `Q(a) + c * sqrt(ln t / N(a))`.
    #[inline]
    pub fn select(&self, c: f64, rng: &mut RngStream) -> Action {
        if self.count[0] == 0 {
            return Action::Cooperate;
        }
        if self.count[1] == 0 {
            return Action::Defect;
        }
        argmax_with_ties(self.scores(c), rng)
    }

    /// Only meaningful once both arms have been pulled.
    pub fn scores(&self, c: f64) -> [f64; 2] {
        let ln_t = (self.t as f64).ln();
        let score = |i: usize| self.q_value[i] + c * (ln_t / self.count[i] as f64).sqrt();
        [score(0), score(1)]
    }

    #[inline]
    pub fn record(&mut self, action: Action, reward: f64) {
        let i = action.index();
        self.count[i] += 1;
        self.t += 1;
        self.q_value[i] += (reward - self.q_value[i]) / self.count[i] as f64;
    }
}
