//! Binary actions and the Stag Hunt payoff table generalized by the mutual
//! cooperation benefit `b`.
//!
//! ```text
//!              opponent C     opponent D
//! robot C     (b+3, b+3)       (0, 3)
//! robot D       (3, 0)         (3, 3)
//! ```

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::ModelError;

/// Pieces every player keeps by defecting.
pub const BASELINE_ENDOWMENT: f64 = 3.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Action {
    #[serde(rename = "C")]
    Cooperate,
    #[serde(rename = "D")]
    Defect,
}

impl Action {
    pub const ALL: [Action; 2] = [Action::Cooperate, Action::Defect];

    /// Slot of this action in per-arm arrays.
    #[inline]
    pub fn index(self) -> usize {
        match self {
            Action::Cooperate => 0,
            Action::Defect => 1,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Action::Cooperate => "C",
            Action::Defect => "D",
        }
    }

    pub fn is_cooperate(self) -> bool {
        self == Action::Cooperate
    }
}

impl fmt::Display for Action {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParseActionError(pub String);

impl fmt::Display for ParseActionError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "expected \"C\" or \"D\", got {:?}", self.0)
    }
}

impl std::error::Error for ParseActionError {}

impl FromStr for Action {
    type Err = ParseActionError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "C" => Ok(Action::Cooperate),
            "D" => Ok(Action::Defect),
            other => Err(ParseActionError(other.to_string())),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PayoffPair {
    pub robot_payoff: f64,
    pub opponent_payoff: f64,
}

/// Parameters of one game in the family. Only `b` varies.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GameParams {
    b: f64,
}

impl GameParams {
    pub fn new(b: f64) -> Result<Self, ModelError> {
        if !b.is_finite() || b < 0.0 {
            return Err(ModelError::InvalidParameter {
                field: "b",
                value: b,
                reason: "must be a finite number >= 0",
            });
        }
        Ok(Self { b })
    }

    pub fn b(&self) -> f64 {
        self.b
    }

    /// Mutual cooperation payoff, the largest entry of the table.
    pub fn max_payoff(&self) -> f64 {
        self.b + BASELINE_ENDOWMENT
    }

    pub fn payoff(&self, robot: Action, opponent: Action) -> PayoffPair {
        use Action::*;
        let (robot_payoff, opponent_payoff) = match (robot, opponent) {
            (Cooperate, Cooperate) => (self.max_payoff(), self.max_payoff()),
            (Cooperate, Defect) => (0.0, BASELINE_ENDOWMENT),
            (Defect, Cooperate) => (BASELINE_ENDOWMENT, 0.0),
            (Defect, Defect) => (BASELINE_ENDOWMENT, BASELINE_ENDOWMENT),
        };
        PayoffPair {
            robot_payoff,
            opponent_payoff,
        }
    }

    /// Whether `reward` is one of the values the table can produce.
    pub fn is_payoff(&self, reward: f64) -> bool {
        reward == 0.0 || reward == BASELINE_ENDOWMENT || reward == self.max_payoff()
    }
}
