use thiserror::Error;

/// Errors raised while constructing or driving the model.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum ModelError {
    #[error("invalid value {value} for `{field}`: {reason}")]
    InvalidParameter {
        field: &'static str,
        value: f64,
        reason: &'static str,
    },

    #[error("reward {reward} is not a payoff of the game with b = {b}")]
    InvalidReward { reward: f64, b: f64 },

    #[error("grid `{axis}` is empty")]
    EmptyGrid { axis: &'static str },

    #[error("grid `{axis}` is not strictly increasing")]
    UnorderedGrid { axis: &'static str },

    #[error("hyperparameter tuning is not defined for {policy}")]
    UnsupportedTuning { policy: &'static str },

    #[error("replicate index {index} out of range for {replicates} replicates")]
    ReplicateOutOfRange { index: u32, replicates: u32 },
}
