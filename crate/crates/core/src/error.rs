use thiserror::Error;

/// Errors raised by the game, prediction and estimation layers.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid specification: {0}")]
    InvalidSpec(String),

    #[error("value {value} outside domain [{lo}, {hi}]")]
    OutOfDomain { value: f64, lo: f64, hi: f64 },

    #[error("empty input: {0}")]
    Empty(&'static str),

    #[error("expected {expected} choices, got {got}")]
    ChoiceCount { expected: usize, got: usize },

    #[error("the number of players is unspecified; outcomes cannot be resolved")]
    UnspecifiedPlayers,

    #[error("no unique Nash equilibrium for this game")]
    NoUniqueEquilibrium,

    #[error("rank {0} out of range")]
    RankOutOfRange(usize),

    #[error("missing responses for rounds {0:?}")]
    MissingRounds(Vec<usize>),

    #[error("cannot aggregate fits of different model kinds")]
    MixedModels,

    #[error("unknown identifier: {0}")]
    Unknown(String),

    #[error("{0}")]
    Invalid(String),
}

pub type Result<T> = std::result::Result<T, Error>;
