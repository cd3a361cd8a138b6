//! Level-k and cognitive-hierarchy models for beauty contests, two-player
//! guessing games and the 11-20 money request game: predictions,
//! maximum-likelihood fits, distribution tests, agent simulation and a
//! harness for running the games with chat models.

pub mod agents;
pub mod cli;
pub mod error;
pub mod estimation;
pub mod games;
pub mod harness;
pub mod hierarchy;
pub mod stats;
pub mod store;

pub use error::{Error, Result};
