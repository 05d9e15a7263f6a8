pub mod cli;
pub mod distributions;
pub mod error;
pub mod expansions;
pub mod metrics;
pub mod rearrangement;
pub mod rng;
pub mod special;

pub use error::{Error, Result};
