pub mod agents;
pub mod analysis;
pub mod applications;
pub mod counterfactuals;
pub mod dynamics;
pub mod error;
pub mod geometry;
pub mod interpretation;
pub mod network;
pub mod output;
pub mod scenario;

pub use error::{Error, Result};
