//! Probability of resolution of MUSIC and g-MUSIC for uniform linear arrays
//! in the regime where the number of sensors and snapshots grow together.

pub mod array_model;
pub mod asymptotics;
pub mod cli;
pub mod error;
pub mod estimators;
pub mod montecarlo;
pub mod oracle;
pub mod poly;
pub mod quad;
pub mod resolution;
pub mod rmt_support;

pub use array_model::ScenarioConfig;
pub use error::{Error, Result};
pub use resolution::{predict, Estimator, ResolutionQuery};
