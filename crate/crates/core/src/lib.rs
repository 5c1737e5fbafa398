pub mod baselines;
pub mod channel;
pub mod cli;
pub mod config;
pub mod ddmatrix;
pub mod detect;
pub mod diversity;
pub mod domain;
pub mod error;
pub mod linalg;
pub mod montecarlo;
pub mod plot;
pub mod pulse;
pub mod transforms;
pub mod verify;

pub use domain::*;
pub use error::{Error, Result};
