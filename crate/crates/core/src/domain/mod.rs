//! Shared value types: the delay-Doppler grid, frames, time signals, channel
//! paths and the deterministic random streams every experiment draws from.
//!
//! All public contracts use the row-vector convention `y = x H + v`, and
//! delay-Doppler frames are vectorized Doppler-first: flat index `k + K l`.

mod grid;
mod path;
mod rng;

pub use grid::{DDFrame, DDGrid, TimeSignal};
pub use path::{ChannelPath, ChannelRealization};
pub use rng::{derive_stream, trial_stream_id, RngStream};

pub(crate) use grid::cis_turns;
pub use grid::l2_norm;

pub type C64 = num_complex::Complex64;
