//! Noise-aware decomposition of single-qubit gates into virtual `R_z` and
//! physical `R_x(±π/2)` pulses under amplitude and phase damping.

pub mod calib;
pub mod error;
pub mod experiments;
pub mod math;
pub mod noise;
pub mod optimize;
pub mod rb;
pub mod report;
pub mod rng;

pub use error::{Error, Result};
