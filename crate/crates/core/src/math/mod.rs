//! Exact 2×2 complex linear algebra for a single qubit.
//!
//! Rotation convention used throughout the crate:
//! `R_z(φ) = diag(e^{-iφ/2}, e^{iφ/2})`, `R_x(φ) = exp(-iφX/2)`,
//! `R_y(φ) = exp(-iφY/2)`. Fidelities do not depend on this choice, but it
//! must be applied uniformly for the closed-form noisy density matrix to agree
//! with the step-by-step channel application.

mod euler;
mod matrix;
mod rotation;
mod state;

pub use euler::{compose_native, compose_zyz, extract_euler, EulerAngles, DEGENERATE_GAMMA_TOL};
pub use matrix::{Mat2, C64, PAULI_X, PAULI_Y, PAULI_Z};
pub use rotation::{axis_rotation, rx, ry, rz};
pub use state::{apply_unitary, bloch_to_density, state_fidelity, BlochState, DensityMatrix};

use std::f64::consts::{PI, TAU};

/// Wraps an angle into `[0, 2π)`.
pub fn wrap_tau(angle: f64) -> f64 {
    let w = angle.rem_euclid(TAU);
    // rem_euclid can round up to exactly TAU for tiny negative inputs
    if w >= TAU {
        0.0
    } else {
        w
    }
}

/// Wraps an angle into `(-π, π]`.
pub fn wrap_pi(angle: f64) -> f64 {
    let w = wrap_tau(angle);
    if w > PI {
        w - TAU
    } else {
        w
    }
}
