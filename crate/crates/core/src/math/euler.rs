use std::f64::consts::{FRAC_PI_2, PI};

use serde::{Deserialize, Serialize};

use super::matrix::{Mat2, C64};
use super::rotation::{rx_unchecked, ry_unchecked, rz_unchecked};
use super::{wrap_pi, wrap_tau};
use crate::error::{ensure_finite, Error, Result};

/// Below this distance from 0 or π the ZYZ decomposition is degenerate; the
/// whole z-rotation is then folded into `beta` and `delta` is set to zero.
pub const DEGENERATE_GAMMA_TOL: f64 = 1e-9;

/// ZYZ Euler angles of `e^{iα} R_z(β) R_y(γ) R_z(δ)`.
///
/// Constructors wrap into the canonical ranges `β, δ ∈ [0, 2π)`, `γ ∈ [0, π]`
/// and compensate the global phase, so the represented matrix is unchanged.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct EulerAngles {
    pub beta: f64,
    pub gamma: f64,
    pub delta: f64,
    /// Irrelevant for every fidelity; kept so extraction round-trips exactly.
    #[serde(default)]
    pub global_phase: f64,
}

impl EulerAngles {
    pub const ZERO: EulerAngles = EulerAngles { beta: 0.0, gamma: 0.0, delta: 0.0, global_phase: 0.0 };

    pub fn new(beta: f64, gamma: f64, delta: f64) -> Result<Self> {
        Self::with_phase(beta, gamma, delta, 0.0)
    }

    pub fn with_phase(beta: f64, gamma: f64, delta: f64, global_phase: f64) -> Result<Self> {
        ensure_finite("beta", beta)?;
        ensure_finite("gamma", gamma)?;
        ensure_finite("delta", delta)?;
        ensure_finite("global phase", global_phase)?;
        Ok(Self::raw(beta, gamma, delta, global_phase).canonical())
    }

    /// Unwrapped angles, as used by the optimizer on ℝ³.
    pub const fn raw(beta: f64, gamma: f64, delta: f64, global_phase: f64) -> Self {
        EulerAngles { beta, gamma, delta, global_phase }
    }

    pub fn as_array(&self) -> [f64; 3] {
        [self.beta, self.gamma, self.delta]
    }

    /// Same operator with angles in canonical ranges.
    pub fn canonical(&self) -> Self {
        let EulerAngles { mut beta, mut gamma, mut delta, mut global_phase } = *self;
        // R_y(γ + 2πn) = (-1)^n R_y(γ)
        let turns = (gamma / (2.0 * PI)).floor();
        gamma -= turns * 2.0 * PI;
        global_phase += turns * PI;
        if gamma > PI {
            // R_y(γ) = -R_z(π) R_y(2π - γ) R_z(-π)
            gamma = 2.0 * PI - gamma;
            beta += PI;
            delta -= PI;
            global_phase += PI;
        }
        let beta_turns = (beta / (2.0 * PI)).floor();
        let delta_turns = (delta / (2.0 * PI)).floor();
        beta -= beta_turns * 2.0 * PI;
        delta -= delta_turns * 2.0 * PI;
        // R_z(φ + 2π) = -R_z(φ)
        global_phase += (beta_turns + delta_turns) * PI;
        EulerAngles {
            beta: wrap_tau(beta),
            gamma: gamma.clamp(0.0, PI),
            delta: wrap_tau(delta),
            global_phase: wrap_pi(global_phase),
        }
    }

    /// Wraps each angle into `[0, 2π)` separately, leaving `γ` possibly above π.
    ///
    /// Folding `γ` back into `[0, π]` swaps the two `R_x(±π/2)` pulses, which is
    /// the same unitary but a different noisy pulse sequence. Optimized angles
    /// are reported in this form so the executed sequence is preserved.
    pub fn native_wrapped(&self) -> Self {
        let turns = |a: f64| (a / (2.0 * PI)).floor();
        let (tb, tg, td) = (turns(self.beta), turns(self.gamma), turns(self.delta));
        EulerAngles {
            beta: wrap_tau(self.beta - tb * 2.0 * PI),
            gamma: wrap_tau(self.gamma - tg * 2.0 * PI),
            delta: wrap_tau(self.delta - td * 2.0 * PI),
            global_phase: wrap_pi(self.global_phase + (tb + tg + td) * PI),
        }
    }

    /// Largest per-angle distance, each taken modulo 2π.
    pub fn angular_distance(&self, other: &EulerAngles) -> f64 {
        [
            wrap_pi(self.beta - other.beta).abs(),
            wrap_pi(self.gamma - other.gamma).abs(),
            wrap_pi(self.delta - other.delta).abs(),
        ]
        .into_iter()
        .fold(0.0, f64::max)
    }
}

impl Default for EulerAngles {
    fn default() -> Self {
        Self::ZERO
    }
}

/// `e^{iα} R_z(β) R_y(γ) R_z(δ)`
pub fn compose_zyz(angles: &EulerAngles) -> Mat2 {
    let m = rz_unchecked(angles.beta) * ry_unchecked(angles.gamma) * rz_unchecked(angles.delta);
    m.scale(C64::from_polar(1.0, angles.global_phase))
}

/// `e^{iα} R_z(β) R_x(-π/2) R_z(γ) R_x(π/2) R_z(δ)`, the sequence the hardware runs.
pub fn compose_native(angles: &EulerAngles) -> Mat2 {
    let m = rz_unchecked(angles.beta)
        * rx_unchecked(-FRAC_PI_2)
        * rz_unchecked(angles.gamma)
        * rx_unchecked(FRAC_PI_2)
        * rz_unchecked(angles.delta);
    m.scale(C64::from_polar(1.0, angles.global_phase))
}

/// Inverse of [`compose_zyz`] for a unitary within 1e-10.
pub fn extract_euler(u: &Mat2) -> Result<EulerAngles> {
    if !u.0.iter().flatten().all(|z| z.re.is_finite() && z.im.is_finite()) {
        return Err(Error::invalid("matrix has non-finite entries"));
    }
    if !u.is_unitary(1e-10) {
        return Err(Error::invalid("matrix is not unitary within 1e-10"));
    }
    let (u00, u01, u10, u11) = (u[(0, 0)], u[(0, 1)], u[(1, 0)], u[(1, 1)]);
    let cos_part = (u00.norm_sqr() + u11.norm_sqr()).sqrt();
    let sin_part = (u01.norm_sqr() + u10.norm_sqr()).sqrt();
    let gamma = 2.0 * sin_part.atan2(cos_part);

    let (beta, delta) = if gamma < DEGENERATE_GAMMA_TOL {
        // u11 / u00 = e^{i(β+δ)}
        ((u11 * u00.conj()).arg(), 0.0)
    } else if PI - gamma < DEGENERATE_GAMMA_TOL {
        // -u10 / u01 = e^{i(β-δ)}
        ((-u10 * u01.conj()).arg(), 0.0)
    } else {
        // arg u11 - arg u10 = δ ; arg u11 + arg u10 = 2α + β with e^{2iα} = det U
        let delta = u11.arg() - u10.arg();
        let beta = u11.arg() + u10.arg() - u.det().arg();
        (beta, delta)
    };
    let mut angles = EulerAngles::raw(wrap_tau(beta), gamma.clamp(0.0, PI), wrap_tau(delta), 0.0);
    let overlap = (compose_zyz(&angles).dagger() * *u).trace();
    angles.global_phase = overlap.arg();
    Ok(angles)
}
