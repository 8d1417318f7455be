use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use super::matrix::{Mat2, C64};
use super::wrap_tau;
use crate::error::{ensure_finite, Error, Result};

/// Tolerance for Hermiticity and unit trace when accepting an external matrix.
pub const DENSITY_TOL: f64 = 1e-9;
/// Smallest eigenvalue accepted as numerically positive.
pub const PSD_TOL: f64 = 1e-12;

/// Pure state `cos(θ/2)|0⟩ + e^{iφ} sin(θ/2)|1⟩` on the Bloch sphere.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BlochState {
    pub theta: f64,
    pub phi: f64,
}

impl BlochState {
    pub const GROUND: BlochState = BlochState { theta: 0.0, phi: 0.0 };
    pub const EXCITED: BlochState = BlochState { theta: PI, phi: 0.0 };

    /// Accepts any finite angles and maps them onto `θ ∈ [0, π]`, `φ ∈ [0, 2π)`.
    pub fn new(theta: f64, phi: f64) -> Result<Self> {
        ensure_finite("theta", theta)?;
        ensure_finite("phi", phi)?;
        let mut theta = wrap_tau(theta);
        let mut phi = phi;
        if theta > PI {
            theta = 2.0 * PI - theta;
            phi += PI;
        }
        Ok(BlochState { theta, phi: wrap_tau(phi) })
    }

    pub fn state_vector(&self) -> [C64; 2] {
        let (s, c) = (self.theta / 2.0).sin_cos();
        [C64::new(c, 0.0), C64::from_polar(s, self.phi)]
    }

    /// Bloch coordinates of a (not necessarily normalized) state vector.
    pub fn from_vector(v: [C64; 2]) -> Result<Self> {
        let n0 = v[0].norm();
        let n1 = v[1].norm();
        if !(n0.is_finite() && n1.is_finite()) || n0 + n1 == 0.0 {
            return Err(Error::invalid("state vector must be finite and nonzero"));
        }
        let theta = 2.0 * n1.atan2(n0);
        let phi = if n0 == 0.0 || n1 == 0.0 { 0.0 } else { (v[1] * v[0].conj()).arg() };
        Ok(BlochState { theta, phi: wrap_tau(phi) })
    }

    /// Point on the sphere along a nonzero Bloch vector.
    pub fn from_bloch_vector(r: [f64; 3]) -> Result<Self> {
        let norm = r.iter().map(|x| x * x).sum::<f64>().sqrt();
        if !norm.is_finite() || norm == 0.0 {
            return Err(Error::invalid("Bloch vector must be finite and nonzero"));
        }
        let theta = (r[2] / norm).clamp(-1.0, 1.0).acos();
        let phi = r[1].atan2(r[0]);
        Ok(BlochState { theta, phi: wrap_tau(phi) })
    }

    pub fn bloch_vector(&self) -> [f64; 3] {
        let (st, ct) = self.theta.sin_cos();
        let (sp, cp) = self.phi.sin_cos();
        [st * cp, st * sp, ct]
    }

    /// The orthogonal state (antipode on the sphere).
    pub fn antipode(&self) -> Self {
        BlochState { theta: PI - self.theta, phi: wrap_tau(self.phi + PI) }
    }
}

/// A valid single-qubit density matrix: Hermitian, unit trace, positive semidefinite.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Mat2", into = "Mat2")]
pub struct DensityMatrix(Mat2);

impl DensityMatrix {
    pub fn try_from_matrix(m: Mat2) -> Result<Self> {
        if !m.0.iter().flatten().all(|z| z.re.is_finite() && z.im.is_finite()) {
            return Err(Error::invalid("density matrix has non-finite entries"));
        }
        let herm = (m[(1, 0)] - m[(0, 1)].conj()).norm().max(m[(0, 0)].im.abs()).max(m[(1, 1)].im.abs());
        if herm > DENSITY_TOL {
            return Err(Error::invalid(format!("density matrix is not Hermitian (deviation {herm:e})")));
        }
        let tr = m.trace();
        if (tr.re - 1.0).abs() > DENSITY_TOL || tr.im.abs() > DENSITY_TOL {
            return Err(Error::invalid(format!("density matrix trace is {tr}, expected 1")));
        }
        let rho = DensityMatrix(m);
        let [low, _] = rho.eigenvalues();
        if low < -PSD_TOL {
            return Err(Error::invalid(format!("density matrix is not positive semidefinite (eigenvalue {low:e})")));
        }
        Ok(rho)
    }

    /// Builds from entries known to be valid (internal evolution results).
    pub(crate) fn from_matrix_unchecked(m: Mat2) -> Self {
        DensityMatrix(m)
    }

    /// `[[a, b], [b*, 1 - a]]`
    pub(crate) fn from_populations(a: f64, b: C64) -> Self {
        DensityMatrix(Mat2::new(C64::new(a, 0.0), b, b.conj(), C64::new(1.0 - a, 0.0)))
    }

    pub fn pure(state: &BlochState) -> Self {
        let v = state.state_vector();
        DensityMatrix(Mat2::outer(v, v))
    }

    pub fn ground() -> Self {
        Self::pure(&BlochState::GROUND)
    }

    pub fn excited() -> Self {
        Self::pure(&BlochState::EXCITED)
    }

    pub fn maximally_mixed() -> Self {
        DensityMatrix(Mat2::from_real([[0.5, 0.0], [0.0, 0.5]]))
    }

    /// `(I + r·σ)/2`, requires `|r| ≤ 1`.
    pub fn from_bloch_vector(r: [f64; 3]) -> Result<Self> {
        let m = Mat2::new(
            C64::new((1.0 + r[2]) / 2.0, 0.0),
            C64::new(r[0] / 2.0, -r[1] / 2.0),
            C64::new(r[0] / 2.0, r[1] / 2.0),
            C64::new((1.0 - r[2]) / 2.0, 0.0),
        );
        Self::try_from_matrix(m)
    }

    pub fn matrix(&self) -> &Mat2 {
        &self.0
    }

    pub fn get(&self, row: usize, col: usize) -> C64 {
        self.0[(row, col)]
    }

    /// Probability of measuring `|0⟩`.
    pub fn ground_population(&self) -> f64 {
        self.0[(0, 0)].re
    }

    pub fn bloch_vector(&self) -> [f64; 3] {
        let b = self.0[(0, 1)];
        [2.0 * b.re, -2.0 * b.im, (self.0[(0, 0)] - self.0[(1, 1)]).re]
    }

    /// Eigenvalues in ascending order.
    pub fn eigenvalues(&self) -> [f64; 2] {
        let tr = self.0.trace().re;
        let diff = (self.0[(0, 0)] - self.0[(1, 1)]).re;
        let off = self.0[(0, 1)].norm();
        let disc = (diff * diff + 4.0 * off * off).sqrt();
        [(tr - disc) / 2.0, (tr + disc) / 2.0]
    }

    /// `U ρ U†`; `u` is assumed unitary.
    pub fn evolve(&self, u: &Mat2) -> Self {
        DensityMatrix(u.conjugate(&self.0))
    }

    /// `⟨ψ|ρ|ψ⟩`
    pub fn expectation(&self, psi: [C64; 2]) -> f64 {
        let rho_psi = self.0.apply(psi);
        (psi[0].conj() * rho_psi[0] + psi[1].conj() * rho_psi[1]).re
    }

    /// Eigen-decomposition as `(weight, pure state)` pairs, largest weight first.
    pub fn eigen_ensemble(&self) -> [(f64, BlochState); 2] {
        let [low, high] = self.eigenvalues();
        let r = self.bloch_vector();
        let dir = BlochState::from_bloch_vector(r).unwrap_or(BlochState::GROUND);
        [(high.clamp(0.0, 1.0), dir), (low.clamp(0.0, 1.0), dir.antipode())]
    }

    /// Largest elementwise deviation from another density matrix.
    pub fn max_abs_diff(&self, other: &DensityMatrix) -> f64 {
        self.0.max_abs_diff(&other.0)
    }
}

impl TryFrom<Mat2> for DensityMatrix {
    type Error = Error;
    fn try_from(m: Mat2) -> Result<Self> {
        Self::try_from_matrix(m)
    }
}

impl From<DensityMatrix> for Mat2 {
    fn from(rho: DensityMatrix) -> Mat2 {
        rho.0
    }
}

pub fn bloch_to_density(state: &BlochState) -> DensityMatrix {
    DensityMatrix::pure(state)
}

/// Conjugates a density matrix by a unitary, checking unitarity to 1e-10.
pub fn apply_unitary(u: &Mat2, rho: &DensityMatrix) -> Result<DensityMatrix> {
    if !u.is_unitary(1e-10) {
        return Err(Error::invalid("operator is not unitary within 1e-10"));
    }
    Ok(rho.evolve(u))
}

/// `⟨ψ|ρ|ψ⟩` for a pure target state.
pub fn state_fidelity(psi: &BlochState, rho: &DensityMatrix) -> f64 {
    rho.expectation(psi.state_vector()).clamp(0.0, 1.0)
}
