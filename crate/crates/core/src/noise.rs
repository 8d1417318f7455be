//! Amplitude and phase damping attached to the physical `R_x(±π/2)` pulses.
//!
//! A gate with Euler angles `(β, γ, δ)` runs as
//! `R_z(β) · N∘R_x(-π/2) · R_z(γ) · N∘R_x(π/2) · R_z(δ)`: each pulse is an
//! instantaneous rotation followed by the damping channel `N` over the pulse
//! duration. Virtual `R_z` gates are noiseless and idle time is not modeled.

use std::f64::consts::FRAC_PI_2;

use serde::{Deserialize, Serialize};

use crate::error::{ensure_finite, Error, Result};
use crate::math::{BlochState, DensityMatrix, EulerAngles, Mat2, C64};
use crate::math::{compose_native, compose_zyz};

/// Upper clamp on damping probabilities. At exactly 1 every coherence factor
/// vanishes and the normalized optimizer objective is undefined.
pub const MAX_LAMBDA: f64 = 1.0 - 1e-15;

/// Coherence times and pulse duration, in seconds.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CoherenceTimes {
    pub t1: f64,
    pub t2: f64,
    pub t_star: f64,
}

/// Per-pulse damping probabilities, optionally with the times they came from.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct NoiseParams {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub times: Option<CoherenceTimes>,
    pub lambda_a: f64,
    pub lambda_p: f64,
}

/// `λ_A = 1 − e^{−t*/T1}`, `λ_P = 1 − e^{−t*/T2}`, clamped to [`MAX_LAMBDA`].
pub fn damping_probabilities(t1: f64, t2: f64, t_star: f64) -> Result<(f64, f64)> {
    for (name, v) in [("T1", t1), ("T2", t2), ("pulse duration", t_star)] {
        ensure_finite(name, v)?;
    }
    if t1 <= 0.0 || t2 <= 0.0 {
        return Err(Error::invalid(format!("coherence times must be positive (T1={t1}, T2={t2})")));
    }
    if t_star < 0.0 {
        return Err(Error::invalid(format!("pulse duration must be non-negative, got {t_star}")));
    }
    let lambda = |t: f64| (-(-t_star / t).exp_m1()).min(MAX_LAMBDA);
    Ok((lambda(t1), lambda(t2)))
}

impl NoiseParams {
    pub fn from_times(t1: f64, t2: f64, t_star: f64) -> Result<Self> {
        let (lambda_a, lambda_p) = damping_probabilities(t1, t2, t_star)?;
        Ok(NoiseParams { times: Some(CoherenceTimes { t1, t2, t_star }), lambda_a, lambda_p })
    }

    /// Abstract noise level without underlying times.
    pub fn from_lambdas(lambda_a: f64, lambda_p: f64) -> Result<Self> {
        for (name, v) in [("lambda_a", lambda_a), ("lambda_p", lambda_p)] {
            ensure_finite(name, v)?;
            if !(0.0..1.0).contains(&v) {
                return Err(Error::invalid(format!("{name} must lie in [0, 1), got {v}")));
            }
        }
        Ok(NoiseParams { times: None, lambda_a: lambda_a.min(MAX_LAMBDA), lambda_p: lambda_p.min(MAX_LAMBDA) })
    }

    /// `λ_A = λ_P = λ`
    pub fn symmetric(lambda: f64) -> Result<Self> {
        Self::from_lambdas(lambda, lambda)
    }

    pub fn noiseless() -> Self {
        NoiseParams { times: None, lambda_a: 0.0, lambda_p: 0.0 }
    }

    pub fn is_noiseless(&self) -> bool {
        self.lambda_a == 0.0 && self.lambda_p == 0.0
    }

    /// Both coherence times multiplied by `factor`, pulse duration unchanged.
    pub fn with_coherence_scaled(&self, factor: f64) -> Result<Self> {
        ensure_finite("coherence scale factor", factor)?;
        if factor <= 0.0 {
            return Err(Error::invalid(format!("coherence scale factor must be positive, got {factor}")));
        }
        if factor == 1.0 {
            return Ok(*self);
        }
        let times = self
            .times
            .ok_or_else(|| Error::invalid("scaling coherence times requires T1/T2, not bare damping probabilities"))?;
        Self::from_times(times.t1 * factor, times.t2 * factor, times.t_star)
    }

    /// `√(1−λ_A)`
    pub fn amplitude_survival(&self) -> f64 {
        (1.0 - self.lambda_a).sqrt()
    }

    /// `√(1−λ_P)`
    pub fn phase_survival(&self) -> f64 {
        (1.0 - self.lambda_p).sqrt()
    }

    /// `√(1−λ_A)·√(1−λ_P)`, the factor on every off-diagonal entry per pulse.
    pub fn coherence_factor(&self) -> f64 {
        self.amplitude_survival() * self.phase_survival()
    }
}

/// Kraus operators `A_0, A_1` of amplitude damping.
pub fn amplitude_damping_kraus(lambda_a: f64) -> [Mat2; 2] {
    [
        Mat2::from_real([[1.0, 0.0], [0.0, (1.0 - lambda_a).sqrt()]]),
        Mat2::from_real([[0.0, lambda_a.sqrt()], [0.0, 0.0]]),
    ]
}

/// Kraus operators `P_0, P_1` of phase damping.
pub fn phase_damping_kraus(lambda_p: f64) -> [Mat2; 2] {
    [
        Mat2::from_real([[1.0, 0.0], [0.0, (1.0 - lambda_p).sqrt()]]),
        Mat2::from_real([[0.0, 0.0], [0.0, lambda_p.sqrt()]]),
    ]
}

/// `Σ_i K_i ρ K_i†`
pub fn apply_kraus(ops: &[Mat2], rho: &Mat2) -> Mat2 {
    ops.iter().fold(Mat2::ZERO, |acc, k| acc + k.conjugate(rho))
}

/// The combined damping map `N(ρ)` of one pulse.
pub fn apply_channel(rho: &DensityMatrix, noise: &NoiseParams) -> DensityMatrix {
    let la = noise.lambda_a;
    let f = noise.coherence_factor();
    let m = rho.matrix();
    DensityMatrix::from_matrix_unchecked(Mat2::new(
        m[(0, 0)] * (1.0 - la) + la,
        m[(0, 1)] * f,
        m[(1, 0)] * f,
        m[(1, 1)] * (1.0 - la),
    ))
}

fn rz(angle: f64) -> Mat2 {
    Mat2::diag(C64::from_polar(1.0, -angle / 2.0), C64::from_polar(1.0, angle / 2.0))
}

fn rx_half(sign: f64) -> Mat2 {
    let s = sign * std::f64::consts::FRAC_1_SQRT_2;
    let c = std::f64::consts::FRAC_1_SQRT_2;
    Mat2::new(C64::new(c, 0.0), C64::new(0.0, -s), C64::new(0.0, -s), C64::new(c, 0.0))
}

/// Applies the noisy native-gate sequence to an arbitrary (possibly mixed) state.
pub fn noisy_gate_stepwise(angles: &EulerAngles, rho: &DensityMatrix, noise: &NoiseParams) -> DensityMatrix {
    let first = rx_half(1.0) * rz(angles.delta);
    let rho1 = apply_channel(&rho.evolve(&first), noise);
    let second = rx_half(-1.0) * rz(angles.gamma);
    let rho2 = apply_channel(&rho1.evolve(&second), noise);
    rho2.evolve(&rz(angles.beta))
}

/// The entries `(a, b)` of the output state `[[a, b], [b*, 1−a]]` for a pure input.
pub fn closed_form_entries(angles: &EulerAngles, state: &BlochState, noise: &NoiseParams) -> (f64, C64) {
    let (la, lp) = (noise.lambda_a, noise.lambda_p);
    let (sg, cg) = angles.gamma.sin_cos();
    let (st, ct) = state.theta.sin_cos();
    let (sd, cd) = (state.phi + angles.delta).sin_cos();
    let sa = (1.0 - la).sqrt();
    let sp = (1.0 - lp).sqrt();

    let a = 0.5 * ((-sg * cd * st + cg * ct) * (1.0 - la) * sa * sp + 1.0 + la);
    let re = (cd * cg * st + sg * ct) * (1.0 - la) * (1.0 - lp);
    let im = -(sd * st * (1.0 - la) + la) * sa * sp;
    let b = C64::from_polar(0.5, -angles.beta) * C64::new(re, im);
    (a, b)
}

/// Output of the noisy gate on a pure input, from the closed-form expression.
pub fn noisy_gate_closed_form(angles: &EulerAngles, state: &BlochState, noise: &NoiseParams) -> DensityMatrix {
    let (a, b) = closed_form_entries(angles, state, noise);
    DensityMatrix::from_populations(a, b)
}

/// Which formula the simulator uses for a noisy gate.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SimulationPath {
    #[default]
    Stepwise,
    /// Closed form per eigenstate, recombined by linearity of the channel.
    ClosedForm,
}

pub fn noisy_gate(path: SimulationPath, angles: &EulerAngles, rho: &DensityMatrix, noise: &NoiseParams) -> DensityMatrix {
    match path {
        SimulationPath::Stepwise => noisy_gate_stepwise(angles, rho, noise),
        SimulationPath::ClosedForm => {
            let m = rho.eigen_ensemble().iter().fold(Mat2::ZERO, |acc, (w, s)| {
                acc + noisy_gate_closed_form(angles, s, noise).matrix().scale(C64::new(*w, 0.0))
            });
            DensityMatrix::from_matrix_unchecked(m)
        }
    }
}

/// Output of the noiseless gate, `U ρ U†`.
pub fn ideal_gate(angles: &EulerAngles, rho: &DensityMatrix) -> DensityMatrix {
    rho.evolve(&compose_zyz(angles))
}

/// Same as [`ideal_gate`] but through the native-gate sequence.
pub fn ideal_native_gate(angles: &EulerAngles, rho: &DensityMatrix) -> DensityMatrix {
    rho.evolve(&compose_native(angles))
}

/// Direction of the calibrated pulse, `R_x(+π/2)` or `R_x(−π/2)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum PulseSign {
    Plus,
    Minus,
}

impl PulseSign {
    pub fn value(self) -> f64 {
        match self {
            PulseSign::Plus => 1.0,
            PulseSign::Minus => -1.0,
        }
    }

    pub fn target_angle(self) -> f64 {
        self.value() * FRAC_PI_2
    }
}

/// Overlap between a noisy `R_x(α)` pulse on `|0⟩` and the ideal `R_x(±π/2)|0⟩`:
/// `½(1 ± √(1−λ_A)√(1−λ_P) sin α)`.
pub fn calibration_fidelity(alpha: f64, noise: &NoiseParams, sign: PulseSign) -> f64 {
    0.5 * (1.0 + sign.value() * noise.coherence_factor() * alpha.sin())
}

#[cfg(test)]
mod tests {
    use std::f64::consts::{PI, TAU};

    use proptest::prelude::*;

    use super::*;
    use crate::math::{rx, state_fidelity};

    fn random_density(x: f64, y: f64, z: f64) -> DensityMatrix {
        // scale into the unit ball
        let n = (x * x + y * y + z * z).sqrt().max(1.0);
        DensityMatrix::from_bloch_vector([x / n, y / n, z / n]).unwrap()
    }

    #[test]
    fn rome_qubit3_damping_probabilities() {
        let (la, lp) = damping_probabilities(46.4e-6, 105e-6, 35.6e-9).unwrap();
        assert_eq!(format!("{la:.1e}"), "7.7e-4");
        assert_eq!(format!("{lp:.1e}"), "3.4e-4");
    }

    #[test]
    fn zero_duration_means_no_damping() {
        assert_eq!(damping_probabilities(1e-5, 2e-5, 0.0).unwrap(), (0.0, 0.0));
    }

    #[test]
    fn unit_exponent() {
        let (la, lp) = damping_probabilities(3e-8, 3e-8, 3e-8).unwrap();
        let expected = 1.0 - (-1.0f64).exp();
        assert!((la - expected).abs() < 1e-15 && (lp - expected).abs() < 1e-15);
    }

    #[test]
    fn invalid_times_rejected() {
        assert!(damping_probabilities(0.0, 1.0, 1.0).is_err());
        assert!(damping_probabilities(1.0, -1.0, 1.0).is_err());
        assert!(damping_probabilities(1.0, 1.0, -1.0).is_err());
        assert!(NoiseParams::from_lambdas(1.0, 0.0).is_err());
        assert!(NoiseParams::from_lambdas(0.1, f64::NAN).is_err());
        assert!(NoiseParams::symmetric(0.3).unwrap().with_coherence_scaled(2.0).is_err());
    }

    #[test]
    fn saturated_damping_is_clamped() {
        let p = NoiseParams::from_times(1e-9, 1e-9, 1e-3).unwrap();
        assert_eq!(p.lambda_a, MAX_LAMBDA);
        assert!(p.coherence_factor() > 0.0);
    }

    #[test]
    fn scaling_times_recomputes_lambdas() {
        let p = NoiseParams::from_times(46.4e-6, 105e-6, 35.6e-9).unwrap();
        let q = p.with_coherence_scaled(10.0).unwrap();
        let (la, lp) = damping_probabilities(464e-6, 1050e-6, 35.6e-9).unwrap();
        assert!((q.lambda_a - la).abs() < 1e-18 && (q.lambda_p - lp).abs() < 1e-18);
    }

    #[test]
    fn ground_state_is_fixed_point() {
        for l in [0.0, 0.01, 0.5, 0.99] {
            let p = NoiseParams::from_lambdas(l, 0.3).unwrap();
            assert_eq!(apply_channel(&DensityMatrix::ground(), &p), DensityMatrix::ground());
        }
    }

    #[test]
    fn excited_state_decays() {
        let p = NoiseParams::from_lambdas(0.2, 0.1).unwrap();
        let out = apply_channel(&DensityMatrix::excited(), &p);
        let expected = DensityMatrix::try_from_matrix(Mat2::from_real([[0.2, 0.0], [0.0, 0.8]])).unwrap();
        assert!(out.max_abs_diff(&expected) < 1e-15);
    }

    #[test]
    fn noiseless_limit_is_unitary_conjugation() {
        let angles = EulerAngles::new(0.3, 1.2, 4.0).unwrap();
        let s = BlochState::new(2.0, 0.7).unwrap();
        let rho = DensityMatrix::pure(&s);
        let ideal = rho.evolve(&compose_native(&angles));
        let p = NoiseParams::noiseless();
        assert!(noisy_gate_closed_form(&angles, &s, &p).max_abs_diff(&ideal) < 1e-14);
        assert!(noisy_gate_stepwise(&angles, &rho, &p).max_abs_diff(&ideal) < 1e-14);
    }

    #[test]
    fn identity_on_ground_closed_form() {
        for l in [0.0, 1e-3, 0.05, 0.3] {
            let p = NoiseParams::symmetric(l).unwrap();
            let out = noisy_gate_closed_form(&EulerAngles::ZERO, &BlochState::GROUND, &p);
            let expected = 0.5 * ((1.0 - l) * (1.0 - l) + 1.0 + l);
            assert!((out.ground_population() - expected).abs() < 1e-15);
            let step = noisy_gate_stepwise(&EulerAngles::ZERO, &DensityMatrix::ground(), &p);
            assert!((step.ground_population() - expected).abs() < 1e-15);
        }
    }

    #[test]
    fn maximally_mixed_input() {
        // N(I/2) has Bloch vector (0, 0, λ_A); R_x(-π/2) turns it onto the y axis,
        // where the second pulse shrinks it by the coherence factor.
        let p = NoiseParams::from_lambdas(0.15, 0.05).unwrap();
        let la = p.lambda_a;
        for angles in [EulerAngles::ZERO, EulerAngles::new(1.0, 2.0, 3.0).unwrap()] {
            let out = noisy_gate_stepwise(&angles, &DensityMatrix::maximally_mixed(), &p);
            assert!((out.ground_population() - 0.5 * (1.0 + la)).abs() < 1e-15);
            assert!((out.get(0, 1).norm() - 0.5 * la * p.coherence_factor()).abs() < 1e-15);
        }
    }

    #[test]
    fn calibration_fidelity_values() {
        let clean = NoiseParams::noiseless();
        assert!((calibration_fidelity(FRAC_PI_2, &clean, PulseSign::Plus) - 1.0).abs() < 1e-15);
        let p = NoiseParams::symmetric(0.1).unwrap();
        assert_eq!(calibration_fidelity(0.0, &p, PulseSign::Plus), 0.5);
        assert!((calibration_fidelity(FRAC_PI_2, &p, PulseSign::Plus) - 0.95).abs() < 1e-15);
    }

    #[test]
    fn calibration_fidelity_matches_channel_simulation() {
        let p = NoiseParams::from_lambdas(0.1, 0.1).unwrap();
        for sign in [PulseSign::Plus, PulseSign::Minus] {
            let ideal = rx(sign.target_angle()).unwrap().apply(BlochState::GROUND.state_vector());
            let target = BlochState::from_vector(ideal).unwrap();
            for alpha in [-2.5, -1.0, 0.0, 0.4, FRAC_PI_2, 2.9] {
                let rho = DensityMatrix::ground().evolve(&rx(alpha).unwrap());
                let direct = state_fidelity(&target, &apply_channel(&rho, &p));
                assert!((direct - calibration_fidelity(alpha, &p, sign)).abs() < 1e-14);
            }
        }
    }

    #[test]
    fn calibration_optimum_at_quarter_turn() {
        let p = NoiseParams::from_lambdas(0.4, 0.2).unwrap();
        let n = 6284;
        let best = (0..=n)
            .map(|i| -PI + TAU * i as f64 / n as f64)
            .max_by(|a, b| calibration_fidelity(*a, &p, PulseSign::Minus).total_cmp(&calibration_fidelity(*b, &p, PulseSign::Minus)))
            .unwrap();
        assert!((best + FRAC_PI_2).abs() < 1e-3);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(1000))]

        #[test]
        fn channel_equals_kraus_sum(
            x in -1.0..1.0f64, y in -1.0..1.0f64, z in -1.0..1.0f64,
            la in 0.0..0.999f64, lp in 0.0..0.999f64,
        ) {
            let rho = random_density(x, y, z);
            let p = NoiseParams::from_lambdas(la, lp).unwrap();
            let amp = amplitude_damping_kraus(la);
            let phase = phase_damping_kraus(lp);
            let kraus = apply_kraus(&phase, &apply_kraus(&amp, rho.matrix()));
            let out = apply_channel(&rho, &p);
            prop_assert!(out.matrix().max_abs_diff(&kraus) < 1e-13);
            // the two damping maps commute
            let swapped = apply_kraus(&amp, &apply_kraus(&phase, rho.matrix()));
            prop_assert!(swapped.max_abs_diff(&kraus) < 1e-13);
            prop_assert!((out.matrix().trace().re - 1.0).abs() < 1e-13);
            prop_assert!(out.eigenvalues()[0] >= -1e-12);
        }

        #[test]
        fn kraus_sets_are_complete(la in 0.0..1.0f64, lp in 0.0..1.0f64) {
            for ops in [amplitude_damping_kraus(la), phase_damping_kraus(lp)] {
                let sum = ops.iter().fold(Mat2::ZERO, |acc, k| acc + k.dagger() * *k);
                prop_assert!(sum.max_abs_diff(&Mat2::IDENTITY) < 1e-15);
            }
        }

        #[test]
        fn stepwise_output_is_valid_for_mixed_inputs(
            b in 0.0..TAU, g in 0.0..PI, d in 0.0..TAU,
            x in -1.0..1.0f64, y in -1.0..1.0f64, z in -1.0..1.0f64,
            la in 0.0..0.9f64, lp in 0.0..0.9f64,
        ) {
            let rho = random_density(x, y, z);
            let p = NoiseParams::from_lambdas(la, lp).unwrap();
            let out = noisy_gate_stepwise(&EulerAngles::new(b, g, d).unwrap(), &rho, &p);
            prop_assert!(DensityMatrix::try_from_matrix(*out.matrix()).is_ok());
        }
    }
}
