//! Fidelity objectives and their maximization over Euler angles.
//!
//! Every objective here is a weighted average of the single-state fidelity
//! `⟨ψ|U_t† ρ U_t|ψ⟩` over a set of initial states: one state for a known
//! input, quadrature nodes for the uniform and cap distributions, sampled
//! states in Monte Carlo mode, or the eigenstates of a mixed input.

mod bfgs;
mod quadrature;

use std::f64::consts::{PI, TAU};

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

pub use bfgs::{central_gradient, maximize, BfgsOutcome, BfgsSettings, Termination};
pub use quadrature::{gauss_legendre, QUADRATURE_FAILURE, QUADRATURE_ORDERS, QUADRATURE_TOLERANCE};

use crate::error::{ensure_finite, Error, Result};
use crate::math::{compose_zyz, extract_euler, BlochState, DensityMatrix, EulerAngles, Mat2, C64};
use crate::noise::{closed_form_entries, NoiseParams};
use crate::rng::{stream_rng, Stream};

/// Number of random restarts when multistart is switched on without a count.
pub const DEFAULT_MULTISTART: usize = 8;

/// The ideal gate `U_t` the compiler should implement.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TargetGate {
    pub angles: EulerAngles,
}

impl TargetGate {
    pub const IDENTITY: TargetGate = TargetGate { angles: EulerAngles::ZERO };

    pub fn new(angles: EulerAngles) -> Self {
        TargetGate { angles: angles.canonical() }
    }

    pub fn from_unitary(u: &Mat2) -> Result<Self> {
        Ok(TargetGate { angles: extract_euler(u)? })
    }

    pub fn unitary(&self) -> Mat2 {
        compose_zyz(&self.angles)
    }
}

/// What is known about the state the gate acts on.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum InitialStateDistribution {
    Point { state: BlochState },
    UniformSphere,
    /// Uniform over the polar cap `θ ≤ θ_max`.
    SphericalCap { theta_max: f64 },
    /// Weighted pure states, e.g. the eigendecomposition of a mixed state.
    Ensemble { members: Vec<(f64, BlochState)> },
}

impl InitialStateDistribution {
    pub fn point(state: BlochState) -> Self {
        InitialStateDistribution::Point { state }
    }

    pub fn cap(theta_max: f64) -> Result<Self> {
        let d = InitialStateDistribution::SphericalCap { theta_max };
        d.validate()?;
        Ok(d)
    }

    /// Eigen-ensemble of `rho`; zero-weight members are dropped.
    pub fn mixed(rho: &DensityMatrix) -> Self {
        let members = rho.eigen_ensemble().into_iter().filter(|(w, _)| *w > 0.0).collect();
        InitialStateDistribution::Ensemble { members }
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            InitialStateDistribution::Point { state } => {
                ensure_finite("theta", state.theta)?;
                ensure_finite("phi", state.phi)
            }
            InitialStateDistribution::UniformSphere => Ok(()),
            InitialStateDistribution::SphericalCap { theta_max } => {
                if theta_max.is_finite() && *theta_max > 0.0 && *theta_max <= PI {
                    Ok(())
                } else {
                    Err(Error::invalid(format!("cap angle must lie in (0, π], got {theta_max}")))
                }
            }
            InitialStateDistribution::Ensemble { members } => {
                if members.is_empty() {
                    return Err(Error::invalid("ensemble has no members"));
                }
                if members.iter().any(|(w, s)| !(w.is_finite() && *w >= 0.0) || !s.theta.is_finite() || !s.phi.is_finite()) {
                    return Err(Error::invalid("ensemble weights must be finite and non-negative"));
                }
                let total: f64 = members.iter().map(|(w, _)| w).sum();
                if (total - 1.0).abs() > 1e-9 {
                    return Err(Error::invalid(format!("ensemble weights sum to {total}, not 1")));
                }
                Ok(())
            }
        }
    }

    /// Polar extent of a continuous distribution.
    fn cap_angle(&self) -> Option<f64> {
        match self {
            InitialStateDistribution::UniformSphere => Some(PI),
            InitialStateDistribution::SphericalCap { theta_max } => Some(*theta_max),
            _ => None,
        }
    }

    /// Draws one state. The cap uses the exact inverse CDF
    /// `θ = arccos(1 − u(1 − cos θ_max))`.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> BlochState {
        match self {
            InitialStateDistribution::Point { state } => *state,
            InitialStateDistribution::Ensemble { members } => {
                let u: f64 = rng.random();
                let mut acc = 0.0;
                for (w, s) in members {
                    acc += w;
                    if u < acc {
                        return *s;
                    }
                }
                members.last().expect("validated ensemble").1
            }
            _ => {
                let theta_max = self.cap_angle().expect("continuous distribution");
                let u: f64 = rng.random();
                let v: f64 = rng.random();
                let one_minus_cos = 2.0 * (theta_max / 2.0).sin().powi(2);
                let theta = (1.0 - u * one_minus_cos).clamp(-1.0, 1.0).acos();
                BlochState { theta, phi: TAU * v }
            }
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum QuadratureMode {
    Gauss,
    MonteCarlo,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct OptimizerConfig {
    pub max_iterations: usize,
    /// Stop once every gradient component is below this.
    pub gradient_tolerance: f64,
    pub fd_step: f64,
    /// Random restarts in addition to the target-angle seed; 0 disables.
    pub multistart_count: usize,
    pub quadrature_mode: QuadratureMode,
    pub mc_samples: usize,
    pub rng_seed: u64,
}

impl Default for OptimizerConfig {
    fn default() -> Self {
        OptimizerConfig {
            max_iterations: 500,
            gradient_tolerance: 1e-5,
            fd_step: 1e-6,
            multistart_count: 0,
            quadrature_mode: QuadratureMode::Gauss,
            mc_samples: 4096,
            rng_seed: 0,
        }
    }
}

impl OptimizerConfig {
    pub fn validate(&self) -> Result<()> {
        if self.max_iterations == 0 {
            return Err(Error::invalid("max_iterations must be at least 1"));
        }
        if !(self.gradient_tolerance.is_finite() && self.gradient_tolerance > 0.0) {
            return Err(Error::invalid(format!("gradient_tolerance must be positive, got {}", self.gradient_tolerance)));
        }
        if !(self.fd_step.is_finite() && self.fd_step > 0.0) {
            return Err(Error::invalid(format!("fd_step must be positive, got {}", self.fd_step)));
        }
        if self.quadrature_mode == QuadratureMode::MonteCarlo && self.mc_samples == 0 {
            return Err(Error::invalid("mc_samples must be at least 1"));
        }
        Ok(())
    }

    fn bfgs(&self) -> BfgsSettings {
        BfgsSettings {
            max_iterations: self.max_iterations,
            gradient_tolerance: self.gradient_tolerance,
            fd_step: self.fd_step,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct OptimizationResult {
    /// Wrapped per angle into `[0, 2π)`; see [`EulerAngles::native_wrapped`].
    pub angles_opt: EulerAngles,
    pub objective_value: f64,
    pub objective_at_target_angles: f64,
    pub iterations: usize,
    pub evaluations: usize,
    pub converged: bool,
    pub termination: Termination,
    /// 0 for the target-angle seed, `i` for the i-th random restart.
    pub seed_index: usize,
}

impl OptimizationResult {
    pub fn improvement(&self) -> f64 {
        self.objective_value - self.objective_at_target_angles
    }
}

/// Per-state data that does not depend on the trial angles.
#[derive(Clone, Copy, Debug)]
struct Node {
    weight: f64,
    sin_theta: f64,
    cos_theta: f64,
    phi: f64,
    state: BlochState,
    /// `|c_1|²` of the ideal output `c = U_t ψ`
    excited: f64,
    /// `|c_0|² − |c_1|²`
    population_gap: f64,
    /// `c_0* c_1`
    coherence: C64,
}

/// Weighted-average fidelity against a fixed target and noise level.
#[derive(Clone, Debug)]
pub(crate) struct Objective {
    nodes: Vec<Node>,
    noise: NoiseParams,
}

impl Objective {
    pub(crate) fn new(target: &TargetGate, states: &[(BlochState, f64)], noise: NoiseParams) -> Self {
        let u = target.unitary();
        let nodes = states
            .iter()
            .map(|(state, weight)| {
                let c = u.apply(state.state_vector());
                let (p0, p1) = (c[0].norm_sqr(), c[1].norm_sqr());
                let (sin_theta, cos_theta) = state.theta.sin_cos();
                Node {
                    weight: *weight,
                    sin_theta,
                    cos_theta,
                    phi: state.phi,
                    state: *state,
                    excited: p1,
                    population_gap: p0 - p1,
                    coherence: c[0].conj() * c[1],
                }
            })
            .collect();
        Objective { nodes, noise }
    }

    /// `Σ w ⟨c|ρ|c⟩` with `ρ` from the closed-form noisy gate.
    pub(crate) fn fidelity(&self, trial: &EulerAngles) -> f64 {
        let f: f64 = self
            .nodes
            .iter()
            .map(|n| {
                let (a, b) = closed_form_entries(trial, &n.state, &self.noise);
                n.weight * (n.excited + a * n.population_gap + 2.0 * (b * n.coherence).re)
            })
            .sum();
        f.clamp(0.0, 1.0)
    }

    /// Trial-dependent part of the fidelity divided by `√(1−λ_A)√(1−λ_P)`.
    ///
    /// Fidelity is `const + √(1−λ_A)√(1−λ_P) · scaled`, so both share their
    /// maximizers; this form stays resolvable when damping saturates.
    pub(crate) fn scaled(&self, x: &[f64; 3]) -> f64 {
        let la = self.noise.lambda_a;
        let sa2 = 1.0 - la;
        let sasp = self.noise.coherence_factor();
        let (sg, cg) = x[1].sin_cos();
        let phase = C64::from_polar(1.0, -x[0]);
        self.nodes
            .iter()
            .map(|n| {
                let (sd, cd) = (n.phi + x[2]).sin_cos();
                let a = -sg * cd * n.sin_theta + cg * n.cos_theta;
                let b = cd * cg * n.sin_theta + sg * n.cos_theta;
                let s = sd * n.sin_theta;
                let off = phase * n.coherence * C64::new(b * sasp, -(s * sa2 + la));
                n.weight * (0.5 * a * sa2 * n.population_gap + off.re)
            })
            .sum()
    }
}

fn raw(x: &[f64; 3]) -> EulerAngles {
    EulerAngles::raw(x[0], x[1], x[2], 0.0)
}

/// `⟨ψ|U_t† ρ U_t|ψ⟩` for a known input state.
pub fn fidelity(target: &TargetGate, trial: &EulerAngles, state: &BlochState, noise: &NoiseParams) -> f64 {
    Objective::new(target, &[(*state, 1.0)], *noise).fidelity(trial)
}

/// Fidelity of preparing `target_state` from `|0⟩` with angles `(β, γ, 0)`.
pub fn prep_fidelity(target_state: &BlochState, beta: f64, gamma: f64, noise: &NoiseParams) -> f64 {
    let target = prep_target(target_state);
    fidelity(&target, &EulerAngles::raw(beta, gamma, 0.0, 0.0), &BlochState::GROUND, noise)
}

/// The default preparation gate `U(φ_t, θ_t, 0)`.
pub fn prep_target(target_state: &BlochState) -> TargetGate {
    TargetGate { angles: EulerAngles::raw(target_state.phi, target_state.theta, 0.0, 0.0) }
}

/// Weighted states that define the objective for `dist`.
///
/// Continuous distributions use Gauss–Legendre rules whose order is chosen by
/// comparing successive refinements at `probe`. The order is then held fixed
/// so the objective is the same smooth function at every trial point.
fn nodes_for(
    target: &TargetGate,
    probe: &EulerAngles,
    dist: &InitialStateDistribution,
    noise: &NoiseParams,
    cfg: &OptimizerConfig,
) -> Result<Vec<(BlochState, f64)>> {
    dist.validate()?;
    match dist {
        InitialStateDistribution::Point { state } => Ok(vec![(*state, 1.0)]),
        InitialStateDistribution::Ensemble { members } => Ok(members.iter().map(|(w, s)| (*s, *w)).collect()),
        _ => {
            let theta_max = dist.cap_angle().expect("continuous distribution");
            match cfg.quadrature_mode {
                QuadratureMode::Gauss => {
                    let (order, _) = quadrature::adaptive(|n| {
                        Objective::new(target, &quadrature::cap_nodes(theta_max, n), *noise).fidelity(probe)
                    })?;
                    Ok(quadrature::cap_nodes(theta_max, order))
                }
                QuadratureMode::MonteCarlo => {
                    let mut rng = stream_rng(cfg.rng_seed, Stream::MonteCarlo, 0);
                    let w = 1.0 / cfg.mc_samples as f64;
                    Ok((0..cfg.mc_samples).map(|_| (dist.sample(&mut rng), w)).collect())
                }
            }
        }
    }
}

/// Expected fidelity over `dist`, by adaptive Gauss–Legendre quadrature for
/// continuous distributions.
pub fn expected_fidelity(
    target: &TargetGate,
    trial: &EulerAngles,
    dist: &InitialStateDistribution,
    noise: &NoiseParams,
) -> Result<f64> {
    dist.validate()?;
    match dist.cap_angle() {
        None => Ok(Objective::new(target, &nodes_for(target, trial, dist, noise, &OptimizerConfig::default())?, *noise).fidelity(trial)),
        Some(theta_max) => {
            let (_, value) = quadrature::adaptive(|n| {
                Objective::new(target, &quadrature::cap_nodes(theta_max, n), *noise).fidelity(trial)
            })?;
            Ok(value)
        }
    }
}

/// Monte Carlo estimate of the expected fidelity: `(mean, standard error)`.
pub fn expected_fidelity_monte_carlo<R: Rng + ?Sized>(
    target: &TargetGate,
    trial: &EulerAngles,
    dist: &InitialStateDistribution,
    noise: &NoiseParams,
    samples: usize,
    rng: &mut R,
) -> Result<(f64, f64)> {
    dist.validate()?;
    if samples < 2 {
        return Err(Error::invalid("Monte Carlo estimate needs at least 2 samples"));
    }
    let mut mean = 0.0;
    let mut m2 = 0.0;
    for i in 0..samples {
        let f = fidelity(target, trial, &dist.sample(rng), noise);
        let d = f - mean;
        mean += d / (i + 1) as f64;
        m2 += d * (f - mean);
    }
    let var = m2 / (samples - 1) as f64;
    Ok((mean, (var / samples as f64).sqrt()))
}

/// Central-difference gradient of [`expected_fidelity`] in `(β, γ, δ)`.
pub fn expected_fidelity_gradient(
    target: &TargetGate,
    trial: &EulerAngles,
    dist: &InitialStateDistribution,
    noise: &NoiseParams,
    fd_step: f64,
) -> Result<[f64; 3]> {
    let nodes = nodes_for(target, trial, dist, noise, &OptimizerConfig::default())?;
    let obj = Objective::new(target, &nodes, *noise);
    Ok(central_gradient(&|x: &[f64; 3]| obj.fidelity(&raw(x)), &trial.as_array(), fd_step))
}

fn random_seed<R: Rng + ?Sized>(rng: &mut R) -> [f64; 3] {
    [TAU * rng.random::<f64>(), PI * rng.random::<f64>(), TAU * rng.random::<f64>()]
}

/// Runs BFGS from the target angles (and optional random restarts) and keeps
/// the best result, falling back to the target angles if nothing beats them.
fn optimize_objective(obj: &Objective, target: &TargetGate, cfg: &OptimizerConfig) -> OptimizationResult {
    let settings = cfg.bfgs();
    let mut seeds = vec![target.angles.as_array()];
    if cfg.multistart_count > 0 {
        let mut rng = stream_rng(cfg.rng_seed, Stream::Multistart, 0);
        seeds.extend((0..cfg.multistart_count).map(|_| random_seed(&mut rng)));
    }
    let run = |x0: &[f64; 3]| {
        let out = maximize(|x| obj.scaled(x), *x0, &settings);
        let value = obj.fidelity(&raw(&out.x));
        (out, value)
    };
    let runs: Vec<_> = if seeds.len() > 1 { seeds.par_iter().map(run).collect() } else { seeds.iter().map(run).collect() };

    let mut best = 0;
    for (i, (_, value)) in runs.iter().enumerate() {
        if *value > runs[best].1 {
            best = i;
        }
    }
    let at_target = obj.fidelity(&target.angles);
    let (out, value) = runs[best];
    let (angles_opt, objective_value) = if value >= at_target {
        (raw(&out.x).native_wrapped(), value)
    } else {
        (target.angles, at_target)
    };
    OptimizationResult {
        angles_opt,
        objective_value,
        objective_at_target_angles: at_target,
        iterations: out.iterations,
        evaluations: runs.iter().map(|(o, _)| o.evaluations).sum(),
        converged: out.converged(),
        termination: out.termination,
        seed_index: best,
    }
}

/// Noise-aware Euler angles for `target` acting on states drawn from `dist`.
///
/// The returned objective is never below the objective at the target angles.
pub fn optimize_gate(
    target: &TargetGate,
    dist: &InitialStateDistribution,
    noise: &NoiseParams,
    cfg: &OptimizerConfig,
) -> Result<OptimizationResult> {
    cfg.validate()?;
    let nodes = nodes_for(target, &target.angles, dist, noise, cfg)?;
    Ok(optimize_objective(&Objective::new(target, &nodes, *noise), target, cfg))
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PrepResult {
    pub beta: f64,
    pub gamma: f64,
    pub fidelity: f64,
    pub default_fidelity: f64,
    pub iterations: usize,
    pub converged: bool,
}

impl PrepResult {
    pub fn improvement(&self) -> f64 {
        self.fidelity - self.default_fidelity
    }
}

/// Optimizes `(β, γ)` with `δ = 0` for preparing `target_state` from `|0⟩`.
pub fn optimize_prep(target_state: &BlochState, noise: &NoiseParams, cfg: &OptimizerConfig) -> Result<PrepResult> {
    cfg.validate()?;
    let target = prep_target(target_state);
    let obj = Objective::new(&target, &[(BlochState::GROUND, 1.0)], *noise);
    let seed = [target.angles.beta, target.angles.gamma];
    let out = maximize(|x: &[f64; 2]| obj.scaled(&[x[0], x[1], 0.0]), seed, &cfg.bfgs());
    let default_fidelity = obj.fidelity(&target.angles);
    let value = obj.fidelity(&EulerAngles::raw(out.x[0], out.x[1], 0.0, 0.0));
    let (beta, gamma, fidelity) = if value >= default_fidelity {
        let w = EulerAngles::raw(out.x[0], out.x[1], 0.0, 0.0).native_wrapped();
        (w.beta, w.gamma, value)
    } else {
        (seed[0], seed[1], default_fidelity)
    };
    Ok(PrepResult { beta, gamma, fidelity, default_fidelity, iterations: out.iterations, converged: out.converged() })
}
