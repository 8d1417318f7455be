//! State-preparation and initial-state-uncertainty sweeps.
//!
//! Both sweeps use `λ_A = λ_P = λ` and compare the optimized decomposition
//! with the default one under the same noise.

use std::f64::consts::{PI, TAU};

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::math::BlochState;
use crate::noise::NoiseParams;
use crate::optimize::{fidelity, optimize_gate, optimize_prep, InitialStateDistribution, OptimizerConfig};
use crate::rb::{mean_stderr, sample_random_gate};
use crate::rng::{stream_rng, Stream};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Profile {
    /// 100-point λ grid and a 25×25 heatmap.
    Desk,
    /// 1000-point λ grid and a 50×50 heatmap.
    Full,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepConfig {
    pub lambda_grid: Vec<f64>,
    pub targets_per_point: usize,
    pub theta_max_grid: Vec<f64>,
    pub rng_seed: u64,
    pub optimizer: OptimizerConfig,
}

/// `n` evenly spaced values from `lo` to `hi` inclusive.
pub fn linear_grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    match n {
        0 => vec![],
        1 => vec![lo],
        _ => {
            let mut out: Vec<f64> = (0..n).map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64).collect();
            out[n - 1] = hi;
            out
        }
    }
}

/// `π j / n` for `j = 1..=n`.
pub fn theta_max_grid(n: usize) -> Vec<f64> {
    (1..=n).map(|j| PI * j as f64 / n as f64).collect()
}

pub const DEFAULT_LAMBDA_MAX: f64 = 0.1;

impl SweepConfig {
    pub fn prep(profile: Profile) -> Self {
        let n = match profile {
            Profile::Desk => 100,
            Profile::Full => 1000,
        };
        SweepConfig {
            lambda_grid: linear_grid(0.0, DEFAULT_LAMBDA_MAX, n),
            targets_per_point: 100,
            theta_max_grid: Vec::new(),
            rng_seed: 0,
            optimizer: OptimizerConfig::default(),
        }
    }

    pub fn knowledge(profile: Profile) -> Self {
        let n = match profile {
            Profile::Desk => 25,
            Profile::Full => 50,
        };
        SweepConfig {
            lambda_grid: linear_grid(0.0, DEFAULT_LAMBDA_MAX, n),
            targets_per_point: 100,
            theta_max_grid: theta_max_grid(n),
            rng_seed: 0,
            optimizer: OptimizerConfig::default(),
        }
    }

    fn validate(&self, needs_theta: bool) -> Result<()> {
        if self.lambda_grid.is_empty() {
            return Err(Error::invalid("λ grid is empty"));
        }
        if let Some(l) = self.lambda_grid.iter().find(|l| !(l.is_finite() && (0.0..1.0).contains(*l))) {
            return Err(Error::invalid(format!("λ values must lie in [0, 1), got {l}")));
        }
        if self.targets_per_point == 0 {
            return Err(Error::invalid("targets_per_point must be at least 1"));
        }
        if needs_theta {
            if self.theta_max_grid.is_empty() {
                return Err(Error::invalid("θ_max grid is empty"));
            }
            if let Some(t) = self.theta_max_grid.iter().find(|t| !(t.is_finite() && **t > 0.0 && **t <= PI)) {
                return Err(Error::invalid(format!("θ_max values must lie in (0, π], got {t}")));
            }
        }
        self.optimizer.validate()
    }
}

/// One cell of a sweep. `theta_max` is 0 for the state-preparation sweep,
/// where the initial state `|0⟩` is known exactly.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub lambda: f64,
    pub theta_max: f64,
    pub mean_improvement: f64,
    pub stderr: f64,
    pub n_samples: usize,
}

fn uniform_state<R: Rng + ?Sized>(rng: &mut R) -> BlochState {
    let u: f64 = rng.random();
    let v: f64 = rng.random();
    BlochState { theta: (1.0 - 2.0 * u).clamp(-1.0, 1.0).acos(), phi: TAU * v }
}

/// Mean gain in preparation fidelity over uniformly random target states.
pub fn prep_improvement_sweep(cfg: &SweepConfig) -> Result<Vec<SweepRow>> {
    cfg.validate(false)?;
    cfg.lambda_grid
        .par_iter()
        .enumerate()
        .map(|(i, &lambda)| {
            let noise = NoiseParams::symmetric(lambda)?;
            let mut rng = stream_rng(cfg.rng_seed, Stream::Targets, i as u64);
            let gains = (0..cfg.targets_per_point)
                .map(|_| Ok(optimize_prep(&uniform_state(&mut rng), &noise, &cfg.optimizer)?.improvement()))
                .collect::<Result<Vec<f64>>>()?;
            let (mean_improvement, stderr) = mean_stderr(&gains);
            Ok(SweepRow { lambda, theta_max: 0.0, mean_improvement, stderr, n_samples: gains.len() })
        })
        .collect()
}

/// Fidelity gain of optimizing against a cap distribution of width `θ_max`,
/// evaluated on one initial state drawn from that cap per random target.
pub fn knowledge_sweep(cfg: &SweepConfig) -> Result<Vec<SweepRow>> {
    cfg.validate(true)?;
    let n_theta = cfg.theta_max_grid.len();
    let cells: Vec<(usize, f64, f64)> = cfg
        .lambda_grid
        .iter()
        .enumerate()
        .flat_map(|(i, &l)| cfg.theta_max_grid.iter().enumerate().map(move |(j, &t)| (i * n_theta + j, l, t)))
        .collect();
    cells
        .par_iter()
        .map(|&(cell, lambda, theta_max)| {
            let noise = NoiseParams::symmetric(lambda)?;
            let dist = InitialStateDistribution::cap(theta_max)?;
            let mut rng = stream_rng(cfg.rng_seed, Stream::SweepCell, cell as u64);
            let gains = (0..cfg.targets_per_point)
                .map(|_| {
                    let target = sample_random_gate(&mut rng);
                    let state = dist.sample(&mut rng);
                    let opt = optimize_gate(&target, &dist, &noise, &cfg.optimizer)?;
                    Ok(fidelity(&target, &opt.angles_opt, &state, &noise) - fidelity(&target, &target.angles, &state, &noise))
                })
                .collect::<Result<Vec<f64>>>()?;
            let (mean_improvement, stderr) = mean_stderr(&gains);
            Ok(SweepRow { lambda, theta_max, mean_improvement, stderr, n_samples: gains.len() })
        })
        .collect()
}
