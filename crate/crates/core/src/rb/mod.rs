//! Simulated randomized benchmarking with per-gate noise-aware optimization.
//!
//! Each circuit is a sequence of random rotations. At every recorded depth
//! `d` the prefix is followed by the default two-pulse decomposition of the
//! exact inverse of the prefix, and the probability of reading `|0⟩` is the
//! survival probability. The optimized arm replaces every gate of the prefix
//! by its noise-aware decomposition; the inverse is the same in both arms.

mod fit;

use std::f64::consts::TAU;
use std::fmt;
use std::str::FromStr;

use rand::Rng;
use rand_distr::{Binomial, Distribution};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

pub use fit::{fit_decay, DecayFit, FitDiagnostic};

use crate::calib::ReadoutError;
use crate::error::{Error, Result};
use crate::math::{axis_rotation, BlochState, DensityMatrix, Mat2, C64};
use crate::noise::{noisy_gate, NoiseParams, SimulationPath};
use crate::optimize::{optimize_gate, InitialStateDistribution, OptimizerConfig, TargetGate};
use crate::rng::{stream_rng, Stream};

/// Rotation by `angle` about the unit vector `axis`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RandomRotation {
    pub axis: [f64; 3],
    pub angle: f64,
}

impl RandomRotation {
    pub fn unitary(&self) -> Mat2 {
        axis_rotation(self.axis, self.angle).expect("finite unit axis")
    }

    pub fn gate(&self) -> TargetGate {
        TargetGate::from_unitary(&self.unitary()).expect("rotation is unitary")
    }
}

/// Axis uniform on the sphere (`z ~ U[−1, 1]`, azimuth `~ U[0, 2π)`), angle `~ U[0, 2π)`.
pub fn sample_random_rotation<R: Rng + ?Sized>(rng: &mut R) -> RandomRotation {
    let z: f64 = rng.random_range(-1.0..=1.0);
    let azimuth = TAU * rng.random::<f64>();
    let angle = TAU * rng.random::<f64>();
    let s = (1.0 - z * z).max(0.0).sqrt();
    RandomRotation { axis: [s * azimuth.cos(), s * azimuth.sin(), z], angle }
}

pub fn sample_random_gate<R: Rng + ?Sized>(rng: &mut R) -> TargetGate {
    sample_random_rotation(rng).gate()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RandomGateSequence {
    pub gates: Vec<TargetGate>,
    pub rng_seed: u64,
    pub circuit_index: u64,
}

impl RandomGateSequence {
    pub fn generate(rng_seed: u64, circuit_index: u64, n_gates: usize) -> Self {
        let mut rng = stream_rng(rng_seed, Stream::Circuit, circuit_index);
        let gates = (0..n_gates).map(|_| sample_random_gate(&mut rng)).collect();
        RandomGateSequence { gates, rng_seed, circuit_index }
    }

    pub fn len(&self) -> usize {
        self.gates.len()
    }

    pub fn is_empty(&self) -> bool {
        self.gates.is_empty()
    }
}

/// Euler angles of `(G_d ⋯ G_1)†`.
pub fn build_inverse_gate(prefix: &[TargetGate]) -> Result<TargetGate> {
    if prefix.is_empty() {
        return Err(Error::invalid("inverse of an empty gate sequence"));
    }
    let product = prefix.iter().fold(Mat2::IDENTITY, |acc, g| g.unitary() * acc);
    TargetGate::from_unitary(&product.dagger())
}

/// Number of measurement shots, or exact probabilities.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "ShotsRepr", into = "ShotsRepr")]
pub enum Shots {
    #[default]
    Infinite,
    Finite(u64),
}

#[derive(Serialize, Deserialize)]
#[serde(untagged)]
enum ShotsRepr {
    Count(u64),
    Word(String),
}

impl TryFrom<ShotsRepr> for Shots {
    type Error = Error;
    fn try_from(r: ShotsRepr) -> Result<Self> {
        match r {
            ShotsRepr::Count(n) => Shots::from_str(&n.to_string()),
            ShotsRepr::Word(w) => Shots::from_str(&w),
        }
    }
}

impl From<Shots> for ShotsRepr {
    fn from(s: Shots) -> Self {
        match s {
            Shots::Infinite => ShotsRepr::Word("inf".into()),
            Shots::Finite(n) => ShotsRepr::Count(n),
        }
    }
}

impl FromStr for Shots {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        if s.eq_ignore_ascii_case("inf") {
            return Ok(Shots::Infinite);
        }
        match s.parse::<u64>() {
            Ok(n) if n >= 1 => Ok(Shots::Finite(n)),
            _ => Err(Error::invalid(format!("shots must be `inf` or a positive integer, got {s:?}"))),
        }
    }
}

impl fmt::Display for Shots {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Shots::Infinite => f.write_str("inf"),
            Shots::Finite(n) => write!(f, "{n}"),
        }
    }
}

/// Which state the optimizer is told the gate acts on.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Tracking {
    /// The ideal intermediate state `G_{i−1} ⋯ G_1 |0⟩`.
    #[default]
    Noiseless,
    /// The simulated noisy state of the optimized arm, as an eigen-ensemble.
    Noisy,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Arm {
    #[serde(rename = "opt")]
    Optimized,
    #[serde(rename = "unopt")]
    Unoptimized,
}

impl Arm {
    pub fn as_str(self) -> &'static str {
        match self {
            Arm::Optimized => "opt",
            Arm::Unoptimized => "unopt",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RbConfig {
    pub n_circuits: usize,
    pub n_gates: usize,
    pub depths: Vec<usize>,
    pub shots: Shots,
    /// Noise of the simulated device.
    pub noise: NoiseParams,
    /// System coherence times are `k` times those the optimizer assumes.
    pub drift_factor: f64,
    pub readout: Option<ReadoutError>,
    pub mitigate_readout: bool,
    pub rng_seed: u64,
    pub tracking: Tracking,
    pub path: SimulationPath,
    pub optimizer: OptimizerConfig,
}

/// `1, 8, 15, …, 246`
pub fn paper_depths() -> Vec<usize> {
    (1..=246).step_by(7).collect()
}

impl RbConfig {
    pub fn new(noise: NoiseParams) -> Self {
        RbConfig {
            n_circuits: 10,
            n_gates: 246,
            depths: paper_depths(),
            shots: Shots::Infinite,
            noise,
            drift_factor: 1.0,
            readout: None,
            mitigate_readout: false,
            rng_seed: 0,
            tracking: Tracking::Noiseless,
            path: SimulationPath::Stepwise,
            optimizer: OptimizerConfig::default(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_circuits == 0 {
            return Err(Error::invalid("at least one circuit is required"));
        }
        if self.depths.is_empty() {
            return Err(Error::invalid("depth schedule is empty"));
        }
        if self.depths[0] == 0 || self.depths.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::invalid("depths must be positive and strictly increasing"));
        }
        let max = *self.depths.last().unwrap();
        if max > self.n_gates {
            return Err(Error::invalid(format!("largest depth {max} exceeds circuit length {}", self.n_gates)));
        }
        if !(self.drift_factor.is_finite() && self.drift_factor > 0.0) {
            return Err(Error::invalid(format!("drift factor must be positive, got {}", self.drift_factor)));
        }
        if self.mitigate_readout && self.readout.is_none() {
            return Err(Error::invalid("readout mitigation requested without a readout error model"));
        }
        self.optimizer.validate()?;
        self.assumed_noise().map(|_| ())
    }

    /// Noise the optimizer believes in: coherence times divided by the drift factor.
    pub fn assumed_noise(&self) -> Result<NoiseParams> {
        self.noise.with_coherence_scaled(1.0 / self.drift_factor)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CircuitRecord {
    pub circuit_index: usize,
    pub depth: usize,
    pub optimized: f64,
    pub unoptimized: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DepthSummary {
    pub depth: usize,
    pub optimized_mean: f64,
    pub optimized_stderr: f64,
    pub unoptimized_mean: f64,
    pub unoptimized_stderr: f64,
}

impl DepthSummary {
    pub fn mean(&self, arm: Arm) -> f64 {
        match arm {
            Arm::Optimized => self.optimized_mean,
            Arm::Unoptimized => self.unoptimized_mean,
        }
    }

    pub fn stderr(&self, arm: Arm) -> f64 {
        match arm {
            Arm::Optimized => self.optimized_stderr,
            Arm::Unoptimized => self.unoptimized_stderr,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RbRunResult {
    pub drift_factor: f64,
    pub depths: Vec<DepthSummary>,
    /// Absent when fewer than three depths were recorded.
    pub fit_optimized: Option<DecayFit>,
    pub fit_unoptimized: Option<DecayFit>,
    pub records: Vec<CircuitRecord>,
    /// Mitigated estimates that had to be clipped into `[0, 1]`.
    pub clipped_mitigations: usize,
}

impl RbRunResult {
    /// `(e_unopt − e_opt) / e_unopt` of the fitted per-gate error rates.
    pub fn error_rate_reduction(&self) -> Option<f64> {
        let (o, u) = (self.fit_optimized?, self.fit_unoptimized?);
        (u.error_rate > 0.0).then(|| (u.error_rate - o.error_rate) / u.error_rate)
    }
}

/// Sample mean and standard error of the mean (NaN for a single sample).
pub(crate) fn mean_stderr(values: &[f64]) -> (f64, f64) {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    if values.len() < 2 {
        return (mean, f64::NAN);
    }
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, (var / n).sqrt())
}

struct Measurement<'a> {
    cfg: &'a RbConfig,
    rng: rand_chacha::ChaCha8Rng,
    clipped: usize,
}

impl Measurement<'_> {
    fn read(&mut self, p0: f64) -> Result<f64> {
        let p0 = p0.clamp(0.0, 1.0);
        let p = self.cfg.readout.map_or(p0, |r| r.apply(p0));
        let estimate = match self.cfg.shots {
            Shots::Infinite => p,
            Shots::Finite(n) => {
                let binomial = Binomial::new(n, p).map_err(|e| Error::invalid(format!("shot sampling: {e}")))?;
                binomial.sample(&mut self.rng) as f64 / n as f64
            }
        };
        match (self.cfg.mitigate_readout, self.cfg.readout) {
            (true, Some(r)) => {
                let m = r.mitigate(estimate)?;
                self.clipped += m.clipped as usize;
                Ok(m.p0)
            }
            _ => Ok(estimate),
        }
    }
}

fn simulate_circuit(cfg: &RbConfig, assumed: &NoiseParams, circuit: usize) -> Result<(Vec<CircuitRecord>, usize)> {
    let max_depth = *cfg.depths.last().expect("validated");
    let seq = RandomGateSequence::generate(cfg.rng_seed, circuit as u64, cfg.n_gates);
    let mut meas = Measurement { cfg, rng: stream_rng(cfg.rng_seed, Stream::Shots, circuit as u64), clipped: 0 };

    let mut psi = [C64::new(1.0, 0.0), C64::new(0.0, 0.0)];
    let mut product = Mat2::IDENTITY;
    let mut rho_opt = DensityMatrix::ground();
    let mut rho_unopt = DensityMatrix::ground();
    let mut next = cfg.depths.iter().peekable();
    let mut records = Vec::with_capacity(cfg.depths.len());

    for (i, gate) in seq.gates[..max_depth].iter().enumerate() {
        let dist = match cfg.tracking {
            Tracking::Noiseless => InitialStateDistribution::point(BlochState::from_vector(psi)?),
            Tracking::Noisy => InitialStateDistribution::mixed(&rho_opt),
        };
        let opt_cfg = OptimizerConfig {
            rng_seed: cfg.optimizer.rng_seed ^ (((circuit as u64 + 1) << 32) | i as u64),
            ..cfg.optimizer.clone()
        };
        let opt = optimize_gate(gate, &dist, assumed, &opt_cfg)?;
        rho_opt = noisy_gate(cfg.path, &opt.angles_opt, &rho_opt, &cfg.noise);
        rho_unopt = noisy_gate(cfg.path, &gate.angles, &rho_unopt, &cfg.noise);
        let u = gate.unitary();
        product = u * product;
        psi = u.apply(psi);

        if next.peek() == Some(&&(i + 1)) {
            let depth = *next.next().unwrap();
            let inverse = TargetGate::from_unitary(&product.dagger())?;
            let survival = |rho: &DensityMatrix| noisy_gate(cfg.path, &inverse.angles, rho, &cfg.noise).ground_population();
            let optimized = meas.read(survival(&rho_opt))?;
            let unoptimized = meas.read(survival(&rho_unopt))?;
            records.push(CircuitRecord { circuit_index: circuit, depth, optimized, unoptimized });
        }
    }
    Ok((records, meas.clipped))
}

pub fn run_rb_experiment(cfg: &RbConfig) -> Result<RbRunResult> {
    cfg.validate()?;
    let assumed = cfg.assumed_noise()?;
    let per_circuit = (0..cfg.n_circuits)
        .into_par_iter()
        .map(|c| simulate_circuit(cfg, &assumed, c))
        .collect::<Result<Vec<_>>>()?;

    let clipped_mitigations = per_circuit.iter().map(|(_, c)| c).sum();
    let records: Vec<CircuitRecord> = per_circuit.into_iter().flat_map(|(r, _)| r).collect();
    let depths: Vec<DepthSummary> = cfg
        .depths
        .iter()
        .enumerate()
        .map(|(j, &depth)| {
            let at = |f: fn(&CircuitRecord) -> f64| -> Vec<f64> { records.iter().skip(j).step_by(cfg.depths.len()).map(f).collect() };
            let (optimized_mean, optimized_stderr) = mean_stderr(&at(|r| r.optimized));
            let (unoptimized_mean, unoptimized_stderr) = mean_stderr(&at(|r| r.unoptimized));
            DepthSummary { depth, optimized_mean, optimized_stderr, unoptimized_mean, unoptimized_stderr }
        })
        .collect();

    let fit = |arm: Arm| -> Result<Option<DecayFit>> {
        if depths.len() < 3 {
            return Ok(None);
        }
        let xs: Vec<f64> = depths.iter().map(|d| d.depth as f64).collect();
        let ys: Vec<f64> = depths.iter().map(|d| d.mean(arm)).collect();
        fit_decay(&xs, &ys).map(Some)
    };
    Ok(RbRunResult {
        drift_factor: cfg.drift_factor,
        fit_optimized: fit(Arm::Optimized)?,
        fit_unoptimized: fit(Arm::Unoptimized)?,
        depths,
        records,
        clipped_mitigations,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DriftPoint {
    pub k: f64,
    pub result: RbRunResult,
}

/// Runs the same circuits for every drift factor `k`. The simulated device
/// keeps `cfg.noise`; the optimizer assumes coherence times divided by `k`.
pub fn run_drift_sweep(cfg: &RbConfig, k_values: &[f64]) -> Result<Vec<DriftPoint>> {
    if k_values.is_empty() {
        return Err(Error::invalid("drift sweep needs at least one k value"));
    }
    if let Some(k) = k_values.iter().find(|k| !(k.is_finite() && **k > 0.0)) {
        return Err(Error::invalid(format!("drift factors must be positive, got {k}")));
    }
    k_values
        .par_iter()
        .map(|&k| {
            let run = RbConfig { drift_factor: k, ..cfg.clone() };
            Ok(DriftPoint { k, result: run_rb_experiment(&run)? })
        })
        .collect()
}

/// `n` log-spaced values from `lo` to `hi` inclusive.
pub fn log_grid(lo: f64, hi: f64, n: usize) -> Result<Vec<f64>> {
    if !(lo.is_finite() && hi.is_finite() && lo > 0.0 && hi >= lo) || n == 0 {
        return Err(Error::invalid(format!("invalid log grid {lo}:{hi}:{n}")));
    }
    if n == 1 {
        return Ok(vec![lo]);
    }
    let (a, b) = (lo.log10(), hi.log10());
    let mut out: Vec<f64> = (0..n).map(|i| 10f64.powf(a + (b - a) * i as f64 / (n - 1) as f64)).collect();
    out[0] = lo;
    out[n - 1] = hi;
    Ok(out)
}

/// Default drift grid, `10⁻³ … 10⁶` with 19 points.
pub fn default_drift_grid() -> Vec<f64> {
    log_grid(1e-3, 1e6, 19).expect("valid constant grid")
}
