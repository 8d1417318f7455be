//! Fully resolved run configurations, their execution, and run manifests.

use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use anyhow::{Context, Result};
use serde::{Deserialize, Serialize};

use noisy_euler::calib::DeviceSpec;
use noisy_euler::experiments::{knowledge_sweep, prep_improvement_sweep, SweepConfig};
use noisy_euler::noise::NoiseParams;
use noisy_euler::optimize::{optimize_gate, InitialStateDistribution, OptimizationResult, OptimizerConfig, TargetGate};
use noisy_euler::rb::{run_drift_sweep, run_rb_experiment, Arm, RbConfig};
use noisy_euler::report::{create_csv, write_json, write_rb_csv, write_sweep_csv};

/// Everything needed to reproduce a run, after flags and device files are resolved.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "command", rename_all = "kebab-case")]
pub enum RunConfig {
    Optimize {
        gate: String,
        target: TargetGate,
        distribution: InitialStateDistribution,
        noise: NoiseParams,
        optimizer: OptimizerConfig,
    },
    Rb {
        experiment_id: String,
        config: RbConfig,
        raw: bool,
    },
    Drift {
        experiment_id: String,
        config: RbConfig,
        k_values: Vec<f64>,
        raw: bool,
    },
    PrepSweep {
        config: SweepConfig,
    },
    Knowledge {
        config: SweepConfig,
    },
}

impl RunConfig {
    pub fn name(&self) -> &'static str {
        match self {
            RunConfig::Optimize { .. } => "optimize",
            RunConfig::Rb { .. } => "rb",
            RunConfig::Drift { .. } => "drift",
            RunConfig::PrepSweep { .. } => "prep-sweep",
            RunConfig::Knowledge { .. } => "knowledge",
        }
    }

    pub fn rng_seed(&self) -> u64 {
        match self {
            RunConfig::Optimize { optimizer, .. } => optimizer.rng_seed,
            RunConfig::Rb { config, .. } | RunConfig::Drift { config, .. } => config.rng_seed,
            RunConfig::PrepSweep { config } | RunConfig::Knowledge { config } => config.rng_seed,
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct RunManifest {
    pub command: String,
    pub config: RunConfig,
    pub rng_seed: u64,
    pub version: String,
    pub duration_seconds: f64,
    pub outputs: Vec<PathBuf>,
}

pub const MANIFEST_FILE: &str = "manifest.json";

pub fn load_manifest(path: &Path) -> Result<RunManifest> {
    let text = fs::read_to_string(path).with_context(|| format!("reading manifest {}", path.display()))?;
    serde_json::from_str(&text).with_context(|| format!("parsing manifest {}", path.display()))
}

/// Executes `cfg`, writes its outputs and a manifest into `out` (when given),
/// and prints a short summary.
pub fn execute(cfg: &RunConfig, out: Option<&Path>) -> Result<RunManifest> {
    let start = Instant::now();
    if let Some(dir) = out {
        fs::create_dir_all(dir).with_context(|| format!("creating output directory {}", dir.display()))?;
    }
    let mut outputs = Vec::new();
    let mut emit = |file: &str| -> Option<PathBuf> {
        let p = out?.join(file);
        outputs.push(p.clone());
        Some(p)
    };

    match cfg {
        RunConfig::Optimize { gate, target, distribution, noise, optimizer } => {
            let res = optimize_gate(target, distribution, noise, optimizer)?;
            print_optimization(gate, target, noise, &res);
            if let Some(p) = emit("optimize.json") {
                write_json(&p, &res)?;
            }
        }
        RunConfig::Rb { experiment_id, config, raw } => {
            let res = run_rb_experiment(config)?;
            print_rb(&res);
            if let Some(p) = emit("rb.csv") {
                write_rb_csv(create_csv(&p)?, experiment_id, &[&res], *raw)?;
            }
            if let Some(p) = emit("rb.json") {
                write_json(&p, &res)?;
            }
        }
        RunConfig::Drift { experiment_id, config, k_values, raw } => {
            let points = run_drift_sweep(config, k_values)?;
            println!("{:>12} {:>6} {:>12} {:>12}", "k", "depth", "optimized", "unoptimized");
            for p in &points {
                for d in &p.result.depths {
                    println!("{:>12.4e} {:>6} {:>12.6} {:>12.6}", p.k, d.depth, d.mean(Arm::Optimized), d.mean(Arm::Unoptimized));
                }
            }
            if let Some(path) = emit("drift.csv") {
                let runs: Vec<_> = points.iter().map(|p| &p.result).collect();
                write_rb_csv(create_csv(&path)?, experiment_id, &runs, *raw)?;
            }
            if let Some(p) = emit("drift.json") {
                write_json(&p, &points)?;
            }
        }
        RunConfig::PrepSweep { config } => {
            let rows = prep_improvement_sweep(config)?;
            println!("{} λ values, {} targets each", rows.len(), config.targets_per_point);
            if let Some(p) = emit("prep_sweep.csv") {
                write_sweep_csv(create_csv(&p)?, &rows)?;
            }
        }
        RunConfig::Knowledge { config } => {
            let rows = knowledge_sweep(config)?;
            println!("{} cells, {} repetitions each", rows.len(), config.targets_per_point);
            if let Some(p) = emit("knowledge.csv") {
                write_sweep_csv(create_csv(&p)?, &rows)?;
            }
        }
    }

    let manifest = RunManifest {
        command: cfg.name().to_string(),
        config: cfg.clone(),
        rng_seed: cfg.rng_seed(),
        version: env!("CARGO_PKG_VERSION").to_string(),
        duration_seconds: start.elapsed().as_secs_f64(),
        outputs,
    };
    if let Some(dir) = out {
        write_json(&dir.join(MANIFEST_FILE), &manifest)?;
        for p in &manifest.outputs {
            println!("wrote {}", p.display());
        }
    }
    Ok(manifest)
}

fn print_optimization(gate: &str, target: &TargetGate, noise: &NoiseParams, res: &OptimizationResult) {
    let (t, o) = (target.angles, res.angles_opt);
    println!("gate        {gate}");
    println!("noise       lambda_A = {:.6e}, lambda_P = {:.6e}", noise.lambda_a, noise.lambda_p);
    println!("default     beta = {:.12}, gamma = {:.12}, delta = {:.12}", t.beta, t.gamma, t.delta);
    println!("optimized   beta = {:.12}, gamma = {:.12}, delta = {:.12}", o.beta, o.gamma, o.delta);
    println!("fidelity    optimized = {:.15}, default = {:.15}", res.objective_value, res.objective_at_target_angles);
    println!("improvement {:.6e}", res.improvement());
    println!("optimizer   {} iterations, {:?}", res.iterations, res.termination);
}

fn print_rb(res: &noisy_euler::rb::RbRunResult) {
    if let (Some(o), Some(u)) = (res.fit_optimized, res.fit_unoptimized) {
        println!("error rate  optimized = {:.6e}, unoptimized = {:.6e}", o.error_rate, u.error_rate);
    }
    if let Some(r) = res.error_rate_reduction() {
        println!("reduction   {:.2}%", 100.0 * r);
    }
    if res.clipped_mitigations > 0 {
        println!("warning: {} mitigated estimates were clipped into [0, 1]", res.clipped_mitigations);
    }
}

/// Human-readable validation report for a device file.
pub fn validation_report(spec: &DeviceSpec) -> Result<String> {
    let mut s = format!("{} ({}), {} qubits\n", spec.device_name, spec.calibration_date, spec.qubits.len());
    s.push_str(&format!("{:>5} {:>10} {:>10} {:>12} {:>12}\n", "qubit", "T1 [us]", "T2 [us]", "lambda_A", "lambda_P"));
    for q in &spec.qubits {
        let n = q.noise_params()?;
        s.push_str(&format!("{:>5} {:>10} {:>10} {:>12.4e} {:>12.4e}\n", q.id, q.t1_us, q.t2_us, n.lambda_a, n.lambda_p));
    }
    let warnings = spec.warnings();
    for w in &warnings {
        s.push_str(&format!("warning: {w}\n"));
    }
    if warnings.is_empty() {
        s.push_str("no warnings\n");
    }
    Ok(s)
}
