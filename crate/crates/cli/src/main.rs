mod parse;
mod run;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use noisy_euler::calib::{bundled_device, load_device_spec, DeviceSpec, ReadoutError};
use noisy_euler::experiments::{linear_grid, Profile, SweepConfig};
use noisy_euler::math::BlochState;
use noisy_euler::noise::{NoiseParams, SimulationPath};
use noisy_euler::optimize::{InitialStateDistribution, OptimizerConfig};
use noisy_euler::rb::{default_drift_grid, paper_depths, RbConfig, Shots, Tracking};

use parse::{DistSpec, List};
use run::RunConfig;

/// Noise-aware compilation of single-qubit gates into virtual-Z and X(±π/2) pulses.
#[derive(Parser, Debug)]
#[command(name = "noisy-euler", version, about, args_conflicts_with_subcommands = true)]
struct Cli {
    #[command(subcommand)]
    command: Option<Command>,

    /// Worker threads (overridden by NOISY_EULER_JOBS).
    #[arg(long, global = true)]
    jobs: Option<usize>,

    /// Rerun the configuration recorded in a manifest.
    #[arg(long, value_name = "MANIFEST")]
    from_manifest: Option<PathBuf>,

    /// Output directory for a rerun.
    #[arg(long, requires = "from_manifest", default_value = ".")]
    out: PathBuf,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Optimize the decomposition of one gate.
    Optimize(OptimizeArgs),
    /// Simulated randomized benchmarking, optimized vs default decompositions.
    Rb(RbArgs),
    /// Randomized benchmarking across coherence-time drift factors.
    Drift(DriftArgs),
    /// Fidelity gain of optimized state preparation versus noise strength.
    PrepSweep(SweepArgs),
    /// Fidelity gain versus noise strength and initial-state uncertainty.
    Knowledge(SweepArgs),
    /// Check a calibration file and report suspicious entries.
    Validate {
        /// Path to a device JSON file, or a bundled device name.
        device: String,
    },
}

#[derive(Args, Debug, Clone)]
struct NoiseArgs {
    /// Bundled device name (rome, bogota, aspen8) or path to a calibration JSON file.
    #[arg(long, requires = "qubit", conflicts_with_all = ["lambda", "lambda_a", "lambda_p"])]
    device: Option<String>,
    #[arg(long, requires = "device")]
    qubit: Option<u32>,
    /// Equal amplitude and phase damping probability per pulse.
    #[arg(long, conflicts_with_all = ["lambda_a", "lambda_p"])]
    lambda: Option<f64>,
    #[arg(long, requires = "lambda_p")]
    lambda_a: Option<f64>,
    #[arg(long, requires = "lambda_a")]
    lambda_p: Option<f64>,
}

#[derive(Args, Debug, Clone)]
struct OptimizerArgs {
    /// Random restarts in addition to the target-angle seed (bare flag: 8).
    #[arg(long, num_args = 0..=1, default_missing_value = "8", default_value_t = 0)]
    multistart: usize,
    #[arg(long, default_value_t = OptimizerConfig::default().gradient_tolerance)]
    gradient_tolerance: f64,
    #[arg(long, default_value_t = OptimizerConfig::default().max_iterations)]
    max_iterations: usize,
}

impl OptimizerArgs {
    fn config(&self, seed: u64) -> OptimizerConfig {
        OptimizerConfig {
            multistart_count: self.multistart,
            gradient_tolerance: self.gradient_tolerance,
            max_iterations: self.max_iterations,
            rng_seed: seed,
            ..OptimizerConfig::default()
        }
    }
}

#[derive(Args, Debug)]
struct OptimizeArgs {
    /// Named gate (id, x, y, z, h, s, t, sx) or Euler angles β,γ,δ.
    #[arg(long)]
    gate: String,
    /// Known input state as Bloch angles θ,φ (default |0⟩).
    #[arg(long, value_parser = parse::state)]
    state: Option<BlochState>,
    /// point, uniform, or cap:θ_max (a cap around |0⟩).
    #[arg(long, value_parser = parse::dist, default_value = "point")]
    dist: DistSpec,
    #[command(flatten)]
    noise: NoiseArgs,
    #[command(flatten)]
    optimizer: OptimizerArgs,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Write optimize.json and manifest.json here.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum TrackingArg {
    Noiseless,
    Noisy,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum PathArg {
    Stepwise,
    ClosedForm,
}

#[derive(Args, Debug)]
struct RbCommon {
    #[command(flatten)]
    noise: NoiseArgs,
    #[arg(long, default_value_t = 10)]
    circuits: usize,
    /// `inf` for exact probabilities, or a shot count.
    #[arg(long, default_value = "inf")]
    shots: Shots,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Apply the device's readout error to every measurement.
    #[arg(long, requires = "device", conflicts_with = "readout_error")]
    readout: bool,
    /// Readout error as P(1|0),P(0|1).
    #[arg(long, value_parser = parse::probability_pair)]
    readout_error: Option<(f64, f64)>,
    /// Invert the readout confusion matrix.
    #[arg(long)]
    mitigate: bool,
    #[arg(long, value_enum, default_value = "noiseless")]
    tracking: TrackingArg,
    #[arg(long, value_enum, default_value = "stepwise")]
    path: PathArg,
    #[command(flatten)]
    optimizer: OptimizerArgs,
    /// Also write one row per circuit.
    #[arg(long)]
    raw: bool,
    #[arg(long)]
    experiment_id: Option<String>,
    #[arg(long, default_value = ".")]
    out: PathBuf,
}

#[derive(Args, Debug)]
struct RbArgs {
    #[command(flatten)]
    common: RbCommon,
    #[arg(long, default_value_t = 246)]
    gates: usize,
    /// Comma-separated list or lo..hi:step (default 1..246:7).
    #[arg(long, value_parser = parse::depths)]
    depths: Option<List<usize>>,
    /// System coherence times relative to those the optimizer assumes.
    #[arg(long, default_value_t = 1.0)]
    k: f64,
}

#[derive(Args, Debug)]
struct DriftArgs {
    #[command(flatten)]
    common: RbCommon,
    #[arg(long, default_value_t = 300)]
    gates: usize,
    #[arg(long, value_parser = parse::depths, default_value = "100,200,300")]
    depths: List<usize>,
    /// lo:hi:Nlog or a comma-separated list (default 1e-3:1e6:19log).
    #[arg(long, value_parser = parse::k_grid)]
    k_grid: Option<List<f64>>,
}

#[derive(Args, Debug)]
struct SweepArgs {
    /// Paper-scale grids instead of the reduced default.
    #[arg(long)]
    full: bool,
    /// Number of λ grid points (overrides the profile).
    #[arg(long)]
    lambda_points: Option<usize>,
    #[arg(long, default_value_t = noisy_euler::experiments::DEFAULT_LAMBDA_MAX)]
    lambda_max: f64,
    /// Number of θ_max grid points (knowledge only; overrides the profile).
    #[arg(long)]
    theta_points: Option<usize>,
    #[arg(long, default_value_t = 100)]
    targets: usize,
    #[command(flatten)]
    optimizer: OptimizerArgs,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value = ".")]
    out: PathBuf,
}

/// Errors that are the caller's fault exit with 2, everything else with 1.
enum CliError {
    Usage(String),
    Runtime(anyhow::Error),
}

impl From<anyhow::Error> for CliError {
    fn from(e: anyhow::Error) -> Self {
        match e.downcast::<noisy_euler::Error>() {
            Ok(inner) => inner.into(),
            Err(e) => CliError::Runtime(e),
        }
    }
}

impl From<noisy_euler::Error> for CliError {
    fn from(e: noisy_euler::Error) -> Self {
        match e {
            noisy_euler::Error::InvalidArgument(m) => CliError::Usage(m),
            other => CliError::Runtime(other.into()),
        }
    }
}

fn usage(msg: impl Into<String>) -> CliError {
    CliError::Usage(msg.into())
}

fn load_device(name: &str) -> Result<DeviceSpec, CliError> {
    if Path::new(name).exists() {
        Ok(load_device_spec(name).map_err(|e| CliError::Runtime(e.into()))?)
    } else {
        bundled_device(name).map_err(|e| usage(e.to_string()))
    }
}

struct ResolvedNoise {
    noise: NoiseParams,
    readout: Option<ReadoutError>,
}

fn resolve_noise(args: &NoiseArgs) -> Result<ResolvedNoise, CliError> {
    match (&args.device, args.qubit, args.lambda, args.lambda_a, args.lambda_p) {
        (Some(dev), Some(q), None, None, None) => {
            let spec = load_device(dev)?;
            let qubit = spec.qubit(q).map_err(|e| usage(e.to_string()))?;
            Ok(ResolvedNoise { noise: qubit.noise_params()?, readout: Some(qubit.readout()?) })
        }
        (None, None, Some(l), None, None) => Ok(ResolvedNoise { noise: NoiseParams::symmetric(l)?, readout: None }),
        (None, None, None, Some(a), Some(p)) => Ok(ResolvedNoise { noise: NoiseParams::from_lambdas(a, p)?, readout: None }),
        _ => Err(usage("give either --device with --qubit, --lambda, or --lambda-a with --lambda-p")),
    }
}

fn rb_config(c: &RbCommon, n_gates: usize, depths: Vec<usize>, k: f64) -> Result<RbConfig, CliError> {
    let resolved = resolve_noise(&c.noise)?;
    let readout = match (c.readout, c.readout_error) {
        (true, _) => resolved.readout,
        (false, Some((p10, p01))) => Some(ReadoutError::new(p10, p01)?),
        (false, None) => None,
    };
    if c.mitigate && readout.is_none() {
        return Err(usage("--mitigate needs --readout or --readout-error"));
    }
    let cfg = RbConfig {
        n_circuits: c.circuits,
        n_gates,
        depths,
        shots: c.shots,
        noise: resolved.noise,
        drift_factor: k,
        readout,
        mitigate_readout: c.mitigate,
        rng_seed: c.seed,
        tracking: match c.tracking {
            TrackingArg::Noiseless => Tracking::Noiseless,
            TrackingArg::Noisy => Tracking::Noisy,
        },
        path: match c.path {
            PathArg::Stepwise => SimulationPath::Stepwise,
            PathArg::ClosedForm => SimulationPath::ClosedForm,
        },
        optimizer: c.optimizer.config(c.seed),
    };
    cfg.validate()?;
    Ok(cfg)
}

fn experiment_id(c: &RbCommon, default: &str) -> String {
    c.experiment_id.clone().unwrap_or_else(|| match (&c.noise.device, c.noise.qubit) {
        (Some(d), Some(q)) => format!("{default}-{}-q{q}", Path::new(d).file_stem().and_then(|s| s.to_str()).unwrap_or(d)),
        _ => default.to_string(),
    })
}

fn sweep_config(a: &SweepArgs, knowledge: bool) -> Result<SweepConfig, CliError> {
    let profile = if a.full { Profile::Full } else { Profile::Desk };
    let mut cfg = if knowledge { SweepConfig::knowledge(profile) } else { SweepConfig::prep(profile) };
    let n_lambda = a.lambda_points.unwrap_or(cfg.lambda_grid.len());
    if n_lambda == 0 {
        return Err(usage("--lambda-points must be at least 1"));
    }
    cfg.lambda_grid = linear_grid(0.0, a.lambda_max, n_lambda);
    if knowledge {
        if let Some(n) = a.theta_points {
            if n == 0 {
                return Err(usage("--theta-points must be at least 1"));
            }
            cfg.theta_max_grid = noisy_euler::experiments::theta_max_grid(n);
        }
    } else if a.theta_points.is_some() {
        return Err(usage("--theta-points only applies to the knowledge sweep"));
    }
    cfg.targets_per_point = a.targets;
    cfg.rng_seed = a.seed;
    cfg.optimizer = a.optimizer.config(a.seed);
    Ok(cfg)
}

fn optimize_config(a: &OptimizeArgs) -> Result<RunConfig, CliError> {
    let target = parse::gate(&a.gate).map_err(usage)?;
    let distribution = match (&a.dist, a.state) {
        (DistSpec::Point, s) => InitialStateDistribution::point(s.unwrap_or(BlochState::GROUND)),
        (_, Some(_)) => return Err(usage("--state only applies to --dist point")),
        (DistSpec::Uniform, None) => InitialStateDistribution::UniformSphere,
        (DistSpec::Cap(t), None) => InitialStateDistribution::cap(*t)?,
    };
    Ok(RunConfig::Optimize {
        gate: a.gate.clone(),
        target,
        distribution,
        noise: resolve_noise(&a.noise)?.noise,
        optimizer: a.optimizer.config(a.seed),
    })
}

fn configure_threads(flag: Option<usize>) -> Result<(), CliError> {
    let jobs = match std::env::var("NOISY_EULER_JOBS") {
        Ok(v) => Some(v.trim().parse::<usize>().map_err(|_| usage(format!("NOISY_EULER_JOBS={v:?} is not a thread count")))?),
        Err(_) => flag,
    };
    if let Some(n) = jobs {
        if n == 0 {
            return Err(usage("job count must be at least 1"));
        }
        rayon::ThreadPoolBuilder::new().num_threads(n).build_global().map_err(|e| CliError::Runtime(e.into()))?;
    }
    Ok(())
}

fn real_main(cli: Cli) -> Result<(), CliError> {
    configure_threads(cli.jobs)?;
    if let Some(path) = &cli.from_manifest {
        let manifest = run::load_manifest(path)?;
        run::execute(&manifest.config, Some(&cli.out))?;
        return Ok(());
    }
    let Some(command) = cli.command else {
        return Err(usage("a subcommand or --from-manifest is required (see --help)"));
    };
    let (cfg, out) = match command {
        Command::Optimize(a) => (optimize_config(&a)?, a.out),
        Command::Rb(a) => {
            let depths = a.depths.clone().map(|l| l.0).unwrap_or_else(|| paper_depths().into_iter().filter(|d| *d <= a.gates).collect());
            let config = rb_config(&a.common, a.gates, depths, a.k)?;
            (RunConfig::Rb { experiment_id: experiment_id(&a.common, "rb"), config, raw: a.common.raw }, Some(a.common.out))
        }
        Command::Drift(a) => {
            let config = rb_config(&a.common, a.gates, a.depths.0.clone(), 1.0)?;
            let k_values = a.k_grid.clone().map_or_else(default_drift_grid, |l| l.0);
            (
                RunConfig::Drift { experiment_id: experiment_id(&a.common, "drift"), config, k_values, raw: a.common.raw },
                Some(a.common.out),
            )
        }
        Command::PrepSweep(a) => (RunConfig::PrepSweep { config: sweep_config(&a, false)? }, Some(a.out)),
        Command::Knowledge(a) => (RunConfig::Knowledge { config: sweep_config(&a, true)? }, Some(a.out)),
        Command::Validate { device } => {
            let spec = load_device(&device)?;
            print!("{}", run::validation_report(&spec)?);
            return Ok(());
        }
    };
    run::execute(&cfg, out.as_deref())?;
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match real_main(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(CliError::Usage(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(2)
        }
        Err(CliError::Runtime(e)) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
