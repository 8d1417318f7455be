//! Value parsers for command-line flags.

use std::f64::consts::FRAC_1_SQRT_2;

use noisy_euler::math::{BlochState, EulerAngles, Mat2, C64};
use noisy_euler::optimize::{InitialStateDistribution, TargetGate};
use noisy_euler::rb::log_grid;

pub const NAMED_GATES: [&str; 8] = ["id", "x", "y", "z", "h", "s", "t", "sx"];

fn floats(s: &str, n: usize, what: &str) -> Result<Vec<f64>, String> {
    let v: Vec<f64> = s
        .split(',')
        .map(|p| p.trim().parse::<f64>().map_err(|_| format!("{what}: {p:?} is not a number")))
        .collect::<Result<_, _>>()?;
    if v.len() != n {
        return Err(format!("{what}: expected {n} comma-separated values, got {}", v.len()));
    }
    if v.iter().any(|x| !x.is_finite()) {
        return Err(format!("{what}: values must be finite"));
    }
    Ok(v)
}

fn named_unitary(name: &str) -> Option<Mat2> {
    let c = |re: f64, im: f64| C64::new(re, im);
    let r = FRAC_1_SQRT_2;
    Some(match name {
        "id" | "i" => Mat2::IDENTITY,
        "x" => Mat2::new(c(0.0, 0.0), c(1.0, 0.0), c(1.0, 0.0), c(0.0, 0.0)),
        "y" => Mat2::new(c(0.0, 0.0), c(0.0, -1.0), c(0.0, 1.0), c(0.0, 0.0)),
        "z" => Mat2::diag(c(1.0, 0.0), c(-1.0, 0.0)),
        "h" => Mat2::new(c(r, 0.0), c(r, 0.0), c(r, 0.0), c(-r, 0.0)),
        "s" => Mat2::diag(c(1.0, 0.0), c(0.0, 1.0)),
        "t" => Mat2::diag(c(1.0, 0.0), c(r, r)),
        "sx" => Mat2::new(c(0.5, 0.5), c(0.5, -0.5), c(0.5, -0.5), c(0.5, 0.5)),
        _ => return None,
    })
}

/// A named gate (`h`, `sx`, ...) or Euler angles `β,γ,δ` in radians.
pub fn gate(s: &str) -> Result<TargetGate, String> {
    let key = s.trim().to_ascii_lowercase();
    if let Some(u) = named_unitary(&key) {
        return TargetGate::from_unitary(&u).map_err(|e| e.to_string());
    }
    if !key.contains(',') {
        return Err(format!("unknown gate {s:?}; use one of {} or β,γ,δ", NAMED_GATES.join(", ")));
    }
    let v = floats(s, 3, "gate")?;
    let angles = EulerAngles::new(v[0], v[1], v[2]).map_err(|e| e.to_string())?;
    Ok(TargetGate::new(angles))
}

/// Bloch angles `θ,φ` in radians.
pub fn state(s: &str) -> Result<BlochState, String> {
    let v = floats(s, 2, "state")?;
    BlochState::new(v[0], v[1]).map_err(|e| e.to_string())
}

/// Distribution kind; `point` takes its state from `--state`.
#[derive(Clone, Debug, PartialEq)]
pub enum DistSpec {
    Point,
    Uniform,
    Cap(f64),
}

pub fn dist(s: &str) -> Result<DistSpec, String> {
    match s.trim() {
        "point" => Ok(DistSpec::Point),
        "uniform" => Ok(DistSpec::Uniform),
        other => {
            let theta = other
                .strip_prefix("cap:")
                .ok_or_else(|| format!("unknown distribution {s:?}; use point, uniform or cap:θ"))?
                .parse::<f64>()
                .map_err(|_| format!("cap angle in {s:?} is not a number"))?;
            InitialStateDistribution::cap(theta).map_err(|e| e.to_string())?;
            Ok(DistSpec::Cap(theta))
        }
    }
}

/// A parsed list flag; a newtype so clap treats it as one value.
#[derive(Clone, Debug, PartialEq)]
pub struct List<T>(pub Vec<T>);

/// `lo:hi:Nlog` or a comma-separated list of positive values.
pub fn k_grid(s: &str) -> Result<List<f64>, String> {
    k_values(s).map(List)
}

fn k_values(s: &str) -> Result<Vec<f64>, String> {
    let parts: Vec<&str> = s.split(':').collect();
    if parts.len() == 3 {
        let n = parts[2].strip_suffix("log").ok_or_else(|| format!("k grid {s:?}: only log spacing (e.g. 19log) is supported"))?;
        let num = |p: &str| p.parse::<f64>().map_err(|_| format!("k grid {s:?}: {p:?} is not a number"));
        let n = n.parse::<usize>().map_err(|_| format!("k grid {s:?}: {n:?} is not a count"))?;
        return log_grid(num(parts[0])?, num(parts[1])?, n).map_err(|e| e.to_string());
    }
    let v: Vec<f64> = s
        .split(',')
        .map(|p| p.trim().parse::<f64>().map_err(|_| format!("k value {p:?} is not a number")))
        .collect::<Result<_, _>>()?;
    if v.iter().any(|k| !(k.is_finite() && *k > 0.0)) {
        return Err("k values must be positive".into());
    }
    Ok(v)
}

pub fn depths(s: &str) -> Result<List<usize>, String> {
    depth_values(s).map(List)
}

fn depth_values(s: &str) -> Result<Vec<usize>, String> {
    if let Some((range, step)) = s.split_once(':').and_then(|(a, b)| Some((a.split_once("..")?, b))) {
        let p = |x: &str| x.trim().parse::<usize>().map_err(|_| format!("depths {s:?}: {x:?} is not a count"));
        let (lo, hi, step) = (p(range.0)?, p(range.1)?, p(step)?);
        if step == 0 {
            return Err("depth step must be positive".into());
        }
        return Ok((lo..=hi).step_by(step).collect());
    }
    s.split(',').map(|p| p.trim().parse::<usize>().map_err(|_| format!("depth {p:?} is not a count"))).collect()
}

pub fn probability_pair(s: &str) -> Result<(f64, f64), String> {
    let v = floats(s, 2, "readout error")?;
    Ok((v[0], v[1]))
}
