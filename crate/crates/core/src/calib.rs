//! Device calibration files and readout-error handling.
//!
//! Calibration data is JSON with units carried in the field names:
//!
//! ```json
//! { "device_name": "ibmq_rome", "calibration_date": "2020-07-14",
//!   "qubits": [ { "id": 3, "t1_us": 46.4, "t2_us": 105, "pulse_duration_ns": 35.6,
//!                 "p_meas1_prep0": 0.027, "p_meas0_prep1": 0.05, "gate_error": 3.35e-4 } ] }
//! ```

use std::collections::HashSet;
use std::fmt;
use std::path::{Path, PathBuf};

use chrono::NaiveDate;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::noise::NoiseParams;

const ROME: &str = include_str!("../fixtures/rome.json");
const BOGOTA: &str = include_str!("../fixtures/bogota.json");
const ASPEN8: &str = include_str!("../fixtures/aspen8.json");

/// Names accepted by [`bundled_device`].
pub const BUNDLED_DEVICES: [&str; 3] = ["rome", "bogota", "aspen8"];

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct QubitSpec {
    pub id: u32,
    pub t1_us: f64,
    pub t2_us: f64,
    pub pulse_duration_ns: f64,
    pub p_meas1_prep0: f64,
    pub p_meas0_prep1: f64,
    /// Vendor-reported, stored verbatim and not used by the noise model.
    pub gate_error: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DeviceSpec {
    pub device_name: String,
    pub calibration_date: NaiveDate,
    pub qubits: Vec<QubitSpec>,
}

/// Suspicious but accepted calibration data.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SpecWarning {
    pub qubit: u32,
    pub message: String,
}

impl fmt::Display for SpecWarning {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "qubit {}: {}", self.qubit, self.message)
    }
}

impl QubitSpec {
    pub fn noise_params(&self) -> Result<NoiseParams> {
        noise_params_for(self)
    }

    pub fn readout(&self) -> Result<ReadoutError> {
        ReadoutError::new(self.p_meas1_prep0, self.p_meas0_prep1)
    }
}

impl DeviceSpec {
    pub fn from_json_str(text: &str, origin: &Path) -> Result<Self> {
        let de = &mut serde_json::Deserializer::from_str(text);
        let spec: DeviceSpec = serde_path_to_error::deserialize(de).map_err(|e| {
            let field = match e.path().to_string() {
                p if p == "." => "(document)".to_string(),
                p => p,
            };
            let inner = e.into_inner();
            Error::Parse { path: origin.to_path_buf(), line: inner.line(), field, message: inner.to_string() }
        })?;
        spec.validate(text, origin)?;
        Ok(spec)
    }

    pub fn qubit(&self, id: u32) -> Result<&QubitSpec> {
        self.qubits.iter().find(|q| q.id == id).ok_or_else(|| {
            let ids: Vec<String> = self.qubits.iter().map(|q| q.id.to_string()).collect();
            Error::invalid(format!("device {} has no qubit {id} (available: {})", self.device_name, ids.join(", ")))
        })
    }

    /// `T2 > 2·T1` is physically impossible but appears in real calibration data.
    pub fn warnings(&self) -> Vec<SpecWarning> {
        self.qubits
            .iter()
            .filter(|q| q.t2_us > 2.0 * q.t1_us)
            .map(|q| SpecWarning {
                qubit: q.id,
                message: format!("T2 = {} us exceeds 2*T1 = {} us; likely a calibration error", q.t2_us, 2.0 * q.t1_us),
            })
            .collect()
    }

    fn validate(&self, text: &str, origin: &Path) -> Result<()> {
        let fail = |field: String, key: &str, occurrence: usize, message: String| Error::Parse {
            path: origin.to_path_buf(),
            line: line_of_key(text, key, occurrence),
            field,
            message,
        };
        if self.device_name.trim().is_empty() {
            return Err(fail("device_name".into(), "device_name", 0, "must not be empty".into()));
        }
        if self.qubits.is_empty() {
            return Err(fail("qubits".into(), "qubits", 0, "at least one qubit is required".into()));
        }
        let mut seen = HashSet::new();
        for (i, q) in self.qubits.iter().enumerate() {
            if !seen.insert(q.id) {
                return Err(fail(format!("qubits[{i}].id"), "id", i, format!("duplicate qubit id {}", q.id)));
            }
            let checks: [(&str, f64, fn(f64) -> bool, &str); 6] = [
                ("t1_us", q.t1_us, |v| v > 0.0, "must be positive"),
                ("t2_us", q.t2_us, |v| v > 0.0, "must be positive"),
                ("pulse_duration_ns", q.pulse_duration_ns, |v| v >= 0.0, "must be non-negative"),
                ("p_meas1_prep0", q.p_meas1_prep0, |v| (0.0..1.0).contains(&v), "must lie in [0, 1)"),
                ("p_meas0_prep1", q.p_meas0_prep1, |v| (0.0..1.0).contains(&v), "must lie in [0, 1)"),
                ("gate_error", q.gate_error, |v| v >= 0.0, "must be non-negative"),
            ];
            for (key, value, ok, why) in checks {
                if !value.is_finite() || !ok(value) {
                    return Err(fail(format!("qubits[{i}].{key}"), key, i, format!("{why}, got {value}")));
                }
            }
        }
        Ok(())
    }
}

/// 1-based line of the `occurrence`-th (0-based) appearance of `"key"`.
fn line_of_key(text: &str, key: &str, occurrence: usize) -> usize {
    let needle = format!("\"{key}\"");
    text.match_indices(&needle)
        .nth(occurrence)
        .map(|(pos, _)| text[..pos].matches('\n').count() + 1)
        .unwrap_or(0)
}

pub fn load_device_spec(path: impl AsRef<Path>) -> Result<DeviceSpec> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path)?;
    DeviceSpec::from_json_str(&text, path)
}

/// One of the calibration snapshots shipped with the crate.
pub fn bundled_device(name: &str) -> Result<DeviceSpec> {
    let key = name.to_ascii_lowercase().replace(['-', '_'], "");
    let (text, file) = match key.as_str() {
        "rome" | "ibmqrome" => (ROME, "rome.json"),
        "bogota" | "ibmqbogota" => (BOGOTA, "bogota.json"),
        "aspen8" => (ASPEN8, "aspen8.json"),
        _ => {
            return Err(Error::invalid(format!("unknown device {name:?} (bundled: {})", BUNDLED_DEVICES.join(", "))));
        }
    };
    DeviceSpec::from_json_str(text, &PathBuf::from("fixtures").join(file))
}

/// Damping probabilities from the qubit's T1, T2 (µs) and pulse length (ns).
pub fn noise_params_for(spec: &QubitSpec) -> Result<NoiseParams> {
    NoiseParams::from_times(spec.t1_us * 1e-6, spec.t2_us * 1e-6, spec.pulse_duration_ns * 1e-9)
}

/// Single-qubit readout confusion `M = [[1−p10, p01], [p10, 1−p01]]`, with
/// `p10 = P(measure 1 | prepared 0)` and `p01 = P(measure 0 | prepared 1)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReadoutError {
    pub p_meas1_prep0: f64,
    pub p_meas0_prep1: f64,
}

/// Result of inverting the confusion matrix.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Mitigated {
    pub p0: f64,
    /// The unclipped estimate fell outside `[0, 1]`.
    pub clipped: bool,
}

impl ReadoutError {
    pub const NONE: ReadoutError = ReadoutError { p_meas1_prep0: 0.0, p_meas0_prep1: 0.0 };

    pub fn new(p_meas1_prep0: f64, p_meas0_prep1: f64) -> Result<Self> {
        for (name, p) in [("p_meas1_prep0", p_meas1_prep0), ("p_meas0_prep1", p_meas0_prep1)] {
            if !(p.is_finite() && (0.0..=1.0).contains(&p)) {
                return Err(Error::invalid(format!("{name} must lie in [0, 1], got {p}")));
            }
        }
        Ok(ReadoutError { p_meas1_prep0, p_meas0_prep1 })
    }

    pub fn matrix(&self) -> [[f64; 2]; 2] {
        [[1.0 - self.p_meas1_prep0, self.p_meas0_prep1], [self.p_meas1_prep0, 1.0 - self.p_meas0_prep1]]
    }

    /// Probability of reading 0 when the true probability of 0 is `p0`.
    pub fn apply(&self, p0: f64) -> f64 {
        ((1.0 - self.p_meas1_prep0) * p0 + self.p_meas0_prep1 * (1.0 - p0)).clamp(0.0, 1.0)
    }

    pub fn mitigate(&self, measured_p0: f64) -> Result<Mitigated> {
        let det = 1.0 - self.p_meas1_prep0 - self.p_meas0_prep1;
        if det.abs() < 1e-12 {
            return Err(Error::Singular(format!(
                "readout confusion matrix with p_meas1_prep0 + p_meas0_prep1 = {}",
                self.p_meas1_prep0 + self.p_meas0_prep1
            )));
        }
        let raw = (measured_p0 - self.p_meas0_prep1) / det;
        let p0 = raw.clamp(0.0, 1.0);
        Ok(Mitigated { p0, clipped: p0 != raw })
    }
}

pub fn apply_readout_error(p0: f64, spec: &QubitSpec) -> Result<f64> {
    Ok(spec.readout()?.apply(p0))
}

pub fn mitigate_readout(measured_p0: f64, spec: &QubitSpec) -> Result<f64> {
    Ok(spec.readout()?.mitigate(measured_p0)?.p0)
}
