//! CSV and JSON output. Floats are written with 17 significant digits so a
//! rerun with the same seed reproduces files byte for byte.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use serde::Serialize;

use crate::error::Result;
use crate::experiments::SweepRow;
use crate::rb::{Arm, RbRunResult};

/// Scientific notation with 17 significant digits.
pub fn format_float(x: f64) -> String {
    if x.is_finite() {
        format!("{x:.16e}")
    } else if x.is_nan() {
        "NaN".to_string()
    } else if x > 0.0 {
        "inf".to_string()
    } else {
        "-inf".to_string()
    }
}

pub const RB_HEADER: [&str; 7] = ["experiment_id", "k", "circuit_index", "depth", "arm", "fidelity", "stderr"];
pub const SWEEP_HEADER: [&str; 5] = ["lambda", "theta_max", "mean_improvement", "stderr", "n_samples"];

/// Writes per-depth means for both arms; with `raw`, also one row per
/// circuit (circuit index instead of `all`, empty standard error).
pub fn write_rb_csv<W: Write>(out: W, experiment_id: &str, runs: &[&RbRunResult], raw: bool) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(RB_HEADER)?;
    for run in runs {
        let k = format_float(run.drift_factor);
        for d in &run.depths {
            for arm in [Arm::Optimized, Arm::Unoptimized] {
                w.write_record([
                    experiment_id,
                    &k,
                    "all",
                    &d.depth.to_string(),
                    arm.as_str(),
                    &format_float(d.mean(arm)),
                    &format_float(d.stderr(arm)),
                ])?;
            }
        }
        if raw {
            for r in &run.records {
                for (arm, value) in [(Arm::Optimized, r.optimized), (Arm::Unoptimized, r.unoptimized)] {
                    w.write_record([
                        experiment_id,
                        &k,
                        &r.circuit_index.to_string(),
                        &r.depth.to_string(),
                        arm.as_str(),
                        &format_float(value),
                        "",
                    ])?;
                }
            }
        }
    }
    w.flush()?;
    Ok(())
}

pub fn write_sweep_csv<W: Write>(out: W, rows: &[SweepRow]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(SWEEP_HEADER)?;
    for r in rows {
        w.write_record([
            format_float(r.lambda),
            format_float(r.theta_max),
            format_float(r.mean_improvement),
            format_float(r.stderr),
            r.n_samples.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_json<T: Serialize + ?Sized>(path: &Path, value: &T) -> Result<()> {
    let mut f = BufWriter::new(File::create(path)?);
    serde_json::to_writer_pretty(&mut f, value)?;
    f.write_all(b"\n")?;
    f.flush()?;
    Ok(())
}

pub fn create_csv(path: &Path) -> Result<BufWriter<File>> {
    Ok(BufWriter::new(File::create(path)?))
}
