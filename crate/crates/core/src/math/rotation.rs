use super::matrix::{Mat2, C64};
use crate::error::{ensure_finite, Error, Result};

pub fn rz(angle: f64) -> Result<Mat2> {
    ensure_finite("rz angle", angle)?;
    Ok(rz_unchecked(angle))
}

pub fn rx(angle: f64) -> Result<Mat2> {
    ensure_finite("rx angle", angle)?;
    Ok(rx_unchecked(angle))
}

pub fn ry(angle: f64) -> Result<Mat2> {
    ensure_finite("ry angle", angle)?;
    Ok(ry_unchecked(angle))
}

pub(crate) fn rz_unchecked(angle: f64) -> Mat2 {
    Mat2::diag(C64::from_polar(1.0, -angle / 2.0), C64::from_polar(1.0, angle / 2.0))
}

pub(crate) fn rx_unchecked(angle: f64) -> Mat2 {
    let (s, c) = (angle / 2.0).sin_cos();
    Mat2::new(C64::new(c, 0.0), C64::new(0.0, -s), C64::new(0.0, -s), C64::new(c, 0.0))
}

pub(crate) fn ry_unchecked(angle: f64) -> Mat2 {
    let (s, c) = (angle / 2.0).sin_cos();
    Mat2::from_real([[c, -s], [s, c]])
}

/// `exp(-i (angle/2) n̂·σ)` for a rotation axis `n̂` (normalized internally).
pub fn axis_rotation(axis: [f64; 3], angle: f64) -> Result<Mat2> {
    ensure_finite("rotation angle", angle)?;
    let norm = axis.iter().map(|a| a * a).sum::<f64>().sqrt();
    if !norm.is_finite() || norm == 0.0 {
        return Err(Error::invalid(format!("rotation axis must be nonzero and finite, got {axis:?}")));
    }
    let [nx, ny, nz] = axis.map(|a| a / norm);
    let (s, c) = (angle / 2.0).sin_cos();
    Ok(Mat2::new(
        C64::new(c, -s * nz),
        C64::new(-s * ny, -s * nx),
        C64::new(s * ny, -s * nx),
        C64::new(c, s * nz),
    ))
}
