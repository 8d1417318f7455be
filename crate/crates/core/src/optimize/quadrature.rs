use std::f64::consts::{PI, TAU};

use crate::error::{Error, Result};
use crate::math::BlochState;

/// Orders tried by the adaptive sphere quadrature, per axis.
pub const QUADRATURE_ORDERS: [usize; 4] = [16, 32, 64, 128];
/// Successive estimates closer than this are accepted.
pub const QUADRATURE_TOLERANCE: f64 = 1e-8;
/// Estimated error above this is reported as a numerical-accuracy failure.
pub const QUADRATURE_FAILURE: f64 = 1e-7;

/// Gauss–Legendre nodes and weights on `[-1, 1]`.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n > 0, "Gauss-Legendre order must be positive");
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    let m = n.div_ceil(2);
    for i in 0..m {
        let mut x = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        for _ in 0..100 {
            let (p, d) = legendre(n, x);
            let dx = p / d;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let dp = legendre(n, x).1;
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    (nodes, weights)
}

/// `(P_n(x), P_n'(x))` by the three-term recurrence.
fn legendre(n: usize, x: f64) -> (f64, f64) {
    let (mut p0, mut p1) = (1.0, x);
    for k in 2..=n {
        let k = k as f64;
        let p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
    }
    if n == 0 {
        return (1.0, 0.0);
    }
    let n = n as f64;
    (p1, n * (x * p1 - p0) / (x * x - 1.0))
}

/// Tensor-product rule over the cap `θ ∈ [0, θ_max]`, `φ ∈ [0, 2π)` with the
/// normalized density `sin θ / (2π (1 − cos θ_max))`.
pub(crate) fn cap_nodes(theta_max: f64, order: usize) -> Vec<(BlochState, f64)> {
    let (x, w) = gauss_legendre(order);
    // 1 - cos θ_max, written to stay accurate for tiny caps
    let area = 2.0 * (theta_max / 2.0).sin().powi(2);
    let norm = 1.0 / (TAU * area);
    let mut out = Vec::with_capacity(order * order);
    for (xi, wi) in x.iter().zip(&w) {
        let theta = 0.5 * theta_max * (xi + 1.0);
        let w_theta = 0.5 * theta_max * wi * theta.sin() * norm;
        for (xj, wj) in x.iter().zip(&w) {
            let phi = PI * (xj + 1.0);
            out.push((BlochState { theta, phi }, w_theta * PI * wj));
        }
    }
    out
}

/// Runs `estimate` on successively finer rules until two agree.
/// Returns the accepted order and value.
pub(crate) fn adaptive<F>(mut estimate: F) -> Result<(usize, f64)>
where
    F: FnMut(usize) -> f64,
{
    let mut prev = estimate(QUADRATURE_ORDERS[0]);
    let mut diff = f64::INFINITY;
    for &order in &QUADRATURE_ORDERS[1..] {
        let value = estimate(order);
        diff = (value - prev).abs();
        if diff < QUADRATURE_TOLERANCE {
            return Ok((order, value));
        }
        prev = value;
    }
    if diff <= QUADRATURE_FAILURE {
        return Ok((*QUADRATURE_ORDERS.last().unwrap(), prev));
    }
    Err(Error::NumericalAccuracy { what: "sphere quadrature", estimate: diff })
}
