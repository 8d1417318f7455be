//! Least-squares fit of `f(x) = ½(1 + e^{−ax})` to survival data.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Why a fit hit the boundary of the model.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FitDiagnostic {
    /// Every fidelity is ~1: `a = 0`.
    NoDecay,
    /// Every fidelity is ~½ or below: `a = ∞`.
    FullyDecayed,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DecayFit {
    pub a: f64,
    /// `1 − f(1) = ½(1 − e^{−a})`
    pub error_rate: f64,
    /// First-order approximation `a/2`.
    pub error_rate_approx: f64,
    pub residual_sum_squares: f64,
    pub diagnostic: Option<FitDiagnostic>,
}

const DEGENERATE_TOL: f64 = 1e-12;

fn model(a: f64, x: f64) -> f64 {
    0.5 * (1.0 + (-a * x).exp())
}

fn rss(a: f64, xs: &[f64], ys: &[f64]) -> f64 {
    xs.iter().zip(ys).map(|(x, y)| (model(a, *x) - y).powi(2)).sum()
}

/// First and second derivative of the residual sum of squares in `a`.
fn derivatives(a: f64, xs: &[f64], ys: &[f64]) -> (f64, f64) {
    xs.iter().zip(ys).fold((0.0, 0.0), |(d1, d2), (x, y)| {
        let e = (-a * x).exp();
        let r = 0.5 * (1.0 + e) - y;
        let dr = -0.5 * x * e;
        let ddr = 0.5 * x * x * e;
        (d1 + 2.0 * r * dr, d2 + 2.0 * (dr * dr + r * ddr))
    })
}

fn finish(a: f64, xs: &[f64], ys: &[f64], diagnostic: Option<FitDiagnostic>) -> DecayFit {
    let error_rate = if a.is_infinite() { 0.5 } else { -0.5 * (-a).exp_m1() };
    let residual_sum_squares = if a.is_infinite() {
        xs.iter().zip(ys).map(|(x, y)| (if *x == 0.0 { 1.0 } else { 0.5 } - y).powi(2)).sum()
    } else {
        rss(a, xs, ys)
    };
    DecayFit { a, error_rate, error_rate_approx: a / 2.0, residual_sum_squares, diagnostic }
}

pub fn fit_decay(depths: &[f64], fidelities: &[f64]) -> Result<DecayFit> {
    if depths.len() != fidelities.len() {
        return Err(Error::invalid(format!("{} depths but {} fidelities", depths.len(), fidelities.len())));
    }
    if depths.len() < 3 {
        return Err(Error::invalid("decay fit needs at least 3 points"));
    }
    if depths.iter().any(|d| !d.is_finite() || *d < 0.0) {
        return Err(Error::invalid("depths must be finite and non-negative"));
    }
    if fidelities.iter().any(|f| !f.is_finite() || !(0.0..=1.0).contains(f)) {
        return Err(Error::invalid("fidelities must lie in [0, 1]"));
    }
    let (xs, ys) = (depths, fidelities);
    let informative = || xs.iter().zip(ys).filter(|(x, _)| **x > 0.0);
    if informative().all(|(_, y)| *y >= 1.0 - DEGENERATE_TOL) {
        return Ok(finish(0.0, xs, ys, Some(FitDiagnostic::NoDecay)));
    }
    if informative().all(|(_, y)| *y <= 0.5 + DEGENERATE_TOL) {
        return Ok(finish(f64::INFINITY, xs, ys, Some(FitDiagnostic::FullyDecayed)));
    }

    // log-linear start: ln(2f − 1) = −a x through the origin
    let (num, den) = informative().fold((0.0, 0.0), |(n, d), (x, y)| {
        let z = (2.0 * y - 1.0).clamp(DEGENERATE_TOL, 1.0);
        (n - x * z.ln(), d + x * x)
    });
    let mut a = (num / den).max(0.0);
    let mut s = rss(a, xs, ys);

    // safeguarded Newton on the stationarity condition
    for _ in 0..200 {
        let (d1, d2) = derivatives(a, xs, ys);
        let mut step = if d2 > 0.0 { -d1 / d2 } else { -d1.signum() * a.max(1e-6) };
        let mut moved = false;
        for _ in 0..60 {
            let trial = (a + step).max(0.0);
            let st = rss(trial, xs, ys);
            if st <= s {
                let done = (trial - a).abs() <= 1e-15 * a.max(1e-300);
                a = trial;
                s = st;
                moved = !done;
                break;
            }
            step *= 0.5;
        }
        if !moved {
            break;
        }
    }
    let diagnostic = (a == 0.0).then_some(FitDiagnostic::NoDecay);
    Ok(finish(a, xs, ys, diagnostic))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn depths() -> Vec<f64> {
        (0..36).map(|i| (1 + 7 * i) as f64).collect()
    }

    #[test]
    fn recovers_exact_model() {
        for a in [3.2e-3, 1e-5, 0.05, 1.3] {
            let xs = depths();
            let ys: Vec<f64> = xs.iter().map(|x| model(a, *x)).collect();
            let fit = fit_decay(&xs, &ys).unwrap();
            assert!(((fit.a - a) / a).abs() < 1e-9, "a={a}: {}", fit.a);
            assert!(fit.diagnostic.is_none());
        }
    }

    #[test]
    fn error_rate_close_to_half_a() {
        let xs = depths();
        let ys: Vec<f64> = xs.iter().map(|x| model(3.2e-3, *x)).collect();
        let fit = fit_decay(&xs, &ys).unwrap();
        assert!((fit.error_rate - fit.error_rate_approx).abs() < fit.a * fit.a / 4.0);
        assert!((fit.error_rate - (1.0 - model(fit.a, 1.0))).abs() < 1e-15);
    }

    #[test]
    fn noisy_data_least_squares_optimum() {
        let xs = depths();
        let ys: Vec<f64> = xs.iter().enumerate().map(|(i, x)| model(4e-3, *x) + 0.004 * ((i * 7919) % 13) as f64 / 13.0 - 0.002).collect();
        let fit = fit_decay(&xs, &ys).unwrap();
        let (d1, _) = derivatives(fit.a, &xs, &ys);
        assert!(d1.abs() < 1e-9);
        for da in [-1e-6, 1e-6] {
            assert!(rss(fit.a + da, &xs, &ys) >= fit.residual_sum_squares);
        }
    }

    #[test]
    fn degenerate_inputs() {
        let xs = [1.0, 2.0, 3.0];
        let flat = fit_decay(&xs, &[1.0, 1.0, 1.0]).unwrap();
        assert_eq!((flat.a, flat.diagnostic), (0.0, Some(FitDiagnostic::NoDecay)));
        let dead = fit_decay(&xs, &[0.5, 0.4, 0.5]).unwrap();
        assert!(dead.a.is_infinite());
        assert_eq!(dead.diagnostic, Some(FitDiagnostic::FullyDecayed));
        assert_eq!(dead.error_rate, 0.5);
        assert!(fit_decay(&xs[..2], &[1.0, 0.9]).is_err());
        assert!(fit_decay(&xs, &[1.0, 0.9, 1.2]).is_err());
    }
}
