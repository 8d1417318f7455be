//! Small dense BFGS maximizer with central-difference gradients.

use serde::{Deserialize, Serialize};

const ARMIJO_C1: f64 = 1e-4;
const MAX_BACKTRACKS: usize = 60;
/// Angles are periodic, so a longer step is never useful.
const MAX_STEP_NORM: f64 = std::f64::consts::PI;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Termination {
    GradientTolerance,
    LineSearchStalled,
    MaxIterations,
}

#[derive(Clone, Copy, Debug)]
pub struct BfgsSettings {
    pub max_iterations: usize,
    pub gradient_tolerance: f64,
    pub fd_step: f64,
}

#[derive(Clone, Copy, Debug)]
pub struct BfgsOutcome<const N: usize> {
    pub x: [f64; N],
    pub value: f64,
    pub iterations: usize,
    pub evaluations: usize,
    pub termination: Termination,
}

impl<const N: usize> BfgsOutcome<N> {
    pub fn converged(&self) -> bool {
        self.termination == Termination::GradientTolerance
    }
}

pub fn central_gradient<const N: usize>(f: &impl Fn(&[f64; N]) -> f64, x: &[f64; N], h: f64) -> [f64; N] {
    let mut g = [0.0; N];
    let mut probe = *x;
    for i in 0..N {
        probe[i] = x[i] + h;
        let up = f(&probe);
        probe[i] = x[i] - h;
        let down = f(&probe);
        probe[i] = x[i];
        g[i] = (up - down) / (2.0 * h);
    }
    g
}

fn dot<const N: usize>(a: &[f64; N], b: &[f64; N]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn inf_norm<const N: usize>(a: &[f64; N]) -> f64 {
    a.iter().fold(0.0, |m, v| m.max(v.abs()))
}

fn identity<const N: usize>() -> [[f64; N]; N] {
    let mut h = [[0.0; N]; N];
    for (i, row) in h.iter_mut().enumerate() {
        row[i] = 1.0;
    }
    h
}

/// Maximizes `f` from `x0`. The returned point is never worse than `x0`.
///
/// Stops when the largest gradient component drops below the tolerance, when
/// backtracking cannot find an ascent step, or after `max_iterations`.
pub fn maximize<const N: usize>(f: impl Fn(&[f64; N]) -> f64, x0: [f64; N], settings: &BfgsSettings) -> BfgsOutcome<N> {
    let h = settings.fd_step;
    // work with the negated objective
    let obj = |x: &[f64; N]| -f(x);
    let mut evaluations = 1;
    let mut x = x0;
    let mut fx = obj(&x);
    let mut g = central_gradient(&obj, &x, h);
    evaluations += 2 * N;
    let mut hinv = identity::<N>();
    let mut first_update = true;

    let finish = |x, fx: f64, iterations, evaluations, termination| BfgsOutcome { x, value: -fx, iterations, evaluations, termination };

    for iter in 0..settings.max_iterations {
        if !fx.is_finite() || inf_norm(&g) < settings.gradient_tolerance {
            return finish(x, fx, iter, evaluations, Termination::GradientTolerance);
        }

        let mut p = [0.0; N];
        for i in 0..N {
            p[i] = -dot(&hinv[i], &g);
        }
        let mut slope = dot(&p, &g);
        if !(slope < 0.0) {
            hinv = identity();
            first_update = true;
            p = g.map(|v| -v);
            slope = dot(&p, &g);
        }
        let norm = dot(&p, &p).sqrt();
        if norm > MAX_STEP_NORM {
            let s = MAX_STEP_NORM / norm;
            p = p.map(|v| v * s);
            slope *= s;
        }

        let mut t = 1.0;
        let mut accepted = None;
        for _ in 0..MAX_BACKTRACKS {
            let mut trial = x;
            for i in 0..N {
                trial[i] += t * p[i];
            }
            let ft = obj(&trial);
            evaluations += 1;
            if ft <= fx + ARMIJO_C1 * t * slope {
                accepted = Some((trial, ft));
                break;
            }
            t *= 0.5;
        }
        let Some((x_new, f_new)) = accepted else {
            return finish(x, fx, iter, evaluations, Termination::LineSearchStalled);
        };

        let g_new = central_gradient(&obj, &x_new, h);
        evaluations += 2 * N;
        let mut s = [0.0; N];
        let mut y = [0.0; N];
        for i in 0..N {
            s[i] = x_new[i] - x[i];
            y[i] = g_new[i] - g[i];
        }
        let sy = dot(&s, &y);
        if sy > 1e-12 * dot(&s, &s).sqrt() * dot(&y, &y).sqrt() {
            if first_update {
                let scale = sy / dot(&y, &y);
                hinv = identity();
                for (i, row) in hinv.iter_mut().enumerate() {
                    row[i] = scale;
                }
                first_update = false;
            }
            // H ← (I − ρ s yᵀ) H (I − ρ y sᵀ) + ρ s sᵀ
            let rho = 1.0 / sy;
            let mut hy = [0.0; N];
            for i in 0..N {
                hy[i] = dot(&hinv[i], &y);
            }
            let yhy = dot(&y, &hy);
            for i in 0..N {
                for j in 0..N {
                    hinv[i][j] += rho * ((1.0 + rho * yhy) * s[i] * s[j] - hy[i] * s[j] - s[i] * hy[j]);
                }
            }
        }
        x = x_new;
        fx = f_new;
        g = g_new;
    }
    let termination = if inf_norm(&g) < settings.gradient_tolerance { Termination::GradientTolerance } else { Termination::MaxIterations };
    finish(x, fx, settings.max_iterations, evaluations, termination)
}
