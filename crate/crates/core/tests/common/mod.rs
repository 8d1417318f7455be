//! Reference implementations written independently of the library code.
#![allow(dead_code)]

use std::f64::consts::{FRAC_PI_2, TAU};

use noisy_euler::math::{BlochState, Mat2, C64};
use rand::Rng;

pub fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

pub fn rz(a: f64) -> Mat2 {
    Mat2::diag(C64::from_polar(1.0, -a / 2.0), C64::from_polar(1.0, a / 2.0))
}

pub fn rx(a: f64) -> Mat2 {
    let (s, co) = (a / 2.0).sin_cos();
    Mat2::new(c(co, 0.0), c(0.0, -s), c(0.0, -s), c(co, 0.0))
}

fn conj(k: &Mat2, rho: &Mat2) -> Mat2 {
    *k * *rho * k.dagger()
}

/// Amplitude damping followed by phase damping, from the explicit Kraus sets.
pub fn damp(rho: &Mat2, la: f64, lp: f64) -> Mat2 {
    let a0 = Mat2::from_real([[1.0, 0.0], [0.0, (1.0 - la).sqrt()]]);
    let a1 = Mat2::from_real([[0.0, la.sqrt()], [0.0, 0.0]]);
    let r = conj(&a0, rho) + conj(&a1, rho);
    let p0 = Mat2::from_real([[1.0, 0.0], [0.0, (1.0 - lp).sqrt()]]);
    let p1 = Mat2::from_real([[0.0, 0.0], [0.0, lp.sqrt()]]);
    conj(&p0, &r) + conj(&p1, &r)
}

/// `R_z(β) N R_x(−π/2) R_z(γ) N R_x(π/2) R_z(δ)` applied one step at a time.
pub fn stepwise(beta: f64, gamma: f64, delta: f64, rho: &Mat2, la: f64, lp: f64) -> Mat2 {
    let mut r = conj(&rz(delta), rho);
    r = damp(&conj(&rx(FRAC_PI_2), &r), la, lp);
    r = conj(&rz(gamma), &r);
    r = damp(&conj(&rx(-FRAC_PI_2), &r), la, lp);
    conj(&rz(beta), &r)
}

pub fn ket(s: &BlochState) -> [C64; 2] {
    [c((s.theta / 2.0).cos(), 0.0), C64::from_polar((s.theta / 2.0).sin(), s.phi)]
}

pub fn projector(s: &BlochState) -> Mat2 {
    let v = ket(s);
    Mat2::outer(v, v)
}

pub fn random_state<R: Rng + ?Sized>(rng: &mut R) -> BlochState {
    let z: f64 = rng.random_range(-1.0..=1.0);
    BlochState { theta: z.acos(), phi: TAU * rng.random::<f64>() }
}

pub fn random_angles<R: Rng + ?Sized>(rng: &mut R) -> [f64; 3] {
    [rng.random_range(0.0..TAU), rng.random_range(0.0..TAU), rng.random_range(0.0..TAU)]
}

/// Population-weighted `⟨ψ|ρ|ψ⟩`.
pub fn overlap(psi: [C64; 2], rho: &Mat2) -> f64 {
    let mut acc = C64::new(0.0, 0.0);
    for i in 0..2 {
        for j in 0..2 {
            acc += psi[i].conj() * rho[(i, j)] * psi[j];
        }
    }
    acc.re
}
