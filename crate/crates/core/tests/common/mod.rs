#![allow(dead_code)]

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use tsvf_core::hilbert::expm_hermitian;
use tsvf_core::{c64, Complex64, Operator, PureState, SubsystemLayout};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn gauss(rng: &mut impl Rng) -> f64 {
    // Box-Muller; only used to spread test inputs
    let u: f64 = rng.random::<f64>().max(1e-300);
    let v: f64 = rng.random();
    (-2.0 * u.ln()).sqrt() * (std::f64::consts::TAU * v).cos()
}

pub fn random_state(rng: &mut impl Rng, layout: &SubsystemLayout) -> PureState {
    let amps = (0..layout.dim()).map(|_| c64(gauss(rng), gauss(rng))).collect();
    PureState::new(layout.clone(), amps).unwrap().normalized()
}

pub fn random_hermitian(rng: &mut impl Rng, layout: &SubsystemLayout) -> Operator {
    let d = layout.dim();
    let a = DMatrix::from_fn(d, d, |_, _| c64(gauss(rng), gauss(rng)));
    let h = (&a + a.adjoint()).map(|z| z * 0.5);
    Operator::hermitian(layout.clone(), h).unwrap()
}

/// Hermitian with eigenvalues `1, 2, …, d` in a random eigenbasis.
pub fn random_observable(rng: &mut impl Rng, layout: &SubsystemLayout) -> Operator {
    let u = random_unitary(rng, layout);
    let vals: Vec<f64> = (1..=layout.dim()).map(|k| k as f64).collect();
    let d = Operator::diagonal(layout.clone(), &vals).unwrap();
    let m = u.matrix() * d.matrix() * u.matrix().adjoint();
    let m = (&m + m.adjoint()).map(|z| z * 0.5);
    Operator::hermitian(layout.clone(), m).unwrap()
}

pub fn random_unitary(rng: &mut impl Rng, layout: &SubsystemLayout) -> Operator {
    expm_hermitian(&random_hermitian(rng, layout), 1.0).unwrap()
}

pub fn qudit(label: &str, d: usize) -> SubsystemLayout {
    SubsystemLayout::single(label, d).unwrap()
}

pub fn close(a: Complex64, b: Complex64, tol: f64) -> bool {
    (a - b).norm() <= tol
}
