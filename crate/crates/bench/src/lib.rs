//! Benchmark fixtures.

use tsvf_core::hilbert::expm_hermitian;
use tsvf_core::{c64, Operator, PureState, SubsystemLayout};

/// Deterministic normalized state of a `dim`-level system.
pub fn ramp_state(label: &str, dim: usize) -> PureState {
    let amps = (0..dim).map(|k| c64(1.0 + k as f64, 0.5 * k as f64 - 1.0)).collect();
    PureState::new(SubsystemLayout::single(label, dim).unwrap(), amps).unwrap().normalized()
}

/// Hermitian observable with eigenvalues `1..=dim`, rotated off the
/// computational basis.
pub fn rotated_observable(label: &str, dim: usize) -> Operator {
    let layout = SubsystemLayout::single(label, dim).unwrap();
    let vals: Vec<f64> = (1..=dim).map(|k| k as f64).collect();
    let d = Operator::diagonal(layout.clone(), &vals).unwrap();
    let g = generator(&layout);
    let u = expm_hermitian(&g, 0.7).unwrap();
    let m = u.matrix() * d.matrix() * u.matrix().adjoint();
    let m = (&m + m.adjoint()).map(|z| z * 0.5);
    Operator::hermitian(layout, m).unwrap()
}

fn generator(layout: &SubsystemLayout) -> Operator {
    let d = layout.dim();
    let rows: Vec<Vec<_>> = (0..d)
        .map(|i| {
            (0..d)
                .map(|j| match i.cmp(&j) {
                    std::cmp::Ordering::Equal => c64(i as f64, 0.0),
                    std::cmp::Ordering::Less => c64(1.0 / (1 + j - i) as f64, 0.3),
                    std::cmp::Ordering::Greater => c64(1.0 / (1 + i - j) as f64, -0.3),
                })
                .collect()
        })
        .collect();
    Operator::from_rows(layout.clone(), &rows).unwrap()
}

/// `n` qubits labelled `q0..`, each in the same real superposition.
pub fn qubit_register(n: usize) -> PureState {
    let one = |k: usize| PureState::from_real(SubsystemLayout::single(format!("q{k}"), 2).unwrap(), &[0.6, 0.8]).unwrap();
    (1..n).fold(one(0), |acc, k| tsvf_core::Tensor::tensor(&acc, &one(k)).unwrap())
}
