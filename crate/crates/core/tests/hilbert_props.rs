mod common;

use common::*;
use proptest::prelude::*;
use tsvf_core::hilbert::{expm_hermitian, partial_trace, partial_trace_outer};
use tsvf_core::{c64, embed_operator, time_ordered_unitary, Operator, PiecewiseHamiltonian, PureState, SubsystemLayout, Tensor};

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn unitaries_preserve_inner_products(seed in any::<u64>(), d in 2usize..6) {
        let mut r = rng(seed);
        let l = qudit("q", d);
        let (a, b) = (random_state(&mut r, &l), random_state(&mut r, &l));
        let u = random_unitary(&mut r, &l);
        let before = a.inner(&b).unwrap();
        let after = a.apply(&u).unwrap().inner(&b.apply(&u).unwrap()).unwrap();
        prop_assert!(close(before, after, 1e-12));
    }

    #[test]
    fn tensor_is_associative(seed in any::<u64>()) {
        let mut r = rng(seed);
        let (la, lb, lc) = (qudit("a", 2), qudit("b", 3), qudit("c", 2));
        let (a, b, c) = (random_state(&mut r, &la), random_state(&mut r, &lb), random_state(&mut r, &lc));
        let left = a.tensor(&b).unwrap().tensor(&c).unwrap();
        let right = a.tensor(&b.tensor(&c).unwrap()).unwrap();
        prop_assert!(left.max_abs_diff(&right).unwrap() < 1e-15);
        let (oa, ob) = (random_hermitian(&mut r, &la), random_hermitian(&mut r, &lb));
        let oc = random_hermitian(&mut r, &lc);
        let l = oa.tensor(&ob).unwrap().tensor(&oc).unwrap();
        let rr = oa.tensor(&ob.tensor(&oc).unwrap()).unwrap();
        prop_assert!(l.max_abs_diff(&rr).unwrap() < 1e-13);
    }

    #[test]
    fn concatenated_hamiltonians_multiply(seed in any::<u64>(), t1 in 0.01f64..2.0, t2 in 0.01f64..2.0) {
        let mut r = rng(seed);
        let l = qudit("q", 3);
        let h1 = PiecewiseHamiltonian::constant(random_hermitian(&mut r, &l), t1).unwrap();
        let h2 = PiecewiseHamiltonian::constant(random_hermitian(&mut r, &l), t2).unwrap();
        let joined = time_ordered_unitary(&h1.then(&h2).unwrap()).unwrap();
        let product = time_ordered_unitary(&h2).unwrap().compose(&time_ordered_unitary(&h1).unwrap()).unwrap();
        prop_assert!(joined.max_abs_diff(&product).unwrap() < 1e-12);
        prop_assert!(joined.unitary_deviation() < 1e-10);
    }

    #[test]
    fn local_application_matches_embedding(seed in any::<u64>()) {
        let mut r = rng(seed);
        let l = SubsystemLayout::new([("a", 2), ("b", 3), ("c", 2)]).unwrap();
        let psi = random_state(&mut r, &l);
        let op = random_unitary(&mut r, &SubsystemLayout::new([("c", 2), ("a", 2)]).unwrap());
        let local = psi.apply_local(&op).unwrap();
        let dense = psi.apply(&embed_operator(&op, &l).unwrap()).unwrap();
        prop_assert!(local.max_abs_diff(&dense).unwrap() < 1e-13);
    }

    #[test]
    fn partial_trace_routes_agree(seed in any::<u64>()) {
        let mut r = rng(seed);
        let l = SubsystemLayout::new([("a", 2), ("b", 3), ("c", 2)]).unwrap();
        let (psi, phi) = (random_state(&mut r, &l), random_state(&mut r, &l));
        let dense = partial_trace(&Operator::outer(&psi, &phi).unwrap(), &["c", "a"]).unwrap();
        let direct = partial_trace_outer(&psi, &phi, &["a", "c"]).unwrap();
        prop_assert!(dense.max_abs_diff(&direct).unwrap() < 1e-14);
        prop_assert!(close(dense.trace(), phi.inner(&psi).unwrap(), 1e-13));
    }
}

#[test]
fn product_state_reduces_to_factor() {
    let mut r = rng(7);
    let (la, lb) = (qudit("a", 3), qudit("b", 2));
    let (a, b) = (random_state(&mut r, &la), random_state(&mut r, &lb));
    let rho = partial_trace_outer(&a.tensor(&b).unwrap(), &a.tensor(&b).unwrap(), &["a"]).unwrap();
    assert!(rho.max_abs_diff(&Operator::projector(&a)).unwrap() < 1e-14);
}

/// Non-commuting segments against a first-order product of 10⁴ short
/// steps per segment, each exact to second order in the step.
#[test]
fn piecewise_propagator_matches_fine_steps() {
    let l = qudit("q", 2);
    let hx = Operator::sigma_x("q");
    let hz = Operator::sigma_z("q").scale(c64(0.7, 0.0));
    let h = PiecewiseHamiltonian::new(vec![(0.4, hx.clone()), (0.9, hz.clone()), (0.3, hx.add(&hz).unwrap())]).unwrap();
    let exact = time_ordered_unitary(&h).unwrap();

    let steps = 10_000usize;
    let mut acc = Operator::identity(l.clone());
    for seg in h.segments() {
        let dt = seg.duration / steps as f64;
        let step = expm_hermitian(&seg.generator, dt).unwrap();
        for _ in 0..steps {
            acc = step.compose(&acc).unwrap();
        }
    }
    assert!(exact.max_abs_diff(&acc).unwrap() < 1e-8);

    // order matters for these generators
    let swapped = PiecewiseHamiltonian::new(vec![(0.9, hz), (0.4, hx)]).unwrap();
    let forward = PiecewiseHamiltonian::new(vec![(0.4, Operator::sigma_x("q")), (0.9, Operator::sigma_z("q").scale(c64(0.7, 0.0)))]).unwrap();
    let d = time_ordered_unitary(&swapped).unwrap().max_abs_diff(&time_ordered_unitary(&forward).unwrap()).unwrap();
    assert!(d > 1e-3);
}

#[test]
fn zero_hamiltonian_is_identity() {
    let l = SubsystemLayout::qubits("q", 3).unwrap();
    let u = time_ordered_unitary(&PiecewiseHamiltonian::free(l.clone(), 5.0).unwrap()).unwrap();
    assert!(u.max_abs_diff(&Operator::identity(l.clone())).unwrap() == 0.0);
    let psi = PureState::basis(l, 3).unwrap();
    assert_eq!(psi.apply(&u).unwrap(), psi);
}
