mod common;

use common::*;
use proptest::prelude::*;
use tsvf_core::twostate::weak_value;
use tsvf_core::{c64, Operator, PiecewiseHamiltonian, PureState, SubsystemLayout, TwoState};

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn identity_weak_value_is_one(seed in any::<u64>(), d in 2usize..6) {
        let mut r = rng(seed);
        let l = qudit("q", d);
        let ts = TwoState::new(random_state(&mut r, &l), random_state(&mut r, &l)).unwrap();
        prop_assert!(close(ts.weak_value(&Operator::identity(l)).unwrap(), c64(1.0, 0.0), 1e-12));
    }

    #[test]
    fn projector_weak_values_sum_to_one(seed in any::<u64>(), d in 2usize..6) {
        let mut r = rng(seed);
        let l = qudit("q", d);
        let ts = TwoState::new(random_state(&mut r, &l), random_state(&mut r, &l)).unwrap();
        let total: tsvf_core::Complex64 = (0..d)
            .map(|k| ts.weak_value(&Operator::projector(&PureState::basis(l.clone(), k).unwrap())).unwrap())
            .sum();
        prop_assert!(close(total, c64(1.0, 0.0), 1e-10));
    }

    #[test]
    fn rescaling_boundaries_changes_nothing(seed in any::<u64>(), s in 0.1f64..10.0, ph in 0.0f64..6.0) {
        let mut r = rng(seed);
        let l = qudit("q", 3);
        let (psi, phi) = (random_state(&mut r, &l), random_state(&mut r, &l));
        let a = random_hermitian(&mut r, &l);
        let base = TwoState::new(psi.clone(), phi.clone()).unwrap();
        let factor = c64(s * ph.cos(), s * ph.sin());
        let scaled = TwoState::new(psi.scaled(factor).unwrap(), phi.scaled(factor.conj() * 2.0).unwrap()).unwrap();
        prop_assert!(close(base.weak_value(&a).unwrap(), scaled.weak_value(&a).unwrap(), 1e-10));
        // complex factors survive in the density only as a phase
        let d0 = base.density().unwrap();
        let d1 = scaled.density().unwrap();
        prop_assert!(d1.as_operator().proportionality_residual(d0.as_operator()).unwrap() < 1e-10);
        prop_assert!((d1.trace().norm() - 1.0).abs() < 1e-10);
        let real = TwoState::new(psi.scaled(c64(s, 0.0)).unwrap(), phi.scaled(c64(2.0, 0.0)).unwrap()).unwrap();
        let dev = real.density().unwrap().as_operator().max_abs_diff(d0.as_operator()).unwrap();
        prop_assert!(dev < 1e-10 * d0.as_operator().max_abs().max(1.0));
    }

    #[test]
    fn evolution_composes(seed in any::<u64>(), t1 in 0.01f64..1.0, t2 in 0.01f64..1.0) {
        let mut r = rng(seed);
        let l = qudit("q", 3);
        let ts = TwoState::new(random_state(&mut r, &l), random_state(&mut r, &l)).unwrap();
        let h1 = PiecewiseHamiltonian::constant(random_hermitian(&mut r, &l), t1).unwrap();
        let h2 = PiecewiseHamiltonian::constant(random_hermitian(&mut r, &l), t2).unwrap();
        let stepwise = ts.evolve(&h1).unwrap().evolve(&h2).unwrap();
        let joined = ts.evolve(&h1.then(&h2).unwrap()).unwrap();
        prop_assert!(stepwise.forward().max_abs_diff(joined.forward()).unwrap() < 1e-12);
        prop_assert!(stepwise.backward().max_abs_diff(joined.backward()).unwrap() < 1e-12);
    }

    #[test]
    fn density_evolves_by_conjugation(seed in any::<u64>()) {
        let mut r = rng(seed);
        let l = qudit("q", 4);
        let ts = TwoState::new(random_state(&mut r, &l), random_state(&mut r, &l)).unwrap();
        let u = random_unitary(&mut r, &l);
        let via_kets = ts.evolve_unitary(&u).unwrap().density().unwrap();
        let via_density = ts.density().unwrap().conjugate_by(&u).unwrap();
        prop_assert!(via_kets.as_operator().max_abs_diff(via_density.as_operator()).unwrap() < 1e-10);
    }

    #[test]
    fn reduction_routes_agree(seed in any::<u64>()) {
        let mut r = rng(seed);
        let l = SubsystemLayout::new([("a", 2), ("b", 3)]).unwrap();
        let ts = TwoState::new(random_state(&mut r, &l), random_state(&mut r, &l)).unwrap();
        let direct = ts.reduce(&["b"]).unwrap();
        let dense = ts.density().unwrap().reduce(&["b"]).unwrap();
        prop_assert!(direct.max_abs_diff(&dense).unwrap() < 1e-12);
    }
}

/// With `Φ = Ψ` the weak value is the ordinary expectation value.
#[test]
fn equal_boundaries_give_expectation_values() {
    let mut r = rng(11);
    for k in 0..100 {
        let l = qudit("q", 2 + k % 4);
        let psi = random_state(&mut r, &l);
        let a = random_hermitian(&mut r, &l);
        let expect = psi.inner(&psi.apply(&a).unwrap()).unwrap();
        let wv = weak_value(&TwoState::new(psi.clone(), psi).unwrap(), &a).unwrap();
        assert!(close(wv, expect, 1e-10));
        assert!(wv.im.abs() < 1e-10);
    }
}

#[test]
fn up_x_up_y_sigma_z_is_i() {
    let l = qudit("s", 2);
    let h = std::f64::consts::FRAC_1_SQRT_2;
    let up_x = PureState::new(l.clone(), vec![c64(h, 0.0), c64(h, 0.0)]).unwrap();
    let up_y = PureState::new(l, vec![c64(h, 0.0), c64(0.0, h)]).unwrap();
    let ts = TwoState::new(up_x, up_y).unwrap();
    assert!(close(ts.weak_value(&Operator::sigma_z("s")).unwrap(), c64(0.0, 1.0), 1e-12));
}

#[test]
fn three_box_weak_values() {
    let l = qudit("box", 3);
    let s = 1.0 / 3f64.sqrt();
    let psi = PureState::from_real(l.clone(), &[s, s, s]).unwrap();
    let phi = PureState::from_real(l.clone(), &[s, s, -s]).unwrap();
    let ts = TwoState::new(psi, phi).unwrap();
    let wv: Vec<_> = (0..3)
        .map(|k| ts.weak_value(&Operator::projector(&PureState::basis(l.clone(), k).unwrap())).unwrap())
        .collect();
    for (got, want) in wv.iter().zip([1.0, 1.0, -1.0]) {
        assert!(close(*got, c64(want, 0.0), 1e-12));
    }
    assert!(close(wv.iter().sum(), c64(1.0, 0.0), 1e-12));
}
