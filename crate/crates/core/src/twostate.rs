//! The two-state `⟨Φ| |Ψ⟩` and its operator form.
//!
//! The backward-evolving bra `⟨Φ|` is stored as the ket `|Φ⟩`; every use
//! site conjugates it. Under a propagator `U` both stored kets map by `U`,
//! which is the same as the bra picking up `U†` on the right.

use num_complex::Complex64;

use crate::hilbert::{partial_trace, partial_trace_outer, time_ordered_unitary, HERMITIAN_TOL};
use crate::{Error, Operator, PiecewiseHamiltonian, PureState, Result, SubsystemLayout};

/// Relative overlap below which forward and backward states count as
/// orthogonal.
pub const OVERLAP_TOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub struct TwoState {
    forward: PureState,
    backward: PureState,
}

impl TwoState {
    pub fn new(forward: PureState, backward: PureState) -> Result<Self> {
        forward.layout().ensure_same(backward.layout())?;
        let ts = Self { forward, backward };
        ts.check_overlap()?;
        Ok(ts)
    }

    fn check_overlap(&self) -> Result<()> {
        let ov = self.overlap().norm();
        if ov <= OVERLAP_TOL * self.forward.norm() * self.backward.norm() {
            return Err(Error::OrthogonalTwoState(ov));
        }
        Ok(())
    }

    pub fn forward(&self) -> &PureState {
        &self.forward
    }

    /// The backward state as a ket `|Φ⟩`.
    pub fn backward(&self) -> &PureState {
        &self.backward
    }

    pub fn layout(&self) -> &SubsystemLayout {
        self.forward.layout()
    }

    /// `⟨Φ|Ψ⟩`.
    pub fn overlap(&self) -> Complex64 {
        self.backward.amplitudes().dotc(self.forward.amplitudes())
    }

    pub fn density(&self) -> Result<TwoStateDensity> {
        make_two_state_density(self)
    }

    /// Applies the same propagator to both stored kets.
    pub fn evolve_unitary(&self, u: &Operator) -> Result<TwoState> {
        TwoState::new(self.forward.apply(u)?, self.backward.apply(u)?)
    }

    pub fn evolve(&self, h: &PiecewiseHamiltonian) -> Result<TwoState> {
        evolve_two_state(self, h)
    }

    /// Reduced two-state `Tr_rest |Ψ⟩⟨Φ| / ⟨Ψ|Φ⟩`, computed from the vectors.
    pub fn reduce<S: AsRef<str>>(&self, keep: &[S]) -> Result<Operator> {
        let m = partial_trace_outer(&self.forward, &self.backward, keep)?;
        Ok(m.scale(self.overlap().conj().inv()))
    }

    pub fn weak_value(&self, a: &Operator) -> Result<Complex64> {
        weak_value(self, a)
    }
}

/// `|Ψ⟩⟨Φ| / ⟨Ψ|Φ⟩`.
///
/// The denominator is `⟨Ψ|Φ⟩`, so the trace is `⟨Φ|Ψ⟩/⟨Ψ|Φ⟩`: unit modulus,
/// real only when the overlap is real.
#[derive(Debug, Clone, PartialEq)]
pub struct TwoStateDensity {
    op: Operator,
}

impl TwoStateDensity {
    pub fn layout(&self) -> &SubsystemLayout {
        self.op.layout()
    }

    pub fn as_operator(&self) -> &Operator {
        &self.op
    }

    pub fn into_operator(self) -> Operator {
        self.op
    }

    pub fn trace(&self) -> Complex64 {
        self.op.trace()
    }

    /// `U ρ U†`.
    pub fn conjugate_by(&self, u: &Operator) -> Result<TwoStateDensity> {
        let op = u.compose(&self.op)?.compose(&u.adjoint())?;
        Ok(TwoStateDensity { op })
    }

    /// Dense-route reduction.
    pub fn reduce<S: AsRef<str>>(&self, keep: &[S]) -> Result<Operator> {
        reduce_two_state(self, keep)
    }

    /// True when the operator is a Hermitian projector (`ρ = ρ†`, `ρ² = ρ`).
    pub fn is_hermitian_projector(&self, tol: f64) -> bool {
        let herm = self.op.hermitian_deviation() <= tol.max(HERMITIAN_TOL * self.op.max_abs());
        let sq = self.op.compose(&self.op).expect("same layout");
        herm && sq.max_abs_diff(&self.op).expect("same layout") <= tol
    }
}

pub fn make_two_state_density(ts: &TwoState) -> Result<TwoStateDensity> {
    ts.check_overlap()?;
    let denom = ts.overlap().conj();
    let op = Operator::outer(&ts.forward, &ts.backward)?.scale(denom.inv());
    Ok(TwoStateDensity { op })
}

pub fn evolve_two_state(ts: &TwoState, h: &PiecewiseHamiltonian) -> Result<TwoState> {
    ts.layout().ensure_same(h.layout())?;
    let u = time_ordered_unitary(h)?;
    ts.evolve_unitary(&u)
}

pub fn reduce_two_state<S: AsRef<str>>(d: &TwoStateDensity, keep: &[S]) -> Result<Operator> {
    partial_trace(&d.op, keep)
}

/// `⟨Φ|A|Ψ⟩ / ⟨Φ|Ψ⟩`. `A` may live on any subset of the two-state's
/// subsystems.
pub fn weak_value(ts: &TwoState, a: &Operator) -> Result<Complex64> {
    if !a.is_hermitian() {
        let dev = a.hermitian_deviation();
        if dev > HERMITIAN_TOL * a.max_abs() {
            return Err(Error::NotHermitian(dev));
        }
    }
    ts.check_overlap()?;
    let a_psi = ts.forward.apply_local(a).map(|s| s.into_amplitudes()).or_else(|e| match e {
        // A|Ψ⟩ may vanish (e.g. a projector annihilating Ψ)
        Error::InvalidNorm(0.0) => Ok(nalgebra::DVector::zeros(ts.forward.dim())),
        other => Err(other),
    })?;
    Ok(ts.backward.amplitudes().dotc(&a_psi) / ts.overlap())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::{c64, Tensor};
    use std::f64::consts::FRAC_1_SQRT_2 as H;

    fn q() -> SubsystemLayout {
        SubsystemLayout::single("q", 2).unwrap()
    }

    fn up_x() -> PureState {
        PureState::from_real(q(), &[H, H]).unwrap()
    }

    fn up_y() -> PureState {
        PureState::new(q(), vec![c64(H, 0.0), c64(0.0, H)]).unwrap()
    }

    #[test]
    fn equal_states_give_projector() {
        let z = PureState::basis(q(), 0).unwrap();
        let d = TwoState::new(z.clone(), z.clone()).unwrap().density().unwrap();
        assert_eq!(d.as_operator().matrix(), Operator::projector(&z).matrix());
    }

    #[test]
    fn up_x_forward_up_z_backward() {
        let ts = TwoState::new(up_x(), PureState::basis(q(), 0).unwrap()).unwrap();
        let m = ts.density().unwrap().into_operator().into_matrix();
        let expect = [[1.0, 0.0], [1.0, 0.0]];
        for i in 0..2 {
            for j in 0..2 {
                assert!((m[(i, j)] - c64(expect[i][j], 0.0)).norm() < 1e-15);
            }
        }
    }

    #[test]
    fn orthogonal_pair_is_rejected() {
        let r = TwoState::new(PureState::basis(q(), 0).unwrap(), PureState::basis(q(), 1).unwrap());
        assert!(matches!(r, Err(Error::OrthogonalTwoState(_))));
    }

    #[test]
    fn trace_is_a_phase() {
        let ts = TwoState::new(up_x(), up_y()).unwrap();
        let tr = ts.density().unwrap().trace();
        assert!((tr.norm() - 1.0).abs() < 1e-12);
        // ⟨Φ|Ψ⟩ = (1 − i)/2, so the trace is (1 − i)/(1 + i) = −i
        assert!((tr - c64(0.0, -1.0)).norm() < 1e-12);
    }

    #[test]
    fn weak_value_up_x_up_y_sigma_z_is_i() {
        let ts = TwoState::new(up_x(), up_y()).unwrap();
        let w = ts.weak_value(&Operator::sigma_z("q")).unwrap();
        assert!((w - c64(0.0, 1.0)).norm() < 1e-12);
    }

    #[test]
    fn weak_value_rejects_non_hermitian() {
        let ts = TwoState::new(up_x(), up_x()).unwrap();
        let m = nalgebra::DMatrix::from_row_slice(2, 2, &[c64(0., 0.), c64(1., 0.), c64(0., 0.), c64(0., 0.)]);
        let a = Operator::new(q(), m).unwrap();
        assert!(matches!(ts.weak_value(&a), Err(Error::NotHermitian(_))));
    }

    #[test]
    fn zero_hamiltonian_leaves_two_state_unchanged() {
        let ts = TwoState::new(up_x(), up_y()).unwrap();
        let h = PiecewiseHamiltonian::free(q(), 3.0).unwrap();
        assert_eq!(ts.evolve(&h).unwrap(), ts);
    }

    #[test]
    fn product_two_state_reduces_to_factor() {
        let chi = PureState::new(SubsystemLayout::single("e", 3).unwrap(), vec![c64(0.2, 0.1), c64(-0.4, 0.0), c64(0.5, 0.3)])
            .unwrap();
        let psi_a = up_x();
        let phi_a = up_y();
        let ts = TwoState::new(psi_a.tensor(&chi).unwrap(), phi_a.tensor(&chi).unwrap()).unwrap();
        let reduced = ts.reduce(&["q"]).unwrap();
        let direct = TwoState::new(psi_a, phi_a).unwrap().density().unwrap();
        assert!(reduced.max_abs_diff(direct.as_operator()).unwrap() < 1e-12);
        let dense = ts.density().unwrap().reduce(&["q"]).unwrap();
        assert!(dense.max_abs_diff(&reduced).unwrap() < 1e-12);
    }
}
