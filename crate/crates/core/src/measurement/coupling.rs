use nalgebra::DVector;
use num_complex::Complex64;

use super::{EnvironmentRegister, PointerBasis};
use crate::hilbert::{apply_local_raw, partial_trace_outer};
use crate::rules::check_basis;
use crate::{Error, Operator, PureState, Result, SubsystemLayout, Tensor};

/// States whose weight on a required component falls below `1 − READY_TOL`
/// are rejected.
const READY_TOL: f64 = 1e-10;

fn neg(op: &Operator) -> Operator {
    op.scale(Complex64::new(-1.0, 0.0))
}

/// `I − |a⟩⟨a| − |b⟩⟨b| + |b⟩⟨a| + |a⟩⟨b|` for orthonormal `a`, `b`:
/// exchanges the two states and fixes their complement.
fn exchange(a: &PureState, b: &PureState) -> Result<Operator> {
    let id = Operator::identity(a.layout().clone());
    if a == b {
        return Ok(id);
    }
    let aa = Operator::projector(a);
    let bb = Operator::projector(b);
    let ba = Operator::outer(b, a)?;
    let ab = Operator::outer(a, b)?;
    id.add(&neg(&aa))?.add(&neg(&bb))?.add(&ba)?.add(&ab)?.checked_unitary()
}

fn system_layout(system_basis: &[PureState]) -> Result<SubsystemLayout> {
    check_basis(system_basis)?;
    let l = system_basis[0].layout().clone();
    if l.len() != 1 {
        return Err(Error::InvalidParameter("measured system must be a single subsystem".into()));
    }
    Ok(l)
}

/// Fraction of `state`'s norm² inside the range of the local projector
/// `proj`.
pub(crate) fn projected_weight(state: &PureState, proj: &Operator) -> Result<f64> {
    let v = apply_local_raw(state.layout(), state.amplitudes(), proj)?;
    Ok(v.norm_squared() / state.amplitudes().norm_squared())
}

/// `Σ_k |s_k⟩⟨s_k| ⊗ W_k` on system ⊗ pointer, where `W_k` exchanges READY
/// with outcome `k`. Sends `|s_k⟩|READY⟩` to `|s_k⟩|outcome_k⟩`.
pub fn coupling_unitary(system_basis: &[PureState], pointer: &PointerBasis) -> Result<Operator> {
    let sys = system_layout(system_basis)?;
    if system_basis.len() != pointer.outcomes().len() {
        return Err(Error::InvalidParameter(format!(
            "{} system states but pointer `{}` has {} outcomes",
            system_basis.len(),
            pointer.label(),
            pointer.outcomes().len()
        )));
    }
    let layout = sys.concat(pointer.layout())?;
    let mut c = Operator::zeros(layout);
    for (s, o) in system_basis.iter().zip(pointer.outcomes()) {
        let term = Operator::projector(s).tensor(&exchange(pointer.ready(), o)?)?;
        c = c.add(&term)?;
    }
    c.checked_unitary()
}

/// `P_READY ⊗ I + Σ_k P_k ⊗ V_k + P_rest ⊗ I` on pointer ⊗ environment,
/// where `V_k` writes record `k` over the ready record.
pub fn decoherence_unitary(pointer: &PointerBasis, env: &EnvironmentRegister) -> Result<Operator> {
    if env.n_outcomes() < pointer.outcomes().len() {
        return Err(Error::InvalidParameter(format!(
            "environment holds {} records but pointer `{}` has {} outcomes",
            env.n_outcomes(),
            pointer.label(),
            pointer.outcomes().len()
        )));
    }
    let env_id = Operator::identity(env.layout());
    let mut rest = Operator::identity(pointer.layout().clone()).add(&neg(&pointer.ready_projector()))?;
    let mut d = pointer.ready_projector().tensor(&env_id)?;
    for k in 0..pointer.outcomes().len() {
        let pk = pointer.outcome_projector(k)?;
        rest = rest.add(&neg(&pk))?;
        d = d.add(&pk.tensor(&env.writer(k)?)?)?;
    }
    d.add(&rest.tensor(&env_id)?)?.checked_unitary()
}

/// `P_READY ⊗ I + (I − P_READY) ⊗ V_O†` on pointer ⊗ environment.
///
/// Acts trivially on any state whose pointer is READY, so in forward time
/// it leaves an unmeasured system alone. Read backward (its adjoint applied
/// to a backward ket), it writes the ortho record whenever the pointer is
/// away from READY.
pub fn backward_decoherence_unitary(pointer: &PointerBasis, env: &EnvironmentRegister) -> Result<Operator> {
    let env_id = Operator::identity(env.layout());
    let ready = pointer.ready_projector().tensor(&env_id)?;
    let moved = pointer.not_ready_projector().tensor(&env.ortho_writer()?.adjoint())?;
    ready.add(&moved)?.checked_unitary()
}

/// Von Neumann premeasurement `READY⊗|s_k⟩ → outcome_k⊗|s_k⟩`.
pub fn von_neumann_couple(state: &PureState, pointer: &PointerBasis, system_basis: &[PureState]) -> Result<PureState> {
    let c = coupling_unitary(system_basis, pointer)?;
    let w = projected_weight(state, &pointer.ready_projector())?;
    if w < 1.0 - READY_TOL {
        return Err(Error::PointerNotReady(w));
    }
    state.apply_local(&c)
}

/// Entangles each pointer outcome with its environment record.
pub fn decohere_forward(state: &PureState, pointer: &PointerBasis, env: &EnvironmentRegister) -> Result<PureState> {
    let d = decoherence_unitary(pointer, env)?;
    let w = projected_weight(state, &Operator::projector(&env.ready_state()?))?;
    if w < 1.0 - READY_TOL {
        return Err(Error::InvalidParameter(format!("environment not in its ready record (weight {w})")));
    }
    state.apply_local(&d)
}

/// Pointer reading of one system branch of a backward state after the
/// reversed coupling.
#[derive(Debug, Clone, PartialEq)]
pub struct BranchReading {
    /// `‖(|s_k⟩⟨s_k| ⊗ I)Φ‖ / ‖Φ‖`.
    pub coefficient: f64,
    /// Weight of READY in the branch's pointer state.
    pub ready_weight: f64,
    /// The branch's pointer state when it is orthogonal to READY.
    pub ortho: Option<PureState>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ReversedCoupling {
    pub state: PureState,
    pub readings: Vec<BranchReading>,
}

/// Runs the coupling backward on a backward-evolving ket (`C†|Φ⟩`) and
/// reads off, per system basis state, the amplitude and the pointer state
/// it ends in.
pub fn reverse_coupling(backward: &PureState, system_basis: &[PureState], pointer: &PointerBasis) -> Result<ReversedCoupling> {
    let c = coupling_unitary(system_basis, pointer)?;
    let state = backward.apply_local(&c.adjoint())?;
    let total = state.norm();
    let mut readings = Vec::with_capacity(system_basis.len());
    for s in system_basis {
        let v: DVector<Complex64> = apply_local_raw(state.layout(), state.amplitudes(), &Operator::projector(s))?;
        let coefficient = v.norm() / total;
        if coefficient < 1e-14 {
            readings.push(BranchReading { coefficient, ready_weight: 0.0, ortho: None });
            continue;
        }
        let branch = PureState::from_vector(state.layout().clone(), v)?;
        let rho = partial_trace_outer(&branch, &branch, &[pointer.label()])?;
        let tr = rho.trace().re;
        let ready_weight = rho.sandwich(pointer.ready(), pointer.ready())?.re / tr;
        let ortho = if ready_weight <= READY_TOL {
            let eig = rho.matrix().clone().symmetric_eigen();
            let top = (0..eig.eigenvalues.len())
                .max_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]))
                .expect("nonempty");
            let o = PureState::from_vector(pointer.layout().clone(), eig.eigenvectors.column(top).into_owned())?;
            pointer.check_orthogonal_to_ready(&o)?;
            Some(o)
        } else {
            None
        };
        readings.push(BranchReading { coefficient, ready_weight, ortho });
    }
    Ok(ReversedCoupling { state, readings })
}

/// Backward-evolving counterpart of a measurement: undoes the forward
/// record, runs the coupling in reverse, then lets the environment record
/// READY/ORTHO for the backward state.
pub fn backward_decohere(
    backward: &PureState,
    system_basis: &[PureState],
    pointer: &PointerBasis,
    env: &EnvironmentRegister,
) -> Result<ReversedCoupling> {
    let undone = backward.apply_local(&decoherence_unitary(pointer, env)?.adjoint())?;
    let rc = reverse_coupling(&undone, system_basis, pointer)?;
    let b = backward_decoherence_unitary(pointer, env)?;
    Ok(ReversedCoupling { state: rc.state.apply_local(&b.adjoint())?, readings: rc.readings })
}
