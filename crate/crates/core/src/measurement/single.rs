use num_complex::Complex64;

use super::{
    apply_final_boundary, coupling_unitary, decoherence_unitary, BoundarySelection, BranchReport, EnvironmentRegister,
    MeasurementScenario, PointerBasis, ScheduledStep, StepKind, UnitarityCheck,
};
use crate::{Error, Operator, PureState, Result, SubsystemLayout, Tensor};

pub const PARTICLE: &str = "particle";
pub const POINTER: &str = "pointer";

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SingleTimes {
    /// End of the coupling.
    pub t1: f64,
    /// Coupling duration.
    pub t_i: f64,
    /// Decoherence duration.
    pub t_d: f64,
    /// Time of the final boundary.
    pub t2: f64,
}

impl Default for SingleTimes {
    fn default() -> Self {
        Self { t1: 1.0, t_i: 0.1, t_d: 0.1, t2: 2.0 }
    }
}

/// One measurement of a two-level particle in the basis `|1⟩, |2⟩` with a
/// three-state pointer (READY, I, II) and an environment register.
#[derive(Debug, Clone, PartialEq)]
pub struct SingleMeasurementConfig {
    pub alpha: Complex64,
    pub beta: Complex64,
    /// Particle part of the final state, in the `|1⟩, |2⟩` basis.
    pub phi: [Complex64; 2],
    /// Pointer reading in the final state: 0 for I, 1 for II.
    pub selected: usize,
    pub env_qubits: usize,
    /// Cross-overlap of the two environment records.
    pub eps_orth: f64,
    /// When set, the final environment state is `ε_sel + r^{-1/2} ε_other`.
    pub boundary_ratio: Option<f64>,
    pub times: SingleTimes,
}

impl Default for SingleMeasurementConfig {
    fn default() -> Self {
        let h = Complex64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
        Self {
            alpha: h,
            beta: h,
            phi: [h, h],
            selected: 0,
            env_qubits: 3,
            eps_orth: 0.0,
            boundary_ratio: None,
            times: SingleTimes::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SingleMeasurementReport {
    pub scenario: MeasurementScenario,
    /// The two-state at the final time and the branch weights it implies.
    pub boundary: BoundarySelection,
    /// Particle alone before the coupling; the backward state already
    /// singles out the selected particle state.
    pub pre: BranchReport,
    /// Between decoherence and the final time.
    pub post: BranchReport,
    pub unitarity: UnitarityCheck,
}

pub fn run_single_measurement(cfg: &SingleMeasurementConfig) -> Result<SingleMeasurementReport> {
    let SingleTimes { t1, t_i, t_d, t2 } = cfg.times;
    if !(t_i > 0.0 && t_d > 0.0 && t1 - t_i > 0.0 && t2 > t1 + t_d) {
        return Err(Error::InvalidParameter(format!("times {:?} leave an empty window", cfg.times)));
    }
    if cfg.selected > 1 {
        return Err(Error::InvalidParameter(format!("selected reading {} is not 0 or 1", cfg.selected)));
    }
    let particle = SubsystemLayout::single(PARTICLE, 2)?;
    let basis = vec![PureState::basis(particle.clone(), 0)?, PureState::basis(particle.clone(), 1)?];
    let pointer = PointerBasis::standard(POINTER, &["I", "II"])?;
    let env = EnvironmentRegister::with_overlap("env", cfg.env_qubits, cfg.eps_orth)?;

    let psi = PureState::new(particle.clone(), vec![cfg.alpha, cfg.beta])?.normalized();
    let phi = PureState::new(particle, cfg.phi.to_vec())?.normalized();
    let initial = psi.tensor(pointer.ready())?.tensor(&env.ready_state()?)?;

    let sel = cfg.selected;
    let mut env_final = env.encoding_state(sel)?;
    if let Some(r) = cfg.boundary_ratio {
        if !(r > 0.0 && r.is_finite()) {
            return Err(Error::InvalidParameter(format!("boundary ratio must be positive, got {r}")));
        }
        let other = env.encoding_state(1 - sel)?;
        let v = env_final.amplitudes() + other.amplitudes() * Complex64::new(r.sqrt().recip(), 0.0);
        env_final = PureState::from_vector(env_final.layout().clone(), v)?;
    }
    let final_state = phi.tensor(pointer.outcome(sel)?)?.tensor(&env_final)?;

    let steps = vec![
        ScheduledStep::new("couple", StepKind::Couple, t1 - t_i, t1, coupling_unitary(&basis, &pointer)?)?,
        ScheduledStep::new("decohere", StepKind::Decohere, t1, t1 + t_d, decoherence_unitary(&pointer, &env)?)?,
    ];
    let scenario = MeasurementScenario::new(initial, final_state, t2, steps)?;

    let boundary = apply_final_boundary(&scenario.forward_at(t2)?, scenario.final_state(), &pointer, &[PARTICLE])?;

    let keep = [PARTICLE, POINTER];
    let pre_target = Operator::outer(&psi, &basis[sel])?;
    let pre = scenario.branch_report("pre", 0.5 * (t1 - t_i), &[PARTICLE], None, Some(&pre_target))?;
    let o = pointer.outcome(sel)?;
    let post_target = Operator::outer(&basis[sel].tensor(o)?, &phi.tensor(o)?)?;
    let post = scenario.branch_report("post", 0.5 * (t1 + t_d + t2), &keep, Some((&pointer, sel)), Some(&post_target))?;
    let unitarity = scenario.unitarity()?;
    Ok(SingleMeasurementReport { scenario, boundary, pre, post, unitarity })
}
