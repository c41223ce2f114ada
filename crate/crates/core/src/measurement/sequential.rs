use num_complex::Complex64;

use super::{
    backward_decoherence_unitary, backward_decohere, coupling_unitary, decoherence_unitary, spin_basis, Axis,
    BranchReading, BranchReport, EnvironmentRegister, MeasurementScenario, PointerBasis, ScheduledStep, StepKind,
    UnitarityCheck,
};
use crate::hilbert::partial_trace_outer;
use crate::{Error, Operator, PureState, Result, SubsystemLayout, Tensor};

pub const SPIN: &str = "spin";
pub const POINTER_X: &str = "ptr_x";
pub const POINTER_Y: &str = "ptr_y";

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SequentialTimes {
    /// End of the x coupling.
    pub t1: f64,
    /// End of the y coupling.
    pub t2: f64,
    pub t_i: f64,
    pub t_d: f64,
    /// Time of the final boundary.
    pub t_f: f64,
}

impl Default for SequentialTimes {
    fn default() -> Self {
        Self { t1: 1.0, t2: 2.0, t_i: 0.1, t_d: 0.1, t_f: 3.0 }
    }
}

/// A spin-½ measured along x and then along y, each measurement followed by
/// decoherence into its own orthogonal environment register.
#[derive(Debug, Clone, PartialEq)]
pub struct SequentialMeasurementConfig {
    /// Initial spin `a|↑x⟩ + b|↓x⟩`.
    pub a: Complex64,
    pub b: Complex64,
    /// Spin part of the final state in the `σz` basis.
    pub phi: [Complex64; 2],
    /// Final x-pointer reading: 0 for U, 1 for D.
    pub x_reading: usize,
    pub y_reading: usize,
    pub env_qubits: usize,
    pub times: SequentialTimes,
}

impl Default for SequentialMeasurementConfig {
    fn default() -> Self {
        let h = Complex64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
        Self {
            a: h,
            b: h,
            phi: [Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0)],
            x_reading: 0,
            y_reading: 0,
            env_qubits: 3,
            times: SequentialTimes::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SequentialMeasurementReport {
    pub scenario: MeasurementScenario,
    /// Before the x measurement, spin only.
    pub pre: BranchReport,
    /// Between the two measurements.
    pub intermediate: BranchReport,
    /// After the y measurement.
    pub last: BranchReport,
    /// Backward spin state read off the pre-window reduced operator.
    pub effective_backward_spin: PureState,
    /// `|⟨s_x|χ⟩|` for the selected x eigenstate `s_x`.
    pub backward_spin_fidelity: f64,
    /// Forward reduced spin state before the x measurement.
    pub forward_spin_pre: Operator,
    /// Backward state run through the y measurement in reverse.
    pub y_reversal: Vec<BranchReading>,
    /// Backward state run through the x measurement in reverse.
    pub x_reversal: Vec<BranchReading>,
    pub unitarity: UnitarityCheck,
}

pub fn run_sequential_measurement(cfg: &SequentialMeasurementConfig) -> Result<SequentialMeasurementReport> {
    let SequentialTimes { t1, t2, t_i, t_d, t_f } = cfg.times;
    let lead = t_i + t_d;
    if !(t_i > 0.0 && t_d > 0.0 && t1 - lead > 0.0 && t2 - lead > t1 + t_d && t_f > t2 + t_d) {
        return Err(Error::InvalidParameter(format!("times {:?} leave an empty window", cfg.times)));
    }
    if cfg.x_reading > 1 || cfg.y_reading > 1 {
        return Err(Error::InvalidParameter("readings must be 0 (U) or 1 (D)".into()));
    }
    let xb = spin_basis(SPIN, Axis::X)?;
    let yb = spin_basis(SPIN, Axis::Y)?;
    let px = PointerBasis::standard(POINTER_X, &["U", "D"])?;
    let py = PointerBasis::standard(POINTER_Y, &["U", "D"])?;
    let ex = EnvironmentRegister::orthogonal("envx", cfg.env_qubits, 2)?;
    let ey = EnvironmentRegister::orthogonal("envy", cfg.env_qubits, 2)?;

    let spin = SubsystemLayout::single(SPIN, 2)?;
    let psi = PureState::from_vector(
        spin.clone(),
        xb[0].amplitudes() * cfg.a + xb[1].amplitudes() * cfg.b,
    )?
    .normalized();
    let phi = PureState::new(spin, cfg.phi.to_vec())?.normalized();
    let (xr, yr) = (cfg.x_reading, cfg.y_reading);
    let (ox, oy) = (px.outcome(xr)?, py.outcome(yr)?);

    let initial = psi
        .tensor(px.ready())?
        .tensor(py.ready())?
        .tensor(&ex.ready_state()?)?
        .tensor(&ey.ready_state()?)?;
    let final_state = phi
        .tensor(ox)?
        .tensor(oy)?
        .tensor(&ex.encoding_state(xr)?)?
        .tensor(&ey.encoding_state(yr)?)?;

    let measurement = |tag: &str, end: f64, basis: &[PureState], p: &PointerBasis, e: &EnvironmentRegister| {
        Ok::<_, Error>(vec![
            ScheduledStep::new(
                format!("backward_decohere_{tag}"),
                StepKind::BackwardDecohere,
                end - lead,
                end - t_i,
                backward_decoherence_unitary(p, e)?,
            )?,
            ScheduledStep::new(format!("couple_{tag}"), StepKind::Couple, end - t_i, end, coupling_unitary(basis, p)?)?,
            ScheduledStep::new(format!("decohere_{tag}"), StepKind::Decohere, end, end + t_d, decoherence_unitary(p, e)?)?,
        ])
    };
    let mut steps = measurement("x", t1, &xb, &px, &ex)?;
    steps.extend(measurement("y", t2, &yb, &py, &ey)?);
    let scenario = MeasurementScenario::new(initial, final_state, t_f, steps)?;

    let (sx, sy) = (&xb[xr], &yb[yr]);
    let keep = [SPIN, POINTER_X, POINTER_Y];

    let pre_target = Operator::outer(&psi, sx)?;
    let t_pre = 0.5 * (t1 - lead);
    let pre = scenario.branch_report("pre", t_pre, &[SPIN], None, Some(&pre_target))?;

    let mid_target = Operator::outer(&sx.tensor(ox)?.tensor(py.ready())?, &sy.tensor(ox)?.tensor(py.ready())?)?;
    let t_mid = 0.5 * (t1 + t_d + t2 - lead);
    let intermediate = scenario.branch_report("intermediate", t_mid, &keep, Some((&px, xr)), Some(&mid_target))?;

    let last_target = Operator::outer(&sy.tensor(ox)?.tensor(oy)?, &phi.tensor(ox)?.tensor(oy)?)?;
    let t_last = 0.5 * (t2 + t_d + t_f);
    let last = scenario.branch_report("final", t_last, &keep, Some((&py, yr)), Some(&last_target))?;

    let effective_backward_spin = backward_ket(&pre.reduced)?;
    let backward_spin_fidelity = sx.inner(&effective_backward_spin)?.norm();
    let fwd_pre = scenario.forward_at(t_pre)?;
    let forward_spin_pre = partial_trace_outer(&fwd_pre, &fwd_pre, &[SPIN])?;

    let y_reversal = backward_decohere(&scenario.backward_at(t2 + t_d)?, &yb, &py, &ey)?.readings;
    let x_reversal = backward_decohere(&scenario.backward_at(t1 + t_d)?, &xb, &px, &ex)?.readings;
    let unitarity = scenario.unitarity()?;

    Ok(SequentialMeasurementReport {
        scenario,
        pre,
        intermediate,
        last,
        effective_backward_spin,
        backward_spin_fidelity,
        forward_spin_pre,
        y_reversal,
        x_reversal,
        unitarity,
    })
}

/// `|χ⟩` of a rank-one operator `|u⟩⟨χ|`: the leading right singular vector.
fn backward_ket(rho: &Operator) -> Result<PureState> {
    let svd = rho.matrix().clone().svd(false, true);
    let vt = svd.v_t.expect("requested");
    let lead = (0..svd.singular_values.len())
        .max_by(|&a, &b| svd.singular_values[a].total_cmp(&svd.singular_values[b]))
        .expect("nonempty");
    let v = vt.row(lead).adjoint();
    PureState::from_vector(rho.layout().clone(), v)
}
