//! Measurement models: pointer and environment registers, von Neumann
//! coupling, forward and backward decoherence, final-boundary branch
//! selection, a scheduled-scenario engine and the built-in scenarios.
//!
//! Pointer bases and environment records are inputs; nothing here derives
//! a preferred basis from an interaction Hamiltonian. Every step is a
//! unitary acting instantaneously at the end of its interval, so the
//! global state never collapses and the whole schedule can be inverted.

mod coupling;
mod environment;
mod pointer;
mod scenario;
mod sequential;
mod signaling;
mod single;

pub use coupling::{
    backward_decoherence_unitary, backward_decohere, coupling_unitary, decoherence_unitary,
    decohere_forward, reverse_coupling, von_neumann_couple, BranchReading, ReversedCoupling,
};
pub use environment::{EnvironmentRegister, QubitState};
pub use pointer::PointerBasis;
pub use scenario::{
    apply_final_boundary, BoundarySelection, BranchReport, MeasurementScenario, ScheduledStep,
    StepKind, UnitarityCheck, REVERSAL_TOL,
};
pub use sequential::{
    run_sequential_measurement, SequentialMeasurementConfig, SequentialMeasurementReport,
    SequentialTimes,
};
pub use signaling::{
    run_signaling, run_signaling_demo, signaling_final, signaling_initial, SignalingReport, SpinReading,
};
pub use single::{run_single_measurement, SingleMeasurementConfig, SingleMeasurementReport, SingleTimes};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::{PureState, Result, SubsystemLayout};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Axis {
    X,
    Y,
    Z,
}

/// Spin-½ eigenstate along `axis`, written in the `σz` basis with `|↑z⟩`
/// first.
pub fn spin_state(label: &str, axis: Axis, up: bool) -> Result<PureState> {
    let h = std::f64::consts::FRAC_1_SQRT_2;
    let s = if up { 1.0 } else { -1.0 };
    let amps = match axis {
        Axis::Z if up => [Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0)],
        Axis::Z => [Complex64::new(0.0, 0.0), Complex64::new(1.0, 0.0)],
        Axis::X => [Complex64::new(h, 0.0), Complex64::new(s * h, 0.0)],
        Axis::Y => [Complex64::new(h, 0.0), Complex64::new(0.0, s * h)],
    };
    PureState::new(SubsystemLayout::single(label, 2)?, amps.to_vec())
}

/// `[|↑⟩, |↓⟩]` along `axis`.
pub fn spin_basis(label: &str, axis: Axis) -> Result<Vec<PureState>> {
    Ok(vec![spin_state(label, axis, true)?, spin_state(label, axis, false)?])
}
