use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::Serialize;

use super::PointerBasis;
use crate::hilbert::{apply_local_raw, embed_operator, IndexSplit};
use crate::{Error, Operator, PiecewiseHamiltonian, PureState, Result, SubsystemLayout, TwoState};

/// Tolerance for norm conservation and schedule reversal.
pub const REVERSAL_TOL: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum StepKind {
    Couple,
    Decohere,
    BackwardDecohere,
    FreeEvolution,
}

/// A local unitary acting over `[start, end]`. Observables are only
/// evaluated outside step intervals.
#[derive(Debug, Clone, PartialEq)]
pub struct ScheduledStep {
    pub name: String,
    pub kind: StepKind,
    pub start: f64,
    pub end: f64,
    pub unitary: Operator,
}

impl ScheduledStep {
    pub fn new(name: impl Into<String>, kind: StepKind, start: f64, end: f64, unitary: Operator) -> Result<Self> {
        if !(start.is_finite() && end.is_finite()) || start < 0.0 || end <= start {
            return Err(Error::InvalidParameter(format!("step interval [{start}, {end}] is invalid")));
        }
        Ok(Self { name: name.into(), kind, start, end, unitary: unitary.checked_unitary()? })
    }

    /// Free evolution under `h` starting at `start`.
    pub fn free_evolution(name: impl Into<String>, start: f64, h: &PiecewiseHamiltonian) -> Result<Self> {
        let u = crate::time_ordered_unitary(h)?;
        Self::new(name, StepKind::FreeEvolution, start, start + h.total_duration(), u)
    }
}

/// Norm drift along the forward schedule and the error of undoing it.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct UnitarityCheck {
    pub max_norm_deviation: f64,
    pub reversal_error: f64,
}

impl UnitarityCheck {
    pub fn passes(&self) -> bool {
        self.max_norm_deviation <= REVERSAL_TOL && self.reversal_error <= REVERSAL_TOL
    }
}

/// A closed system with a forward state fixed at `t = 0`, a backward state
/// fixed at `final_time`, and a schedule of local unitaries in between.
#[derive(Debug, Clone, PartialEq)]
pub struct MeasurementScenario {
    initial: PureState,
    final_state: PureState,
    final_time: f64,
    steps: Vec<ScheduledStep>,
}

impl MeasurementScenario {
    pub fn new(initial: PureState, final_state: PureState, final_time: f64, steps: Vec<ScheduledStep>) -> Result<Self> {
        initial.layout().ensure_same(final_state.layout())?;
        let mut prev_end = 0.0;
        for s in &steps {
            if s.start < prev_end {
                return Err(Error::InvalidParameter(format!(
                    "step `{}` starts at {} before the previous step ends at {prev_end}",
                    s.name, s.start
                )));
            }
            for sub in s.unitary.layout().subsystems() {
                if initial.layout().dim_of(&sub.label)? != sub.dim {
                    return Err(Error::LayoutMismatch(format!("step `{}` subsystem `{}`", s.name, sub.label)));
                }
            }
            prev_end = s.end;
        }
        if !final_time.is_finite() || final_time < prev_end {
            return Err(Error::InvalidParameter(format!(
                "final time {final_time} precedes the last step end {prev_end}"
            )));
        }
        let sc = Self { initial: initial.normalized(), final_state: final_state.normalized(), final_time, steps };
        let fwd = sc.forward_at(final_time)?;
        TwoState::new(fwd, sc.final_state.clone())?;
        Ok(sc)
    }

    pub fn layout(&self) -> &SubsystemLayout {
        self.initial.layout()
    }

    pub fn initial(&self) -> &PureState {
        &self.initial
    }

    pub fn final_state(&self) -> &PureState {
        &self.final_state
    }

    pub fn final_time(&self) -> f64 {
        self.final_time
    }

    pub fn steps(&self) -> &[ScheduledStep] {
        &self.steps
    }

    /// Open intervals between consecutive steps, including `(0, first)` and
    /// `(last, final_time)` when nonempty.
    pub fn windows(&self) -> Vec<(f64, f64)> {
        let mut edges = vec![0.0];
        for s in &self.steps {
            edges.push(s.start);
            edges.push(s.end);
        }
        edges.push(self.final_time);
        edges.chunks(2).map(|w| (w[0], w[1])).filter(|(a, b)| b > a).collect()
    }

    fn check_time(&self, t: f64) -> Result<()> {
        if t < 0.0 {
            return Err(Error::NegativeTime(t));
        }
        if t > self.final_time {
            return Err(Error::InvalidParameter(format!("time {t} lies after the final time {}", self.final_time)));
        }
        if let Some(s) = self.steps.iter().find(|s| s.start < t && t < s.end) {
            return Err(Error::InvalidParameter(format!("time {t} lies inside step `{}`", s.name)));
        }
        Ok(())
    }

    /// Forward state at `t`: every step ending at or before `t` applied.
    pub fn forward_at(&self, t: f64) -> Result<PureState> {
        self.check_time(t)?;
        let mut s = self.initial.clone();
        for step in self.steps.iter().filter(|s| s.end <= t) {
            s = s.apply_local(&step.unitary)?;
        }
        Ok(s)
    }

    /// Backward state at `t` as a ket: the final state with the adjoints of
    /// every step starting at or after `t` applied, latest first.
    pub fn backward_at(&self, t: f64) -> Result<PureState> {
        self.check_time(t)?;
        let mut s = self.final_state.clone();
        for step in self.steps.iter().rev().filter(|s| s.start >= t) {
            s = s.apply_local(&step.unitary.adjoint())?;
        }
        Ok(s)
    }

    pub fn two_state_at(&self, t: f64) -> Result<TwoState> {
        TwoState::new(self.forward_at(t)?, self.backward_at(t)?)
    }

    /// Forward state after each step, starting with the initial state.
    pub fn forward_trajectory(&self) -> Result<Vec<PureState>> {
        let mut out = vec![self.initial.clone()];
        for step in &self.steps {
            let next = out.last().expect("nonempty").apply_local(&step.unitary)?;
            out.push(next);
        }
        Ok(out)
    }

    /// Applies the inverse of the whole schedule.
    pub fn reverse(&self, state: &PureState) -> Result<PureState> {
        let mut s = state.clone();
        for step in self.steps.iter().rev() {
            s = s.apply_local(&step.unitary.adjoint())?;
        }
        Ok(s)
    }

    pub fn unitarity(&self) -> Result<UnitarityCheck> {
        let traj = self.forward_trajectory()?;
        let max_norm_deviation = traj.iter().map(|s| (s.norm() - 1.0).abs()).fold(0.0, f64::max);
        let back = self.reverse(traj.last().expect("nonempty"))?;
        Ok(UnitarityCheck { max_norm_deviation, reversal_error: back.max_abs_diff(&self.initial)? })
    }

    /// Reduced two-state over `keep` at time `t`, with branch bookkeeping for
    /// `pointer` when given. `target` is compared up to a complex factor.
    pub fn branch_report(
        &self,
        window: &str,
        t: f64,
        keep: &[&str],
        pointer: Option<(&PointerBasis, usize)>,
        target: Option<&Operator>,
    ) -> Result<BranchReport> {
        let ts = self.two_state_at(t)?;
        let reduced = ts.reduce(keep)?;
        let interval = self
            .windows()
            .into_iter()
            .find(|&(a, b)| a <= t && t <= b)
            .unwrap_or((t, t));
        let (selected, branch_weights, selected_weight, residual) = match pointer {
            None => (None, Vec::new(), 1.0, 0.0),
            Some((p, sel)) => {
                let q = block_weights(&ts, &reduced, p)?;
                let total: f64 = q.iter().sum();
                if total <= 0.0 {
                    return Err(Error::InconsistentBoundary);
                }
                let q: Vec<f64> = q.iter().map(|x| x / total).collect();
                let residual = q.iter().enumerate().filter(|(k, _)| *k != sel).map(|(_, x)| x).sum::<f64>();
                (Some(sel), q, 1.0 - residual, residual)
            }
        };
        let target_residual = target.map(|tg| reduced.proportionality_residual(tg)).transpose()?;
        Ok(BranchReport {
            window: window.to_string(),
            interval,
            time: t,
            keep: keep.iter().map(|s| s.to_string()).collect(),
            reduced,
            selected,
            branch_weights,
            selected_weight,
            residual,
            target_residual,
        })
    }
}

/// Per-pointer-outcome weight of the reduced two-state: the squared
/// Frobenius norm of `(P_k ⊗ I)ρ`, divided by the forward Born weight of
/// branch `k`. Equals `|⟨Φ_env|ε_k⟩|²` for a record-carrying backward
/// state, independent of the forward amplitudes.
fn block_weights(ts: &TwoState, reduced: &Operator, pointer: &PointerBasis) -> Result<Vec<f64>> {
    let psi = ts.forward();
    let mut out = Vec::with_capacity(pointer.outcomes().len());
    for k in 0..pointer.outcomes().len() {
        let pk = pointer.outcome_projector(k)?;
        let born = apply_local_raw(psi.layout(), psi.amplitudes(), &pk)?.norm_squared() / psi.amplitudes().norm_squared();
        if born < 1e-15 {
            out.push(0.0);
            continue;
        }
        let block = embed_operator(&pk, reduced.layout())?.compose(reduced)?;
        out.push(block.frobenius_norm().powi(2) / born);
    }
    Ok(out)
}

/// Reduced two-state in one time window with branch bookkeeping.
#[derive(Debug, Clone, PartialEq)]
pub struct BranchReport {
    pub window: String,
    pub interval: (f64, f64),
    pub time: f64,
    pub keep: Vec<String>,
    /// `Tr_rest |Ψ⟩⟨Φ| / ⟨Ψ|Φ⟩` over `keep`.
    pub reduced: Operator,
    pub selected: Option<usize>,
    /// Normalized block weights per pointer outcome; empty without a pointer.
    pub branch_weights: Vec<f64>,
    pub selected_weight: f64,
    pub residual: f64,
    /// `min_c ‖ρ − cT‖_F / ‖ρ‖_F` against the expected single-branch form.
    pub target_residual: Option<f64>,
}

/// Result of imposing a final boundary on a branched forward state.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundarySelection {
    pub two_state: TwoState,
    /// Born weight of each forward branch.
    pub born_weights: Vec<f64>,
    /// Weight of each forward branch inside the record space the final
    /// state allows.
    pub weights: Vec<f64>,
    pub selected: usize,
}

/// Pairs a branched forward state with a final boundary.
///
/// Branch `k` is `(P_k ⊗ I)|Ψ⟩` for pointer outcome `k`. Its weight is the
/// norm² of its projection onto `I_sys ⊗ span{(⟨s| ⊗ I)|Φ⟩}`, with `s`
/// ranging over the basis of the `system` subsystems: the records the
/// final state is compatible with.
pub fn apply_final_boundary(
    forward: &PureState,
    final_state: &PureState,
    pointer: &PointerBasis,
    system: &[&str],
) -> Result<BoundarySelection> {
    let two_state = TwoState::new(forward.normalized(), final_state.normalized()).map_err(|e| match e {
        Error::OrthogonalTwoState(_) => Error::InconsistentBoundary,
        other => other,
    })?;
    let (psi, phi) = (two_state.forward(), two_state.backward());
    let split = IndexSplit::new(psi.layout(), system)?;
    let (ns, nr) = (split.sub.len(), split.rest.len());

    let a = DMatrix::from_fn(nr, ns, |r, s| phi.amplitudes()[split.rest[r] + split.sub[s]]);
    let svd = a.svd(true, false);
    let u = svd.u.expect("requested");
    let smax = svd.singular_values.max();
    let cols: Vec<usize> = (0..svd.singular_values.len())
        .filter(|&i| svd.singular_values[i] > 1e-12 * smax)
        .collect();

    let mut born_weights = Vec::new();
    let mut weights = Vec::new();
    for k in 0..pointer.outcomes().len() {
        let v = apply_local_raw(psi.layout(), psi.amplitudes(), &pointer.outcome_projector(k)?)?;
        born_weights.push(v.norm_squared());
        let mut w = 0.0;
        for s in 0..ns {
            for &c in &cols {
                let amp: Complex64 = (0..nr).map(|r| u[(r, c)].conj() * v[split.rest[r] + split.sub[s]]).sum();
                w += amp.norm_sqr();
            }
        }
        weights.push(w);
    }
    let selected = (0..weights.len())
        .max_by(|&i, &j| weights[i].total_cmp(&weights[j]))
        .expect("pointer has outcomes");
    Ok(BoundarySelection { two_state, born_weights, weights, selected })
}
