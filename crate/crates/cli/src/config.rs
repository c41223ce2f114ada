//! Scenario configuration files.
//!
//! A config is a TOML document with a top-level `kind` and at most one
//! section named after that kind. Complex numbers are `[re, im]` pairs and
//! matrices are lists of rows. Every parameter has a default, so
//! `kind = "signaling"` alone is a complete config.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use tsvf_core::hilbert::{embed_operator, ORTHO_TOL};
use tsvf_core::measurement::{
    spin_state, Axis, SequentialMeasurementConfig, SequentialTimes, SingleMeasurementConfig, SingleTimes,
};
use tsvf_core::robustness::{CollapseTarget, DecayModel, DEFAULT_COLLAPSED, DEFAULT_OVERLAPS, DEFAULT_TOTALS};
use tsvf_core::rules::{abl_probability, Spectrum};
use tsvf_core::{Complex64, Operator, PureState, SubsystemLayout};

/// `[re, im]`.
pub type C = [f64; 2];
/// Row-major matrix of `[re, im]` entries.
pub type Matrix = Vec<Vec<C>>;

const FRAC: f64 = std::f64::consts::FRAC_1_SQRT_2;

#[derive(Debug, thiserror::Error, PartialEq)]
pub enum ConfigError {
    #[error("cannot read {path}: {message}")]
    Io { path: PathBuf, message: String },
    #[error("parse error at line {line}, column {column}: {message}")]
    Parse { line: usize, column: usize, message: String },
    #[error("invalid `{path}`: {message}")]
    Invalid { path: String, message: String },
}

fn invalid(path: impl Into<String>, message: impl std::fmt::Display) -> ConfigError {
    ConfigError::Invalid { path: path.into(), message: message.to_string() }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ScenarioKind {
    SingleMeasurement,
    SequentialMeasurement,
    Signaling,
    BornEnsemble,
    RobustnessSweep,
    AblQuery,
    WeakValueQuery,
}

impl ScenarioKind {
    pub const ALL: [ScenarioKind; 7] = [
        ScenarioKind::SingleMeasurement,
        ScenarioKind::SequentialMeasurement,
        ScenarioKind::Signaling,
        ScenarioKind::BornEnsemble,
        ScenarioKind::RobustnessSweep,
        ScenarioKind::AblQuery,
        ScenarioKind::WeakValueQuery,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            ScenarioKind::SingleMeasurement => "single_measurement",
            ScenarioKind::SequentialMeasurement => "sequential_measurement",
            ScenarioKind::Signaling => "signaling",
            ScenarioKind::BornEnsemble => "born_ensemble",
            ScenarioKind::RobustnessSweep => "robustness_sweep",
            ScenarioKind::AblQuery => "abl_query",
            ScenarioKind::WeakValueQuery => "weak_value_query",
        }
    }

    pub fn description(&self) -> &'static str {
        match self {
            ScenarioKind::SingleMeasurement => "one measurement with pointer, environment and final boundary",
            ScenarioKind::SequentialMeasurement => "spin measured along x then y, reduced two-states per window",
            ScenarioKind::Signaling => "entangled pair with a known final state",
            ScenarioKind::BornEnsemble => "Born statistics from an ensemble of sampled final states",
            ScenarioKind::RobustnessSweep => "robustness ratios over a grid of overlaps and sizes",
            ScenarioKind::AblQuery => "ABL probabilities for given boundaries and observable",
            ScenarioKind::WeakValueQuery => "weak values for given boundaries and observables",
        }
    }

    pub fn is_stochastic(&self) -> bool {
        matches!(self, ScenarioKind::BornEnsemble)
    }
}

impl std::fmt::Display for ScenarioKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    pub kind: ScenarioKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub single_measurement: Option<SingleParams>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sequential_measurement: Option<SequentialParams>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub signaling: Option<SignalingParams>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub born_ensemble: Option<EnsembleParams>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub robustness_sweep: Option<SweepParams>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub abl_query: Option<AblParams>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub weak_value_query: Option<WeakParams>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SingleParams {
    pub alpha: C,
    pub beta: C,
    pub phi: [C; 2],
    /// `"I"` or `"II"`.
    pub selected: String,
    pub env_qubits: usize,
    pub eps_orth: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub boundary_ratio: Option<f64>,
    pub times: SingleTimesParams,
}

impl Default for SingleParams {
    fn default() -> Self {
        Self {
            alpha: [FRAC, 0.0],
            beta: [FRAC, 0.0],
            phi: [[FRAC, 0.0], [FRAC, 0.0]],
            selected: "I".into(),
            env_qubits: 3,
            eps_orth: 0.0,
            boundary_ratio: None,
            times: SingleTimesParams::default(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SingleTimesParams {
    pub t1: f64,
    pub t_i: f64,
    pub t_d: f64,
    pub t2: f64,
}

impl Default for SingleTimesParams {
    fn default() -> Self {
        let SingleTimes { t1, t_i, t_d, t2 } = SingleTimes::default();
        Self { t1, t_i, t_d, t2 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SequentialParams {
    pub a: C,
    pub b: C,
    pub phi: [C; 2],
    /// `"U"` or `"D"`.
    pub x_reading: String,
    pub y_reading: String,
    pub env_qubits: usize,
    pub times: SequentialTimesParams,
}

impl Default for SequentialParams {
    fn default() -> Self {
        Self {
            a: [FRAC, 0.0],
            b: [FRAC, 0.0],
            phi: [[1.0, 0.0], [0.0, 0.0]],
            x_reading: "U".into(),
            y_reading: "U".into(),
            env_qubits: 3,
            times: SequentialTimesParams::default(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SequentialTimesParams {
    pub t1: f64,
    pub t2: f64,
    pub t_i: f64,
    pub t_d: f64,
    pub t_f: f64,
}

impl Default for SequentialTimesParams {
    fn default() -> Self {
        let SequentialTimes { t1, t2, t_i, t_d, t_f } = SequentialTimes::default();
        Self { t1, t2, t_i, t_d, t_f }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SignalingParams {
    /// Both branches are reported when absent.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub alice_acts: Option<bool>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct EnsembleParams {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub layout: Option<Vec<(String, usize)>>,
    pub initial: Vec<C>,
    pub observable: Matrix,
    pub samples: u64,
}

impl Default for EnsembleParams {
    fn default() -> Self {
        Self {
            layout: None,
            initial: vec![[FRAC, 0.0], [FRAC, 0.0]],
            observable: vec![vec![[1.0, 0.0], [0.0, 0.0]], vec![[0.0, 0.0], [-1.0, 0.0]]],
            samples: 100_000,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SweepParams {
    pub overlaps: Vec<f64>,
    pub totals: Vec<usize>,
    pub collapsed: Vec<usize>,
    pub target: CollapseTarget,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub decay: Option<DecayParams>,
}

impl Default for SweepParams {
    fn default() -> Self {
        Self {
            overlaps: DEFAULT_OVERLAPS.to_vec(),
            totals: DEFAULT_TOTALS.to_vec(),
            collapsed: DEFAULT_COLLAPSED.to_vec(),
            target: CollapseTarget::First,
            decay: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DecayParams {
    pub n0: f64,
    pub lifetime: f64,
    pub times: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AblParams {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub layout: Option<Vec<(String, usize)>>,
    pub initial: Vec<C>,
    #[serde(rename = "final")]
    pub final_state: Vec<C>,
    pub observable: Matrix,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WeakParams {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub layout: Option<Vec<(String, usize)>>,
    pub initial: Vec<C>,
    #[serde(rename = "final")]
    pub final_state: Vec<C>,
    pub observables: Vec<NamedObservable>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NamedObservable {
    pub name: String,
    /// Subsystems the matrix acts on; the whole layout when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub on: Option<Vec<String>>,
    pub matrix: Matrix,
}

fn line_column(text: &str, offset: usize) -> (usize, usize) {
    let before = &text[..offset.min(text.len())];
    let line = before.matches('\n').count() + 1;
    let column = before.rsplit('\n').next().map_or(0, |l| l.chars().count()) + 1;
    (line, column)
}

/// Parses a config without semantic validation.
pub fn parse_config(text: &str) -> Result<ScenarioConfig, ConfigError> {
    let cfg: ScenarioConfig = toml::from_str(text).map_err(|e| {
        let (line, column) = e.span().map_or((1, 1), |s| line_column(text, s.start));
        ConfigError::Parse { line, column, message: e.message().trim().to_string() }
    })?;
    let present = [
        (ScenarioKind::SingleMeasurement, cfg.single_measurement.is_some()),
        (ScenarioKind::SequentialMeasurement, cfg.sequential_measurement.is_some()),
        (ScenarioKind::Signaling, cfg.signaling.is_some()),
        (ScenarioKind::BornEnsemble, cfg.born_ensemble.is_some()),
        (ScenarioKind::RobustnessSweep, cfg.robustness_sweep.is_some()),
        (ScenarioKind::AblQuery, cfg.abl_query.is_some()),
        (ScenarioKind::WeakValueQuery, cfg.weak_value_query.is_some()),
    ];
    if let Some((other, _)) = present.iter().find(|(k, p)| *p && *k != cfg.kind) {
        return Err(invalid(other.name(), format!("section does not match kind `{}`", cfg.kind)));
    }
    Ok(cfg)
}

/// Reads, parses and validates a config file.
/// Reads and parses a config without validating it.
pub fn read_config(path: &Path) -> Result<ScenarioConfig, ConfigError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| ConfigError::Io { path: path.to_path_buf(), message: e.to_string() })?;
    parse_config(&text)
}

pub fn load_config(path: &Path) -> Result<(ScenarioConfig, Vec<String>), ConfigError> {
    let cfg = read_config(path)?;
    let notes = validate(&cfg)?;
    Ok((cfg, notes))
}

/// Checks everything a run needs and returns normalization notes.
pub fn validate(cfg: &ScenarioConfig) -> Result<Vec<String>, ConfigError> {
    let mut notes = Vec::new();
    resolve(cfg, &mut notes)?;
    Ok(notes)
}

/// A config turned into core inputs. States are normalized.
#[derive(Debug, Clone)]
pub enum Resolved {
    Single(SingleMeasurementConfig),
    Sequential(SequentialMeasurementConfig),
    Signaling(Vec<bool>),
    Ensemble { initial: PureState, observable: Operator, samples: u64, seed: u64 },
    Sweep { params: SweepParams, decay: Option<(DecayModel, Vec<f64>)> },
    Abl { initial: PureState, final_state: PureState, observable: Operator },
    Weak { initial: PureState, final_state: PureState, observables: Vec<(String, Operator)> },
}

fn complex(c: &C) -> Complex64 {
    Complex64::new(c[0], c[1])
}

fn finite(path: &str, c: &[C]) -> Result<(), ConfigError> {
    if c.iter().flatten().any(|x| !x.is_finite()) {
        return Err(invalid(path, "entries must be finite"));
    }
    Ok(())
}

fn layout(path: &str, spec: &Option<Vec<(String, usize)>>, dim: usize) -> Result<SubsystemLayout, ConfigError> {
    match spec {
        None => SubsystemLayout::single("q", dim).map_err(|e| invalid(path, e)),
        Some(parts) => SubsystemLayout::new(parts.iter().cloned()).map_err(|e| invalid(path, e)),
    }
}

fn state(path: &str, l: &SubsystemLayout, amps: &[C], notes: &mut Vec<String>) -> Result<PureState, ConfigError> {
    finite(path, amps)?;
    if amps.len() != l.dim() {
        return Err(invalid(path, format!("expected {} amplitudes, found {}", l.dim(), amps.len())));
    }
    let s = PureState::new(l.clone(), amps.iter().map(complex).collect()).map_err(|e| invalid(path, e))?;
    let n = s.norm();
    if (n - 1.0).abs() > 1e-12 {
        notes.push(format!("`{path}` normalized (norm was {n})"));
    }
    Ok(s.normalized())
}

fn amplitude_pair(path: &str, pair: [&C; 2], notes: &mut Vec<String>) -> Result<[Complex64; 2], ConfigError> {
    let l = SubsystemLayout::single("x", 2).expect("valid");
    let s = state(path, &l, &[*pair[0], *pair[1]], notes)?;
    Ok([s.amplitudes()[0], s.amplitudes()[1]])
}

fn matrix(path: &str, l: &SubsystemLayout, m: &Matrix) -> Result<Operator, ConfigError> {
    let d = l.dim();
    if m.len() != d || m.iter().any(|r| r.len() != d) {
        return Err(invalid(path, format!("expected a {d}x{d} matrix")));
    }
    for r in m {
        finite(path, r)?;
    }
    let rows: Vec<Vec<Complex64>> = m.iter().map(|r| r.iter().map(complex).collect()).collect();
    let op = Operator::from_rows(l.clone(), &rows).map_err(|e| invalid(path, e))?;
    op.checked_hermitian().map_err(|e| invalid(path, e))
}

fn observable(path: &str, l: &SubsystemLayout, m: &Matrix) -> Result<Operator, ConfigError> {
    let op = matrix(path, l, m)?;
    Spectrum::of(&op).map_err(|e| invalid(path, e))?;
    Ok(op)
}

fn reading(path: &str, value: &str, names: [&str; 2]) -> Result<usize, ConfigError> {
    names
        .iter()
        .position(|n| *n == value)
        .ok_or_else(|| invalid(path, format!("expected \"{}\" or \"{}\", found \"{value}\"", names[0], names[1])))
}

fn positive_times(path: &str, times: &[f64]) -> Result<(), ConfigError> {
    if times.iter().any(|t| !t.is_finite() || *t < 0.0) {
        return Err(invalid(path, "times must be finite and nonnegative"));
    }
    Ok(())
}

pub fn resolve(cfg: &ScenarioConfig, notes: &mut Vec<String>) -> Result<Resolved, ConfigError> {
    match cfg.kind {
        ScenarioKind::SingleMeasurement => {
            let p = cfg.single_measurement.clone().unwrap_or_default();
            let s = "single_measurement";
            let [alpha, beta] = amplitude_pair(&format!("{s}.alpha"), [&p.alpha, &p.beta], notes)?;
            let phi = amplitude_pair(&format!("{s}.phi"), [&p.phi[0], &p.phi[1]], notes)?;
            let selected = reading(&format!("{s}.selected"), &p.selected, ["I", "II"])?;
            if !(0.0..1.0).contains(&p.eps_orth) {
                return Err(invalid(format!("{s}.eps_orth"), "must lie in [0, 1)"));
            }
            if p.env_qubits == 0 || p.env_qubits > 12 {
                return Err(invalid(format!("{s}.env_qubits"), "must lie in 1..=12"));
            }
            if let Some(r) = p.boundary_ratio {
                if !(r > 0.0 && r.is_finite()) {
                    return Err(invalid(format!("{s}.boundary_ratio"), "must be positive"));
                }
            }
            let t = p.times;
            positive_times(&format!("{s}.times"), &[t.t1, t.t_i, t.t_d, t.t2])?;
            if !(t.t_i > 0.0 && t.t_d > 0.0 && t.t1 > t.t_i && t.t2 > t.t1 + t.t_d) {
                return Err(invalid(format!("{s}.times"), "need 0 < t_i < t1 and t1 + t_d < t2 with t_i, t_d > 0"));
            }
            let amp = [alpha, beta][selected];
            if amp.norm() * phi[selected].norm() <= ORTHO_TOL {
                return Err(invalid(format!("{s}.selected"), "final boundary is orthogonal to the evolved state"));
            }
            Ok(Resolved::Single(SingleMeasurementConfig {
                alpha,
                beta,
                phi,
                selected,
                env_qubits: p.env_qubits,
                eps_orth: p.eps_orth,
                boundary_ratio: p.boundary_ratio,
                times: SingleTimes { t1: t.t1, t_i: t.t_i, t_d: t.t_d, t2: t.t2 },
            }))
        }
        ScenarioKind::SequentialMeasurement => {
            let p = cfg.sequential_measurement.clone().unwrap_or_default();
            let s = "sequential_measurement";
            let [a, b] = amplitude_pair(&format!("{s}.a"), [&p.a, &p.b], notes)?;
            let phi = amplitude_pair(&format!("{s}.phi"), [&p.phi[0], &p.phi[1]], notes)?;
            let x_reading = reading(&format!("{s}.x_reading"), &p.x_reading, ["U", "D"])?;
            let y_reading = reading(&format!("{s}.y_reading"), &p.y_reading, ["U", "D"])?;
            if p.env_qubits < 2 || p.env_qubits > 6 {
                return Err(invalid(format!("{s}.env_qubits"), "must lie in 2..=6"));
            }
            let t = p.times;
            positive_times(&format!("{s}.times"), &[t.t1, t.t2, t.t_i, t.t_d, t.t_f])?;
            let lead = t.t_i + t.t_d;
            if !(t.t_i > 0.0 && t.t_d > 0.0 && t.t1 > lead && t.t2 - lead > t.t1 + t.t_d && t.t_f > t.t2 + t.t_d) {
                return Err(invalid(
                    format!("{s}.times"),
                    "need t_i + t_d < t1, t1 + t_d < t2 - t_i - t_d and t2 + t_d < t_f",
                ));
            }
            let sy = spin_state("s", Axis::Y, y_reading == 0).expect("valid");
            let phi_state = PureState::new(sy.layout().clone(), phi.to_vec()).expect("valid");
            let amp = [a, b][x_reading];
            if amp.norm() * sy.inner(&phi_state).expect("same layout").norm() <= ORTHO_TOL {
                return Err(invalid(s, "final boundary is orthogonal to the evolved state"));
            }
            Ok(Resolved::Sequential(SequentialMeasurementConfig {
                a,
                b,
                phi,
                x_reading,
                y_reading,
                env_qubits: p.env_qubits,
                times: SequentialTimes { t1: t.t1, t2: t.t2, t_i: t.t_i, t_d: t.t_d, t_f: t.t_f },
            }))
        }
        ScenarioKind::Signaling => {
            let p = cfg.signaling.clone().unwrap_or_default();
            Ok(Resolved::Signaling(p.alice_acts.map_or(vec![false, true], |a| vec![a])))
        }
        ScenarioKind::BornEnsemble => {
            let p = cfg.born_ensemble.clone().unwrap_or_default();
            let s = "born_ensemble";
            let seed = cfg.seed.ok_or_else(|| invalid("seed", "required for stochastic scenarios"))?;
            let l = layout(&format!("{s}.layout"), &p.layout, p.initial.len())?;
            let initial = state(&format!("{s}.initial"), &l, &p.initial, notes)?;
            let observable = observable(&format!("{s}.observable"), &l, &p.observable)?;
            if p.samples == 0 {
                return Err(invalid(format!("{s}.samples"), "must be positive"));
            }
            Ok(Resolved::Ensemble { initial, observable, samples: p.samples, seed })
        }
        ScenarioKind::RobustnessSweep => {
            let p = cfg.robustness_sweep.clone().unwrap_or_default();
            let s = "robustness_sweep";
            if p.overlaps.is_empty() || p.totals.is_empty() || p.collapsed.is_empty() {
                return Err(invalid(s, "overlaps, totals and collapsed must be nonempty"));
            }
            if let Some(c) = p.overlaps.iter().find(|c| !(0.0..=1.0).contains(*c)) {
                return Err(invalid(format!("{s}.overlaps"), format!("{c} is outside [0, 1]")));
            }
            if p.totals.contains(&0) {
                return Err(invalid(format!("{s}.totals"), "particle counts must be positive"));
            }
            let decay = match &p.decay {
                None => None,
                Some(d) => {
                    let m = DecayModel::new(d.n0, d.lifetime).map_err(|e| invalid(format!("{s}.decay"), e))?;
                    positive_times(&format!("{s}.decay.times"), &d.times)?;
                    Some((m, d.times.clone()))
                }
            };
            Ok(Resolved::Sweep { params: p, decay })
        }
        ScenarioKind::AblQuery => {
            let s = "abl_query";
            let p = cfg.abl_query.as_ref().ok_or_else(|| invalid(s, "section is required"))?;
            let l = layout(&format!("{s}.layout"), &p.layout, p.initial.len())?;
            let initial = state(&format!("{s}.initial"), &l, &p.initial, notes)?;
            let final_state = state(&format!("{s}.final"), &l, &p.final_state, notes)?;
            let observable = observable(&format!("{s}.observable"), &l, &p.observable)?;
            abl_probability(&initial, &final_state, &observable).map_err(|e| invalid(format!("{s}.final"), e))?;
            Ok(Resolved::Abl { initial, final_state, observable })
        }
        ScenarioKind::WeakValueQuery => {
            let s = "weak_value_query";
            let p = cfg.weak_value_query.as_ref().ok_or_else(|| invalid(s, "section is required"))?;
            let l = layout(&format!("{s}.layout"), &p.layout, p.initial.len())?;
            let initial = state(&format!("{s}.initial"), &l, &p.initial, notes)?;
            let final_state = state(&format!("{s}.final"), &l, &p.final_state, notes)?;
            let ov = final_state.inner(&initial).map_err(|e| invalid(format!("{s}.final"), e))?.norm();
            if ov <= ORTHO_TOL {
                return Err(invalid(format!("{s}.final"), format!("orthogonal to the initial state (overlap {ov:e})")));
            }
            let mut observables = Vec::new();
            for (k, o) in p.observables.iter().enumerate() {
                let path = format!("{s}.observables[{k}]");
                let sub = match &o.on {
                    None => l.clone(),
                    Some(labels) => l.restrict(labels).map_err(|e| invalid(format!("{path}.on"), e))?,
                };
                let op = matrix(&format!("{path}.matrix"), &sub, &o.matrix)?;
                let op = embed_operator(&op, &l).map_err(|e| invalid(&path, e))?;
                observables.push((o.name.clone(), op));
            }
            if observables.is_empty() {
                return Err(invalid(format!("{s}.observables"), "at least one observable is required"));
            }
            Ok(Resolved::Weak { initial, final_state, observables })
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const THREE_BOX: &str = r#"
kind = "abl_query"

[abl_query]
layout = [["box", 3]]
initial = [[1, 0], [1, 0], [1, 0]]
final = [[1, 0], [1, 0], [-1, 0]]
observable = [
  [[1, 0], [0, 0], [0, 0]],
  [[0, 0], [2.5, 0], [-0.5, 0]],
  [[0, 0], [-0.5, 0], [2.5, 0]],
]
"#;

    #[test]
    fn minimal_abl_config_parses() {
        let cfg = parse_config(THREE_BOX).unwrap();
        assert_eq!(cfg.kind, ScenarioKind::AblQuery);
        let notes = validate(&cfg).unwrap();
        assert_eq!(notes.len(), 2);
        assert!(notes[0].contains("abl_query.initial"));
    }

    #[test]
    fn kind_alone_uses_defaults() {
        for kind in ["signaling", "single_measurement", "sequential_measurement", "robustness_sweep"] {
            let cfg = parse_config(&format!("kind = \"{kind}\"\n")).unwrap();
            validate(&cfg).unwrap();
        }
    }

    #[test]
    fn syntax_errors_carry_position() {
        let err = parse_config("kind = \"abl_query\"\n[abl_query\n").unwrap_err();
        assert!(matches!(err, ConfigError::Parse { line: 2, .. }), "{err:?}");
        let err = parse_config("kind = \"signaling\"\n[signaling]\nalice = true\n").unwrap_err();
        match err {
            ConfigError::Parse { line, message, .. } => {
                assert_eq!(line, 3);
                assert!(message.contains("alice"));
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn mismatched_section_is_rejected() {
        let err = parse_config("kind = \"signaling\"\n[robustness_sweep]\n").unwrap_err();
        assert!(matches!(err, ConfigError::Invalid { ref path, .. } if path == "robustness_sweep"));
    }

    #[test]
    fn orthogonal_boundaries_are_rejected() {
        let text = r#"
kind = "weak_value_query"
[weak_value_query]
initial = [[1, 0], [0, 0]]
final = [[0, 0], [1, 0]]
observables = [{ name = "z", matrix = [[[1, 0], [0, 0]], [[0, 0], [-1, 0]]] }]
"#;
        let err = validate(&parse_config(text).unwrap()).unwrap_err();
        assert!(matches!(err, ConfigError::Invalid { ref path, .. } if path == "weak_value_query.final"), "{err:?}");
    }

    #[test]
    fn stochastic_kinds_need_a_seed() {
        let cfg = parse_config("kind = \"born_ensemble\"\n").unwrap();
        assert!(matches!(validate(&cfg), Err(ConfigError::Invalid { ref path, .. }) if path == "seed"));
        let cfg = parse_config("kind = \"born_ensemble\"\nseed = 4\n").unwrap();
        validate(&cfg).unwrap();
    }

    #[test]
    fn field_paths_name_the_offender() {
        let text = "kind = \"single_measurement\"\n[single_measurement]\nselected = \"III\"\n";
        let err = validate(&parse_config(text).unwrap()).unwrap_err();
        assert!(matches!(err, ConfigError::Invalid { ref path, .. } if path == "single_measurement.selected"));
        let text = "kind = \"single_measurement\"\n[single_measurement]\nalpha = [1, 0]\nbeta = [0, 0]\nselected = \"II\"\n";
        assert!(validate(&parse_config(text).unwrap()).is_err());
    }

    #[test]
    fn echo_round_trips() {
        let cfg = parse_config(THREE_BOX).unwrap();
        let again = parse_config(&toml::to_string(&cfg).unwrap()).unwrap();
        assert_eq!(cfg, again);
    }
}
