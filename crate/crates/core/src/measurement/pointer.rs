use num_complex::Complex64;

use crate::hilbert::ORTHO_TOL;
use crate::{Error, Operator, PureState, Result, SubsystemLayout};

/// Apparatus basis on a single pointer subsystem: a ready state and one
/// orthonormal outcome state per reading.
#[derive(Debug, Clone, PartialEq)]
pub struct PointerBasis {
    label: String,
    ready: PureState,
    outcomes: Vec<PureState>,
    names: Vec<String>,
}

impl PointerBasis {
    pub fn new(ready: PureState, outcomes: Vec<(String, PureState)>) -> Result<Self> {
        let layout = ready.layout().clone();
        if layout.len() != 1 {
            return Err(Error::InvalidParameter("pointer must be a single subsystem".into()));
        }
        let label = layout.subsystems()[0].label.clone();
        let (names, outcomes): (Vec<_>, Vec<_>) = outcomes.into_iter().unzip();
        if outcomes.is_empty() {
            return Err(Error::InvalidParameter("pointer needs at least one outcome".into()));
        }
        let all: Vec<&PureState> = std::iter::once(&ready).chain(outcomes.iter()).collect();
        let mut dev = 0.0f64;
        for (i, a) in all.iter().enumerate() {
            for (j, b) in all.iter().enumerate().skip(i) {
                let g = a.inner(b)?;
                let target = if i == j { 1.0 } else { 0.0 };
                dev = dev.max((g - Complex64::new(target, 0.0)).norm());
            }
        }
        if dev > 1e-10 {
            return Err(Error::NotOrthonormal(dev));
        }
        Ok(Self { label, ready, outcomes, names })
    }

    /// Pointer of dimension `1 + names.len()`: ready is `|0⟩`, outcome `k`
    /// is `|k+1⟩`.
    pub fn standard(label: &str, names: &[&str]) -> Result<Self> {
        let layout = SubsystemLayout::single(label, names.len() + 1)?;
        let ready = PureState::basis(layout.clone(), 0)?;
        let outcomes = names
            .iter()
            .enumerate()
            .map(|(k, n)| Ok((n.to_string(), PureState::basis(layout.clone(), k + 1)?)))
            .collect::<Result<_>>()?;
        Self::new(ready, outcomes)
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn layout(&self) -> &SubsystemLayout {
        self.ready.layout()
    }

    pub fn ready(&self) -> &PureState {
        &self.ready
    }

    pub fn outcomes(&self) -> &[PureState] {
        &self.outcomes
    }

    pub fn outcome(&self, k: usize) -> Result<&PureState> {
        self.outcomes
            .get(k)
            .ok_or_else(|| Error::InvalidParameter(format!("pointer `{}` has no outcome {k}", self.label)))
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn index_of(&self, name: &str) -> Result<usize> {
        self.names
            .iter()
            .position(|n| n == name)
            .ok_or_else(|| Error::InvalidParameter(format!("pointer `{}` has no outcome `{name}`", self.label)))
    }

    pub fn ready_projector(&self) -> Operator {
        Operator::projector(&self.ready)
    }

    pub fn outcome_projector(&self, k: usize) -> Result<Operator> {
        Ok(Operator::projector(self.outcome(k)?))
    }

    /// `I − |READY⟩⟨READY|`.
    pub fn not_ready_projector(&self) -> Operator {
        let id = Operator::identity(self.layout().clone());
        id.add(&self.ready_projector().scale(Complex64::new(-1.0, 0.0)))
            .expect("same layout")
    }

    pub(crate) fn check_orthogonal_to_ready(&self, state: &PureState) -> Result<f64> {
        let ov = self.ready.inner(&state.normalized())?.norm();
        if ov > ORTHO_TOL.sqrt() {
            return Err(Error::NotOrthonormal(ov));
        }
        Ok(ov)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn standard_pointer() {
        let p = PointerBasis::standard("ptr", &["I", "II"]).unwrap();
        assert_eq!(p.layout().dim(), 3);
        assert_eq!(p.index_of("II").unwrap(), 1);
        assert!(p.index_of("III").is_err());
    }

    #[test]
    fn non_orthonormal_outcomes_rejected() {
        let l = SubsystemLayout::single("p", 2).unwrap();
        let ready = PureState::basis(l.clone(), 0).unwrap();
        let skew = PureState::from_real(l, &[0.6, 0.8]).unwrap();
        assert!(matches!(PointerBasis::new(ready, vec![("I".into(), skew)]), Err(Error::NotOrthonormal(_))));
    }
}
