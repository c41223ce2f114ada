use nalgebra::DVector;
use num_complex::Complex64;

use super::{IndexSplit, Operator, SubsystemLayout, Tensor};
use crate::{Error, Result};

/// Amplitude vector over a [`SubsystemLayout`].
///
/// Norm is finite and nonzero; it is not forced to one. Use
/// [`PureState::normalized`] when a unit vector is needed.
#[derive(Debug, Clone, PartialEq)]
pub struct PureState {
    layout: SubsystemLayout,
    amps: DVector<Complex64>,
}

impl PureState {
    pub fn new(layout: SubsystemLayout, amps: Vec<Complex64>) -> Result<Self> {
        Self::from_vector(layout, DVector::from_vec(amps))
    }

    pub fn from_vector(layout: SubsystemLayout, amps: DVector<Complex64>) -> Result<Self> {
        if amps.len() != layout.dim() {
            return Err(Error::LengthMismatch { expected: layout.dim(), actual: amps.len() });
        }
        let norm = amps.norm();
        if !norm.is_finite() || norm == 0.0 {
            return Err(Error::InvalidNorm(norm));
        }
        Ok(Self { layout, amps })
    }

    /// Real amplitudes on a single unlabeled-by-default subsystem.
    pub fn from_real(layout: SubsystemLayout, amps: &[f64]) -> Result<Self> {
        Self::new(layout, amps.iter().map(|&x| Complex64::new(x, 0.0)).collect())
    }

    /// Computational basis vector `|index⟩`.
    pub fn basis(layout: SubsystemLayout, index: usize) -> Result<Self> {
        if index >= layout.dim() {
            return Err(Error::InvalidParameter(format!(
                "basis index {index} out of range for dimension {}",
                layout.dim()
            )));
        }
        let mut amps = DVector::zeros(layout.dim());
        amps[index] = Complex64::new(1.0, 0.0);
        Ok(Self { layout, amps })
    }

    pub fn layout(&self) -> &SubsystemLayout {
        &self.layout
    }

    pub fn dim(&self) -> usize {
        self.amps.len()
    }

    pub fn amplitudes(&self) -> &DVector<Complex64> {
        &self.amps
    }

    pub fn into_amplitudes(self) -> DVector<Complex64> {
        self.amps
    }

    pub fn norm(&self) -> f64 {
        self.amps.norm()
    }

    pub fn is_normalized(&self) -> bool {
        (self.norm() - 1.0).abs() <= 1e-12
    }

    pub fn normalized(&self) -> Self {
        let n = self.norm();
        Self { layout: self.layout.clone(), amps: self.amps.unscale(n) }
    }

    pub fn scaled(&self, factor: Complex64) -> Result<Self> {
        Self::from_vector(self.layout.clone(), self.amps.map(|z| z * factor))
    }

    /// `⟨self|ket⟩`, conjugate-linear in `self`.
    pub fn inner(&self, ket: &PureState) -> Result<Complex64> {
        self.layout.ensure_same(&ket.layout)?;
        Ok(self.amps.dotc(&ket.amps))
    }

    /// Applies an operator defined on the full layout.
    pub fn apply(&self, op: &Operator) -> Result<PureState> {
        self.layout.ensure_same(op.layout())?;
        Self::from_vector(self.layout.clone(), op.matrix() * &self.amps)
    }

    /// Applies an operator whose layout names a subset of this state's
    /// subsystems, acting as identity elsewhere. Avoids building the
    /// composite matrix.
    pub fn apply_local(&self, op: &Operator) -> Result<PureState> {
        let v = apply_local_raw(&self.layout, &self.amps, op)?;
        Self::from_vector(self.layout.clone(), v)
    }

    /// Largest entrywise difference to another state on the same layout.
    pub fn max_abs_diff(&self, other: &PureState) -> Result<f64> {
        self.layout.ensure_same(&other.layout)?;
        Ok(self.amps.iter().zip(other.amps.iter()).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max))
    }
}

pub(crate) fn apply_local_raw(
    layout: &SubsystemLayout,
    amps: &DVector<Complex64>,
    op: &Operator,
) -> Result<DVector<Complex64>> {
    let labels: Vec<&str> = op.layout().labels().collect();
    for s in op.layout().subsystems() {
        let d = layout.dim_of(&s.label)?;
        if d != s.dim {
            return Err(Error::LayoutMismatch(format!(
                "subsystem `{}` has dimension {d} in state but {} in operator",
                s.label, s.dim
            )));
        }
    }
    let split = IndexSplit::new(layout, &labels)?;
    let m = op.matrix();
    let n = split.sub.len();
    let mut out = DVector::zeros(amps.len());
    let mut buf = vec![Complex64::new(0.0, 0.0); n];
    for &base in &split.rest {
        for (c, off) in split.sub.iter().enumerate() {
            buf[c] = amps[base + off];
        }
        for (r, off) in split.sub.iter().enumerate() {
            let mut acc = Complex64::new(0.0, 0.0);
            for (c, x) in buf.iter().enumerate() {
                acc += m[(r, c)] * x;
            }
            out[base + off] = acc;
        }
    }
    Ok(out)
}

impl Tensor for PureState {
    type Output = PureState;

    fn tensor(&self, rhs: &PureState) -> Result<PureState> {
        let layout = self.layout.concat(&rhs.layout)?;
        Ok(PureState { layout, amps: self.amps.kronecker(&rhs.amps) })
    }
}

/// `⟨bra|ket⟩`.
pub fn inner_product(bra: &PureState, ket: &PureState) -> Result<Complex64> {
    bra.inner(ket)
}
