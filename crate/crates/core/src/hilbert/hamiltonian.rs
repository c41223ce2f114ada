use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use super::{Operator, SubsystemLayout};
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct Segment {
    pub duration: f64,
    pub generator: Operator,
}

/// Piecewise-constant Hamiltonian: segments applied in list order.
#[derive(Debug, Clone, PartialEq)]
pub struct PiecewiseHamiltonian {
    layout: SubsystemLayout,
    segments: Vec<Segment>,
}

impl PiecewiseHamiltonian {
    pub fn new(segments: Vec<(f64, Operator)>) -> Result<Self> {
        let layout = segments
            .first()
            .map(|(_, h)| h.layout().clone())
            .ok_or_else(|| Error::InvalidParameter("Hamiltonian needs at least one segment".into()))?;
        let mut out = Vec::with_capacity(segments.len());
        for (duration, generator) in segments {
            if !(duration > 0.0 && duration.is_finite()) {
                return Err(Error::InvalidDuration(duration));
            }
            layout.ensure_same(generator.layout())?;
            let generator = if generator.is_hermitian() { generator } else { generator.checked_hermitian()? };
            out.push(Segment { duration, generator });
        }
        Ok(Self { layout, segments: out })
    }

    pub fn constant(generator: Operator, duration: f64) -> Result<Self> {
        Self::new(vec![(duration, generator)])
    }

    /// Zero generator for `duration`.
    pub fn free(layout: SubsystemLayout, duration: f64) -> Result<Self> {
        Self::new(vec![(duration, Operator::zeros(layout))])
    }

    pub fn layout(&self) -> &SubsystemLayout {
        &self.layout
    }

    pub fn segments(&self) -> &[Segment] {
        &self.segments
    }

    pub fn total_duration(&self) -> f64 {
        self.segments.iter().map(|s| s.duration).sum()
    }

    /// `self` followed by `later`.
    pub fn then(&self, later: &PiecewiseHamiltonian) -> Result<Self> {
        self.layout.ensure_same(&later.layout)?;
        let mut segments = self.segments.clone();
        segments.extend(later.segments.iter().cloned());
        Ok(Self { layout: self.layout.clone(), segments })
    }
}

/// `exp(−i·H·t)` for Hermitian `H` by eigendecomposition.
pub fn expm_hermitian(h: &Operator, t: f64) -> Result<Operator> {
    let h = if h.is_hermitian() { h.clone() } else { h.clone().checked_hermitian()? };
    let d = h.dim();
    let eig = h.matrix().clone().symmetric_eigen();
    let phases = DVector::from_iterator(
        d,
        eig.eigenvalues.iter().map(|&lam| Complex64::from_polar(1.0, -lam * t)),
    );
    let v = &eig.eigenvectors;
    let m: DMatrix<Complex64> = v * DMatrix::from_diagonal(&phases) * v.adjoint();
    Operator::unitary(h.layout().clone(), m)
}

/// Time-ordered propagator: later segments multiply on the left.
pub fn time_ordered_unitary(h: &PiecewiseHamiltonian) -> Result<Operator> {
    let mut u = Operator::identity(h.layout.clone());
    for seg in &h.segments {
        let step = expm_hermitian(&seg.generator, seg.duration)?;
        u = step.compose(&u)?;
    }
    u.checked_unitary()
}
