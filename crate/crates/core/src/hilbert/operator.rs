use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use super::{IndexSplit, PureState, SubsystemLayout, Tensor, HERMITIAN_TOL, UNITARY_TOL};
use crate::{Error, Result};

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);

/// Square complex matrix on a [`SubsystemLayout`].
///
/// The `hermitian` and `unitary` flags are only set by the checked
/// constructors, so a flagged operator has passed the corresponding test.
#[derive(Debug, Clone, PartialEq)]
pub struct Operator {
    layout: SubsystemLayout,
    matrix: DMatrix<Complex64>,
    hermitian: bool,
    unitary: bool,
}

impl Operator {
    pub fn new(layout: SubsystemLayout, matrix: DMatrix<Complex64>) -> Result<Self> {
        let d = layout.dim();
        if matrix.nrows() != d || matrix.ncols() != d {
            return Err(Error::BadMatrixShape(d));
        }
        if matrix.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::InvalidParameter("operator has non-finite entries".into()));
        }
        Ok(Self { layout, matrix, hermitian: false, unitary: false })
    }

    /// Row-major construction.
    pub fn from_rows(layout: SubsystemLayout, rows: &[Vec<Complex64>]) -> Result<Self> {
        let d = layout.dim();
        if rows.len() != d || rows.iter().any(|r| r.len() != d) {
            return Err(Error::BadMatrixShape(d));
        }
        Self::new(layout, DMatrix::from_fn(d, d, |i, j| rows[i][j]))
    }

    /// Checked Hermitian operator: `max|M − M†| ≤ 1e-12·max|M|`.
    pub fn hermitian(layout: SubsystemLayout, matrix: DMatrix<Complex64>) -> Result<Self> {
        let mut op = Self::new(layout, matrix)?;
        let dev = op.hermitian_deviation();
        if dev > HERMITIAN_TOL * op.max_abs() {
            return Err(Error::NotHermitian(dev));
        }
        op.hermitian = true;
        Ok(op)
    }

    /// Checked unitary operator: `max|M†M − I| ≤ 1e-10`.
    pub fn unitary(layout: SubsystemLayout, matrix: DMatrix<Complex64>) -> Result<Self> {
        let mut op = Self::new(layout, matrix)?;
        let dev = op.unitary_deviation();
        if dev > UNITARY_TOL {
            return Err(Error::NotUnitary(dev));
        }
        op.unitary = true;
        Ok(op)
    }

    pub fn identity(layout: SubsystemLayout) -> Self {
        let d = layout.dim();
        Self { layout, matrix: DMatrix::identity(d, d), hermitian: true, unitary: true }
    }

    pub fn zeros(layout: SubsystemLayout) -> Self {
        let d = layout.dim();
        Self { layout, matrix: DMatrix::zeros(d, d), hermitian: true, unitary: false }
    }

    /// Real diagonal observable.
    pub fn diagonal(layout: SubsystemLayout, values: &[f64]) -> Result<Self> {
        if values.len() != layout.dim() {
            return Err(Error::BadMatrixShape(layout.dim()));
        }
        let diag = DVector::from_iterator(values.len(), values.iter().map(|&v| Complex64::new(v, 0.0)));
        Self::hermitian(layout, DMatrix::from_diagonal(&diag))
    }

    pub fn sigma_x(label: &str) -> Self {
        Self::pauli(label, [[ZERO, ONE], [ONE, ZERO]])
    }

    pub fn sigma_y(label: &str) -> Self {
        let i = Complex64::new(0.0, 1.0);
        Self::pauli(label, [[ZERO, -i], [i, ZERO]])
    }

    pub fn sigma_z(label: &str) -> Self {
        Self::pauli(label, [[ONE, ZERO], [ZERO, -ONE]])
    }

    fn pauli(label: &str, m: [[Complex64; 2]; 2]) -> Self {
        let layout = SubsystemLayout::single(label, 2).expect("qubit layout");
        Self {
            layout,
            matrix: DMatrix::from_fn(2, 2, |i, j| m[i][j]),
            hermitian: true,
            unitary: true,
        }
    }

    /// `|ket⟩⟨bra|`.
    pub fn outer(ket: &PureState, bra: &PureState) -> Result<Self> {
        ket.layout().ensure_same(bra.layout())?;
        let m = ket.amplitudes() * bra.amplitudes().adjoint();
        Self::new(ket.layout().clone(), m)
    }

    /// Orthogonal projector onto the ray of `state`.
    pub fn projector(state: &PureState) -> Self {
        let s = state.normalized();
        let m = s.amplitudes() * s.amplitudes().adjoint();
        Self { layout: s.layout().clone(), matrix: m, hermitian: true, unitary: false }
    }

    pub fn layout(&self) -> &SubsystemLayout {
        &self.layout
    }

    pub fn dim(&self) -> usize {
        self.layout.dim()
    }

    pub fn matrix(&self) -> &DMatrix<Complex64> {
        &self.matrix
    }

    pub fn into_matrix(self) -> DMatrix<Complex64> {
        self.matrix
    }

    pub fn is_hermitian(&self) -> bool {
        self.hermitian
    }

    pub fn is_unitary(&self) -> bool {
        self.unitary
    }

    pub fn max_abs(&self) -> f64 {
        self.matrix.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    pub fn hermitian_deviation(&self) -> f64 {
        let d = self.dim();
        let mut dev = 0.0f64;
        for i in 0..d {
            for j in i..d {
                dev = dev.max((self.matrix[(i, j)] - self.matrix[(j, i)].conj()).norm());
            }
        }
        dev
    }

    pub fn unitary_deviation(&self) -> f64 {
        let d = self.dim();
        let p = self.matrix.adjoint() * &self.matrix;
        (p - DMatrix::<Complex64>::identity(d, d)).iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    pub fn adjoint(&self) -> Self {
        Self {
            layout: self.layout.clone(),
            matrix: self.matrix.adjoint(),
            hermitian: self.hermitian,
            unitary: self.unitary,
        }
    }

    /// Matrix product `self · rhs`.
    pub fn compose(&self, rhs: &Operator) -> Result<Self> {
        self.layout.ensure_same(&rhs.layout)?;
        Ok(Self {
            layout: self.layout.clone(),
            matrix: &self.matrix * &rhs.matrix,
            hermitian: false,
            unitary: false,
        })
    }

    pub fn add(&self, rhs: &Operator) -> Result<Self> {
        self.layout.ensure_same(&rhs.layout)?;
        Ok(Self {
            layout: self.layout.clone(),
            matrix: &self.matrix + &rhs.matrix,
            hermitian: self.hermitian && rhs.hermitian,
            unitary: false,
        })
    }

    pub fn scale(&self, factor: Complex64) -> Self {
        Self {
            layout: self.layout.clone(),
            matrix: self.matrix.map(|z| z * factor),
            hermitian: self.hermitian && factor.im == 0.0,
            unitary: self.unitary && factor.im == 0.0 && factor.re.abs() == 1.0,
        }
    }

    pub fn trace(&self) -> Complex64 {
        self.matrix.trace()
    }

    /// `⟨bra|self|ket⟩`.
    pub fn sandwich(&self, bra: &PureState, ket: &PureState) -> Result<Complex64> {
        self.layout.ensure_same(bra.layout())?;
        self.layout.ensure_same(ket.layout())?;
        Ok(bra.amplitudes().dotc(&(&self.matrix * ket.amplitudes())))
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.matrix.norm()
    }

    pub fn max_abs_diff(&self, other: &Operator) -> Result<f64> {
        self.layout.ensure_same(&other.layout)?;
        Ok((&self.matrix - &other.matrix).iter().map(|z| z.norm()).fold(0.0, f64::max))
    }

    /// Distance of `self` from the complex line through `target`:
    /// `min_c ‖self − c·target‖_F / ‖self‖_F`. Zero means the two agree
    /// up to normalization (including phase).
    pub fn proportionality_residual(&self, target: &Operator) -> Result<f64> {
        self.layout.ensure_same(&target.layout)?;
        let tt = target.matrix.dotc(&target.matrix);
        if tt.norm() == 0.0 {
            return Err(Error::InvalidParameter("zero target operator".into()));
        }
        let c = target.matrix.dotc(&self.matrix) / tt;
        let resid = (&self.matrix - target.matrix.map(|z| z * c)).norm();
        let own = self.matrix.norm();
        Ok(if own == 0.0 { 0.0 } else { resid / own })
    }

    /// Re-tag a matrix as Hermitian if it passes the check.
    pub fn checked_hermitian(self) -> Result<Self> {
        Self::hermitian(self.layout, self.matrix)
    }

    /// Re-tag a matrix as unitary if it passes the check.
    pub fn checked_unitary(self) -> Result<Self> {
        Self::unitary(self.layout, self.matrix)
    }
}

impl Tensor for Operator {
    type Output = Operator;

    fn tensor(&self, rhs: &Operator) -> Result<Operator> {
        let layout = self.layout.concat(&rhs.layout)?;
        Ok(Operator {
            layout,
            matrix: self.matrix.kronecker(&rhs.matrix),
            hermitian: self.hermitian && rhs.hermitian,
            unitary: self.unitary && rhs.unitary,
        })
    }
}

/// Lifts `op` to `target`, acting as identity on subsystems `op` does not
/// name.
pub fn embed_operator(op: &Operator, target: &SubsystemLayout) -> Result<Operator> {
    for s in op.layout.subsystems() {
        let d = target.dim_of(&s.label)?;
        if d != s.dim {
            return Err(Error::LayoutMismatch(format!(
                "subsystem `{}` has dimension {} in operator but {d} in target",
                s.label, s.dim
            )));
        }
    }
    let labels: Vec<&str> = op.layout.labels().collect();
    let split = IndexSplit::new(target, &labels)?;
    let d = target.dim();
    let mut m = DMatrix::zeros(d, d);
    for &base in &split.rest {
        for (r, ro) in split.sub.iter().enumerate() {
            for (c, co) in split.sub.iter().enumerate() {
                m[(base + ro, base + co)] = op.matrix[(r, c)];
            }
        }
    }
    Ok(Operator {
        layout: target.clone(),
        matrix: m,
        hermitian: op.hermitian,
        unitary: op.unitary,
    })
}

fn keep_split<S: AsRef<str>>(layout: &SubsystemLayout, keep: &[S]) -> Result<(SubsystemLayout, IndexSplit)> {
    let kept = layout.restrict(keep)?;
    let labels: Vec<&str> = kept.labels().collect();
    let split = IndexSplit::new(layout, &labels)?;
    Ok((kept, split))
}

/// Traces out every subsystem not in `keep`. The result's layout lists the
/// kept subsystems in their original order.
pub fn partial_trace<S: AsRef<str>>(rho: &Operator, keep: &[S]) -> Result<Operator> {
    let (kept, split) = keep_split(&rho.layout, keep)?;
    let k = split.sub.len();
    let m = DMatrix::from_fn(k, k, |r, c| {
        split
            .rest
            .iter()
            .map(|&a| rho.matrix[(a + split.sub[r], a + split.sub[c])])
            .sum::<Complex64>()
    });
    Ok(Operator { layout: kept, matrix: m, hermitian: rho.hermitian, unitary: false })
}

/// `Tr_rest |ket⟩⟨bra|` without forming the composite outer product.
pub fn partial_trace_outer<S: AsRef<str>>(ket: &PureState, bra: &PureState, keep: &[S]) -> Result<Operator> {
    ket.layout().ensure_same(bra.layout())?;
    let (kept, split) = keep_split(ket.layout(), keep)?;
    let (psi, phi) = (ket.amplitudes(), bra.amplitudes());
    let k = split.sub.len();
    let m = DMatrix::from_fn(k, k, |r, c| {
        split
            .rest
            .iter()
            .map(|&a| psi[a + split.sub[r]] * phi[a + split.sub[c]].conj())
            .sum::<Complex64>()
    });
    Operator::new(kept, m)
}
