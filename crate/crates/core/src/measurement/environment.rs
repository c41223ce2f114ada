use num_complex::Complex64;

use crate::hilbert::ORTHO_TOL;
use crate::{Error, Operator, PureState, Result, SubsystemLayout, Tensor};

/// Single-qubit amplitudes `(⟨0|e⟩, ⟨1|e⟩)`.
pub type QubitState = [Complex64; 2];

fn qubit(a: f64, b: f64) -> QubitState {
    [Complex64::new(a, 0.0), Complex64::new(b, 0.0)]
}

fn qubit_overlap(a: &QubitState, b: &QubitState) -> Complex64 {
    a[0].conj() * b[0] + a[1].conj() * b[1]
}

fn normalize(q: &QubitState) -> Result<QubitState> {
    let n = (q[0].norm_sqr() + q[1].norm_sqr()).sqrt();
    if !n.is_finite() || n == 0.0 {
        return Err(Error::InvalidNorm(n));
    }
    Ok([q[0] / n, q[1] / n])
}

/// Register of environment qubits recording pointer readings as product
/// states.
///
/// `encodings[k]` is the record of pointer outcome `k`. `ortho`, when
/// present, is the record written by backward decoherence for a pointer
/// found in a non-ready state.
#[derive(Debug, Clone, PartialEq)]
pub struct EnvironmentRegister {
    labels: Vec<String>,
    ready: Vec<QubitState>,
    encodings: Vec<Vec<QubitState>>,
    ortho: Option<Vec<QubitState>>,
    eps_orth: f64,
}

impl EnvironmentRegister {
    pub fn new(
        labels: Vec<String>,
        ready: Vec<QubitState>,
        encodings: Vec<Vec<QubitState>>,
        ortho: Option<Vec<QubitState>>,
        eps_orth: f64,
    ) -> Result<Self> {
        let n = labels.len();
        if n == 0 {
            return Err(Error::InvalidParameter("environment register needs at least one qubit".into()));
        }
        if !(0.0..1.0).contains(&eps_orth) {
            return Err(Error::InvalidParameter(format!("eps_orth must lie in [0, 1), got {eps_orth}")));
        }
        let fix = |v: Vec<QubitState>| -> Result<Vec<QubitState>> {
            if v.len() != n {
                return Err(Error::LengthMismatch { expected: n, actual: v.len() });
            }
            v.iter().map(normalize).collect()
        };
        let reg = Self {
            ready: fix(ready)?,
            encodings: encodings.into_iter().map(fix).collect::<Result<_>>()?,
            ortho: ortho.map(fix).transpose()?,
            labels,
            eps_orth,
        };
        SubsystemLayout::new(reg.labels.iter().map(|l| (l.clone(), 2)))?;
        reg.check_collisions()?;
        Ok(reg)
    }

    /// Computational-basis records: ready `|0…0⟩`, outcome `k` the binary
    /// string of `k + 1`, ortho `|1…1⟩`. Needs `n_outcomes + 2 ≤ 2^n_qubits`.
    pub fn orthogonal(prefix: &str, n_qubits: usize, n_outcomes: usize) -> Result<Self> {
        if n_qubits == 0 || n_qubits >= 20 || n_outcomes + 2 > (1usize << n_qubits) {
            return Err(Error::InvalidParameter(format!(
                "{n_qubits} qubits cannot hold {n_outcomes} orthogonal records plus ready and ortho"
            )));
        }
        let bits = |v: usize| -> Vec<QubitState> {
            (0..n_qubits)
                .map(|j| if (v >> (n_qubits - 1 - j)) & 1 == 1 { qubit(0.0, 1.0) } else { qubit(1.0, 0.0) })
                .collect()
        };
        Self::new(
            (0..n_qubits).map(|j| format!("{prefix}{j}")).collect(),
            bits(0),
            (1..=n_outcomes).map(bits).collect(),
            Some(bits((1 << n_qubits) - 1)),
            0.0,
        )
    }

    /// Two records with `⟨ε₁|ε₂⟩ = eps`: qubit `j` is `cos θ|0⟩ ± sin θ|1⟩`
    /// with `cos 2θ = eps^(1/n)`. Ready is `|0…0⟩`; no ortho record.
    pub fn with_overlap(prefix: &str, n_qubits: usize, eps: f64) -> Result<Self> {
        if !(0.0..1.0).contains(&eps) || n_qubits == 0 {
            return Err(Error::InvalidParameter(format!("eps_orth must lie in [0, 1), got {eps}")));
        }
        let theta = 0.5 * eps.powf(1.0 / n_qubits as f64).acos();
        let (c, s) = (theta.cos(), theta.sin());
        Self::new(
            (0..n_qubits).map(|j| format!("{prefix}{j}")).collect(),
            vec![qubit(1.0, 0.0); n_qubits],
            vec![vec![qubit(c, s); n_qubits], vec![qubit(c, -s); n_qubits]],
            None,
            eps,
        )
    }

    fn check_collisions(&self) -> Result<()> {
        let allowed = self.eps_orth + ORTHO_TOL;
        for i in 0..self.encodings.len() {
            for j in i + 1..self.encodings.len() {
                let ov = self.overlap(i, j).norm();
                if ov > allowed {
                    return Err(Error::EncodingCollision(i, j, ov, self.eps_orth));
                }
            }
        }
        Ok(())
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn eps_orth(&self) -> f64 {
        self.eps_orth
    }

    pub fn n_outcomes(&self) -> usize {
        self.encodings.len()
    }

    pub fn layout(&self) -> SubsystemLayout {
        SubsystemLayout::new(self.labels.iter().map(|l| (l.clone(), 2))).expect("validated on construction")
    }

    /// `⟨ε_i|ε_j⟩` as a product of per-qubit overlaps.
    pub fn overlap(&self, i: usize, j: usize) -> Complex64 {
        self.encodings[i]
            .iter()
            .zip(&self.encodings[j])
            .map(|(a, b)| qubit_overlap(a, b))
            .product()
    }

    fn product_state(&self, qubits: &[QubitState]) -> Result<PureState> {
        let mut out: Option<PureState> = None;
        for (l, q) in self.labels.iter().zip(qubits) {
            let s = PureState::new(SubsystemLayout::single(l.clone(), 2)?, q.to_vec())?;
            out = Some(match out {
                None => s,
                Some(acc) => acc.tensor(&s)?,
            });
        }
        Ok(out.expect("at least one qubit"))
    }

    pub fn ready_state(&self) -> Result<PureState> {
        self.product_state(&self.ready)
    }

    pub fn encoding_state(&self, k: usize) -> Result<PureState> {
        let enc = self
            .encodings
            .get(k)
            .ok_or_else(|| Error::InvalidParameter(format!("environment has no record {k}")))?;
        self.product_state(enc)
    }

    pub fn ortho_state(&self) -> Result<PureState> {
        let o = self
            .ortho
            .as_ref()
            .ok_or_else(|| Error::InvalidParameter("environment has no ortho record".into()))?;
        self.product_state(o)
    }

    fn rotation_to(&self, target: &[QubitState]) -> Result<Operator> {
        let mut out: Option<Operator> = None;
        for ((l, from), to) in self.labels.iter().zip(&self.ready).zip(target) {
            let u = Operator::unitary(SubsystemLayout::single(l.clone(), 2)?, map_qubit(from, to))?;
            out = Some(match out {
                None => u,
                Some(acc) => acc.tensor(&u)?,
            });
        }
        Ok(out.expect("at least one qubit"))
    }

    /// Product unitary taking the ready record to record `k`.
    pub fn writer(&self, k: usize) -> Result<Operator> {
        let enc = self
            .encodings
            .get(k)
            .ok_or_else(|| Error::InvalidParameter(format!("environment has no record {k}")))?;
        self.rotation_to(enc)
    }

    /// Product unitary taking the ready record to the ortho record.
    pub fn ortho_writer(&self) -> Result<Operator> {
        let o = self
            .ortho
            .as_ref()
            .ok_or_else(|| Error::InvalidParameter("environment has no ortho record".into()))?;
        self.rotation_to(o)
    }
}

/// Unitary `[to, to⊥]·[from, from⊥]†`, which sends `from` to `to`.
fn map_qubit(from: &QubitState, to: &QubitState) -> nalgebra::DMatrix<Complex64> {
    let perp = |q: &QubitState| [-q[1].conj(), q[0].conj()];
    let (fp, tp) = (perp(from), perp(to));
    let a = nalgebra::DMatrix::from_fn(2, 2, |i, j| if j == 0 { to[i] } else { tp[i] });
    let b = nalgebra::DMatrix::from_fn(2, 2, |i, j| if j == 0 { from[i] } else { fp[i] });
    a * b.adjoint()
}
