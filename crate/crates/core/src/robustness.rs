//! Partial collapse of a macroscopic product environment.
//!
//! Two records `|ε₁(N)⟩ = ⊗_j |e₁⁽ʲ⁾⟩` and `|ε₂(N)⟩ = ⊗_j |e₂⁽ʲ⁾⟩` are stored
//! particle by particle and never expanded. Collapsing `n` particles onto
//! targets `|C⁽ʲ⁾⟩` multiplies branch `i` by `∏ γᵢ⁽ʲ⁾` with
//! `γᵢ⁽ʲ⁾ = ⟨C⁽ʲ⁾|eᵢ⁽ʲ⁾⟩` and leaves `N − n` particles untouched. The
//! robustness ratio compares the surviving right branch against the wrong
//! one:
//!
//! ```text
//! ratio = ∏|γ₁| / ( |⟨ε₁(N−n)|ε₂(N−n)⟩|² · ∏|γ₂| )
//! ```
//!
//! All ratios are carried as `log10` values so that large `N` neither
//! overflows nor underflows.

use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use crate::measurement::QubitState;
use crate::{Error, Result};

/// Per-particle normalization tolerance.
pub const NORM_TOL: f64 = 1e-12;

fn overlap(a: &QubitState, b: &QubitState) -> Complex64 {
    a[0].conj() * b[0] + a[1].conj() * b[1]
}

fn check_normalized(q: &QubitState) -> Result<()> {
    let n = (q[0].norm_sqr() + q[1].norm_sqr()).sqrt();
    if !n.is_finite() || (n - 1.0).abs() > NORM_TOL {
        return Err(Error::InvalidNorm(n));
    }
    Ok(())
}

/// Two product records over the same `N` particles.
#[derive(Debug, Clone, PartialEq)]
pub struct ProductEnvironment {
    e1: Vec<QubitState>,
    e2: Vec<QubitState>,
}

impl ProductEnvironment {
    pub fn new(e1: Vec<QubitState>, e2: Vec<QubitState>) -> Result<Self> {
        if e1.is_empty() {
            return Err(Error::InvalidParameter("environment needs at least one particle".into()));
        }
        if e1.len() != e2.len() {
            return Err(Error::LengthMismatch { expected: e1.len(), actual: e2.len() });
        }
        for q in e1.iter().chain(&e2) {
            check_normalized(q)?;
        }
        Ok(Self { e1, e2 })
    }

    /// `e₁ = |0⟩`, `e₂ = c|0⟩ + √(1−c²)|1⟩` on every particle.
    pub fn uniform(n: usize, c: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&c) {
            return Err(Error::InvalidParameter(format!("overlap must lie in [0, 1], got {c}")));
        }
        let one = [Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0)];
        let two = [Complex64::new(c, 0.0), Complex64::new((1.0 - c * c).sqrt(), 0.0)];
        Self::new(vec![one; n], vec![two; n])
    }

    pub fn len(&self) -> usize {
        self.e1.len()
    }

    pub fn is_empty(&self) -> bool {
        self.e1.is_empty()
    }

    pub fn e1(&self) -> &[QubitState] {
        &self.e1
    }

    pub fn e2(&self) -> &[QubitState] {
        &self.e2
    }

    /// `⟨e₁⁽ʲ⁾|e₂⁽ʲ⁾⟩`.
    pub fn particle_overlap(&self, j: usize) -> Complex64 {
        overlap(&self.e1[j], &self.e2[j])
    }

    /// Same records with the particles reordered: particle `j` of the
    /// result is particle `order[j]` of `self`.
    pub fn permuted(&self, order: &[usize]) -> Result<Self> {
        let mut seen = vec![false; self.len()];
        for &j in order {
            if j >= self.len() || std::mem::replace(&mut seen[j], true) {
                return Err(Error::InvalidParameter(format!("{order:?} is not a permutation")));
            }
        }
        if order.len() != self.len() {
            return Err(Error::LengthMismatch { expected: self.len(), actual: order.len() });
        }
        Ok(Self { e1: order.iter().map(|&j| self.e1[j]).collect(), e2: order.iter().map(|&j| self.e2[j]).collect() })
    }
}

/// `⟨ε₁(N)|ε₂(N)⟩` as a product of per-particle overlaps.
pub fn environment_overlap(env: &ProductEnvironment) -> Complex64 {
    (0..env.len()).map(|j| env.particle_overlap(j)).product()
}

/// Which state each collapsed particle is projected onto.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CollapseTarget {
    /// `C = e₁`: collapse toward the realized branch.
    First,
    /// `C ∝ e₁ + e₂`: equal footing for both branches when their overlap is
    /// real.
    Symmetric,
}

/// The `n` collapsed particles and their targets.
#[derive(Debug, Clone, PartialEq)]
pub struct CollapseRecord {
    particles: Vec<usize>,
    targets: Vec<QubitState>,
}

impl CollapseRecord {
    pub fn new(particles: Vec<usize>, targets: Vec<QubitState>) -> Result<Self> {
        if particles.len() != targets.len() {
            return Err(Error::LengthMismatch { expected: particles.len(), actual: targets.len() });
        }
        for q in &targets {
            check_normalized(q)?;
        }
        Ok(Self { particles, targets })
    }

    /// Collapses `particles` with one of the standard target choices.
    pub fn with_target(env: &ProductEnvironment, particles: Vec<usize>, target: CollapseTarget) -> Result<Self> {
        let targets = particles
            .iter()
            .map(|&j| {
                let (a, b) = (env.e1.get(j).ok_or_else(|| bad_index(j, env.len()))?, &env.e2[j]);
                Ok(match target {
                    CollapseTarget::First => *a,
                    CollapseTarget::Symmetric => {
                        let s = [a[0] + b[0], a[1] + b[1]];
                        let n = (s[0].norm_sqr() + s[1].norm_sqr()).sqrt();
                        if n == 0.0 {
                            return Err(Error::OrthogonalCollapse(j));
                        }
                        [s[0] / n, s[1] / n]
                    }
                })
            })
            .collect::<Result<_>>()?;
        Self::new(particles, targets)
    }

    /// First `n` particles collapsed.
    pub fn leading(env: &ProductEnvironment, n: usize, target: CollapseTarget) -> Result<Self> {
        Self::with_target(env, (0..n).collect(), target)
    }

    pub fn n(&self) -> usize {
        self.particles.len()
    }

    pub fn particles(&self) -> &[usize] {
        &self.particles
    }

    pub fn targets(&self) -> &[QubitState] {
        &self.targets
    }

    /// `(γ₁⁽ʲ⁾, γ₂⁽ʲ⁾)` per collapsed particle.
    pub fn gammas(&self, env: &ProductEnvironment) -> Result<Vec<(Complex64, Complex64)>> {
        self.validate(env)?;
        Ok(self
            .particles
            .iter()
            .zip(&self.targets)
            .map(|(&j, c)| (overlap(c, &env.e1[j]), overlap(c, &env.e2[j])))
            .collect())
    }

    fn validate(&self, env: &ProductEnvironment) -> Result<()> {
        if self.n() >= env.len() {
            return Err(Error::MacroscopicCoreViolated { n: self.n(), total: env.len() });
        }
        let mut seen = vec![false; env.len()];
        for &j in &self.particles {
            if j >= env.len() {
                return Err(bad_index(j, env.len()));
            }
            if std::mem::replace(&mut seen[j], true) {
                return Err(Error::InvalidParameter(format!("particle {j} collapsed twice")));
            }
        }
        Ok(())
    }
}

fn bad_index(j: usize, n: usize) -> Error {
    Error::InvalidParameter(format!("particle {j} out of range for {n} particles"))
}

/// Survivors of a partial collapse and the branch factors `∏ γᵢ⁽ʲ⁾`.
#[derive(Debug, Clone, PartialEq)]
pub struct Collapse {
    pub survivors: ProductEnvironment,
    pub factors: [Complex64; 2],
}

pub fn collapse_environment(env: &ProductEnvironment, rec: &CollapseRecord) -> Result<Collapse> {
    let gammas = rec.gammas(env)?;
    if let Some(k) = gammas.iter().position(|(g1, _)| g1.norm() == 0.0) {
        return Err(Error::OrthogonalCollapse(rec.particles[k]));
    }
    let mut factors = [Complex64::new(1.0, 0.0); 2];
    for (g1, g2) in &gammas {
        factors[0] *= g1;
        factors[1] *= g2;
    }
    let keep: Vec<usize> = (0..env.len()).filter(|j| !rec.particles.contains(j)).collect();
    let survivors = ProductEnvironment {
        e1: keep.iter().map(|&j| env.e1[j]).collect(),
        e2: keep.iter().map(|&j| env.e2[j]).collect(),
    };
    Ok(Collapse { survivors, factors })
}

/// A positive ratio held as its `log10`, or the divergent case.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Ratio {
    Finite(f64),
    Divergent,
}

impl Ratio {
    pub fn log10(&self) -> Option<f64> {
        match self {
            Ratio::Finite(l) => Some(*l),
            Ratio::Divergent => None,
        }
    }

    /// `10^log10`; overflows to infinity for very large ratios.
    pub fn value(&self) -> Option<f64> {
        self.log10().map(|l| 10f64.powf(l))
    }

    pub fn is_divergent(&self) -> bool {
        matches!(self, Ratio::Divergent)
    }
}

impl std::fmt::Display for Ratio {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Ratio::Finite(l) => write!(f, "{l}"),
            Ratio::Divergent => f.write_str("divergent"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RobustnessRatio {
    /// With the collapse factors.
    pub exact: Ratio,
    /// `|⟨ε₁(N−n)|ε₂(N−n)⟩|^{-2}` alone.
    pub approx: Ratio,
}

fn sum_log10(values: impl Iterator<Item = f64>) -> Option<f64> {
    let mut acc = 0.0;
    for v in values {
        if v == 0.0 {
            return None;
        }
        acc += v.log10();
    }
    Some(acc)
}

pub fn robustness_ratio(env: &ProductEnvironment, rec: &CollapseRecord) -> Result<RobustnessRatio> {
    let gammas = rec.gammas(env)?;
    if let Some(k) = gammas.iter().position(|(g1, _)| g1.norm() == 0.0) {
        return Err(Error::OrthogonalCollapse(rec.particles[k]));
    }
    let survivors = collapse_environment(env, rec)?.survivors;
    let surv = sum_log10((0..survivors.len()).map(|j| survivors.particle_overlap(j).norm()));
    let g1 = sum_log10(gammas.iter().map(|(g, _)| g.norm())).expect("γ₁ checked nonzero");
    let g2 = sum_log10(gammas.iter().map(|(_, g)| g.norm()));
    let approx = surv.map_or(Ratio::Divergent, |s| Ratio::Finite(-2.0 * s));
    let exact = match (surv, g2) {
        (Some(s), Some(g2)) => Ratio::Finite(g1 - 2.0 * s - g2),
        _ => Ratio::Divergent,
    };
    Ok(RobustnessRatio { exact, approx })
}

/// `N(t) = N₀ e^{−t/T}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DecayModel {
    n0: f64,
    lifetime: f64,
}

impl DecayModel {
    pub fn new(n0: f64, lifetime: f64) -> Result<Self> {
        if !(n0 >= 1.0 && n0.is_finite()) {
            return Err(Error::InvalidParameter(format!("N0 must be at least 1, got {n0}")));
        }
        if !(lifetime > 0.0 && lifetime.is_finite()) {
            return Err(Error::InvalidDuration(lifetime));
        }
        Ok(Self { n0, lifetime })
    }

    pub fn n0(&self) -> f64 {
        self.n0
    }

    pub fn lifetime(&self) -> f64 {
        self.lifetime
    }
}

pub fn decay_population(model: &DecayModel, t: f64) -> Result<f64> {
    if t < 0.0 || t.is_nan() {
        return Err(Error::NegativeTime(t));
    }
    Ok(model.n0 * (-t / model.lifetime).exp())
}

/// One grid point of a uniform-overlap sweep.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SweepRow {
    pub c: f64,
    #[serde(rename = "N")]
    pub big_n: usize,
    pub n: usize,
    pub log10_ratio_exact: Ratio,
    pub log10_ratio_approx: Ratio,
}

/// Overlap values of the default sweep.
pub const DEFAULT_OVERLAPS: [f64; 3] = [0.3, 0.5, 0.9];
/// Particle counts of the default sweep.
pub const DEFAULT_TOTALS: [usize; 6] = [4, 12, 32, 102, 320, 1002];
/// Collapsed counts of the default sweep.
pub const DEFAULT_COLLAPSED: [usize; 3] = [0, 1, 2];

/// Ratios over the grid `c × N × n` for uniform environments, skipping
/// `n ≥ N`. Rows come out in grid order whatever the thread count.
pub fn sweep_robustness(cs: &[f64], totals: &[usize], collapsed: &[usize], target: CollapseTarget) -> Result<Vec<SweepRow>> {
    if cs.is_empty() || totals.is_empty() || collapsed.is_empty() {
        return Err(Error::InvalidParameter("sweep grids must be nonempty".into()));
    }
    let grid: Vec<(f64, usize, usize)> = cs
        .iter()
        .flat_map(|&c| totals.iter().flat_map(move |&big| collapsed.iter().map(move |&n| (c, big, n))))
        .filter(|&(_, big, n)| n < big)
        .collect();
    grid.par_iter()
        .map(|&(c, big_n, n)| {
            let env = ProductEnvironment::uniform(big_n, c)?;
            let rec = CollapseRecord::leading(&env, n, target)?;
            let r = robustness_ratio(&env, &rec)?;
            Ok(SweepRow { c, big_n, n, log10_ratio_exact: r.exact, log10_ratio_approx: r.approx })
        })
        .collect()
}

/// Least-squares line of `log10_ratio_exact` against `N − n` for one
/// `(c, n)` group.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SlopeFit {
    pub c: f64,
    pub n: usize,
    pub points: usize,
    pub slope: f64,
    pub intercept: f64,
    pub max_residual: f64,
    /// `−2 log10 c`.
    pub expected_slope: f64,
}

/// Fits every `(c, n)` group with at least two finite rows, in order of
/// first appearance.
pub fn fit_slopes(rows: &[SweepRow]) -> Vec<SlopeFit> {
    let mut keys: Vec<(f64, usize)> = Vec::new();
    for r in rows {
        if !keys.iter().any(|&(c, n)| c == r.c && n == r.n) {
            keys.push((r.c, r.n));
        }
    }
    keys.into_iter()
        .filter_map(|(c, n)| {
            let pts: Vec<(f64, f64)> = rows
                .iter()
                .filter(|r| r.c == c && r.n == n)
                .filter_map(|r| r.log10_ratio_exact.log10().map(|y| ((r.big_n - r.n) as f64, y)))
                .collect();
            if pts.len() < 2 {
                return None;
            }
            let m = pts.len() as f64;
            let mx = pts.iter().map(|p| p.0).sum::<f64>() / m;
            let my = pts.iter().map(|p| p.1).sum::<f64>() / m;
            let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
            let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
            let slope = sxy / sxx;
            let intercept = my - slope * mx;
            let max_residual = pts.iter().map(|p| (p.1 - slope * p.0 - intercept).abs()).fold(0.0, f64::max);
            Some(SlopeFit { c, n, points: pts.len(), slope, intercept, max_residual, expected_slope: -2.0 * c.log10() })
        })
        .collect()
}
