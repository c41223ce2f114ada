//! Probability rules for an intermediate measurement of a non-degenerate
//! observable: the ABL rule with both boundaries fixed, the Born rule with
//! only the initial one, and recovery of the latter from an ensemble of
//! definite final states.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use rayon::prelude::*;
use serde::Serialize;
use statrs::distribution::{ChiSquared, ContinuousCDF};

use crate::hilbert::HERMITIAN_TOL;
use crate::{Error, Operator, PureState, Result};

/// Eigenvalues closer than this are treated as degenerate.
pub const DEGENERACY_TOL: f64 = 1e-9;
/// Probabilities below this are reported as exactly zero.
pub const CLAMP_TOL: f64 = 1e-15;
/// Smallest admissible ABL denominator.
pub const MIN_DENOMINATOR: f64 = 1e-300;
/// Gram-matrix tolerance for final-state bases.
pub const BASIS_TOL: f64 = 1e-10;

/// Draws per independently seeded block of the ensemble sampler.
pub const SAMPLE_BLOCK: u64 = 1 << 16;
/// Identifier recorded alongside every sampled result.
pub const PRNG_NAME: &str = "chacha20 (rand_chacha 0.9), seed_from_u64(seed) + set_stream(block), block=65536, v1";

/// Eigen-decomposition of a non-degenerate observable, eigenvalues ascending.
#[derive(Debug, Clone)]
pub struct Spectrum {
    eigenvalues: Vec<f64>,
    eigenvectors: Vec<PureState>,
}

impl Spectrum {
    pub fn of(observable: &Operator) -> Result<Self> {
        if !observable.is_hermitian() {
            let dev = observable.hermitian_deviation();
            if dev > HERMITIAN_TOL * observable.max_abs() {
                return Err(Error::NotHermitian(dev));
            }
        }
        let eig = observable.matrix().clone().symmetric_eigen();
        let mut order: Vec<usize> = (0..eig.eigenvalues.len()).collect();
        order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
        let eigenvalues: Vec<f64> = order.iter().map(|&k| eig.eigenvalues[k]).collect();
        if let Some(gap) = eigenvalues
            .windows(2)
            .map(|w| w[1] - w[0])
            .filter(|&g| g < DEGENERACY_TOL)
            .reduce(f64::min)
        {
            return Err(Error::DegenerateObservable(gap));
        }
        let eigenvectors = order
            .iter()
            .map(|&k| {
                let v = eig.eigenvectors.column(k).into_owned();
                PureState::from_vector(observable.layout().clone(), v)
            })
            .collect::<Result<_>>()?;
        Ok(Self { eigenvalues, eigenvectors })
    }

    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }

    pub fn eigenvectors(&self) -> &[PureState] {
        &self.eigenvectors
    }

    pub fn len(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn is_empty(&self) -> bool {
        self.eigenvalues.is_empty()
    }

    /// `|⟨a_k|ψ⟩|²` for a normalized copy of `state`.
    fn weights(&self, state: &PureState) -> Result<Vec<f64>> {
        let s = state.normalized();
        self.eigenvectors.iter().map(|a| a.inner(&s).map(|z| z.norm_sqr())).collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Outcome {
    pub eigenvalue: f64,
    pub probability: f64,
}

/// Outcome probabilities in eigenvalue-ascending order.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OutcomeDistribution {
    pub outcomes: Vec<Outcome>,
}

impl OutcomeDistribution {
    fn from_weights(eigenvalues: &[f64], weights: &[f64], total: f64) -> Self {
        let outcomes = eigenvalues
            .iter()
            .zip(weights)
            .map(|(&eigenvalue, &w)| {
                let p = w / total;
                Outcome { eigenvalue, probability: if p < CLAMP_TOL { 0.0 } else { p } }
            })
            .collect();
        Self { outcomes }
    }

    pub fn probabilities(&self) -> Vec<f64> {
        self.outcomes.iter().map(|o| o.probability).collect()
    }

    pub fn total(&self) -> f64 {
        self.outcomes.iter().map(|o| o.probability).sum()
    }

    /// Index of the most probable outcome (first on ties).
    pub fn argmax(&self) -> usize {
        let mut best = 0;
        for (k, o) in self.outcomes.iter().enumerate() {
            if o.probability > self.outcomes[best].probability {
                best = k;
            }
        }
        best
    }

    pub fn max_abs_diff(&self, other: &OutcomeDistribution) -> f64 {
        self.outcomes
            .iter()
            .zip(&other.outcomes)
            .map(|(a, b)| (a.probability - b.probability).abs())
            .fold(0.0, f64::max)
    }
}

/// ABL numerators `|⟨f|a_k⟩|²·|⟨a_k|i⟩|²` and their sum, with both
/// boundaries normalized.
fn abl_numerators(initial: &PureState, final_state: &PureState, spec: &Spectrum) -> Result<(Vec<f64>, f64)> {
    let wi = spec.weights(initial)?;
    let wf = spec.weights(final_state)?;
    let nums: Vec<f64> = wi.iter().zip(&wf).map(|(a, b)| a * b).collect();
    let denom = nums.iter().sum();
    Ok((nums, denom))
}

pub fn abl_with_spectrum(initial: &PureState, final_state: &PureState, spec: &Spectrum) -> Result<OutcomeDistribution> {
    let (nums, denom) = abl_numerators(initial, final_state, spec)?;
    if denom <= MIN_DENOMINATOR {
        return Err(Error::InconsistentBoundary);
    }
    Ok(OutcomeDistribution::from_weights(&spec.eigenvalues, &nums, denom))
}

/// ABL probabilities for measuring `observable` between `initial` and
/// `final_state`, with no evolution in between.
pub fn abl_probability(initial: &PureState, final_state: &PureState, observable: &Operator) -> Result<OutcomeDistribution> {
    initial.layout().ensure_same(final_state.layout())?;
    initial.layout().ensure_same(observable.layout())?;
    abl_with_spectrum(initial, final_state, &Spectrum::of(observable)?)
}

/// `Pr(a_k) = |⟨a_k|Ψ⟩|²`.
pub fn born_probability(initial: &PureState, observable: &Operator) -> Result<OutcomeDistribution> {
    initial.layout().ensure_same(observable.layout())?;
    let spec = Spectrum::of(observable)?;
    let w = spec.weights(initial)?;
    Ok(OutcomeDistribution::from_weights(&spec.eigenvalues, &w, 1.0))
}

/// Checks that `basis` is a complete orthonormal set for its layout.
pub fn check_basis(basis: &[PureState]) -> Result<()> {
    let first = basis.first().ok_or(Error::IncompleteBasis { size: 0, dim: 0 })?;
    let dim = first.dim();
    for b in basis {
        first.layout().ensure_same(b.layout())?;
    }
    if basis.len() != dim {
        return Err(Error::IncompleteBasis { size: basis.len(), dim });
    }
    let mut dev = 0.0f64;
    for (i, a) in basis.iter().enumerate() {
        for (j, b) in basis.iter().enumerate().skip(i) {
            let g = a.inner(b)?;
            let target = if i == j { 1.0 } else { 0.0 };
            dev = dev.max((g - target).norm());
        }
    }
    if dev > BASIS_TOL {
        return Err(Error::NotOrthonormal(dev));
    }
    Ok(())
}

/// Born statistics recovered from ABL by averaging over a complete set of
/// final states.
///
/// Each final state `f` is weighted by its probability given that the
/// intermediate measurement took place, `Σ_j Pr(f|a_j) Pr(a_j|Ψ_i)`, which
/// is the ABL denominator for that `f`.
pub fn marginalize_final(initial: &PureState, observable: &Operator, final_basis: &[PureState]) -> Result<OutcomeDistribution> {
    check_basis(final_basis)?;
    initial.layout().ensure_same(observable.layout())?;
    initial.layout().ensure_same(final_basis[0].layout())?;
    let spec = Spectrum::of(observable)?;
    let mut acc = vec![0.0; spec.len()];
    for f in final_basis {
        let (_, weight) = abl_numerators(initial, f, &spec)?;
        if weight <= MIN_DENOMINATOR {
            continue;
        }
        let cond = abl_with_spectrum(initial, f, &spec)?;
        for (a, o) in acc.iter_mut().zip(&cond.outcomes) {
            *a += weight * o.probability;
        }
    }
    Ok(OutcomeDistribution::from_weights(&spec.eigenvalues, &acc, 1.0))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EnsembleSample {
    pub seed: u64,
    pub size: u64,
    pub eigenvalues: Vec<f64>,
    pub counts: Vec<u64>,
    /// Every draw's conditional ABL distribution put probability one on the
    /// drawn outcome.
    pub conditional_deterministic: bool,
    pub prng: &'static str,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ChiSquare {
    pub statistic: f64,
    pub dof: usize,
    pub p_value: f64,
}

impl EnsembleSample {
    pub fn frequencies(&self) -> Vec<f64> {
        self.counts.iter().map(|&c| c as f64 / self.size as f64).collect()
    }

    /// Pearson goodness-of-fit against `probabilities`; outcomes with zero
    /// expected count are skipped.
    pub fn chi_square(&self, probabilities: &[f64]) -> ChiSquare {
        let m = self.size as f64;
        let mut stat = 0.0;
        let mut cells = 0usize;
        for (&c, &p) in self.counts.iter().zip(probabilities) {
            let e = m * p;
            if e > 0.0 {
                stat += (c as f64 - e).powi(2) / e;
                cells += 1;
            }
        }
        let dof = cells.saturating_sub(1);
        let p_value = if dof == 0 {
            1.0
        } else {
            ChiSquared::new(dof as f64).map(|d| d.sf(stat)).unwrap_or(f64::NAN)
        };
        ChiSquare { statistic: stat, dof, p_value }
    }
}

fn block_rng(seed: u64, block: u64) -> ChaCha20Rng {
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    rng.set_stream(block);
    rng
}

fn draw_block(
    initial: &PureState,
    spec: &Spectrum,
    cdf: &[f64],
    seed: u64,
    block: u64,
    draws: u64,
) -> Result<(Vec<u64>, bool)> {
    let mut rng = block_rng(seed, block);
    let mut counts = vec![0u64; cdf.len()];
    let last = cdf.len() - 1;
    // conditional ABL check per drawn outcome; a pure function of k
    let mut verdict: Vec<Option<bool>> = vec![None; cdf.len()];
    let mut deterministic = true;
    for _ in 0..draws {
        let u: f64 = rng.random();
        let k = cdf.iter().position(|&c| u < c).unwrap_or(last);
        counts[k] += 1;
        let ok = match verdict[k] {
            Some(v) => v,
            None => {
                let cond = abl_with_spectrum(initial, &spec.eigenvectors[k], spec)?;
                let v = cond.outcomes.iter().enumerate().all(|(j, o)| {
                    if j == k {
                        (o.probability - 1.0).abs() <= 1e-12
                    } else {
                        o.probability <= 1e-12
                    }
                });
                verdict[k] = Some(v);
                v
            }
        };
        deterministic &= ok;
    }
    Ok((counts, deterministic))
}

/// Draws `m` final eigenstates i.i.d. with Born weights and, for each,
/// evaluates the conditional ABL distribution.
///
/// Draws are split into blocks of [`SAMPLE_BLOCK`]; block `b` uses the
/// ChaCha20 stream `b` of the generator seeded by `seed`. Counts therefore
/// do not depend on whether blocks run in parallel.
pub fn sample_final_states(initial: &PureState, observable: &Operator, m: u64, seed: u64) -> Result<EnsembleSample> {
    sample_impl(initial, observable, m, seed, false)
}

/// Same as [`sample_final_states`], with blocks drawn on the rayon pool.
pub fn sample_final_states_par(initial: &PureState, observable: &Operator, m: u64, seed: u64) -> Result<EnsembleSample> {
    sample_impl(initial, observable, m, seed, true)
}

fn sample_impl(initial: &PureState, observable: &Operator, m: u64, seed: u64, parallel: bool) -> Result<EnsembleSample> {
    if m == 0 {
        return Err(Error::InvalidParameter("ensemble size must be at least 1".into()));
    }
    initial.layout().ensure_same(observable.layout())?;
    let spec = Spectrum::of(observable)?;
    let born = spec.weights(initial)?;
    let mut cdf = Vec::with_capacity(born.len());
    let mut acc = 0.0;
    for p in &born {
        acc += p;
        cdf.push(acc);
    }
    let blocks: Vec<(u64, u64)> = (0..m.div_ceil(SAMPLE_BLOCK))
        .map(|b| (b, SAMPLE_BLOCK.min(m - b * SAMPLE_BLOCK)))
        .collect();
    let run = |&(b, n): &(u64, u64)| draw_block(initial, &spec, &cdf, seed, b, n);
    let parts: Vec<(Vec<u64>, bool)> = if parallel {
        blocks.par_iter().map(run).collect::<Result<_>>()?
    } else {
        blocks.iter().map(run).collect::<Result<_>>()?
    };
    let mut counts = vec![0u64; spec.len()];
    let mut deterministic = true;
    for (c, d) in parts {
        for (a, x) in counts.iter_mut().zip(c) {
            *a += x;
        }
        deterministic &= d;
    }
    Ok(EnsembleSample {
        seed,
        size: m,
        eigenvalues: spec.eigenvalues.clone(),
        counts,
        conditional_deterministic: deterministic,
        prng: PRNG_NAME,
    })
}
