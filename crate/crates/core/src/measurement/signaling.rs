use serde::Serialize;

use crate::hilbert::apply_local_raw;
use crate::rules::{abl_with_spectrum, marginalize_final, OutcomeDistribution, Spectrum};
use crate::{Operator, PureState, Result, SubsystemLayout};

pub const ALICE: &str = "A";
pub const BOB: &str = "B";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum SpinReading {
    Up,
    Down,
}

impl std::fmt::Display for SpinReading {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            SpinReading::Up => "up",
            SpinReading::Down => "down",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SignalingReport {
    pub alice_acts: bool,
    pub bob: SpinReading,
    pub bob_up: f64,
    pub bob_down: f64,
    /// ABL distribution of the joint observable `2σz_A + σz_B`.
    pub joint: OutcomeDistribution,
    /// Bob's `(up, down)` marginal when the final state is averaged over the
    /// computational basis instead of fixed.
    pub marginal_without_final: (f64, f64),
}

fn layout() -> Result<SubsystemLayout> {
    SubsystemLayout::new([(ALICE, 2), (BOB, 2)])
}

/// `(|↑↑⟩ + |↓↓⟩)/√2`.
pub fn signaling_initial() -> Result<PureState> {
    let h = std::f64::consts::FRAC_1_SQRT_2;
    PureState::from_real(layout()?, &[h, 0.0, 0.0, h])
}

/// `(|↑↑⟩ + |↑↓⟩)/√2`.
pub fn signaling_final() -> Result<PureState> {
    let h = std::f64::consts::FRAC_1_SQRT_2;
    PureState::from_real(layout()?, &[h, h, 0.0, 0.0])
}

/// Bob's `σz` statistics between `initial` (after Alice's optional `σx`)
/// and `final_state`.
///
/// Bob's reading is extracted from the non-degenerate joint observable
/// `2σz_A + σz_B`, whose eigenbasis is the computational basis. His
/// probability of `↑` is `Σ_k Pr(a_k)⟨a_k|P↑_B|a_k⟩`.
pub fn run_signaling(initial: &PureState, final_state: &PureState, alice_acts: bool) -> Result<SignalingReport> {
    let l = layout()?;
    let mut psi = initial.normalized();
    if alice_acts {
        psi = psi.apply_local(&Operator::sigma_x(ALICE))?;
    }
    let za = crate::embed_operator(&Operator::sigma_z(ALICE), &l)?;
    let zb = crate::embed_operator(&Operator::sigma_z(BOB), &l)?;
    let observable = za.scale(2.0.into()).add(&zb)?;
    let spec = Spectrum::of(&observable)?;

    let bob_up_projector = Operator::projector(&PureState::basis(SubsystemLayout::single(BOB, 2)?, 0)?);
    let up_weights: Vec<f64> = spec
        .eigenvectors()
        .iter()
        .map(|a| Ok(apply_local_raw(a.layout(), a.amplitudes(), &bob_up_projector)?.norm_squared()))
        .collect::<Result<_>>()?;
    let bob_up_of = |d: &OutcomeDistribution| d.outcomes.iter().zip(&up_weights).map(|(o, w)| o.probability * w).sum::<f64>();

    let joint = abl_with_spectrum(&psi, final_state, &spec)?;
    let bob_up = bob_up_of(&joint);
    let bob_down = 1.0 - bob_up;

    let basis: Vec<PureState> = (0..4).map(|k| PureState::basis(l.clone(), k)).collect::<Result<_>>()?;
    let marginal = marginalize_final(&psi, &observable, &basis)?;
    let mu = bob_up_of(&marginal);

    Ok(SignalingReport {
        alice_acts,
        bob: if bob_up >= bob_down { SpinReading::Up } else { SpinReading::Down },
        bob_up,
        bob_down,
        joint,
        marginal_without_final: (mu, 1.0 - mu),
    })
}

/// Entangled pair `(|↑↑⟩ + |↓↓⟩)/√2` with the final state
/// `(|↑↑⟩ + |↑↓⟩)/√2` known to Bob.
pub fn run_signaling_demo(alice_acts: bool) -> Result<SignalingReport> {
    run_signaling(&signaling_initial()?, &signaling_final()?, alice_acts)
}
