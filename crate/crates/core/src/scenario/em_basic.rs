//! The plain encapsulated measurement: `F` measures `S` along z, `W` models
//! it as a unitary and checks the two-branch result.

use serde::{Deserialize, Serialize};

use super::argument_one::trial_rng;
use super::{build_em_unitary, spin_basis, BasisId, FriendModel, Outcome};
use crate::error::Result;
use crate::hilbert::{
    self, born, measure, CMatrix, Direction, ProjectiveMeasurement, StateVector, SubsystemLayout, C64,
};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EmBasicRun {
    /// Probabilities of `(+z, F₊)` and `(−z, F₋)` in the lab state.
    pub branch_probabilities: [f64; 2],
    /// Probability that `W`'s check `{|Φ⟩⟨Φ|, I − |Φ⟩⟨Φ|}` yields outcome 0.
    pub verification_probability: f64,
    /// Outcomes of repeating the check on its own post-state.
    pub repeated_outcomes: Vec<usize>,
    /// Worst fidelity of any post-check state to `|Φ⟩`.
    pub min_post_fidelity: f64,
    #[serde(skip)]
    pub phi: Option<StateVector>,
}

/// `|Φ⟩ = U (|+x⟩_S |F₀⟩)`.
pub fn phi_state() -> Result<StateVector> {
    let friend = FriendModel::qutrit(BasisId::Z);
    let u = build_em_unitary(BasisId::Z, &spin_basis(Direction::Z, "S")?, &friend, "F")?;
    let init = hilbert::tensor(
        &hilbert::spin_state(Direction::X, true).labeled("S")?,
        &StateVector::basis(SubsystemLayout::single("F", friend.record_dim())?, friend.ready_index())?,
    )?;
    u.apply(&init)
}

pub fn run_em_basic(seed: u64, repeats: usize) -> Result<EmBasicRun> {
    let friend = FriendModel::qutrit(BasisId::Z);
    let phi = phi_state()?;

    let records = ProjectiveMeasurement::new(
        (0..friend.record_dim())
            .map(|k| {
                let mut m = CMatrix::zeros(friend.record_dim(), friend.record_dim());
                m[(k, k)] = C64::new(1.0, 0.0);
                m
            })
            .collect(),
    )?;
    let on_f = ProjectiveMeasurement::on_subsystem(phi.layout(), "F", &records)?;
    let p = born(&phi, on_f.povm())?;
    let branch_probabilities = [
        p[friend.record(BasisId::Z, Outcome::Up)?],
        p[friend.record(BasisId::Z, Outcome::Down)?],
    ];

    let check = ProjectiveMeasurement::verification(&phi)?;
    let verification_probability = born(&phi, check.povm())?[0];
    let mut rng = trial_rng(seed, 0);
    let mut state = phi.clone();
    let mut repeated_outcomes = Vec::with_capacity(repeats);
    let mut min_post_fidelity: f64 = 1.0;
    for _ in 0..repeats {
        let (k, post) = measure(&state, &check, &mut rng)?;
        repeated_outcomes.push(k);
        min_post_fidelity = min_post_fidelity.min(hilbert::fidelity(&post, &phi)?);
        state = post;
    }
    Ok(EmBasicRun {
        branch_probabilities,
        verification_probability,
        repeated_outcomes,
        min_post_fidelity,
        phi: Some(phi),
    })
}
