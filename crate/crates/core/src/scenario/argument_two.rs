//! Null-signal transfer from the friend to the superobserver.
//!
//! `F` measures `S` along z at `t = 0`. On down the lab emits a signal that
//! reaches `W` at `t₀`; on up nothing happens in the lab. `W` assigns
//! `|Ψ⟩ = (|+z⟩|F₊⟩|0⟩_L + |−z⟩|F₋⟩|1⟩_L)/√2` on `(0, t₀)` and, if no signal
//! arrives, `|+z⟩|F₊⟩|0⟩_L` at `t₀`.

use serde::{Deserialize, Serialize};

use super::argument_one::trial_rng;
use super::ledger::{derive_certificates, ContradictionCertificate, EmncLedger, FidelityTable, OnticToken, Provenance};
use super::{build_em_unitary, spin_basis, BasisId, FriendModel, Outcome, StateLabel, StateRegistry};
use crate::error::{Error, Result};
use crate::hilbert::{
    self, kron, measure, project, CMatrix, Direction, ProjectiveMeasurement, StateVector, SubsystemLayout, UnitaryOp,
    C64,
};
use crate::optimize::{bclm_bound, OverlapReport};

/// Entrywise tolerance for "the lab did not evolve".
const NO_EVOLUTION_EPS: f64 = 1e-14;

/// `S(2) ⊗ F(3) ⊗ L(2)`.
pub fn argument_two_layout() -> SubsystemLayout {
    SubsystemLayout::new([("S", 2), ("F", 3), ("L", 2)]).expect("static layout")
}

/// The friend's z measurement on `S ⊗ F`, identity on `L`.
pub fn measurement_unitary() -> Result<UnitaryOp> {
    let em = build_em_unitary(BasisId::Z, &spin_basis(Direction::Z, "S")?, &FriendModel::qutrit(BasisId::Z), "F")?;
    em.tensor(&UnitaryOp::identity(SubsystemLayout::single("L", 2)?))
}

/// Lab evolution over `(0, t₀)`: flip `L` iff `F` holds the down record.
pub fn signal_unitary() -> Result<UnitaryOp> {
    let friend = FriendModel::qutrit(BasisId::Z);
    let down = friend.record(BasisId::Z, Outcome::Down)?;
    let flip = super::swap_levels(2, 0, 1);
    let mut fl = CMatrix::zeros(6, 6);
    for level in 0..friend.record_dim() {
        let mut sel = CMatrix::zeros(3, 3);
        sel[(level, level)] = C64::new(1.0, 0.0);
        let on_l = if level == down { flip.clone() } else { CMatrix::identity(2, 2) };
        fl += kron(&sel, &on_l);
    }
    UnitaryOp::new(argument_two_layout(), kron(&CMatrix::identity(2, 2), &fl))
}

pub fn initial_state() -> Result<StateVector> {
    let s = hilbert::spin_state(Direction::X, true).labeled("S")?;
    let rest = StateVector::basis(SubsystemLayout::new([("F", 3), ("L", 2)])?, 0)?;
    hilbert::tensor(&s, &rest)
}

/// `W`'s assignment on `(0, t₀)`.
pub fn psi_state() -> Result<StateVector> {
    signal_unitary()?.after(&measurement_unitary()?)?.apply(&initial_state()?)
}

/// `|+z⟩|F₊⟩|0⟩_L` or `|−z⟩|F₋⟩|1⟩_L`.
pub fn product_state(outcome: Outcome) -> Result<StateVector> {
    let friend = FriendModel::qutrit(BasisId::Z);
    let record = friend.record(BasisId::Z, outcome)?;
    let signal = match outcome {
        Outcome::Up => 0,
        Outcome::Down => 1,
    };
    StateVector::product_basis(argument_two_layout(), &[outcome.index(), record, signal])
}

#[derive(Clone, Debug, PartialEq)]
pub struct ArgumentTwoRun {
    pub t0: f64,
    pub outcome: Outcome,
    pub lambda_at_zero: OnticToken,
    pub lambda_at_t0: OnticToken,
    /// Lab state right after the friend's outcome.
    pub state_at_zero: StateVector,
    /// Lab state at `t₀` after the protocol's evolution.
    pub state_at_t0: StateVector,
    pub ledger: EmncLedger,
    pub fidelities: FidelityTable,
    pub certificate: Option<ContradictionCertificate>,
    pub overlap: OverlapReport,
}

/// Argument-two outcome summary for reports.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ArgumentTwoSummary {
    pub outcome: Outcome,
    pub lambda_at_zero: OnticToken,
    pub lambda_at_t0: OnticToken,
    pub lab_unchanged: bool,
}

impl ArgumentTwoRun {
    pub fn summary(&self) -> ArgumentTwoSummary {
        ArgumentTwoSummary {
            outcome: self.outcome,
            lambda_at_zero: self.lambda_at_zero,
            lambda_at_t0: self.lambda_at_t0,
            lab_unchanged: self.state_at_zero.approx_eq(&self.state_at_t0, NO_EVOLUTION_EPS),
        }
    }
}

/// One trial. `force` pins the friend's outcome instead of sampling it.
pub fn run_argument_two(t0: f64, seed: u64, force: Option<Outcome>) -> Result<ArgumentTwoRun> {
    if !(t0 > 0.0 && t0.is_finite()) {
        return Err(Error::InvalidArgument(format!("t0 must be positive, got {t0}")));
    }
    let lab = measurement_unitary()?.apply(&initial_state()?)?;
    let z = ProjectiveMeasurement::from_basis(&[
        hilbert::spin_state(Direction::Z, true),
        hilbert::spin_state(Direction::Z, false),
    ])?;
    let on_s = ProjectiveMeasurement::on_subsystem(lab.layout(), "S", &z)?;
    let (k, state_at_zero) = match force {
        Some(o) => (o.index(), project(&lab, &on_s, o.index())?.1),
        None => measure(&lab, &on_s, &mut trial_rng(seed, 0))?,
    };
    let outcome = Outcome::from_index(k)?;
    let state_at_t0 = signal_unitary()?.apply(&state_at_zero)?;

    let mut registry = StateRegistry::new();
    registry.insert(StateLabel::Psi, psi_state()?);
    registry.insert(StateLabel::ProductUp, product_state(Outcome::Up)?);
    registry.insert(StateLabel::ProductDown, product_state(Outcome::Down)?);
    let fidelities = registry.fidelity_table()?;

    let mut ledger = EmncLedger::new(false);
    let lambda_at_zero = ledger.mint(0);
    ledger.claim(lambda_at_zero, StateLabel::Psi, Provenance::Actual, Some(0.0))?;
    // The ontic state persists exactly when the lab state does not evolve.
    let lambda_at_t0 = if state_at_t0.approx_eq(&state_at_zero, NO_EVOLUTION_EPS) {
        lambda_at_zero
    } else {
        ledger.mint(0)
    };
    let updated = match outcome {
        Outcome::Up => StateLabel::ProductUp,
        Outcome::Down => StateLabel::ProductDown,
    };
    ledger.claim(lambda_at_t0, updated, Provenance::Actual, Some(t0))?;

    let certificate = derive_certificates(&ledger, &fidelities)?.into_iter().next();
    let mut overlap = bclm_bound(registry.get(StateLabel::Psi)?, registry.get(updated)?, argument_two_layout().total_dim())?;
    overlap.pbr_disjoint_required = certificate.is_some();

    Ok(ArgumentTwoRun {
        t0,
        outcome,
        lambda_at_zero,
        lambda_at_t0,
        state_at_zero,
        state_at_t0,
        ledger,
        fidelities,
        certificate,
        overlap,
    })
}
