//! Free-choice routing between two superobservers.
//!
//! Per trial, `F′` measures `S′` along z. On up, `F` measures `S` along z and
//! the result is routed to `W₁` or `W₂` by a fair coin. On down, `F` picks
//! `n̂₁` or `n̂₂` by a fair coin and the result goes to the matching
//! superobserver. `Wᵢ` assigns the lab the state `|Ψ_{n̂ᵢ}⟩`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::ledger::{derive_certificates, ContradictionCertificate, EmncLedger, FidelityTable, Provenance};
use super::{build_em_unitary, spin_basis, BasisId, FriendModel, Outcome, StateLabel, StateRegistry, Superobserver};
use crate::error::{Error, Result};
use crate::hilbert::{
    self, kron, measure, CMatrix, Direction, ProjectiveMeasurement, StateVector, SubsystemLayout, UnitaryOp,
};
use crate::tol;

/// `S(2) ⊗ F(5) ⊗ S′(2) ⊗ F′(3)`.
pub fn argument_one_layout() -> SubsystemLayout {
    SubsystemLayout::new([("S", 2), ("F", 5), ("S'", 2), ("F'", 3)]).expect("static layout")
}

/// Record levels of `F` as modelled by `who`: ready, z±, n̂ᵢ±.
pub fn friend_for(who: Superobserver) -> FriendModel {
    let n = who.basis();
    FriendModel::with_records(&[
        (BasisId::Z, Outcome::Up),
        (BasisId::Z, Outcome::Down),
        (n, Outcome::Up),
        (n, Outcome::Down),
    ])
    .expect("distinct records")
}

fn direction_of(who: Superobserver, n1: Direction, n2: Direction) -> Direction {
    match who {
        Superobserver::W1 => n1,
        Superobserver::W2 => n2,
    }
}

/// `Wᵢ`'s model of the lab's evolution: `F′` measures `S′` along z, then `F`
/// measures `S` along z or `n̂ᵢ` controlled on `F′`'s record.
pub fn argument_one_unitary(who: Superobserver, n1: Direction, n2: Direction) -> Result<UnitaryOp> {
    let fprime = FriendModel::qutrit(BasisId::Z);
    let u_sprime = build_em_unitary(BasisId::Z, &spin_basis(Direction::Z, "S'")?, &fprime, "F'")?;
    let friend = friend_for(who);
    let u_z = build_em_unitary(BasisId::Z, &spin_basis(Direction::Z, "S")?, &friend, "F")?;
    let u_n = build_em_unitary(who.basis(), &spin_basis(direction_of(who, n1, n2), "S")?, &friend, "F")?;

    let sf_dim = u_z.layout().total_dim();
    let mut controlled = CMatrix::zeros(60, 60);
    for level in 0..fprime.record_dim() {
        let block = if level == fprime.record(BasisId::Z, Outcome::Up)? {
            u_z.matrix().clone()
        } else if level == fprime.record(BasisId::Z, Outcome::Down)? {
            u_n.matrix().clone()
        } else {
            CMatrix::identity(sf_dim, sf_dim)
        };
        let mut sel = CMatrix::zeros(3, 3);
        sel[(level, level)] = hilbert::C64::new(1.0, 0.0);
        controlled += kron(&block, &kron(&CMatrix::identity(2, 2), &sel));
    }
    let layout = argument_one_layout();
    let first = UnitaryOp::identity(SubsystemLayout::new([("S", 2), ("F", 5)])?).tensor(&u_sprime)?;
    UnitaryOp::new(layout, controlled)?.after(&first)
}

/// `|+x⟩_S |ready⟩_F |+x⟩_{S′} |ready⟩_{F′}`.
pub fn argument_one_initial_state() -> Result<StateVector> {
    let plus = hilbert::spin_state(Direction::X, true);
    let ready = |label: &str, dim| StateVector::basis(SubsystemLayout::single(label, dim)?, 0);
    hilbert::tensor_all([
        &plus.clone().labeled("S")?,
        &ready("F", 5)?,
        &plus.labeled("S'")?,
        &ready("F'", 3)?,
    ])
}

/// The lab state `|Ψ_{n̂ᵢ}⟩` that superobserver `who` assigns.
pub fn build_psi_ni(who: Superobserver, n1: Direction, n2: Direction) -> Result<StateVector> {
    if n1.same_axis(&n2, tol::STRUCTURAL) {
        log::warn!("n1 and n2 are the same axis; both superobservers assign the same lab state");
    }
    argument_one_unitary(who, n1, n2)?.apply(&argument_one_initial_state()?)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TrialRecord {
    pub trial_index: usize,
    pub fprime_outcome: Outcome,
    pub f_basis: BasisId,
    pub f_outcome: Outcome,
    pub routed_to: Superobserver,
    pub assigned_state: StateLabel,
}

impl TrialRecord {
    pub fn new(
        trial_index: usize,
        fprime_outcome: Outcome,
        f_basis: BasisId,
        f_outcome: Outcome,
        routed_to: Superobserver,
    ) -> Result<Self> {
        let record = TrialRecord {
            trial_index,
            fprime_outcome,
            f_basis,
            f_outcome,
            routed_to,
            assigned_state: routed_to.assigned_state(),
        };
        record.check()?;
        Ok(record)
    }

    /// Protocol conformance: z after `F′` up; otherwise routed by basis.
    pub fn check(&self) -> Result<()> {
        let ok = match self.fprime_outcome {
            Outcome::Up => self.f_basis == BasisId::Z,
            Outcome::Down => self.f_basis != BasisId::Z && self.routed_to.basis() == self.f_basis,
        } && self.assigned_state == self.routed_to.assigned_state();
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidArgument(format!("trial record violates the routing protocol: {self:?}")))
        }
    }

    /// Both friends measured along z, so either superobserver could have received it.
    pub fn is_zz(&self) -> bool {
        self.f_basis == BasisId::Z
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ArgumentOneConfig {
    pub n1: Direction,
    pub n2: Direction,
    pub trials: usize,
    pub seed: u64,
    pub no_superdeterminism: bool,
    /// 0 or 1 runs sequentially.
    #[serde(default)]
    pub threads: usize,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ArgumentOneRun {
    pub records: Vec<TrialRecord>,
    pub ledger: EmncLedger,
    pub certificates: Vec<ContradictionCertificate>,
    pub fidelities: FidelityTable,
    pub registry: StateRegistry,
}

/// Independent stream per trial so batches can run in any order.
pub(crate) fn trial_rng(seed: u64, trial: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(trial as u64);
    rng
}

struct Bases {
    z: ProjectiveMeasurement,
    n1: ProjectiveMeasurement,
    n2: ProjectiveMeasurement,
}

fn simulate_trial(t: usize, seed: u64, bases: &Bases) -> Result<TrialRecord> {
    let mut rng = trial_rng(seed, t);
    let plus = hilbert::spin_state(Direction::X, true);
    let (k, _) = measure(&plus, &bases.z, &mut rng)?;
    let fprime = Outcome::from_index(k)?;
    match fprime {
        Outcome::Up => {
            let (k, _) = measure(&plus, &bases.z, &mut rng)?;
            let routed = if rng.random_bool(0.5) { Superobserver::W1 } else { Superobserver::W2 };
            TrialRecord::new(t, fprime, BasisId::Z, Outcome::from_index(k)?, routed)
        }
        Outcome::Down => {
            let who = if rng.random_bool(0.5) { Superobserver::W1 } else { Superobserver::W2 };
            let m = match who {
                Superobserver::W1 => &bases.n1,
                Superobserver::W2 => &bases.n2,
            };
            let (k, _) = measure(&plus, m, &mut rng)?;
            TrialRecord::new(t, fprime, who.basis(), Outcome::from_index(k)?, who)
        }
    }
}

pub fn run_argument_one(cfg: &ArgumentOneConfig) -> Result<ArgumentOneRun> {
    if cfg.trials == 0 {
        return Err(Error::InvalidArgument("at least one trial is required".into()));
    }
    let qubit = |d| -> Result<ProjectiveMeasurement> {
        ProjectiveMeasurement::from_basis(&[hilbert::spin_state(d, true), hilbert::spin_state(d, false)])
    };
    let bases = Bases { z: qubit(Direction::Z)?, n1: qubit(cfg.n1)?, n2: qubit(cfg.n2)? };

    let records: Vec<TrialRecord> = if cfg.threads > 1 {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(cfg.threads)
            .build()
            .map_err(|e| Error::InvalidArgument(e.to_string()))?;
        pool.install(|| {
            (0..cfg.trials)
                .into_par_iter()
                .map(|t| simulate_trial(t, cfg.seed, &bases))
                .collect::<Result<_>>()
        })?
    } else {
        (0..cfg.trials).map(|t| simulate_trial(t, cfg.seed, &bases)).collect::<Result<_>>()?
    };

    let ledger = build_ledger(&records, cfg.no_superdeterminism)?;

    let mut registry = StateRegistry::new();
    registry.insert(StateLabel::PsiN1, build_psi_ni(Superobserver::W1, cfg.n1, cfg.n2)?);
    registry.insert(StateLabel::PsiN2, build_psi_ni(Superobserver::W2, cfg.n1, cfg.n2)?);
    let fidelities = registry.fidelity_table()?;
    let certificates = derive_certificates(&ledger, &fidelities)?;
    Ok(ArgumentOneRun { records, ledger, certificates, fidelities, registry })
}

/// One token per trial in the state actually assigned; z–z trials also get
/// the other superobserver's state when routing is free of the ontic state.
pub fn build_ledger(records: &[TrialRecord], no_superdeterminism: bool) -> Result<EmncLedger> {
    let mut ledger = EmncLedger::new(no_superdeterminism);
    for r in records {
        let token = ledger.mint(r.trial_index);
        ledger.claim(token, r.assigned_state, Provenance::Actual, None)?;
        if no_superdeterminism && r.is_zz() {
            ledger.claim(token, r.routed_to.other().assigned_state(), Provenance::Counterfactual, None)?;
        }
    }
    Ok(ledger)
}
