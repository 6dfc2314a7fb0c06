//! Encapsulated-measurement scenarios.
//!
//! A friend `F` measures a spin `S`; a superobserver `W` models the whole
//! interaction as a unitary on `S ⊗ F` and can verify the resulting lab state
//! with a rank-one projective measurement. The two protocols built on top of
//! this (free-choice routing and the null-signal transfer) are in
//! [`argument_one`] and [`argument_two`]; both record, per trial, which lab
//! states a single observer-independent ontic state is forced to be
//! compatible with.

pub mod argument_one;
pub mod argument_two;
pub mod em_basic;
pub mod ledger;

pub use argument_one::{build_psi_ni, run_argument_one, ArgumentOneConfig, ArgumentOneRun, TrialRecord};
pub use argument_two::{run_argument_two, ArgumentTwoRun};
pub use em_basic::{run_em_basic, EmBasicRun};
pub use ledger::{
    derive_certificates, ContradictionCertificate, EmncLedger, FidelityTable, LedgerEntry, MembershipClaim,
    OnticToken, Provenance, Verdict,
};

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hilbert::{self, kron, CMatrix, Direction, ProjectiveMeasurement, StateVector, UnitaryOp, C64};

/// Which spin component a friend measured.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BasisId {
    Z,
    N1,
    N2,
}

impl fmt::Display for BasisId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            BasisId::Z => "z",
            BasisId::N1 => "n1",
            BasisId::N2 => "n2",
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Outcome {
    Up,
    Down,
}

impl Outcome {
    pub fn from_index(k: usize) -> Result<Self> {
        match k {
            0 => Ok(Outcome::Up),
            1 => Ok(Outcome::Down),
            _ => Err(Error::InvalidArgument(format!("spin outcome index {k}"))),
        }
    }

    pub fn index(self) -> usize {
        match self {
            Outcome::Up => 0,
            Outcome::Down => 1,
        }
    }
}

impl fmt::Display for Outcome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Outcome::Up => "up",
            Outcome::Down => "down",
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Superobserver {
    W1,
    W2,
}

impl Superobserver {
    pub fn basis(self) -> BasisId {
        match self {
            Superobserver::W1 => BasisId::N1,
            Superobserver::W2 => BasisId::N2,
        }
    }

    pub fn assigned_state(self) -> StateLabel {
        match self {
            Superobserver::W1 => StateLabel::PsiN1,
            Superobserver::W2 => StateLabel::PsiN2,
        }
    }

    pub fn other(self) -> Self {
        match self {
            Superobserver::W1 => Superobserver::W2,
            Superobserver::W2 => Superobserver::W1,
        }
    }
}

impl fmt::Display for Superobserver {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Superobserver::W1 => "W1",
            Superobserver::W2 => "W2",
        })
    }
}

/// Names of the lab states a superobserver can assign.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum StateLabel {
    /// Two-branch state of `S ⊗ F` after the friend's z measurement.
    #[serde(rename = "Phi")]
    Phi,
    /// `W₁`'s assignment in the routing protocol.
    #[serde(rename = "Psi_n1")]
    PsiN1,
    /// `W₂`'s assignment in the routing protocol.
    #[serde(rename = "Psi_n2")]
    PsiN2,
    /// Null-signal protocol, before `t₀`.
    #[serde(rename = "Psi")]
    Psi,
    /// Null-signal protocol: `|+z⟩|F₊⟩|0⟩_L` after no signal arrived.
    #[serde(rename = "product_up")]
    ProductUp,
    /// Null-signal protocol: `|−z⟩|F₋⟩|1⟩_L` after the signal arrived.
    #[serde(rename = "product_down")]
    ProductDown,
}

impl StateLabel {
    pub fn as_str(self) -> &'static str {
        match self {
            StateLabel::Phi => "Phi",
            StateLabel::PsiN1 => "Psi_n1",
            StateLabel::PsiN2 => "Psi_n2",
            StateLabel::Psi => "Psi",
            StateLabel::ProductUp => "product_up",
            StateLabel::ProductDown => "product_down",
        }
    }
}

impl fmt::Display for StateLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Record levels of a friend (or of a signal register).
///
/// Level `ready_index` is the pre-measurement state; each `(basis, outcome)`
/// pair the friend can see has its own orthogonal level.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FriendModel {
    record_dim: usize,
    ready_index: usize,
    record_map: BTreeMap<(BasisId, Outcome), usize>,
}

impl FriendModel {
    pub fn new(ready_index: usize, record_map: BTreeMap<(BasisId, Outcome), usize>) -> Result<Self> {
        let record_dim = 1 + record_map.len();
        let mut seen = vec![false; record_dim];
        for &idx in std::iter::once(&ready_index).chain(record_map.values()) {
            if idx >= record_dim {
                return Err(Error::InvalidFriendModel(format!("record index {idx} ≥ dimension {record_dim}")));
            }
            if std::mem::replace(&mut seen[idx], true) {
                return Err(Error::InvalidFriendModel(format!("record index {idx} used twice")));
            }
        }
        Ok(FriendModel { record_dim, ready_index, record_map })
    }

    /// Ready at level 0, records at 1, 2, … in the given order.
    pub fn with_records(records: &[(BasisId, Outcome)]) -> Result<Self> {
        let mut map = BTreeMap::new();
        for (i, r) in records.iter().enumerate() {
            if map.insert(*r, i + 1).is_some() {
                return Err(Error::InvalidFriendModel(format!("duplicate record {r:?}")));
            }
        }
        Self::new(0, map)
    }

    /// Ready, up, down for a single basis.
    pub fn qutrit(basis: BasisId) -> Self {
        Self::with_records(&[(basis, Outcome::Up), (basis, Outcome::Down)]).expect("two distinct records")
    }

    pub fn record_dim(&self) -> usize {
        self.record_dim
    }

    pub fn ready_index(&self) -> usize {
        self.ready_index
    }

    pub fn record(&self, basis: BasisId, outcome: Outcome) -> Result<usize> {
        self.record_map.get(&(basis, outcome)).copied().ok_or_else(|| Error::MissingRecord {
            basis: basis.to_string(),
            outcome: outcome.to_string(),
        })
    }
}

/// Spin basis `{|+n̂⟩, |−n̂⟩}` on a qubit factor named `label`.
pub fn spin_basis(d: Direction, label: &str) -> Result<[StateVector; 2]> {
    Ok([
        hilbert::spin_state(d, true).labeled(label)?,
        hilbert::spin_state(d, false).labeled(label)?,
    ])
}

/// The superobserver's model of a friend's measurement.
///
/// Acts as `|s_k⟩|ready⟩ → |s_k⟩|record(basis, k)⟩` on `system ⊗ friend`, and
/// is completed to a unitary by swapping `ready ↔ record(k)` on the branch of
/// `|s_k⟩` (identity on the orthogonal complement of the basis). All branch
/// phases are +1.
pub fn build_em_unitary(
    basis_id: BasisId,
    system_basis: &[StateVector],
    friend: &FriendModel,
    friend_label: &str,
) -> Result<UnitaryOp> {
    let first = system_basis
        .first()
        .ok_or_else(|| Error::InvalidArgument("empty system basis".into()))?;
    if system_basis.iter().any(|s| s.layout() != first.layout()) {
        return Err(Error::InvalidArgument("system basis vectors live on different layouts".into()));
    }
    hilbert::check_orthonormal(system_basis)?;
    let friend_layout = crate::hilbert::SubsystemLayout::single(friend_label, friend.record_dim())?;
    let layout = first.layout().concat(&friend_layout)?;

    let sdim = first.dim();
    let fdim = friend.record_dim();
    let mut covered = CMatrix::zeros(sdim, sdim);
    let mut u = CMatrix::zeros(sdim * fdim, sdim * fdim);
    for (k, s) in system_basis.iter().enumerate() {
        let record = friend.record(basis_id, Outcome::from_index(k)?)?;
        let p = s.projector();
        covered += &p;
        u += kron(&p, &swap_levels(fdim, friend.ready_index(), record));
    }
    u += kron(&(CMatrix::identity(sdim, sdim) - covered), &CMatrix::identity(fdim, fdim));
    UnitaryOp::new(layout, u)
}

/// Permutation matrix exchanging levels `a` and `b`.
pub(crate) fn swap_levels(dim: usize, a: usize, b: usize) -> CMatrix {
    let mut m = CMatrix::zeros(dim, dim);
    for i in 0..dim {
        let j = if i == a {
            b
        } else if i == b {
            a
        } else {
            i
        };
        m[(j, i)] = C64::new(1.0, 0.0);
    }
    m
}

/// Lab states known to the superobservers, by label.
#[derive(Clone, Debug, Default)]
pub struct StateRegistry {
    states: BTreeMap<StateLabel, StateVector>,
}

impl StateRegistry {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn insert(&mut self, label: StateLabel, state: StateVector) {
        self.states.insert(label, state);
    }

    pub fn get(&self, label: StateLabel) -> Result<&StateVector> {
        self.states.get(&label).ok_or_else(|| Error::UnknownLabel(label.to_string()))
    }

    pub fn labels(&self) -> impl Iterator<Item = StateLabel> + '_ {
        self.states.keys().copied()
    }

    /// Pairwise fidelities of every registered state.
    pub fn fidelity_table(&self) -> Result<FidelityTable> {
        let mut table = FidelityTable::default();
        let entries: Vec<_> = self.states.iter().collect();
        for (i, (a, sa)) in entries.iter().enumerate() {
            for (b, sb) in &entries[i + 1..] {
                if sa.layout() == sb.layout() {
                    table.insert(**a, **b, hilbert::fidelity(sa, sb)?);
                }
            }
        }
        Ok(table)
    }
}

impl PartialEq for StateRegistry {
    fn eq(&self, other: &Self) -> bool {
        self.labels().eq(other.labels())
            && self.labels().all(|l| self.get(l).ok() == other.get(l).ok())
    }
}

/// Probability that the superobserver's check `{|φ⟩⟨φ|, I − |φ⟩⟨φ|}` for the
/// registered state `target` succeeds on `s`.
pub fn verify_superobserver(registry: &StateRegistry, s: &StateVector, target: StateLabel) -> Result<f64> {
    let phi = registry.get(target)?;
    let check = ProjectiveMeasurement::verification(phi)?;
    Ok(hilbert::born(s, check.povm())?[0])
}
