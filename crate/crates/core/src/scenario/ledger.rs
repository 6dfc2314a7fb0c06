//! Bookkeeping of which lab states each (opaque) ontic state must belong to.
//!
//! Under observer-independence of ontic states, every state a superobserver
//! correctly assigns to the lab must contain the lab's actual ontic state in
//! its support. The ledger records those claims; two claims on states of
//! fidelity < 1 attached to one token contradict disjointness of supports.

use std::collections::BTreeSet;
use std::fmt;

use serde::{Deserialize, Serialize};

use super::StateLabel;
use crate::error::{Error, Result};
use crate::tol;

/// Stand-in for an unknown ontic state of the lab. Only identity matters.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct OnticToken(u64);

impl OnticToken {
    pub fn id(self) -> u64 {
        self.0
    }
}

impl fmt::Display for OnticToken {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "λ#{}", self.0)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Provenance {
    /// The superobserver that actually received the trial assigned this state.
    Actual,
    /// The trial could equally have gone to another superobserver.
    Counterfactual,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MembershipClaim {
    pub state: StateLabel,
    pub provenance: Provenance,
    /// Protocol time of the assignment, where the protocol has a clock.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub time: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LedgerEntry {
    pub trial: usize,
    pub token: OnticToken,
    pub claims: Vec<MembershipClaim>,
}

impl LedgerEntry {
    /// Distinct states this token is claimed to lie in.
    pub fn states(&self) -> BTreeSet<StateLabel> {
        self.claims.iter().map(|c| c.state).collect()
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct EmncLedger {
    pub no_superdeterminism: bool,
    pub entries: Vec<LedgerEntry>,
}

impl EmncLedger {
    pub fn new(no_superdeterminism: bool) -> Self {
        EmncLedger { no_superdeterminism, entries: Vec::new() }
    }

    /// Issues a fresh token for the lab in `trial`.
    pub fn mint(&mut self, trial: usize) -> OnticToken {
        let token = OnticToken(self.entries.len() as u64);
        self.entries.push(LedgerEntry { trial, token, claims: Vec::new() });
        token
    }

    pub fn claim(
        &mut self,
        token: OnticToken,
        state: StateLabel,
        provenance: Provenance,
        time: Option<f64>,
    ) -> Result<()> {
        if provenance == Provenance::Counterfactual && !self.no_superdeterminism {
            return Err(Error::InvalidArgument(
                "counterfactual membership requires the no-superdeterminism assumption".into(),
            ));
        }
        let pos = self.position(token).ok_or_else(|| Error::InvalidArgument(format!("unknown ontic token {token}")))?;
        self.entries[pos].claims.push(MembershipClaim { state, provenance, time });
        Ok(())
    }

    pub fn entry(&self, token: OnticToken) -> Option<&LedgerEntry> {
        self.position(token).map(|i| &self.entries[i])
    }

    // Minted tokens equal their index; fall back to a scan for edited ledgers.
    fn position(&self, token: OnticToken) -> Option<usize> {
        let i = token.0 as usize;
        if self.entries.get(i).is_some_and(|e| e.token == token) {
            Some(i)
        } else {
            self.entries.iter().position(|e| e.token == token)
        }
    }

    pub fn summary(&self) -> LedgerSummary {
        LedgerSummary {
            entries: self.entries.len(),
            multi_membership: self.entries.iter().filter(|e| e.states().len() >= 2).count(),
            counterfactual_claims: self
                .entries
                .iter()
                .flat_map(|e| &e.claims)
                .filter(|c| c.provenance == Provenance::Counterfactual)
                .count(),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct LedgerSummary {
    pub entries: usize,
    pub multi_membership: usize,
    pub counterfactual_claims: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PairFidelity {
    pub a: StateLabel,
    pub b: StateLabel,
    pub fidelity: f64,
}

/// Symmetric table of `|⟨a|b⟩|²` between labeled lab states.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct FidelityTable {
    pairs: Vec<PairFidelity>,
}

impl FidelityTable {
    pub fn insert(&mut self, a: StateLabel, b: StateLabel, fidelity: f64) {
        let (a, b) = if a <= b { (a, b) } else { (b, a) };
        self.pairs.retain(|p| !(p.a == a && p.b == b));
        self.pairs.push(PairFidelity { a, b, fidelity });
        self.pairs.sort_by_key(|p| (p.a, p.b));
    }

    pub fn get(&self, a: StateLabel, b: StateLabel) -> Option<f64> {
        if a == b {
            return Some(1.0);
        }
        let (a, b) = if a <= b { (a, b) } else { (b, a) };
        self.pairs.iter().find(|p| p.a == a && p.b == b).map(|p| p.fidelity)
    }

    pub fn pairs(&self) -> &[PairFidelity] {
        &self.pairs
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Verdict {
    ViolatesPbrDisjointness,
}

/// One ontic state claimed by two distinguishable (fidelity < 1) lab states.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ContradictionCertificate {
    pub trial_index: usize,
    pub token: OnticToken,
    pub states: (StateLabel, StateLabel),
    pub fidelity: f64,
    pub verdict: Verdict,
}

/// Every pair of distinct claims on one token whose states differ.
pub fn derive_certificates(ledger: &EmncLedger, fidelities: &FidelityTable) -> Result<Vec<ContradictionCertificate>> {
    let mut out = Vec::new();
    for entry in &ledger.entries {
        let states: Vec<StateLabel> = entry.states().into_iter().collect();
        for (i, &a) in states.iter().enumerate() {
            for &b in &states[i + 1..] {
                let fidelity = fidelities
                    .get(a, b)
                    .ok_or_else(|| Error::UnknownLabel(format!("{a}/{b}")))?;
                if fidelity < 1.0 - tol::STRUCTURAL {
                    out.push(ContradictionCertificate {
                        trial_index: entry.trial,
                        token: entry.token,
                        states: (a, b),
                        fidelity,
                        verdict: Verdict::ViolatesPbrDisjointness,
                    });
                }
            }
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn table(f: f64) -> FidelityTable {
        let mut t = FidelityTable::default();
        t.insert(StateLabel::PsiN2, StateLabel::PsiN1, f);
        t
    }

    #[test]
    fn counterfactual_needs_flag() {
        let mut l = EmncLedger::new(false);
        let t = l.mint(0);
        l.claim(t, StateLabel::PsiN1, Provenance::Actual, None).unwrap();
        assert!(l.claim(t, StateLabel::PsiN2, Provenance::Counterfactual, None).is_err());
    }

    #[test]
    fn certificate_iff_distinguishable_double_claim() {
        let mut l = EmncLedger::new(true);
        let a = l.mint(0);
        l.claim(a, StateLabel::PsiN1, Provenance::Actual, None).unwrap();
        let b = l.mint(1);
        l.claim(b, StateLabel::PsiN1, Provenance::Actual, None).unwrap();
        l.claim(b, StateLabel::PsiN2, Provenance::Counterfactual, None).unwrap();

        let certs = derive_certificates(&l, &table(0.5625)).unwrap();
        assert_eq!(certs.len(), 1);
        assert_eq!(certs[0].trial_index, 1);
        assert_eq!(certs[0].token, b);
        assert_eq!(certs[0].states, (StateLabel::PsiN1, StateLabel::PsiN2));
        assert!(derive_certificates(&l, &table(1.0)).unwrap().is_empty());
        assert!(derive_certificates(&l, &FidelityTable::default()).is_err());
        assert_eq!(l.summary(), LedgerSummary { entries: 2, multi_membership: 1, counterfactual_claims: 1 });
    }

    #[test]
    fn repeated_claim_on_same_state_is_not_a_contradiction() {
        let mut l = EmncLedger::new(false);
        let a = l.mint(0);
        l.claim(a, StateLabel::Psi, Provenance::Actual, Some(0.0)).unwrap();
        l.claim(a, StateLabel::Psi, Provenance::Actual, Some(1.0)).unwrap();
        assert!(derive_certificates(&l, &FidelityTable::default()).unwrap().is_empty());
    }
}
