//! Finite ontic models over outcome-deterministic ontic states.
//!
//! For a fixed finite set of measurements every response function is a convex
//! mixture of deterministic outcome assignments, so the ontic space here is
//! the set of all such assignments and a model is a list of probability
//! vectors over it.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hilbert::{born, Povm, StateVector};
use crate::tol;

/// Default bound on the number of enumerated ontic states.
pub const DEFAULT_ENUMERATION_CAP: usize = 1_000_000;

/// Measurements the ontic model must reproduce, each with an id.
#[derive(Clone, Debug, PartialEq)]
pub struct MeasurementSet {
    measurements: Vec<(String, Povm)>,
}

impl MeasurementSet {
    pub fn new<S: Into<String>>(measurements: impl IntoIterator<Item = (S, Povm)>) -> Result<Self> {
        let measurements: Vec<(String, Povm)> = measurements.into_iter().map(|(id, m)| (id.into(), m)).collect();
        let dim = measurements
            .first()
            .map(|(_, m)| m.dim())
            .ok_or_else(|| Error::InvalidArgument("measurement set is empty".into()))?;
        for (i, (id, m)) in measurements.iter().enumerate() {
            if m.dim() != dim {
                return Err(Error::DimensionMismatch { expected: dim, actual: m.dim() });
            }
            if measurements[..i].iter().any(|(other, _)| other == id) {
                return Err(Error::InvalidArgument(format!("duplicate measurement id `{id}`")));
            }
        }
        Ok(MeasurementSet { measurements })
    }

    pub fn len(&self) -> usize {
        self.measurements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.measurements.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.measurements[0].1.dim()
    }

    pub fn ids(&self) -> impl Iterator<Item = &str> {
        self.measurements.iter().map(|(id, _)| id.as_str())
    }

    pub fn povms(&self) -> impl Iterator<Item = &Povm> {
        self.measurements.iter().map(|(_, m)| m)
    }

    pub fn outcome_counts(&self) -> Vec<usize> {
        self.measurements.iter().map(|(_, m)| m.outcome_count()).collect()
    }

    /// A copy with one more measurement appended.
    pub fn with(&self, id: impl Into<String>, povm: Povm) -> Result<Self> {
        let mut all = self.measurements.clone();
        all.push((id.into(), povm));
        Self::new(all)
    }

    /// Reordered copy: position `i` holds the measurement at `order[i]`.
    pub fn permuted(&self, order: &[usize]) -> Result<Self> {
        let distinct: BTreeSet<_> = order.iter().collect();
        if order.len() != self.len() || distinct.len() != self.len() || order.iter().any(|&i| i >= self.len()) {
            return Err(Error::InvalidArgument(format!("{order:?} is not a permutation")));
        }
        Self::new(order.iter().map(|&i| self.measurements[i].clone()))
    }

    /// `table[m][k]` = Born probability of outcome `k` of measurement `m`.
    pub fn born_table(&self, s: &StateVector) -> Result<Vec<Vec<f64>>> {
        self.measurements.iter().map(|(_, m)| born(s, m)).collect()
    }
}

/// All deterministic outcome assignments, in lexicographic order (first
/// measurement most significant).
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct OnticSpace {
    outcome_counts: Vec<usize>,
    lambdas: Vec<Vec<usize>>,
}

impl OnticSpace {
    pub fn outcome_counts(&self) -> &[usize] {
        &self.outcome_counts
    }

    pub fn lambdas(&self) -> &[Vec<usize>] {
        &self.lambdas
    }

    pub fn len(&self) -> usize {
        self.lambdas.len()
    }

    pub fn is_empty(&self) -> bool {
        self.lambdas.is_empty()
    }

    /// Position of an assignment in the enumeration.
    pub fn index_of(&self, assignment: &[usize]) -> Option<usize> {
        if assignment.len() != self.outcome_counts.len() {
            return None;
        }
        let mut idx = 0;
        for (&a, &n) in assignment.iter().zip(&self.outcome_counts) {
            if a >= n {
                return None;
            }
            idx = idx * n + a;
        }
        Some(idx)
    }
}

pub fn enumerate_lambdas(ms: &MeasurementSet, cap: usize) -> Result<OnticSpace> {
    let counts = ms.outcome_counts();
    let size = counts.iter().fold(1u128, |acc, &n| acc.saturating_mul(n as u128));
    if size > cap as u128 {
        return Err(Error::CapExceeded { size, cap });
    }
    let mut lambdas = Vec::with_capacity(size as usize);
    let mut current = vec![0usize; counts.len()];
    for _ in 0..size {
        lambdas.push(current.clone());
        for pos in (0..counts.len()).rev() {
            current[pos] += 1;
            if current[pos] < counts[pos] {
                break;
            }
            current[pos] = 0;
        }
    }
    Ok(OnticSpace { outcome_counts: counts, lambdas })
}

/// A probability distribution over an ontic space, attached to a state label.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EpistemicState {
    label: String,
    weights: Vec<f64>,
}

impl EpistemicState {
    pub fn new(label: impl Into<String>, weights: Vec<f64>) -> Result<Self> {
        let label = label.into();
        let bad = |reason: String| Error::InvalidEpistemicState { label: label.clone(), reason };
        if let Some(w) = weights.iter().find(|w| w.is_nan() || **w < 0.0) {
            return Err(bad(format!("weight {w} is negative")));
        }
        let sum: f64 = weights.iter().sum();
        if (sum - 1.0).abs() > tol::SUPPORT_EPSILON {
            return Err(bad(format!("weights sum to {sum}")));
        }
        Ok(EpistemicState { label, weights })
    }

    /// Clamps values below `support_epsilon` to zero and renormalizes. Used
    /// for LP solutions carrying round-off.
    pub fn from_noisy(label: impl Into<String>, weights: &[f64]) -> Result<Self> {
        let cleaned: Vec<f64> =
            weights.iter().map(|&w| if w > tol::SUPPORT_EPSILON { w } else { 0.0 }).collect();
        let sum: f64 = cleaned.iter().sum();
        if sum <= 0.0 {
            return Err(Error::InvalidEpistemicState { label: label.into(), reason: "all weights vanish".into() });
        }
        Self::new(label, cleaned.iter().map(|w| w / sum).collect())
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// Indices with weight above `eps`.
    pub fn support(&self, eps: f64) -> Vec<usize> {
        self.weights.iter().enumerate().filter(|(_, &w)| w > eps).map(|(i, _)| i).collect()
    }
}

/// Ontic space, one epistemic state per prepared state, and the response
/// table `ξ(k | λ, M)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OnticModel {
    space: OnticSpace,
    epistemics: Vec<EpistemicState>,
    /// `response[m][λ][k]`.
    response: Vec<Vec<Vec<f64>>>,
}

impl OnticModel {
    /// Model whose response table is read off the assignments.
    pub fn deterministic(space: OnticSpace, epistemics: Vec<EpistemicState>) -> Result<Self> {
        if let Some(e) = epistemics.iter().find(|e| e.weights.len() != space.len()) {
            return Err(Error::InvalidEpistemicState {
                label: e.label.clone(),
                reason: format!("{} weights for {} ontic states", e.weights.len(), space.len()),
            });
        }
        let response = space
            .outcome_counts
            .iter()
            .enumerate()
            .map(|(m, &n)| {
                space
                    .lambdas
                    .iter()
                    .map(|lam| (0..n).map(|k| if lam[m] == k { 1.0 } else { 0.0 }).collect())
                    .collect()
            })
            .collect();
        Ok(OnticModel { space, epistemics, response })
    }

    pub fn space(&self) -> &OnticSpace {
        &self.space
    }

    pub fn epistemics(&self) -> &[EpistemicState] {
        &self.epistemics
    }

    pub fn epistemic(&self, label: &str) -> Option<&EpistemicState> {
        self.epistemics.iter().find(|e| e.label == label)
    }

    pub fn response(&self, measurement: usize, lambda: usize, outcome: usize) -> f64 {
        self.response[measurement][lambda][outcome]
    }

    /// Outcomes of `measurement` that some ontic state in the support of
    /// `label` responds with.
    pub fn support_outcomes(&self, label: &str, measurement: usize) -> Result<BTreeSet<usize>> {
        let e = self.epistemic(label).ok_or_else(|| Error::UnknownLabel(label.into()))?;
        Ok(e.support(tol::SUPPORT_EPSILON)
            .into_iter()
            .flat_map(|lam| {
                self.response[measurement][lam]
                    .iter()
                    .enumerate()
                    .filter(|(_, &r)| r > 0.0)
                    .map(|(k, _)| k)
                    .collect::<Vec<_>>()
            })
            .collect())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReproductionReport {
    pub max_residual: f64,
    /// `(state label, measurement id, outcome)` of the largest residual.
    pub worst: Option<(String, String, usize)>,
    pub pass: bool,
}

/// Largest `|Σ_λ P_ψ(λ) ξ(k|λ,M) − Born(k|ψ,M)|` over all states, measurements
/// and outcomes.
pub fn check_reproduction(
    model: &OnticModel,
    states: &[(&str, &StateVector)],
    ms: &MeasurementSet,
) -> Result<ReproductionReport> {
    if ms.outcome_counts() != model.space.outcome_counts {
        return Err(Error::SpaceMismatch);
    }
    let mut max_residual: f64 = 0.0;
    let mut worst = None;
    for (label, state) in states {
        let e = model.epistemic(label).ok_or_else(|| Error::UnknownLabel((*label).into()))?;
        let table = ms.born_table(state)?;
        for ((m, probs), id) in table.iter().enumerate().zip(ms.ids()) {
            for (k, p) in probs.iter().enumerate() {
                let predicted: f64 =
                    e.weights.iter().enumerate().map(|(lam, w)| w * model.response[m][lam][k]).sum();
                let r = (predicted - p).abs();
                if r > max_residual || worst.is_none() {
                    max_residual = max_residual.max(r);
                    worst = Some(((*label).to_string(), id.to_string(), k));
                }
            }
        }
    }
    Ok(ReproductionReport { max_residual, worst, pass: max_residual <= tol::LP })
}

/// `Σ_λ min(a(λ), b(λ))`.
pub fn classical_overlap(a: &EpistemicState, b: &EpistemicState) -> Result<f64> {
    if a.weights.len() != b.weights.len() {
        return Err(Error::SpaceMismatch);
    }
    Ok(a.weights.iter().zip(&b.weights).map(|(x, y)| x.min(*y)).sum())
}

/// No ontic state carries weight above `support_epsilon` in both.
pub fn supports_disjoint(a: &EpistemicState, b: &EpistemicState, support_epsilon: f64) -> Result<bool> {
    if a.weights.len() != b.weights.len() {
        return Err(Error::SpaceMismatch);
    }
    Ok(!a.weights.iter().zip(&b.weights).any(|(x, y)| *x > support_epsilon && *y > support_epsilon))
}
