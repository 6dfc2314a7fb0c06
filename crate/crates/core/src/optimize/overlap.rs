use serde::{Deserialize, Serialize};

use super::simplex::{solve_lp_with, LpProblem, LpSolution, Relation, SimplexOptions};
use crate::error::{Error, Result};
use crate::hilbert::{inner, StateVector};
use crate::ontic::{enumerate_lambdas, EpistemicState, MeasurementSet, OnticModel};
use crate::tol;

/// Quantum overlap `ω_Q = 1 − √(1 − |⟨ψ|φ⟩|²)` from `|⟨ψ|φ⟩|`.
///
/// This is one minus the trace distance of the two pure states; swap this
/// function to use a different overlap measure.
pub fn quantum_overlap(abs_inner: f64) -> f64 {
    let f = (abs_inner * abs_inner).clamp(0.0, 1.0);
    1.0 - (1.0 - f).sqrt()
}

/// Quantum and classical overlaps of a pair, with the `(2/d)·ω_Q` bound.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OverlapReport {
    pub omega_q: f64,
    /// Largest classical overlap found by the LP, if one was solved.
    pub omega_c_max: Option<f64>,
    pub bclm_bound: f64,
    pub dimension: usize,
    /// A ledger forces the pair's supports to intersect while disjointness is assumed.
    pub pbr_disjoint_required: bool,
    /// Forced overlap together with an LP-certified zero overlap.
    pub contradiction: bool,
}

impl OverlapReport {
    /// Attaches an LP optimum and recomputes `contradiction`.
    pub fn with_classical(mut self, omega_c_max: f64) -> Self {
        self.omega_c_max = Some(omega_c_max);
        self.contradiction = self.pbr_disjoint_required && omega_c_max <= tol::LP;
        self
    }
}

pub fn bclm_from_inner(abs_inner: f64, d: usize) -> Result<OverlapReport> {
    if d < 2 {
        return Err(Error::InvalidArgument(format!("dimension must be at least 2, got {d}")));
    }
    if !(0.0..=1.0 + tol::STRUCTURAL).contains(&abs_inner) {
        return Err(Error::InvalidArgument(format!("|⟨a|b⟩| = {abs_inner} outside [0, 1]")));
    }
    let omega_q = quantum_overlap(abs_inner);
    Ok(OverlapReport {
        omega_q,
        omega_c_max: None,
        bclm_bound: 2.0 / d as f64 * omega_q,
        dimension: d,
        pbr_disjoint_required: false,
        contradiction: false,
    })
}

pub fn bclm_bound(a: &StateVector, b: &StateVector, d: usize) -> Result<OverlapReport> {
    bclm_from_inner(inner(a, b)?.norm(), d)
}

/// Optimal common overlap with the model that attains it.
#[derive(Clone, Debug, PartialEq)]
pub struct OverlapSolution {
    pub omega_c_max: f64,
    pub witness: OnticModel,
    pub lp: LpSolution,
}

/// Largest `Σ_λ min(P_ψ(λ), P_φ(λ))` over ontic models reproducing the Born
/// statistics of both states on every measurement in `ms`.
pub fn max_classical_overlap(
    a: (&str, &StateVector),
    b: (&str, &StateVector),
    ms: &MeasurementSet,
    cap: usize,
) -> Result<OverlapSolution> {
    max_common_overlap(&[a, b], ms, cap)
}

/// As [`max_classical_overlap`] for any number of states: maximizes
/// `Σ_λ min_i P_i(λ)`.
///
/// Variables are `μ_i(λ) ≥ 0` per state and `t(λ) ≥ 0`; rows are the
/// reproduction equalities and `t(λ) ≤ μ_i(λ)`; the objective is `Σ_λ t(λ)`.
pub fn max_common_overlap(states: &[(&str, &StateVector)], ms: &MeasurementSet, cap: usize) -> Result<OverlapSolution> {
    max_common_overlap_with(states, ms, cap, &SimplexOptions::default())
}

pub fn max_common_overlap_with(
    states: &[(&str, &StateVector)],
    ms: &MeasurementSet,
    cap: usize,
    opts: &SimplexOptions,
) -> Result<OverlapSolution> {
    if states.is_empty() {
        return Err(Error::InvalidArgument("no states given".into()));
    }
    let space = enumerate_lambdas(ms, cap)?;
    let n_lambda = space.len();
    let n_states = states.len();
    let mu = |s: usize, lam: usize| s * n_lambda + lam;
    let t = |lam: usize| n_states * n_lambda + lam;
    let n_vars = (n_states + 1) * n_lambda;

    let mut objective = vec![0.0; n_vars];
    for lam in 0..n_lambda {
        objective[t(lam)] = 1.0;
    }
    let mut names = Vec::with_capacity(n_vars);
    for (label, _) in states {
        names.extend((0..n_lambda).map(|lam| format!("mu[{label}][{lam}]")));
    }
    names.extend((0..n_lambda).map(|lam| format!("t[{lam}]")));
    let mut lp = LpProblem::maximize(objective).with_names(names)?;

    for (s, (_, state)) in states.iter().enumerate() {
        for (m, probs) in ms.born_table(state)?.into_iter().enumerate() {
            for (k, p) in clean_distribution(probs).into_iter().enumerate() {
                let terms: Vec<(usize, f64)> = space
                    .lambdas()
                    .iter()
                    .enumerate()
                    .filter(|(_, a)| a[m] == k)
                    .map(|(lam, _)| (mu(s, lam), 1.0))
                    .collect();
                lp.add_sparse(&terms, Relation::Eq, p)?;
            }
        }
    }
    for lam in 0..n_lambda {
        for s in 0..n_states {
            lp.add_sparse(&[(t(lam), 1.0), (mu(s, lam), -1.0)], Relation::Le, 0.0)?;
        }
    }

    let lp = solve_lp_with(&lp, opts)?.into_optimal()?;
    let epistemics = states
        .iter()
        .enumerate()
        .map(|(s, (label, _))| EpistemicState::from_noisy(*label, &lp.x[mu(s, 0)..mu(s, 0) + n_lambda]))
        .collect::<Result<Vec<_>>>()?;
    let witness = OnticModel::deterministic(space, epistemics)?;
    Ok(OverlapSolution { omega_c_max: lp.objective.max(0.0), witness, lp })
}

/// Born probabilities clipped to `[0, 1]` and renormalized.
fn clean_distribution(probs: Vec<f64>) -> Vec<f64> {
    let clipped: Vec<f64> = probs.into_iter().map(|p| p.clamp(0.0, 1.0)).collect();
    let sum: f64 = clipped.iter().sum();
    clipped.into_iter().map(|p| p / sum).collect()
}
