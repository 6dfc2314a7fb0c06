//! Dense two-phase primal simplex with Bland's anti-cycling rule.
//!
//! Problems are `maximize c·x` subject to rows `a·x {≤,=,≥} b` and `x ≥ 0`.
//! Rows are sign-normalized so `b ≥ 0`, `≤` rows get a slack, `≥` rows a
//! surplus and an artificial, `=` rows an artificial. Phase one minimizes the
//! artificial sum; artificials left basic at zero are pivoted out or their
//! rows dropped as redundant. The dual solution is recovered from the final
//! basis and checked for feasibility, giving a certificate of optimality.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::tol;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Relation {
    Le,
    Eq,
    Ge,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Constraint {
    pub coeffs: Vec<f64>,
    pub relation: Relation,
    pub rhs: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LpProblem {
    objective: Vec<f64>,
    constraints: Vec<Constraint>,
    var_names: Vec<String>,
}

impl LpProblem {
    /// `maximize objective·x`, `x ≥ 0`, no constraints yet.
    pub fn maximize(objective: Vec<f64>) -> Self {
        let var_names = (0..objective.len()).map(|i| format!("x{i}")).collect();
        LpProblem { objective, constraints: Vec::new(), var_names }
    }

    pub fn with_names(mut self, names: Vec<String>) -> Result<Self> {
        if names.len() != self.objective.len() {
            return Err(Error::MalformedLp(format!("{} names for {} variables", names.len(), self.objective.len())));
        }
        self.var_names = names;
        Ok(self)
    }

    pub fn add_constraint(&mut self, coeffs: Vec<f64>, relation: Relation, rhs: f64) -> Result<()> {
        if coeffs.len() != self.objective.len() {
            return Err(Error::MalformedLp(format!(
                "constraint has {} coefficients for {} variables",
                coeffs.len(),
                self.objective.len()
            )));
        }
        self.constraints.push(Constraint { coeffs, relation, rhs });
        Ok(())
    }

    /// Constraint given as `(variable, coefficient)` terms.
    pub fn add_sparse(&mut self, terms: &[(usize, f64)], relation: Relation, rhs: f64) -> Result<()> {
        let mut coeffs = vec![0.0; self.objective.len()];
        for &(j, a) in terms {
            *coeffs
                .get_mut(j)
                .ok_or_else(|| Error::MalformedLp(format!("variable {j} out of range")))? += a;
        }
        self.add_constraint(coeffs, relation, rhs)
    }

    pub fn num_vars(&self) -> usize {
        self.objective.len()
    }

    pub fn objective(&self) -> &[f64] {
        &self.objective
    }

    pub fn constraints(&self) -> &[Constraint] {
        &self.constraints
    }

    pub fn var_names(&self) -> &[String] {
        &self.var_names
    }

    fn validate(&self) -> Result<()> {
        if self.objective.iter().any(|c| !c.is_finite()) {
            return Err(Error::MalformedLp("non-finite objective coefficient".into()));
        }
        for (i, c) in self.constraints.iter().enumerate() {
            if c.coeffs.len() != self.objective.len() {
                return Err(Error::MalformedLp(format!("row {i} has the wrong length")));
            }
            if !c.rhs.is_finite() || c.coeffs.iter().any(|a| !a.is_finite()) {
                return Err(Error::MalformedLp(format!("row {i} has non-finite entries")));
            }
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LpStatus {
    Optimal,
    Infeasible,
    Unbounded,
    /// Iteration limit reached; the reported point is not trustworthy.
    Stalled,
}

/// Dual multipliers for the original rows with their objective `b·y` and the
/// largest violation of dual feasibility.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DualCertificate {
    pub y: Vec<f64>,
    pub objective: f64,
    pub max_violation: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LpSolution {
    pub status: LpStatus,
    pub objective: f64,
    pub x: Vec<f64>,
    pub dual: Option<DualCertificate>,
    pub iterations: usize,
}

impl LpSolution {
    fn without_point(status: LpStatus, n: usize, iterations: usize) -> Self {
        LpSolution { status, objective: f64::NAN, x: vec![0.0; n], dual: None, iterations }
    }

    /// Converts non-optimal statuses into errors.
    pub fn into_optimal(self) -> Result<Self> {
        match self.status {
            LpStatus::Optimal => Ok(self),
            LpStatus::Infeasible => Err(Error::Infeasible),
            LpStatus::Unbounded => Err(Error::Unbounded),
            LpStatus::Stalled => Err(Error::Stalled(self.iterations)),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SimplexOptions {
    /// Smallest pivot element accepted.
    pub pivot_tol: f64,
    /// Reduced-cost threshold for optimality.
    pub optimality_tol: f64,
    /// Phase-one residual above which the problem is declared infeasible.
    pub feasibility_tol: f64,
    pub max_iterations: usize,
}

impl Default for SimplexOptions {
    fn default() -> Self {
        SimplexOptions { pivot_tol: 1e-11, optimality_tol: 1e-11, feasibility_tol: tol::LP, max_iterations: 100_000 }
    }
}

pub fn solve_lp(p: &LpProblem) -> Result<LpSolution> {
    solve_lp_with(p, &SimplexOptions::default())
}

enum PhaseEnd {
    Optimal,
    Unbounded,
    Stalled,
}

struct Tableau {
    rows: Vec<Vec<f64>>,
    basis: Vec<usize>,
    /// Original row index of each tableau row.
    origin: Vec<usize>,
    ncols: usize,
}

impl Tableau {
    fn rhs(&self, i: usize) -> f64 {
        self.rows[i][self.ncols]
    }

    fn pivot(&mut self, cost: &mut [f64], r: usize, c: usize) {
        let inv = 1.0 / self.rows[r][c];
        for v in self.rows[r].iter_mut() {
            *v *= inv;
        }
        self.rows[r][c] = 1.0;
        let pivot_row = self.rows[r].clone();
        for (i, row) in self.rows.iter_mut().enumerate() {
            if i == r {
                continue;
            }
            let f = row[c];
            if f != 0.0 {
                for (v, p) in row.iter_mut().zip(&pivot_row) {
                    *v -= f * p;
                }
                row[c] = 0.0;
            }
        }
        let f = cost[c];
        if f != 0.0 {
            for (v, p) in cost.iter_mut().zip(&pivot_row) {
                *v -= f * p;
            }
            cost[c] = 0.0;
        }
        self.basis[r] = c;
    }

    /// Reduced-cost row `z − c` for costs `c`, with the objective in the last slot.
    fn cost_row(&self, costs: &[f64]) -> Vec<f64> {
        let mut row: Vec<f64> = costs.iter().map(|c| -c).chain(std::iter::once(0.0)).collect();
        for (i, &b) in self.basis.iter().enumerate() {
            let cb = costs[b];
            if cb != 0.0 {
                for (v, a) in row.iter_mut().zip(&self.rows[i]) {
                    *v += cb * a;
                }
            }
        }
        row
    }

    fn optimize(
        &mut self,
        cost: &mut [f64],
        allowed: usize,
        opts: &SimplexOptions,
        iterations: &mut usize,
    ) -> PhaseEnd {
        loop {
            if *iterations >= opts.max_iterations {
                return PhaseEnd::Stalled;
            }
            // Bland: lowest-index improving column.
            let Some(c) = (0..allowed).find(|&j| cost[j] < -opts.optimality_tol) else {
                return PhaseEnd::Optimal;
            };
            let mut best: Option<(usize, f64)> = None;
            for i in 0..self.rows.len() {
                let a = self.rows[i][c];
                if a <= opts.pivot_tol {
                    continue;
                }
                let ratio = self.rhs(i).max(0.0) / a;
                best = match best {
                    None => Some((i, ratio)),
                    Some((bi, br)) => {
                        let tie = (ratio - br).abs() <= 1e-12 * (1.0 + br.abs());
                        if ratio < br && !tie || tie && self.basis[i] < self.basis[bi] {
                            Some((i, ratio))
                        } else {
                            Some((bi, br))
                        }
                    }
                };
            }
            let Some((r, _)) = best else {
                return PhaseEnd::Unbounded;
            };
            self.pivot(cost, r, c);
            *iterations += 1;
        }
    }
}

pub fn solve_lp_with(p: &LpProblem, opts: &SimplexOptions) -> Result<LpSolution> {
    p.validate()?;
    let n = p.num_vars();
    let m = p.constraints.len();

    // Sign-normalize rows so every rhs is nonnegative.
    let mut flipped = vec![false; m];
    let mut relations = Vec::with_capacity(m);
    for (i, c) in p.constraints.iter().enumerate() {
        flipped[i] = c.rhs < 0.0;
        relations.push(match (c.relation, flipped[i]) {
            (Relation::Le, true) => Relation::Ge,
            (Relation::Ge, true) => Relation::Le,
            (r, _) => r,
        });
    }
    let n_slack = relations.iter().filter(|r| **r != Relation::Eq).count();
    let n_art = relations.iter().filter(|r| **r != Relation::Le).count();
    let art_start = n + n_slack;
    let ncols = art_start + n_art;

    let mut rows = Vec::with_capacity(m);
    let mut basis = Vec::with_capacity(m);
    let (mut s, mut a) = (n, art_start);
    for (i, c) in p.constraints.iter().enumerate() {
        let sign = if flipped[i] { -1.0 } else { 1.0 };
        let mut row = vec![0.0; ncols + 1];
        for (j, v) in c.coeffs.iter().enumerate() {
            row[j] = sign * v;
        }
        row[ncols] = sign * c.rhs;
        match relations[i] {
            Relation::Le => {
                row[s] = 1.0;
                basis.push(s);
                s += 1;
            }
            Relation::Ge => {
                row[s] = -1.0;
                s += 1;
                row[a] = 1.0;
                basis.push(a);
                a += 1;
            }
            Relation::Eq => {
                row[a] = 1.0;
                basis.push(a);
                a += 1;
            }
        }
        rows.push(row);
    }
    let standard: Vec<Vec<f64>> = rows.iter().map(|r| r[..ncols].to_vec()).collect();
    let mut t = Tableau { rows, basis, origin: (0..m).collect(), ncols };
    let mut iterations = 0;

    if n_art > 0 {
        let phase_one: Vec<f64> = (0..ncols).map(|j| if j >= art_start { -1.0 } else { 0.0 }).collect();
        let mut cost = t.cost_row(&phase_one);
        match t.optimize(&mut cost, ncols, opts, &mut iterations) {
            PhaseEnd::Stalled => return Ok(LpSolution::without_point(LpStatus::Stalled, n, iterations)),
            // Phase one is bounded by construction.
            PhaseEnd::Unbounded => return Ok(LpSolution::without_point(LpStatus::Stalled, n, iterations)),
            PhaseEnd::Optimal => {}
        }
        let scale = 1.0 + p.constraints.iter().map(|c| c.rhs.abs()).fold(0.0, f64::max);
        if -cost[ncols] > opts.feasibility_tol * scale {
            return Ok(LpSolution::without_point(LpStatus::Infeasible, n, iterations));
        }
        // Drive zero-level artificials out of the basis; drop redundant rows.
        let mut i = 0;
        while i < t.rows.len() {
            if t.basis[i] >= art_start {
                let col = (0..art_start)
                    .filter(|&j| t.rows[i][j].abs() > 1e-9)
                    .max_by(|&x, &y| t.rows[i][x].abs().total_cmp(&t.rows[i][y].abs()));
                match col {
                    Some(j) => {
                        let mut scratch = vec![0.0; ncols + 1];
                        t.pivot(&mut scratch, i, j);
                    }
                    None => {
                        t.rows.remove(i);
                        t.basis.remove(i);
                        t.origin.remove(i);
                        continue;
                    }
                }
            }
            i += 1;
        }
    }

    let costs: Vec<f64> = (0..ncols).map(|j| if j < n { p.objective[j] } else { 0.0 }).collect();
    let mut cost = t.cost_row(&costs);
    match t.optimize(&mut cost, art_start, opts, &mut iterations) {
        PhaseEnd::Stalled => return Ok(LpSolution::without_point(LpStatus::Stalled, n, iterations)),
        PhaseEnd::Unbounded => return Ok(LpSolution::without_point(LpStatus::Unbounded, n, iterations)),
        PhaseEnd::Optimal => {}
    }

    let mut x = vec![0.0; n];
    for (i, &b) in t.basis.iter().enumerate() {
        if b < n {
            x[b] = t.rhs(i);
        }
    }
    let objective = x.iter().zip(&p.objective).map(|(xi, ci)| xi * ci).sum();
    let dual = dual_certificate(p, &t, &standard, &costs, &flipped);
    Ok(LpSolution { status: LpStatus::Optimal, objective, x, dual, iterations })
}

/// Solves `Bᵀy = c_B` on the surviving rows and checks dual feasibility
/// against the original problem.
fn dual_certificate(
    p: &LpProblem,
    t: &Tableau,
    standard: &[Vec<f64>],
    costs: &[f64],
    flipped: &[bool],
) -> Option<DualCertificate> {
    let k = t.rows.len();
    let mut y = vec![0.0; p.constraints.len()];
    if k > 0 {
        let b = DMatrix::from_fn(k, k, |r, c| standard[t.origin[r]][t.basis[c]]);
        let cb = DVector::from_iterator(k, t.basis.iter().map(|&j| costs[j]));
        let solved = b.transpose().lu().solve(&cb)?;
        for (r, &orig) in t.origin.iter().enumerate() {
            y[orig] = if flipped[orig] { -solved[r] } else { solved[r] };
        }
    }
    let mut max_violation: f64 = 0.0;
    for j in 0..p.num_vars() {
        let aty: f64 = p.constraints.iter().zip(&y).map(|(c, yi)| c.coeffs[j] * yi).sum();
        max_violation = max_violation.max(p.objective[j] - aty);
    }
    for (c, yi) in p.constraints.iter().zip(&y) {
        let v = match c.relation {
            Relation::Le => -yi,
            Relation::Ge => *yi,
            Relation::Eq => 0.0,
        };
        max_violation = max_violation.max(v);
    }
    let objective = p.constraints.iter().zip(&y).map(|(c, yi)| c.rhs * yi).sum();
    Some(DualCertificate { y, objective, max_violation })
}
