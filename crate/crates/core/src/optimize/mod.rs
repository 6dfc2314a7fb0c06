//! Linear programming over finite ontic models: the largest classical
//! overlap compatible with quantum statistics, antidistinguishability checks
//! and the overlap-ratio bound for ψ-epistemic models.

mod antidistinguish;
mod overlap;
mod simplex;

pub use antidistinguish::{
    complete_effects, pbr_zero_plus_fixture, pbr_zero_plus_setup, product_spin_povm, two_copy_products, verify_antidistinguishing, AntidistinguishingCheck,
};
pub use overlap::{
    bclm_bound, bclm_from_inner, max_classical_overlap, max_common_overlap, max_common_overlap_with, quantum_overlap, OverlapReport,
    OverlapSolution,
};
pub use simplex::{
    solve_lp, solve_lp_with, Constraint, DualCertificate, LpProblem, LpSolution, LpStatus, Relation, SimplexOptions,
};
