//! Numerical tolerances shared across the crate.

/// Norms, unitarity, POVM completeness and Born-rule sums.
pub const STRUCTURAL: f64 = 1e-10;

/// Feasibility and optimality of linear programs, reproduction residuals.
pub const LP: f64 = 1e-9;

/// Smallest weight that still counts as "positive" for an ontic support.
pub const SUPPORT_EPSILON: f64 = 1e-12;

/// Born probabilities below this are treated as zero when projecting.
pub const ZERO_PROBABILITY: f64 = 1e-15;
