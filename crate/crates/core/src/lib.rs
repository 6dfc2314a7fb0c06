//! Encapsulated-measurement (Wigner's-friend) scenarios, the support-membership
//! claims they force on a single observer-independent ontic state, and a
//! finite ontic-model toolkit with an LP engine for classical overlaps.

pub mod error;
pub mod hilbert;
pub mod tol;

pub use error::{Error, Result};
pub mod ontic;
pub mod optimize;
pub mod report;
pub mod scenario;
