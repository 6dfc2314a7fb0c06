//! Dense finite-dimensional state-vector machinery: labeled tensor-product
//! layouts, pure states, unitaries, spin directions and measurements.

mod measurement;
mod operator;
mod spin;

pub use measurement::{born, check_orthonormal, measure, project, Povm, ProjectiveMeasurement};
pub use operator::{kron, projector, UnitaryOp};
pub use spin::{spin_state, Direction};

use std::fmt;

use nalgebra::DVector;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::tol;

pub type C64 = Complex64;
pub type CVector = DVector<C64>;
pub type CMatrix = nalgebra::DMatrix<C64>;

/// Upper bound on the dimension of any layout built here.
pub const MAX_TOTAL_DIM: usize = 4096;

/// Ordered tensor factors, e.g. `S(2) ⊗ F(3) ⊗ L(2)`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct SubsystemLayout {
    subsystems: Vec<(String, usize)>,
}

impl SubsystemLayout {
    pub fn new<S: Into<String>>(subsystems: impl IntoIterator<Item = (S, usize)>) -> Result<Self> {
        let subsystems: Vec<(String, usize)> =
            subsystems.into_iter().map(|(l, d)| (l.into(), d)).collect();
        let mut total: usize = 1;
        for (i, (label, dim)) in subsystems.iter().enumerate() {
            if *dim == 0 {
                return Err(Error::InvalidDimension { label: label.clone(), dim: *dim });
            }
            if subsystems[..i].iter().any(|(l, _)| l == label) {
                return Err(Error::DuplicateLabel(label.clone()));
            }
            total = total
                .checked_mul(*dim)
                .filter(|t| *t <= MAX_TOTAL_DIM)
                .ok_or_else(|| Error::InvalidDimension { label: label.clone(), dim: *dim })?;
        }
        Ok(SubsystemLayout { subsystems })
    }

    /// A single factor.
    pub fn single(label: impl Into<String>, dim: usize) -> Result<Self> {
        Self::new([(label.into(), dim)])
    }

    pub fn subsystems(&self) -> &[(String, usize)] {
        &self.subsystems
    }

    pub fn total_dim(&self) -> usize {
        self.subsystems.iter().map(|(_, d)| d).product()
    }

    pub fn dims(&self) -> Vec<usize> {
        self.subsystems.iter().map(|(_, d)| *d).collect()
    }

    pub fn position(&self, label: &str) -> Option<usize> {
        self.subsystems.iter().position(|(l, _)| l == label)
    }

    /// Concatenation `self ⊗ other`.
    pub fn concat(&self, other: &SubsystemLayout) -> Result<Self> {
        Self::new(self.subsystems.iter().chain(other.subsystems.iter()).cloned())
    }

    /// Flat (row-major, first factor most significant) index of a multi-index.
    pub fn flat_index(&self, digits: &[usize]) -> Result<usize> {
        if digits.len() != self.subsystems.len() {
            return Err(Error::DimensionMismatch {
                expected: self.subsystems.len(),
                actual: digits.len(),
            });
        }
        let mut idx = 0;
        for (&d, (label, dim)) in digits.iter().zip(&self.subsystems) {
            if d >= *dim {
                return Err(Error::InvalidDimension { label: label.clone(), dim: d });
            }
            idx = idx * dim + d;
        }
        Ok(idx)
    }

    pub(crate) fn ensure_same(&self, other: &SubsystemLayout) -> Result<()> {
        if self == other {
            Ok(())
        } else {
            Err(Error::LayoutMismatch { left: self.to_string(), right: other.to_string() })
        }
    }
}

impl fmt::Display for SubsystemLayout {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, (label, dim)) in self.subsystems.iter().enumerate() {
            if i > 0 {
                f.write_str("⊗")?;
            }
            write!(f, "{label}({dim})")?;
        }
        Ok(())
    }
}

/// A normalized pure state on a labeled layout.
#[derive(Clone, Debug, PartialEq)]
pub struct StateVector {
    layout: SubsystemLayout,
    amplitudes: CVector,
}

impl StateVector {
    /// Wraps amplitudes that must already have unit norm.
    pub fn new(layout: SubsystemLayout, amplitudes: CVector) -> Result<Self> {
        if amplitudes.len() != layout.total_dim() {
            return Err(Error::DimensionMismatch {
                expected: layout.total_dim(),
                actual: amplitudes.len(),
            });
        }
        let norm = amplitudes.norm();
        if (norm - 1.0).abs() > tol::STRUCTURAL {
            return Err(Error::NotNormalized(norm));
        }
        Ok(StateVector { layout, amplitudes })
    }

    /// Rescales arbitrary nonzero amplitudes to unit norm.
    pub fn normalized(layout: SubsystemLayout, amplitudes: CVector) -> Result<Self> {
        let norm = amplitudes.norm();
        if norm <= f64::EPSILON {
            return Err(Error::NotNormalized(norm));
        }
        Self::new(layout, amplitudes.unscale(norm))
    }

    /// Uniformly random pure state.
    pub fn random<R: rand::Rng + ?Sized>(layout: SubsystemLayout, rng: &mut R) -> Self {
        let dim = layout.total_dim();
        loop {
            let v = CVector::from_fn(dim, |_, _| operator::gaussian(rng));
            if let Ok(s) = Self::normalized(layout.clone(), v) {
                return s;
            }
        }
    }

    pub fn from_real(layout: SubsystemLayout, amplitudes: &[f64]) -> Result<Self> {
        Self::new(layout, CVector::from_iterator(amplitudes.len(), amplitudes.iter().map(|&a| C64::new(a, 0.0))))
    }

    /// Computational basis vector `|index⟩`.
    pub fn basis(layout: SubsystemLayout, index: usize) -> Result<Self> {
        let dim = layout.total_dim();
        if index >= dim {
            return Err(Error::DimensionMismatch { expected: dim, actual: index });
        }
        let mut amps = CVector::zeros(dim);
        amps[index] = C64::new(1.0, 0.0);
        Ok(StateVector { layout, amplitudes: amps })
    }

    /// Product basis vector addressed per factor, e.g. `[+z, F₊, 0_L]`.
    pub fn product_basis(layout: SubsystemLayout, digits: &[usize]) -> Result<Self> {
        let idx = layout.flat_index(digits)?;
        Self::basis(layout, idx)
    }

    pub fn layout(&self) -> &SubsystemLayout {
        &self.layout
    }

    pub fn dim(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn amplitudes(&self) -> &CVector {
        &self.amplitudes
    }

    pub fn amplitude(&self, digits: &[usize]) -> Result<C64> {
        Ok(self.amplitudes[self.layout.flat_index(digits)?])
    }

    pub fn norm(&self) -> f64 {
        self.amplitudes.norm()
    }

    /// Renames the factors without touching the amplitudes.
    pub fn relabel<S: Into<String>>(self, labels: impl IntoIterator<Item = S>) -> Result<Self> {
        let labels: Vec<String> = labels.into_iter().map(Into::into).collect();
        if labels.len() != self.layout.subsystems.len() {
            return Err(Error::DimensionMismatch {
                expected: self.layout.subsystems.len(),
                actual: labels.len(),
            });
        }
        let layout = SubsystemLayout::new(
            labels.into_iter().zip(self.layout.subsystems.iter().map(|(_, d)| *d)),
        )?;
        Ok(StateVector { layout, amplitudes: self.amplitudes })
    }

    /// Renames a single-factor state.
    pub fn labeled(self, label: impl Into<String>) -> Result<Self> {
        self.relabel([label.into()])
    }

    /// `|self⟩⟨self|`.
    pub fn projector(&self) -> CMatrix {
        &self.amplitudes * self.amplitudes.adjoint()
    }

    /// Entrywise comparison; global phase matters here.
    pub fn approx_eq(&self, other: &StateVector, eps: f64) -> bool {
        self.layout == other.layout
            && self
                .amplitudes
                .iter()
                .zip(other.amplitudes.iter())
                .all(|(a, b)| (a - b).norm() <= eps)
    }
}

/// Kronecker product `a ⊗ b`, concatenating the layouts.
pub fn tensor(a: &StateVector, b: &StateVector) -> Result<StateVector> {
    let layout = a.layout.concat(&b.layout)?;
    let amps = a.amplitudes.kronecker(&b.amplitudes);
    Ok(StateVector { layout, amplitudes: amps })
}

/// Tensor product of several factors, left to right.
pub fn tensor_all<'a>(states: impl IntoIterator<Item = &'a StateVector>) -> Result<StateVector> {
    let mut iter = states.into_iter();
    let first = iter
        .next()
        .ok_or_else(|| Error::InvalidArgument("empty tensor product".into()))?
        .clone();
    iter.try_fold(first, |acc, s| tensor(&acc, s))
}

/// Hermitian inner product `⟨a|b⟩`.
pub fn inner(a: &StateVector, b: &StateVector) -> Result<C64> {
    if a.dim() != b.dim() {
        return Err(Error::DimensionMismatch { expected: a.dim(), actual: b.dim() });
    }
    a.layout.ensure_same(&b.layout)?;
    Ok(a.amplitudes.dotc(&b.amplitudes))
}

/// `|⟨a|b⟩|²`, insensitive to global phase.
pub fn fidelity(a: &StateVector, b: &StateVector) -> Result<f64> {
    Ok(inner(a, b)?.norm_sqr())
}
