use rand::Rng;

use super::{CMatrix, StateVector, SubsystemLayout, C64};
use crate::error::{Error, Result};
use crate::tol;

/// A unitary on a labeled layout, checked on construction.
#[derive(Clone, Debug, PartialEq)]
pub struct UnitaryOp {
    layout: SubsystemLayout,
    matrix: CMatrix,
}

impl UnitaryOp {
    pub fn new(layout: SubsystemLayout, matrix: CMatrix) -> Result<Self> {
        let dim = layout.total_dim();
        if matrix.nrows() != dim || matrix.ncols() != dim {
            return Err(Error::DimensionMismatch { expected: dim, actual: matrix.nrows().max(matrix.ncols()) });
        }
        let dev = unitarity_deviation(&matrix);
        if dev > tol::STRUCTURAL {
            return Err(Error::NotUnitary(dev));
        }
        Ok(UnitaryOp { layout, matrix })
    }

    pub fn identity(layout: SubsystemLayout) -> Self {
        let dim = layout.total_dim();
        UnitaryOp { layout, matrix: CMatrix::identity(dim, dim) }
    }

    /// Haar-random unitary: QR of a complex Gaussian matrix with the phases of
    /// `R`'s diagonal moved into `Q`.
    pub fn random<R: Rng + ?Sized>(layout: SubsystemLayout, rng: &mut R) -> Self {
        let dim = layout.total_dim();
        let g = CMatrix::from_fn(dim, dim, |_, _| gaussian(rng));
        let qr = g.qr();
        let r = qr.r();
        let mut q = qr.q();
        for j in 0..dim {
            let d = r[(j, j)];
            let phase = if d.norm() > 0.0 { d / d.norm() } else { C64::new(1.0, 0.0) };
            for i in 0..dim {
                q[(i, j)] *= phase;
            }
        }
        UnitaryOp { layout, matrix: q }
    }

    pub fn layout(&self) -> &SubsystemLayout {
        &self.layout
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    pub fn adjoint(&self) -> Self {
        UnitaryOp { layout: self.layout.clone(), matrix: self.matrix.adjoint() }
    }

    /// `self ∘ first`: apply `first`, then `self`.
    pub fn after(&self, first: &UnitaryOp) -> Result<Self> {
        self.layout.ensure_same(&first.layout)?;
        Ok(UnitaryOp { layout: self.layout.clone(), matrix: &self.matrix * &first.matrix })
    }

    /// `self ⊗ other` on the concatenated layout.
    pub fn tensor(&self, other: &UnitaryOp) -> Result<Self> {
        let layout = self.layout.concat(&other.layout)?;
        Ok(UnitaryOp { layout, matrix: kron(&self.matrix, &other.matrix) })
    }

    pub fn apply(&self, s: &StateVector) -> Result<StateVector> {
        if s.dim() != self.matrix.nrows() {
            return Err(Error::DimensionMismatch { expected: self.matrix.nrows(), actual: s.dim() });
        }
        self.layout.ensure_same(s.layout())?;
        StateVector::normalized(s.layout().clone(), &self.matrix * s.amplitudes())
    }
}

/// Max entrywise deviation of `U†U` from the identity.
pub(crate) fn unitarity_deviation(u: &CMatrix) -> f64 {
    let prod = u.adjoint() * u;
    let n = prod.nrows();
    let mut dev: f64 = 0.0;
    for i in 0..n {
        for j in 0..n {
            let target = if i == j { C64::new(1.0, 0.0) } else { C64::new(0.0, 0.0) };
            dev = dev.max((prod[(i, j)] - target).norm());
        }
    }
    dev
}

/// Standard complex normal sample via Box–Muller.
pub(crate) fn gaussian<R: Rng + ?Sized>(rng: &mut R) -> C64 {
    let u: f64 = 1.0 - rng.random::<f64>();
    let v: f64 = rng.random();
    let r = (-u.ln()).sqrt();
    C64::from_polar(r, 2.0 * std::f64::consts::PI * v)
}

pub fn kron(a: &CMatrix, b: &CMatrix) -> CMatrix {
    a.kronecker(b)
}

/// `|s⟩⟨s|`.
pub fn projector(s: &StateVector) -> CMatrix {
    s.projector()
}
