use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hilbert::{
    spin_state, tensor, CMatrix, CVector, Direction, Povm, ProjectiveMeasurement, StateVector, SubsystemLayout, C64,
};
use crate::ontic::MeasurementSet;
use crate::tol;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AntidistinguishingCheck {
    pub antidistinguishing: bool,
    /// `max_i ⟨ψ_i|E_i|ψ_i⟩`.
    pub max_deviation: f64,
    pub per_state: Vec<f64>,
}

/// Outcome `i` must never occur on state `i`.
pub fn verify_antidistinguishing(povm: &Povm, states: &[StateVector]) -> Result<AntidistinguishingCheck> {
    if povm.outcome_count() != states.len() {
        return Err(Error::DimensionMismatch { expected: povm.outcome_count(), actual: states.len() });
    }
    let per_state = states
        .iter()
        .zip(povm.effects())
        .map(|(s, e)| {
            if s.dim() != e.nrows() {
                return Err(Error::DimensionMismatch { expected: e.nrows(), actual: s.dim() });
            }
            Ok(s.amplitudes().dotc(&(e * s.amplitudes())).re)
        })
        .collect::<Result<Vec<f64>>>()?;
    let max_deviation = per_state.iter().cloned().fold(0.0, f64::max);
    Ok(AntidistinguishingCheck { antidistinguishing: max_deviation <= tol::LP, max_deviation, per_state })
}

/// Rescales positive effects `E_k` to `S^{-1/2} E_k S^{-1/2}` with `S = Σ E_k`
/// so that they sum to the identity.
pub fn complete_effects(effects: &[CMatrix]) -> Result<Povm> {
    let first = effects.first().ok_or_else(|| Error::InvalidPovm("no effects".into()))?;
    let dim = first.nrows();
    let sum = effects.iter().fold(CMatrix::zeros(dim, dim), |acc, e| acc + e);
    let eig = sum.symmetric_eigen();
    if eig.eigenvalues.iter().any(|&l| l <= tol::STRUCTURAL) {
        return Err(Error::InvalidPovm("effects do not span the space".into()));
    }
    let inv_sqrt = CVector::from_iterator(dim, eig.eigenvalues.iter().map(|&l| C64::new(1.0 / l.sqrt(), 0.0)));
    let s = &eig.eigenvectors * CMatrix::from_diagonal(&inv_sqrt) * eig.eigenvectors.adjoint();
    Povm::new(effects.iter().map(|e| &s * e * &s).collect())
}

/// `[a⊗a, a⊗b, b⊗a, b⊗b]` on factors `A ⊗ B`.
pub fn two_copy_products(a: &StateVector, b: &StateVector) -> Result<Vec<StateVector>> {
    let mut out = Vec::with_capacity(4);
    for first in [a, b] {
        for second in [a, b] {
            out.push(tensor(&first.clone().relabel(["A"])?, &second.clone().relabel(["B"])?)?);
        }
    }
    Ok(out)
}

/// The entangled two-copy basis that antidistinguishes the four products of
/// `|0⟩` and `|+⟩`: basis vector `i` is orthogonal to product `i`.
pub fn pbr_zero_plus_fixture() -> Result<(Povm, Vec<StateVector>)> {
    let zero = spin_state(Direction::Z, true);
    // The spin-down convention gives |↓z⟩ = -|1⟩; the basis below needs |1⟩ itself.
    let one = StateVector::basis(SubsystemLayout::single("q", 2)?, 1)?;
    let plus = spin_state(Direction::X, true);
    let minus = spin_state(Direction::X, false);
    let layout = SubsystemLayout::new([("A", 2), ("B", 2)])?;
    let pair = |a: &StateVector, b: &StateVector, c: &StateVector, d: &StateVector| -> Result<StateVector> {
        let v = a.amplitudes().kronecker(b.amplitudes()) + c.amplitudes().kronecker(d.amplitudes());
        StateVector::normalized(layout.clone(), v)
    };
    let basis = [
        pair(&zero, &one, &one, &zero)?,
        pair(&zero, &minus, &one, &plus)?,
        pair(&plus, &one, &minus, &zero)?,
        pair(&plus, &minus, &minus, &plus)?,
    ];
    let povm = Povm::new(basis.iter().map(StateVector::projector).collect())?;
    Ok((povm, two_copy_products(&zero, &plus)?))
}

/// `n̂⊗n̂` on two copies, outcomes ordered `↑↑, ↑↓, ↓↑, ↓↓`.
pub fn product_spin_povm(d: Direction) -> Result<Povm> {
    let up = spin_state(d, true);
    let down = spin_state(d, false);
    Ok(ProjectiveMeasurement::from_basis(&two_copy_products(&up, &down)?)?.into())
}

/// Two-copy products of `|0⟩, |+⟩` with the measurements `{z⊗z, x⊗x}` and,
/// if `with_fixture`, the entangled antidistinguishing basis as a third.
pub fn pbr_zero_plus_setup(with_fixture: bool) -> Result<(MeasurementSet, Vec<StateVector>)> {
    let (fixture, states) = pbr_zero_plus_fixture()?;
    let base = MeasurementSet::new([("zz", product_spin_povm(Direction::Z)?), ("xx", product_spin_povm(Direction::X)?)])?;
    let ms = if with_fixture { base.with("pbr", fixture)? } else { base };
    Ok((ms, states))
}
