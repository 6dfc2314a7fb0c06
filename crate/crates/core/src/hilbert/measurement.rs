use rand::Rng;

use super::operator::kron;
use super::{CMatrix, StateVector, SubsystemLayout, C64};
use crate::error::{Error, Result};
use crate::tol;

/// A positive operator-valued measure given by its effects.
#[derive(Clone, Debug, PartialEq)]
pub struct Povm {
    effects: Vec<CMatrix>,
}

impl Povm {
    /// Checks hermiticity, positivity (eigenvalues ≥ −1e-10) and completeness.
    pub fn new(effects: Vec<CMatrix>) -> Result<Self> {
        let first = effects.first().ok_or_else(|| Error::InvalidPovm("no effects".into()))?;
        let dim = first.nrows();
        let mut sum = CMatrix::zeros(dim, dim);
        for (k, e) in effects.iter().enumerate() {
            if e.nrows() != dim || e.ncols() != dim {
                return Err(Error::InvalidPovm(format!("effect {k} is not {dim}×{dim}")));
            }
            let herm = max_abs(&(e - e.adjoint()));
            if herm > tol::STRUCTURAL {
                return Err(Error::InvalidPovm(format!("effect {k} is not Hermitian ({herm:e})")));
            }
            let sym = (e + e.adjoint()).scale(0.5);
            let min_eig = sym.symmetric_eigenvalues().iter().cloned().fold(f64::INFINITY, f64::min);
            if min_eig < -tol::STRUCTURAL {
                return Err(Error::InvalidPovm(format!("effect {k} has eigenvalue {min_eig:e}")));
            }
            sum += e;
        }
        let dev = max_abs(&(sum - CMatrix::identity(dim, dim)));
        if dev > tol::STRUCTURAL {
            return Err(Error::InvalidPovm(format!("effects sum to I only within {dev:e}")));
        }
        Ok(Povm { effects })
    }

    pub fn effects(&self) -> &[CMatrix] {
        &self.effects
    }

    pub fn outcome_count(&self) -> usize {
        self.effects.len()
    }

    pub fn dim(&self) -> usize {
        self.effects[0].nrows()
    }
}

/// A complete set of orthogonal projectors.
#[derive(Clone, Debug, PartialEq)]
pub struct ProjectiveMeasurement {
    povm: Povm,
}

impl ProjectiveMeasurement {
    pub fn new(projectors: Vec<CMatrix>) -> Result<Self> {
        for (k, p) in projectors.iter().enumerate() {
            if p.nrows() != p.ncols() {
                return Err(Error::InvalidPovm(format!("projector {k} is not square")));
            }
            let idem = max_abs(&(p * p - p));
            if idem > tol::STRUCTURAL {
                return Err(Error::InvalidPovm(format!("effect {k} is not a projector ({idem:e})")));
            }
        }
        Ok(ProjectiveMeasurement { povm: Povm::new(projectors)? })
    }

    /// Rank-one projectors onto a complete orthonormal basis.
    pub fn from_basis(basis: &[StateVector]) -> Result<Self> {
        check_orthonormal(basis)?;
        let dim = basis.first().map(StateVector::dim).unwrap_or(0);
        if basis.len() != dim {
            return Err(Error::InvalidPovm(format!("basis has {} vectors in dimension {dim}", basis.len())));
        }
        Self::new(basis.iter().map(StateVector::projector).collect())
    }

    /// `{|φ⟩⟨φ|, I − |φ⟩⟨φ|}`: the superobserver's check that the lab is in `φ`.
    pub fn verification(phi: &StateVector) -> Result<Self> {
        let p = phi.projector();
        let dim = phi.dim();
        let complement = CMatrix::identity(dim, dim) - &p;
        Self::new(vec![p, complement])
    }

    /// Embeds local projectors on factor `label` as `I ⊗ P ⊗ I`.
    pub fn on_subsystem(layout: &SubsystemLayout, label: &str, local: &ProjectiveMeasurement) -> Result<Self> {
        let pos = layout
            .position(label)
            .ok_or_else(|| Error::InvalidArgument(format!("no subsystem `{label}` in {layout}")))?;
        let dims = layout.dims();
        if local.povm.dim() != dims[pos] {
            return Err(Error::DimensionMismatch { expected: dims[pos], actual: local.povm.dim() });
        }
        let before: usize = dims[..pos].iter().product();
        let after: usize = dims[pos + 1..].iter().product();
        let projectors = local
            .povm
            .effects
            .iter()
            .map(|p| kron(&kron(&CMatrix::identity(before, before), p), &CMatrix::identity(after, after)))
            .collect();
        Self::new(projectors)
    }

    pub fn povm(&self) -> &Povm {
        &self.povm
    }

    pub fn projectors(&self) -> &[CMatrix] {
        self.povm.effects()
    }

    pub fn outcome_count(&self) -> usize {
        self.povm.outcome_count()
    }
}

impl From<ProjectiveMeasurement> for Povm {
    fn from(m: ProjectiveMeasurement) -> Self {
        m.povm
    }
}

fn max_abs(m: &CMatrix) -> f64 {
    m.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

/// Errors with the largest Gram-matrix deviation if `basis` is not orthonormal.
pub fn check_orthonormal(basis: &[StateVector]) -> Result<()> {
    let mut dev: f64 = 0.0;
    for (i, a) in basis.iter().enumerate() {
        for (j, b) in basis.iter().enumerate() {
            if a.dim() != b.dim() {
                return Err(Error::DimensionMismatch { expected: a.dim(), actual: b.dim() });
            }
            let ip = a.amplitudes().dotc(b.amplitudes());
            let target = if i == j { 1.0 } else { 0.0 };
            dev = dev.max((ip - C64::new(target, 0.0)).norm());
        }
    }
    if dev > tol::STRUCTURAL {
        return Err(Error::NotOrthonormal(dev));
    }
    Ok(())
}

/// Born probabilities `⟨s|E_k|s⟩`.
pub fn born(s: &StateVector, m: &Povm) -> Result<Vec<f64>> {
    if m.dim() != s.dim() {
        return Err(Error::DimensionMismatch { expected: m.dim(), actual: s.dim() });
    }
    let v = s.amplitudes();
    Ok(m.effects.iter().map(|e| v.dotc(&(e * v)).re).collect())
}

/// Forces outcome `k`, returning its probability and the renormalized projection.
pub fn project(s: &StateVector, m: &ProjectiveMeasurement, k: usize) -> Result<(f64, StateVector)> {
    let p = m
        .projectors()
        .get(k)
        .ok_or_else(|| Error::InvalidArgument(format!("outcome {k} out of range")))?;
    if p.nrows() != s.dim() {
        return Err(Error::DimensionMismatch { expected: p.nrows(), actual: s.dim() });
    }
    let projected = p * s.amplitudes();
    let prob = projected.norm_squared();
    if prob <= tol::ZERO_PROBABILITY {
        return Err(Error::ZeroProbability(k));
    }
    Ok((prob, StateVector::normalized(s.layout().clone(), projected)?))
}

/// Samples an outcome by the Born rule and collapses onto it.
pub fn measure<R: Rng + ?Sized>(
    s: &StateVector,
    m: &ProjectiveMeasurement,
    rng: &mut R,
) -> Result<(usize, StateVector)> {
    let probs = born(s, m.povm())?;
    let u: f64 = rng.random();
    let mut acc = 0.0;
    let mut chosen = None;
    for (k, p) in probs.iter().enumerate() {
        if *p <= tol::ZERO_PROBABILITY {
            continue;
        }
        acc += p;
        chosen = Some(k);
        if u < acc {
            break;
        }
    }
    let k = chosen.ok_or(Error::ZeroProbability(0))?;
    let (_, post) = project(s, m, k)?;
    Ok((k, post))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hilbert::{fidelity, spin_state, Direction};
    use approx::assert_abs_diff_eq;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn z_basis() -> ProjectiveMeasurement {
        ProjectiveMeasurement::from_basis(&[spin_state(Direction::Z, true), spin_state(Direction::Z, false)]).unwrap()
    }

    #[test]
    fn born_plus_x_in_z() {
        let p = born(&spin_state(Direction::X, true), z_basis().povm()).unwrap();
        assert_abs_diff_eq!(p[0], 0.5, epsilon = 1e-15);
        assert_abs_diff_eq!(p[1], 0.5, epsilon = 1e-15);
        let p = born(&spin_state(Direction::Z, true), z_basis().povm()).unwrap();
        assert_eq!(p, vec![1.0, 0.0]);
    }

    #[test]
    fn measuring_eigenstate_is_certain() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let up = spin_state(Direction::Z, true);
        for _ in 0..100 {
            let (k, post) = measure(&up, &z_basis(), &mut rng).unwrap();
            assert_eq!(k, 0);
            assert!(post.approx_eq(&up, 1e-15));
        }
    }

    #[test]
    fn zero_probability_projection_is_an_error() {
        let up = spin_state(Direction::Z, true);
        assert_eq!(project(&up, &z_basis(), 1).unwrap_err(), Error::ZeroProbability(1));
    }

    #[test]
    fn verification_is_non_demolition() {
        let phi = spin_state(Direction::new(0.7, 2.0).unwrap(), true);
        let v = ProjectiveMeasurement::verification(&phi).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let mut state = phi.clone();
        for _ in 0..50 {
            let (k, post) = measure(&state, &v, &mut rng).unwrap();
            assert_eq!(k, 0);
            assert!(fidelity(&post, &phi).unwrap() >= 1.0 - 1e-10);
            state = post;
        }
    }

    #[test]
    fn seeded_frequencies_are_replayable_and_fair() {
        // Binomial(N, 1/2): 3σ band is 1.5/√N around 1/2.
        let n = 100_000;
        let plus = spin_state(Direction::X, true);
        let run = |seed| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            (0..n).map(|_| measure(&plus, &z_basis(), &mut rng).unwrap().0).collect::<Vec<_>>()
        };
        let a = run(42);
        assert_eq!(a, run(42));
        let freq = a.iter().filter(|&&k| k == 0).count() as f64 / n as f64;
        assert!((freq - 0.5).abs() <= 3.0 * 0.5 / (n as f64).sqrt(), "freq {freq}");
    }

    #[test]
    fn povm_validation() {
        let half = CMatrix::identity(2, 2).scale(0.5);
        assert!(Povm::new(vec![half.clone(), half.clone()]).is_ok());
        assert!(matches!(Povm::new(vec![half.clone()]), Err(Error::InvalidPovm(_))));
        let neg = CMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![C64::new(1.5, 0.0), C64::new(-0.5, 0.0)]));
        let comp = CMatrix::identity(2, 2) - &neg;
        assert!(matches!(Povm::new(vec![neg, comp]), Err(Error::InvalidPovm(_))));
        // Not projective.
        assert!(ProjectiveMeasurement::new(vec![half.clone(), half]).is_err());
    }

    #[test]
    fn local_measurement_embedding() {
        let layout = SubsystemLayout::new([("S", 2), ("F", 3)]).unwrap();
        let m = ProjectiveMeasurement::on_subsystem(&layout, "S", &z_basis()).unwrap();
        let s = StateVector::product_basis(layout.clone(), &[1, 2]).unwrap();
        assert_eq!(born(&s, m.povm()).unwrap(), vec![0.0, 1.0]);
        assert!(ProjectiveMeasurement::on_subsystem(&layout, "F", &z_basis()).is_err());
    }
}
