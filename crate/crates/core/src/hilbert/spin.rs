use std::f64::consts::{FRAC_PI_2, PI, TAU};

use serde::{Deserialize, Serialize};

use super::{CVector, StateVector, SubsystemLayout, C64};
use crate::error::{Error, Result};

/// A spin-measurement axis on the Bloch sphere. Azimuth 0 is the x–z plane.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Direction {
    polar: f64,
    azimuth: f64,
}

impl Direction {
    pub const Z: Direction = Direction { polar: 0.0, azimuth: 0.0 };
    pub const X: Direction = Direction { polar: FRAC_PI_2, azimuth: 0.0 };
    pub const Y: Direction = Direction { polar: FRAC_PI_2, azimuth: FRAC_PI_2 };

    /// `polar` must lie in `[0, π]`; `azimuth` is wrapped into `[0, 2π)`.
    pub fn new(polar: f64, azimuth: f64) -> Result<Self> {
        if !polar.is_finite() || !azimuth.is_finite() {
            return Err(Error::InvalidDirection(format!("non-finite angles ({polar}, {azimuth})")));
        }
        if !(0.0..=PI).contains(&polar) {
            return Err(Error::InvalidDirection(format!("polar angle {polar} outside [0, π]")));
        }
        let mut azimuth = azimuth.rem_euclid(TAU);
        if azimuth >= TAU {
            azimuth = 0.0;
        }
        Ok(Direction { polar, azimuth })
    }

    pub fn polar(&self) -> f64 {
        self.polar
    }

    pub fn azimuth(&self) -> f64 {
        self.azimuth
    }

    pub fn bloch_vector(&self) -> [f64; 3] {
        let (st, ct) = self.polar.sin_cos();
        let (sp, cp) = self.azimuth.sin_cos();
        [st * cp, st * sp, ct]
    }

    /// Same axis as a Bloch vector (the azimuth is irrelevant at the poles).
    pub fn same_axis(&self, other: &Direction, eps: f64) -> bool {
        self.bloch_vector()
            .iter()
            .zip(other.bloch_vector())
            .all(|(a, b)| (a - b).abs() <= eps)
    }
}

/// `|±n̂⟩` on a single qubit labeled `q`.
///
/// Up is `(cos θ/2, e^{iφ} sin θ/2)`, down is `(sin θ/2, −e^{iφ} cos θ/2)`.
pub fn spin_state(d: Direction, up: bool) -> StateVector {
    let (s, c) = (d.polar / 2.0).sin_cos();
    let phase = C64::from_polar(1.0, d.azimuth);
    let amps = if up {
        [C64::new(c, 0.0), phase * s]
    } else {
        [C64::new(s, 0.0), -phase * c]
    };
    let layout = SubsystemLayout::single("q", 2).expect("qubit layout");
    StateVector::normalized(layout, CVector::from_row_slice(&amps)).expect("spin state has unit norm")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hilbert::{fidelity, inner};
    use approx::assert_abs_diff_eq;
    use std::f64::consts::FRAC_1_SQRT_2;

    // Independent route: rotate |0⟩ about y by hand with 2×2 real matrices.
    fn ry_times_zero(theta: f64) -> [f64; 2] {
        let m = [[(theta / 2.0).cos(), -(theta / 2.0).sin()], [(theta / 2.0).sin(), (theta / 2.0).cos()]];
        [m[0][0], m[1][0]]
    }

    #[test]
    fn cardinal_states() {
        let z = spin_state(Direction::Z, true);
        assert_abs_diff_eq!(z.amplitudes()[0].re, 1.0);
        assert_abs_diff_eq!(z.amplitudes()[1].norm(), 0.0);
        let x = spin_state(Direction::X, true);
        assert_abs_diff_eq!(x.amplitudes()[0].re, FRAC_1_SQRT_2, epsilon = 1e-15);
        assert_abs_diff_eq!(x.amplitudes()[1].re, FRAC_1_SQRT_2, epsilon = 1e-15);
        let xm = spin_state(Direction::X, false);
        assert_abs_diff_eq!(inner(&xm, &x).unwrap().norm(), 0.0, epsilon = 1e-15);
    }

    #[test]
    fn overlap_with_plus_x_matches_rotation_oracle() {
        for k in 0..=32 {
            let theta = PI * k as f64 / 32.0;
            let n = spin_state(Direction::new(theta, 0.0).unwrap(), true);
            let r = ry_times_zero(theta);
            assert_abs_diff_eq!(n.amplitudes()[0].re, r[0], epsilon = 1e-14);
            assert_abs_diff_eq!(n.amplitudes()[1].re, r[1], epsilon = 1e-14);
            let px = ry_times_zero(FRAC_PI_2);
            let oracle = (r[0] * px[0] + r[1] * px[1]).powi(2);
            let f = fidelity(&n, &spin_state(Direction::X, true)).unwrap();
            assert_abs_diff_eq!(f, oracle, epsilon = 1e-14);
            assert_abs_diff_eq!(f, (1.0 + theta.sin()) / 2.0, epsilon = 1e-14);
        }
    }

    #[test]
    fn up_and_down_are_orthogonal_everywhere() {
        for i in 0..10 {
            for j in 0..10 {
                let d = Direction::new(PI * i as f64 / 9.0, TAU * j as f64 / 10.0).unwrap();
                let ip = inner(&spin_state(d, true), &spin_state(d, false)).unwrap();
                assert!(ip.norm() < 1e-15);
            }
        }
    }

    #[test]
    fn direction_validation() {
        assert!(Direction::new(-0.1, 0.0).is_err());
        assert!(Direction::new(4.0, 0.0).is_err());
        assert!(Direction::new(f64::NAN, 0.0).is_err());
        let d = Direction::new(1.0, -FRAC_PI_2).unwrap();
        assert_abs_diff_eq!(d.azimuth(), 3.0 * FRAC_PI_2, epsilon = 1e-15);
        assert!(Direction::Z.same_axis(&Direction::new(0.0, 1.0).unwrap(), 1e-12));
        assert!(!Direction::Z.same_axis(&Direction::X, 1e-12));
    }
}
