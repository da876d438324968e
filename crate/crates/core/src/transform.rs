//! Standard-normal density, the error function pair and the cube/real-space
//! transformations.
//!
//! `psi` maps the open cube `(0,1)^d` onto `R^d` coordinate-wise via
//! `√2·erf⁻¹(2t − 1)`, and `psi_inv` is its inverse, the standard normal CDF
//! applied per coordinate. The Jacobian of `psi` cancels the normal density,
//! which is what carries orthonormality from the cube to `L2(R^d, ω)`.

use std::f64::consts::{FRAC_1_SQRT_2, PI, SQRT_2};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Smallest distance `psi_inv` keeps from the cube boundary.
pub const CUBE_CLAMP: f64 = 1e-15;

/// `2/√π`.
const TWO_OVER_SQRT_PI: f64 = std::f64::consts::FRAC_2_SQRT_PI;

const NEWTON_STEPS: usize = 3;
const TAIL_MAX_STEPS: usize = 50;

/// A point of `R^d` with finite coordinates.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Point(Vec<f64>);

impl Point {
    pub fn new(coordinates: Vec<f64>) -> Result<Self> {
        if let Some(i) = coordinates.iter().position(|v| !v.is_finite()) {
            return Err(Error::Domain(format!(
                "coordinate {i} is not finite ({})",
                coordinates[i]
            )));
        }
        Ok(Self(coordinates))
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn coordinates(&self) -> &[f64] {
        &self.0
    }

    pub fn into_inner(self) -> Vec<f64> {
        self.0
    }
}

/// A point of the open unit cube `(0,1)^d`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CubePoint(Vec<f64>);

impl CubePoint {
    pub fn new(coordinates: Vec<f64>) -> Result<Self> {
        for (i, &t) in coordinates.iter().enumerate() {
            check_open_unit(t, i)?;
        }
        Ok(Self(coordinates))
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn coordinates(&self) -> &[f64] {
        &self.0
    }

    pub fn into_inner(self) -> Vec<f64> {
        self.0
    }
}

fn check_open_unit(t: f64, i: usize) -> Result<()> {
    if t > 0.0 && t < 1.0 {
        Ok(())
    } else {
        Err(Error::Domain(format!(
            "cube coordinate {i} = {t} is outside the open interval (0,1)"
        )))
    }
}

/// The error function `(2/√π)∫₀ˣ e^{−t²} dt`.
pub fn erf(x: f64) -> f64 {
    libm::erf(x)
}

/// The complementary error function `1 − erf(x)`, accurate in the tails.
pub fn erfc(x: f64) -> f64 {
    libm::erfc(x)
}

/// Inverse of [`erf`] on `(−1, 1)`.
pub fn erf_inv(y: f64) -> Result<f64> {
    if y.is_nan() || y.abs() >= 1.0 {
        return Err(Error::Domain(format!("erf_inv requires |y| < 1, got {y}")));
    }
    if y.abs() <= 0.5 {
        Ok(erf_inv_central(y))
    } else {
        // 1 − |y| is exact for |y| in [0.5, 1).
        Ok(y.signum() * erfc_inv_tail(1.0 - y.abs()))
    }
}

/// `erf⁻¹(2t − 1)` for `t ∈ (0,1)`, evaluated without forming `2t − 1` where
/// that would cancel.
pub fn erf_inv_cube(t: f64) -> Result<f64> {
    check_open_unit(t, 0)?;
    Ok(if t < 0.25 {
        // 1 + (2t − 1) = 2t exactly.
        -erfc_inv_tail(2.0 * t)
    } else if t > 0.75 {
        // 1 − (2t − 1) = 2(1 − t), and 1 − t is exact here.
        erfc_inv_tail(2.0 * (1.0 - t))
    } else {
        erf_inv_central(2.0 * t - 1.0)
    })
}

/// Polynomial starting value for `erf⁻¹(y)` in terms of `w = −ln((1−y)(1+y))`.
fn erf_inv_initial(y: f64, w: f64) -> f64 {
    let p = if w < 5.0 {
        let w = w - 2.5;
        let mut p = 2.810_226_36e-8;
        p = 3.432_739_39e-7 + p * w;
        p = -3.523_387_7e-6 + p * w;
        p = -4.391_506_54e-6 + p * w;
        p = 2.185_808_7e-4 + p * w;
        p = -1.253_725_03e-3 + p * w;
        p = -4.177_681_64e-3 + p * w;
        p = 2.466_407_27e-1 + p * w;
        1.501_409_41 + p * w
    } else {
        let w = w.sqrt() - 3.0;
        let mut p = -2.002_142_57e-4;
        p = 1.009_505_58e-4 + p * w;
        p = 1.349_343_22e-3 + p * w;
        p = -3.673_428_44e-3 + p * w;
        p = 5.739_507_73e-3 + p * w;
        p = -7.622_461_3e-3 + p * w;
        p = 9.438_870_47e-3 + p * w;
        p = 1.001_674_06 + p * w;
        2.832_976_82 + p * w
    };
    p * y
}

/// Newton iteration on `erf(x) = y` for `|y| ≤ 0.5`.
fn erf_inv_central(y: f64) -> f64 {
    if y == 0.0 {
        return 0.0;
    }
    let w = -((1.0 - y) * (1.0 + y)).ln();
    let mut x = erf_inv_initial(y, w);
    for _ in 0..NEWTON_STEPS {
        let slope = TWO_OVER_SQRT_PI * (-x * x).exp();
        x -= (erf(x) - y) / slope;
    }
    x
}

/// Solves `erfc(z) = c` for `c ∈ (0, 0.5]`, returning `z ≥ 0`.
fn erfc_inv_tail(c: f64) -> f64 {
    let y = 1.0 - c;
    let w = -(c * (2.0 - c)).ln();
    let mut z = erf_inv_initial(y, w);
    let log_c = c.ln();
    // Newton on ln erfc(z) = ln c: relative accuracy in c and fast
    // convergence deep in the tail where erfc is strongly convex.
    for _ in 0..TAIL_MAX_STEPS {
        let e = erfc(z);
        if e == 0.0 {
            break;
        }
        let slope = -TWO_OVER_SQRT_PI * (-z * z).exp() / e;
        let step = (e.ln() - log_c) / slope;
        z -= step;
        if step.abs() <= 1e-16 * z.abs() {
            break;
        }
    }
    z
}

/// Standard normal CDF `Φ(x) = (erf(x/√2) + 1)/2`, unclamped.
pub fn normal_cdf(x: f64) -> f64 {
    0.5 * erfc(-x * FRAC_1_SQRT_2)
}

/// The standard-normal density `(2π)^{−d/2} e^{−‖x‖²/2}`.
pub fn density_omega(x: &Point) -> f64 {
    let norm_sq: f64 = x.coordinates().iter().map(|v| v * v).sum();
    (2.0 * PI).powf(-(x.dim() as f64) / 2.0) * (-0.5 * norm_sq).exp()
}

/// Scalar `psi`: `√2·erf⁻¹(2t − 1)`.
pub fn psi_scalar(t: f64) -> Result<f64> {
    Ok(SQRT_2 * erf_inv_cube(t)?)
}

/// Scalar `psi_inv`: the normal CDF clamped into `[CUBE_CLAMP, 1 − CUBE_CLAMP]`.
pub fn psi_inv_scalar(x: f64) -> f64 {
    normal_cdf(x).clamp(CUBE_CLAMP, 1.0 - CUBE_CLAMP)
}

/// Maps the open cube onto `R^d`.
pub fn psi(t: &CubePoint) -> Result<Point> {
    let coordinates = t
        .coordinates()
        .iter()
        .enumerate()
        .map(|(i, &ti)| {
            check_open_unit(ti, i)?;
            psi_scalar(ti)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(Point(coordinates))
}

/// Maps `R^d` into the open cube; inverse of [`psi`].
pub fn psi_inv(x: &Point) -> CubePoint {
    CubePoint(x.coordinates().iter().map(|&v| psi_inv_scalar(v)).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    /// Maclaurin series for erf, summed until terms vanish. Independent of libm.
    fn erf_series(x: f64) -> f64 {
        let mut term = x;
        let mut sum = x;
        let x2 = x * x;
        let mut n = 0.0;
        while term.abs() > 1e-18 * sum.abs().max(1e-300) {
            n += 1.0;
            term *= -x2 / n;
            sum += term / (2.0 * n + 1.0);
        }
        TWO_OVER_SQRT_PI * sum
    }

    #[test]
    fn erf_matches_series_oracle() {
        assert_eq!(erf(0.0), 0.0);
        assert_abs_diff_eq!(erf(1.0), 0.842_700_792_949_714_9, epsilon = 1e-15);
        // The alternating series cancels badly beyond |x| = 2.
        for i in -20..=20 {
            let x = i as f64 * 0.1;
            assert_abs_diff_eq!(erf(x), erf_series(x), epsilon = 1e-14);
        }
        assert_eq!(erf(-2.0), -erf(2.0));
    }

    #[test]
    fn erfc_tail_reference_values() {
        // Reference values from 40-digit arithmetic, rounded to double.
        let cases = [
            (2.5, 4.069_520_174_449_589e-4),
            (3.0, 2.209_049_699_858_544e-5),
            (4.0, 1.541_725_790_028_002e-8),
            (5.0, 1.537_459_794_428_035e-12),
        ];
        for (x, c) in cases {
            assert!((erfc(x) - c).abs() <= 1e-14 * c, "x={x}");
            assert!((erf(x) - (1.0 - c)).abs() <= 1e-15);
        }
    }

    #[test]
    fn erf_inv_examples() {
        assert_eq!(erf_inv(0.0).unwrap(), 0.0);
        assert_abs_diff_eq!(
            erf_inv(0.842_700_792_949_714_9).unwrap(),
            1.0,
            epsilon = 1e-12
        );
        let y = 0.999_999;
        let x = erf_inv(y).unwrap();
        assert!(x.is_finite() && x > 0.0);
        assert!((erf(x) - y).abs() <= 1e-12 * y);
    }

    #[test]
    fn erf_inv_rejects_boundary() {
        assert!(erf_inv(1.0).is_err());
        assert!(erf_inv(-1.0).is_err());
        assert!(erf_inv(1.5).is_err());
        assert!(erf_inv(f64::NAN).is_err());
    }

    #[test]
    fn erf_inv_round_trip_relative() {
        for i in 1..2000 {
            let y = -1.0 + i as f64 / 1000.0;
            let x = erf_inv(y).unwrap();
            assert!(
                (erf(x) - y).abs() <= 1e-12 * y.abs().max(1e-300),
                "y={y} x={x} erf(x)={}",
                erf(x)
            );
        }
        for &y in &[1e-300, 1e-20, 1e-8, 0.4999, 0.5, 0.5001, 1.0 - 1e-15] {
            let x = erf_inv(y).unwrap();
            assert!((erf(x) - y).abs() <= 1e-12 * y, "y={y}");
            assert_eq!(erf_inv(-y).unwrap(), -x);
        }
    }

    #[test]
    fn erf_inv_cube_tail_uses_complement() {
        // t = Φ(−8) is about 6.2e−16; the complement keeps full relative accuracy.
        let t = normal_cdf(-8.0);
        let x = psi_scalar(t).unwrap();
        assert_abs_diff_eq!(x, -8.0, epsilon = 1e-10);
    }

    #[test]
    fn density_examples() {
        let one_d = Point::new(vec![0.0]).unwrap();
        assert_abs_diff_eq!(
            density_omega(&one_d),
            0.398_942_280_401_432_7,
            epsilon = 1e-15
        );
        let two_d = Point::new(vec![0.0, 0.0]).unwrap();
        assert_abs_diff_eq!(density_omega(&two_d), 1.0 / (2.0 * PI), epsilon = 1e-15);
        let at_one = Point::new(vec![1.0]).unwrap();
        assert_abs_diff_eq!(
            density_omega(&at_one),
            (-0.5f64).exp() / (2.0 * PI).sqrt(),
            epsilon = 1e-15
        );
    }

    #[test]
    fn density_integrates_to_one() {
        // Composite Simpson on [−12, 12]; the tails beyond are below 1e−32.
        let n = 24_000;
        let h = 24.0 / n as f64;
        let f = |x: f64| density_omega(&Point::new(vec![x]).unwrap());
        let mut sum = f(-12.0) + f(12.0);
        for i in 1..n {
            let x = -12.0 + i as f64 * h;
            sum += if i % 2 == 1 { 4.0 } else { 2.0 } * f(x);
        }
        assert_abs_diff_eq!(sum * h / 3.0, 1.0, epsilon = 1e-8);
    }

    #[test]
    fn psi_examples() {
        let center = CubePoint::new(vec![0.5, 0.5, 0.5]).unwrap();
        assert_eq!(psi(&center).unwrap().coordinates(), &[0.0, 0.0, 0.0]);
        let phi_one = CubePoint::new(vec![0.841_344_746_068_542_9]).unwrap();
        assert_abs_diff_eq!(
            psi(&phi_one).unwrap().coordinates()[0],
            1.0,
            epsilon = 1e-10
        );
        assert!(CubePoint::new(vec![0.0]).is_err());
        assert!(CubePoint::new(vec![0.3, 1.0]).is_err());
        assert!(psi_scalar(1.0).is_err());
    }

    #[test]
    fn psi_inv_examples() {
        let origin = Point::new(vec![0.0, 0.0]).unwrap();
        assert_eq!(psi_inv(&origin).coordinates(), &[0.5, 0.5]);
        assert_abs_diff_eq!(
            psi_inv_scalar(1.0),
            0.841_344_746_068_542_9,
            epsilon = 1e-12
        );
        assert!(Point::new(vec![f64::INFINITY]).is_err());
    }

    #[test]
    fn psi_inv_clamps_far_tails() {
        assert_eq!(psi_inv_scalar(40.0), 1.0 - CUBE_CLAMP);
        assert_eq!(psi_inv_scalar(-40.0), CUBE_CLAMP);
        assert!(psi_scalar(psi_inv_scalar(40.0)).unwrap().is_finite());
    }

    #[test]
    fn round_trip_on_grid() {
        for i in -600..=600 {
            let x = i as f64 * 0.01;
            let back = psi_scalar(psi_inv_scalar(x)).unwrap();
            assert!((back - x).abs() <= 1e-8, "x={x} back={back}");
        }
    }
}
