//! Regularized least squares `min ‖y − F g‖² + λ‖g‖²` via matrix-free LSQR.
//!
//! The ridge problem is rewritten as the ordinary least-squares problem for
//! the stacked operator `[F; √λ·I]` with right-hand side `[y; 0]`, which has
//! full column rank whenever `λ > 0`. LSQR (Paige & Saunders) only needs
//! products with that operator and its transpose.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::operator::{DenseMatrix, GroupedOperator};

/// A linear map known only through products with it and its transpose.
pub trait LinearOperator {
    fn rows(&self) -> usize;
    fn cols(&self) -> usize;
    fn apply(&self, x: &[f64]) -> Result<Vec<f64>>;
    fn apply_transpose(&self, y: &[f64]) -> Result<Vec<f64>>;
}

impl LinearOperator for GroupedOperator {
    fn rows(&self) -> usize {
        GroupedOperator::rows(self)
    }

    fn cols(&self) -> usize {
        GroupedOperator::cols(self)
    }

    fn apply(&self, x: &[f64]) -> Result<Vec<f64>> {
        GroupedOperator::apply(self, x)
    }

    fn apply_transpose(&self, y: &[f64]) -> Result<Vec<f64>> {
        GroupedOperator::apply_transpose(self, y)
    }
}

impl LinearOperator for DenseMatrix {
    fn rows(&self) -> usize {
        self.rows
    }

    fn cols(&self) -> usize {
        self.cols
    }

    fn apply(&self, x: &[f64]) -> Result<Vec<f64>> {
        if x.len() != self.cols {
            return Err(Error::DimensionMismatch {
                expected: self.cols,
                found: x.len(),
            });
        }
        Ok(self.mul_vec(x))
    }

    fn apply_transpose(&self, y: &[f64]) -> Result<Vec<f64>> {
        if y.len() != self.rows {
            return Err(Error::DimensionMismatch {
                expected: self.rows,
                found: y.len(),
            });
        }
        Ok(self.transpose_mul_vec(y))
    }
}

/// `[A; √λ·I]`, realized from products with `A`.
pub struct Augmented<'a, A: ?Sized> {
    inner: &'a A,
    sqrt_lambda: f64,
}

impl<'a, A: LinearOperator + ?Sized> Augmented<'a, A> {
    pub fn new(inner: &'a A, lambda: f64) -> Self {
        Self {
            inner,
            sqrt_lambda: lambda.sqrt(),
        }
    }
}

impl<A: LinearOperator + ?Sized> LinearOperator for Augmented<'_, A> {
    fn rows(&self) -> usize {
        self.inner.rows() + self.inner.cols()
    }

    fn cols(&self) -> usize {
        self.inner.cols()
    }

    fn apply(&self, x: &[f64]) -> Result<Vec<f64>> {
        let mut out = self.inner.apply(x)?;
        out.extend(x.iter().map(|v| self.sqrt_lambda * v));
        Ok(out)
    }

    fn apply_transpose(&self, y: &[f64]) -> Result<Vec<f64>> {
        let m = self.inner.rows();
        if y.len() != self.rows() {
            return Err(Error::DimensionMismatch {
                expected: self.rows(),
                found: y.len(),
            });
        }
        let mut out = self.inner.apply_transpose(&y[..m])?;
        for (o, v) in out.iter_mut().zip(&y[m..]) {
            *o += self.sqrt_lambda * v;
        }
        Ok(out)
    }
}

/// The ridge problem of one fit.
pub struct RidgeProblem<'a, A: ?Sized> {
    pub operator: &'a A,
    pub y: &'a [f64],
    pub lambda: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SolverConfig {
    /// `None` means `4·|I(U)|`.
    pub max_iterations: Option<usize>,
    pub atol: f64,
    pub btol: f64,
    pub conlim: f64,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            max_iterations: None,
            atol: 1e-10,
            btol: 1e-10,
            conlim: 1e8,
        }
    }
}

impl SolverConfig {
    fn validate(&self) -> Result<()> {
        let in_unit = |v: f64| v > 0.0 && v < 1.0;
        if !in_unit(self.atol) || !in_unit(self.btol) {
            return Err(Error::InvalidArgument(format!(
                "atol and btol must lie in (0,1), got {} and {}",
                self.atol, self.btol
            )));
        }
        if self.max_iterations == Some(0) {
            return Err(Error::InvalidArgument(
                "max_iterations must be at least 1".into(),
            ));
        }
        if self.conlim.is_nan() || self.conlim <= 1.0 {
            return Err(Error::InvalidArgument(format!(
                "conlim must exceed 1, got {}",
                self.conlim
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Termination {
    /// `b = 0` or the starting point already solves the system.
    Exact,
    /// The residual of the (consistent) system is within tolerance.
    Residual,
    /// The normal-equation residual is within tolerance.
    LeastSquares,
    /// The condition estimate exceeded `conlim`.
    ConditionLimit,
    IterationLimit,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolverResult {
    pub coefficients: Vec<f64>,
    pub iterations: usize,
    pub termination: Termination,
    /// Estimate of `‖[y;0] − [F;√λI] g‖` after each iteration, starting with
    /// the initial `‖y‖`.
    pub residual_history: Vec<f64>,
    /// Estimate of the normal-equation residual `‖Fᵀ(y − Fg) − λg‖`.
    pub normal_residual: f64,
}

impl SolverResult {
    pub fn converged(&self) -> bool {
        self.termination != Termination::IterationLimit
    }

    pub fn residual_norm(&self) -> f64 {
        self.residual_history.last().copied().unwrap_or(0.0)
    }
}

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

fn scale(v: &mut [f64], s: f64) {
    v.iter_mut().for_each(|x| *x *= s);
}

/// Solves the ridge problem with LSQR on the augmented system.
pub fn solve_ridge<A: LinearOperator + ?Sized>(
    problem: &RidgeProblem<'_, A>,
    cfg: &SolverConfig,
) -> Result<SolverResult> {
    cfg.validate()?;
    if !problem.lambda.is_finite() || problem.lambda < 0.0 {
        return Err(Error::InvalidArgument(format!(
            "lambda must be finite and nonnegative, got {}",
            problem.lambda
        )));
    }
    if problem.y.len() != problem.operator.rows() {
        return Err(Error::DimensionMismatch {
            expected: problem.operator.rows(),
            found: problem.y.len(),
        });
    }
    let aug = Augmented::new(problem.operator, problem.lambda);
    let mut b = problem.y.to_vec();
    b.resize(aug.rows(), 0.0);
    let max_iter = cfg.max_iterations.unwrap_or(4 * aug.cols()).max(1);
    lsqr(&aug, &b, cfg, max_iter)
}

/// Plain LSQR for `min ‖b − A x‖` starting from `x = 0`.
pub fn lsqr<A: LinearOperator + ?Sized>(
    a: &A,
    b: &[f64],
    cfg: &SolverConfig,
    max_iter: usize,
) -> Result<SolverResult> {
    let n = a.cols();
    let mut x = vec![0.0; n];
    let mut u = b.to_vec();
    let bnorm = norm(&u);
    let mut beta = bnorm;
    let mut history = vec![bnorm];

    let done = |x: Vec<f64>, history: Vec<f64>, iterations, termination, normal_residual| {
        Ok(SolverResult {
            coefficients: x,
            iterations,
            termination,
            residual_history: history,
            normal_residual,
        })
    };

    if beta == 0.0 {
        return done(x, history, 0, Termination::Exact, 0.0);
    }
    scale(&mut u, 1.0 / beta);
    let mut v = a.apply_transpose(&u)?;
    let mut alpha = norm(&v);
    if alpha == 0.0 {
        return done(x, history, 0, Termination::Exact, 0.0);
    }
    scale(&mut v, 1.0 / alpha);
    let mut w = v.clone();

    let mut rhobar = alpha;
    let mut phibar = beta;
    let mut anorm_sq = 0.0;
    let mut ddnorm = 0.0;
    let mut xxnorm = 0.0;
    let mut z = 0.0;
    let mut cs2 = -1.0;
    let mut sn2 = 0.0;
    let mut arnorm: f64;

    let mut itn = 0;
    loop {
        itn += 1;

        // Golub–Kahan bidiagonalization step.
        let av = a.apply(&v)?;
        for (ui, avi) in u.iter_mut().zip(&av) {
            *ui = avi - alpha * *ui;
        }
        beta = norm(&u);
        if !beta.is_finite() {
            return Err(Error::NonFinite(itn));
        }
        if beta > 0.0 {
            scale(&mut u, 1.0 / beta);
            anorm_sq += alpha * alpha + beta * beta;
            let atu = a.apply_transpose(&u)?;
            for (vi, ai) in v.iter_mut().zip(&atu) {
                *vi = ai - beta * *vi;
            }
            alpha = norm(&v);
            if !alpha.is_finite() {
                return Err(Error::NonFinite(itn));
            }
            if alpha > 0.0 {
                scale(&mut v, 1.0 / alpha);
            }
        }

        // Plane rotation eliminating the subdiagonal beta.
        let rho = rhobar.hypot(beta);
        let cs = rhobar / rho;
        let sn = beta / rho;
        let theta = sn * alpha;
        rhobar = -cs * alpha;
        let phi = cs * phibar;
        phibar *= sn;
        let tau = sn * phi;

        let t1 = phi / rho;
        let t2 = -theta / rho;
        let mut dk_sq = 0.0;
        for ((xi, wi), vi) in x.iter_mut().zip(w.iter_mut()).zip(&v) {
            let dk = *wi / rho;
            dk_sq += dk * dk;
            *xi += t1 * *wi;
            *wi = vi + t2 * *wi;
        }
        ddnorm += dk_sq;
        if x.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite(itn));
        }

        // Estimate ‖x‖ via the second rotation.
        let delta = sn2 * rho;
        let gambar = -cs2 * rho;
        let rhs = phi - delta * z;
        let zbar = rhs / gambar;
        let xnorm = (xxnorm + zbar * zbar).sqrt();
        let gamma = gambar.hypot(theta);
        cs2 = gambar / gamma;
        sn2 = theta / gamma;
        z = rhs / gamma;
        xxnorm += z * z;

        let anorm = anorm_sq.sqrt();
        let acond = anorm * ddnorm.sqrt();
        let rnorm = phibar.abs();
        arnorm = alpha * tau.abs();
        history.push(rnorm);

        let test1 = rnorm / bnorm;
        let test2 = arnorm / (anorm * rnorm + f64::EPSILON);
        let test3 = 1.0 / (acond + f64::EPSILON);
        let t1 = test1 / (1.0 + anorm * xnorm / bnorm);
        let rtol = cfg.btol + cfg.atol * anorm * xnorm / bnorm;

        let mut stop = None;
        if itn >= max_iter {
            stop = Some(Termination::IterationLimit);
        }
        if 1.0 + test3 <= 1.0 || test3 <= 1.0 / cfg.conlim {
            stop = Some(Termination::ConditionLimit);
        }
        if 1.0 + test2 <= 1.0 || test2 <= cfg.atol {
            stop = Some(Termination::LeastSquares);
        }
        if 1.0 + t1 <= 1.0 || test1 <= rtol {
            stop = Some(Termination::Residual);
        }
        if let Some(reason) = stop {
            return done(x, history, itn, reason, arnorm);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn small_dense() -> DenseMatrix {
        // 4 × 2 with full column rank.
        DenseMatrix {
            rows: 4,
            cols: 2,
            data: vec![1.0, 0.0, 1.0, 1.0, 1.0, 2.0, 1.0, 3.0],
        }
    }

    #[test]
    fn least_squares_line_fit() {
        let a = small_dense();
        let y = [1.0, 3.0, 5.0, 7.0];
        let res = solve_ridge(
            &RidgeProblem {
                operator: &a,
                y: &y,
                lambda: 0.0,
            },
            &SolverConfig::default(),
        )
        .unwrap();
        assert!(res.converged());
        assert_abs_diff_eq!(res.coefficients[0], 1.0, epsilon = 1e-10);
        assert_abs_diff_eq!(res.coefficients[1], 2.0, epsilon = 1e-10);
    }

    #[test]
    fn ridge_matches_normal_equations() {
        let a = small_dense();
        let y = [0.3, -1.0, 2.5, 0.7];
        let lambda = 0.8;
        let res = solve_ridge(
            &RidgeProblem {
                operator: &a,
                y: &y,
                lambda,
            },
            &SolverConfig::default(),
        )
        .unwrap();
        let f = a.to_nalgebra();
        let lhs = f.transpose() * &f + nalgebra::DMatrix::identity(2, 2) * lambda;
        let rhs = f.transpose() * nalgebra::DVector::from_row_slice(&y);
        let exact = lhs.lu().solve(&rhs).unwrap();
        for i in 0..2 {
            assert_abs_diff_eq!(res.coefficients[i], exact[i], epsilon = 1e-10);
        }
    }

    #[test]
    fn zero_rhs_is_exact() {
        let a = small_dense();
        let res = solve_ridge(
            &RidgeProblem {
                operator: &a,
                y: &[0.0; 4],
                lambda: 1.0,
            },
            &SolverConfig::default(),
        )
        .unwrap();
        assert_eq!(res.termination, Termination::Exact);
        assert_eq!(res.coefficients, vec![0.0, 0.0]);
    }

    #[test]
    fn rejects_bad_input() {
        let a = small_dense();
        let p = |lambda| RidgeProblem {
            operator: &a,
            y: &[1.0; 4],
            lambda,
        };
        let cfg = SolverConfig::default();
        assert!(solve_ridge(&p(-1.0), &cfg).is_err());
        assert!(solve_ridge(&p(f64::NAN), &cfg).is_err());
        let bad = SolverConfig { atol: 0.0, ..cfg };
        assert!(solve_ridge(&p(1.0), &bad).is_err());
        let short = RidgeProblem {
            operator: &a,
            y: &[1.0; 3],
            lambda: 1.0,
        };
        assert!(matches!(
            solve_ridge(&short, &cfg),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn nan_data_aborts() {
        let a = small_dense();
        let y = [1.0, f64::NAN, 0.0, 0.0];
        let res = solve_ridge(
            &RidgeProblem {
                operator: &a,
                y: &y,
                lambda: 1.0,
            },
            &SolverConfig::default(),
        );
        assert!(res.is_err());
    }

    #[test]
    fn iteration_limit_is_flagged() {
        let a = DenseMatrix {
            rows: 3,
            cols: 3,
            data: vec![4.0, 1.0, 0.0, 1.0, 3.0, 1.0, 0.0, 1.0, 2.0],
        };
        let cfg = SolverConfig {
            max_iterations: Some(1),
            ..SolverConfig::default()
        };
        let res = solve_ridge(
            &RidgeProblem {
                operator: &a,
                y: &[1.0, 2.0, 3.0],
                lambda: 0.0,
            },
            &cfg,
        )
        .unwrap();
        assert_eq!(res.termination, Termination::IterationLimit);
        assert!(!res.converged());
    }
}
