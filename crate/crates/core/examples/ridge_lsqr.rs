//! Regularized least squares with matrix-free LSQR, compared with the dense
//! normal equations, and the effect of the ridge parameter.
//!
//! ```text
//! cargo run --release --example ridge_lsqr
//! ```

use std::sync::Arc;

use anova_normal::operator::{GroupedOperator, NodeSet};
use anova_normal::solver::{solve_ridge, RidgeProblem, SolverConfig};
use anova_normal::terms::{build_index_set, build_term_set, BandwidthSchedule, IndexShape};
use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

fn main() -> anova_normal::Result<()> {
    let (d, m) = (4, 600);
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let flat: Vec<f64> = (0..m * d).map(|_| rng.sample(StandardNormal)).collect();
    let index_set = Arc::new(build_index_set(
        &build_term_set(d, 2)?,
        &BandwidthSchedule::new(vec![4, 4], IndexShape::FullGrid)?,
    )?);
    let op = GroupedOperator::new(NodeSet::new(d, flat)?, index_set)?;
    let truth: Vec<f64> = (0..op.cols()).map(|i| 1.0 / (1.0 + i as f64)).collect();
    let y: Vec<f64> = op
        .apply(&truth)?
        .into_iter()
        .map(|v| v + 0.05 * rng.sample::<f64, _>(StandardNormal))
        .collect();

    let f = op.dense_materialize()?.to_nalgebra();
    println!(
        "M = {m}, |I| = {}, cond(F) = {:.2}",
        op.cols(),
        op.dense_materialize()?.condition_number()
    );
    println!(
        "\n{:>10} {:>6} {:>14} {:>12} {:>16}",
        "λ", "iters", "termination", "‖g‖", "vs dense solve"
    );
    for lambda in [0.0, 1.0, 10f64.exp(), 1e6] {
        let result = solve_ridge(
            &RidgeProblem {
                operator: &op,
                y: &y,
                lambda,
            },
            &SolverConfig::default(),
        )?;
        let normal = f.transpose() * &f + DMatrix::identity(op.cols(), op.cols()) * lambda;
        let exact = normal
            .cholesky()
            .expect("positive definite")
            .solve(&(f.transpose() * DVector::from_vec(y.clone())));
        let g = DVector::from_vec(result.coefficients.clone());
        println!(
            "{lambda:>10.3e} {:>6} {:>14} {:>12.5} {:>16.2e}",
            result.iterations,
            format!("{:?}", result.termination),
            g.norm(),
            (&g - &exact).norm() / exact.norm()
        );
    }
    Ok(())
}
