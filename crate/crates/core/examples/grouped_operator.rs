//! The matrix-free basis matrix: products with `F` and `Fᵀ` term by term,
//! compared with the dense matrix.
//!
//! ```text
//! cargo run --release --example grouped_operator
//! ```

use std::sync::Arc;
use std::time::Instant;

use anova_normal::operator::{GroupedOperator, NodeSet};
use anova_normal::terms::{build_index_set, build_term_set, BandwidthSchedule, IndexShape};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

fn main() -> anova_normal::Result<()> {
    let (d, m) = (8, 2000);
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let flat: Vec<f64> = (0..m * d).map(|_| rng.sample(StandardNormal)).collect();
    let index_set = Arc::new(build_index_set(
        &build_term_set(d, 2)?,
        &BandwidthSchedule::new(vec![6, 6], IndexShape::FullGrid)?,
    )?);
    let op = GroupedOperator::new(NodeSet::new(d, flat)?, index_set.clone())?;
    println!(
        "M = {m} nodes in d = {d}, |I| = {} basis functions in {} terms",
        op.cols(),
        index_set.groups().len()
    );

    let c: Vec<f64> = (0..op.cols()).map(|_| rng.sample(StandardNormal)).collect();
    let r: Vec<f64> = (0..m).map(|_| rng.sample(StandardNormal)).collect();

    let start = Instant::now();
    let fc = op.apply(&c)?;
    let ftr = op.apply_transpose(&r)?;
    println!("matrix-free F·c and Fᵀ·r: {:.2?}", start.elapsed());

    let start = Instant::now();
    let dense = op.dense_materialize()?;
    let dc = dense.mul_vec(&c);
    let dtr = dense.transpose_mul_vec(&r);
    println!("dense assembly and products: {:.2?}", start.elapsed());

    let max_diff = |a: &[f64], b: &[f64]| {
        a.iter()
            .zip(b)
            .map(|(x, y)| (x - y).abs())
            .fold(0.0, f64::max)
    };
    println!(
        "max |F·c − dense| = {:.2e}, max |Fᵀ·r − dense| = {:.2e}",
        max_diff(&fc, &dc),
        max_diff(&ftr, &dtr)
    );
    let lhs: f64 = fc.iter().zip(&r).map(|(a, b)| a * b).sum();
    let rhs: f64 = c.iter().zip(&ftr).map(|(a, b)| a * b).sum();
    println!("adjoint identity ⟨Fc, r⟩ − ⟨c, Fᵀr⟩ = {:.2e}", lhs - rhs);

    let first_order = &index_set.groups()[1];
    let part = op.partial_apply(1, &c)?;
    println!(
        "contribution of term {} alone: first value {:.4}",
        first_order.term, part[0]
    );
    Ok(())
}
