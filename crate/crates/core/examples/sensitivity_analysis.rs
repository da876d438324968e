//! Fit a known ANOVA function from scattered normal samples and read off
//! global sensitivity indices, attribute ranking and superposition dimension.
//!
//! The test function depends strongly on x₁, through an interaction on
//! (x₂, x₃), and not at all on x₄ and x₅.
//!
//! ```text
//! cargo run --release --example sensitivity_analysis
//! ```

use std::sync::Arc;

use anova_normal::model::Approximant;
use anova_normal::operator::NodeSet;
use anova_normal::solver::SolverConfig;
use anova_normal::terms::{build_index_set, build_term_set, BandwidthSchedule, IndexShape};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

fn target(x: &[f64]) -> f64 {
    2.0 * x[0].tanh() + 0.8 * x[1] * x[2] / (1.0 + x[1] * x[1]) + 0.3 * (x[2] * 0.5).sin()
}

fn main() -> anova_normal::Result<()> {
    let (d, m) = (5, 4000);
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let flat: Vec<f64> = (0..m * d).map(|_| rng.sample(StandardNormal)).collect();
    let y: Vec<f64> = flat.chunks(d).map(target).collect();

    let index_set = Arc::new(build_index_set(
        &build_term_set(d, 2)?,
        &BandwidthSchedule::new(vec![8, 6], IndexShape::FullGrid)?,
    )?);
    let fit = Approximant::fit(
        NodeSet::new(d, flat)?,
        &y,
        index_set,
        1.0,
        &SolverConfig::default(),
    )?;
    let f = fit.approximant;
    let report = f.sensitivity_report(0.99)?;

    println!(
        "|I| = {}, LSQR iterations: {}",
        f.index_set().len(),
        fit.solver.iterations
    );
    println!("variance σ²(f) = {:.4}", report.variance);
    println!("\nlargest global sensitivity indices:");
    let mut gsi = report.gsi.clone();
    gsi.sort_by(|a, b| b.value.total_cmp(&a.value));
    for t in gsi.iter().take(6) {
        println!("  {:<8} {:.4}", format!("{:?}", t.attributes), t.value);
    }
    println!("\nattribute ranking r(i):");
    for i in report.ranked_attributes() {
        println!("  x{i}: {:.4}", report.ranking[i - 1]);
    }
    println!(
        "\nsuperposition dimension for α = 0.99: {}",
        report.superposition_dimension
    );
    Ok(())
}
