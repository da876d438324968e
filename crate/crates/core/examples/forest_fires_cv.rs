//! Cross-validate the ANOVA model on the forest-fires data for the four
//! attribute selections of the benchmark, next to the naive mean predictor.
//!
//! ```text
//! ANOVA_FORESTFIRES_CSV=forestfires.csv cargo run --release --example forest_fires_cv [-- reps]
//! ```
//!
//! Without the environment variable a synthetic stand-in with the same
//! layout is used, so the numbers then only illustrate the workflow.

use anova_normal::dataset::{self, load_csv, preprocess, synthetic_records, AttributeSelection};
use anova_normal::experiment::{run_cv, run_naive, CvPlan, ModelSpec, PUBLISHED_SELECTIONS};
use anova_normal::solver::SolverConfig;
use anova_normal::terms::IndexShape;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let reps = std::env::args()
        .nth(1)
        .map(|s| s.parse())
        .transpose()?
        .unwrap_or(3);
    let records = match dataset::default_dataset_path(None) {
        Some(path) => load_csv(path)?,
        None => {
            eprintln!("{} not set, using synthetic records", dataset::DATASET_ENV);
            synthetic_records(dataset::CANONICAL_ROWS, 0)
        }
    };
    let all = preprocess(&records, &AttributeSelection::all())?;
    let plan = CvPlan {
        repetitions: reps,
        ..CvPlan::default()
    };
    println!(
        "{} records, {reps}×{}-fold CV; MAD (RMSE) in hectares",
        all.rows(),
        plan.folds
    );
    println!("Naive: {}", run_naive(&all, &plan)?.cell());

    for (name, n1, n2, ln_lambda, _, mad, rmse) in PUBLISHED_SELECTIONS {
        let data = all.select(&name.parse()?)?;
        let spec = ModelSpec::new(
            2,
            vec![n1, n2],
            IndexShape::Diagonal,
            f64::from(ln_lambda).exp(),
        );
        let report = run_cv(&data, &spec, &plan, &SolverConfig::default())?;
        println!(
            "{name:<6} {:<40} |I| = {:>3}: {}   (published {mad} ({rmse}))",
            spec.label(),
            report.basis_size,
            report.cell()
        );
    }
    Ok(())
}
