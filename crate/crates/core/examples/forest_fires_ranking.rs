//! Attribute ranking for all twelve forest-fires attributes with a
//! second-order model and the smallest bandwidths.
//!
//! ```text
//! ANOVA_FORESTFIRES_CSV=forestfires.csv cargo run --release --example forest_fires_ranking
//! ```
//!
//! Without the environment variable a synthetic stand-in is used.

use anova_normal::dataset::{
    self, load_csv, preprocess, synthetic_records, Attribute, AttributeSelection,
};
use anova_normal::experiment::{ranking_fit, PUBLISHED_RANKING};
use anova_normal::solver::SolverConfig;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let records = match dataset::default_dataset_path(None) {
        Some(path) => load_csv(path)?,
        None => {
            eprintln!("{} not set, using synthetic records", dataset::DATASET_ENV);
            synthetic_records(dataset::CANONICAL_ROWS, 0)
        }
    };
    let data = preprocess(&records, &AttributeSelection::all())?;
    for (label, lambda) in [("1", 1.0), ("e^8", 8f64.exp())] {
        let r = ranking_fit(&data, lambda, &SolverConfig::default())?;
        println!(
            "λ = {label}: cond(F) = {:.1}, {} LSQR iterations",
            r.condition_number, r.solver_iterations
        );
        let mut order: Vec<usize> = (0..12).collect();
        order.sort_by(|&a, &b| r.ranking[b].total_cmp(&r.ranking[a]));
        for i in order {
            let a = Attribute::ALL[i];
            let published = PUBLISHED_RANKING
                .iter()
                .find(|(p, _)| *p == a)
                .map_or(String::new(), |(_, v)| format!("  (published {v:.4})"));
            println!(
                "  {:>2} {:<6} {:.4}{published}",
                a.number(),
                a.name(),
                r.ranking[i]
            );
        }
    }
    Ok(())
}
