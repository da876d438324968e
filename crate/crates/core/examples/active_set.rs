//! Prune an ANOVA model to the terms that matter and refit.
//!
//! A full second-order model is fitted first; terms whose sensitivity index
//! falls below a threshold are dropped and the smaller model is refitted on
//! the reduced term set.
//!
//! ```text
//! cargo run --release --example active_set
//! ```

use std::sync::Arc;

use anova_normal::model::Approximant;
use anova_normal::operator::NodeSet;
use anova_normal::solver::SolverConfig;
use anova_normal::terms::{build_index_set, build_term_set, BandwidthSchedule, IndexShape};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

fn main() -> anova_normal::Result<()> {
    let (d, m) = (6, 3000);
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let flat: Vec<f64> = (0..m * d).map(|_| rng.sample(StandardNormal)).collect();
    let y: Vec<f64> = flat
        .chunks(d)
        .map(|x| {
            x[0] + (x[1] * x[3]).tanh()
                + 0.5 * x[5].abs()
                + 0.05 * rng.sample::<f64, _>(StandardNormal)
        })
        .collect();
    let nodes = NodeSet::new(d, flat)?;
    let schedule = BandwidthSchedule::new(vec![6, 4], IndexShape::FullGrid)?;
    let cfg = SolverConfig::default();

    let full = build_index_set(&build_term_set(d, 2)?, &schedule)?;
    println!(
        "full model: {} terms, |I| = {}",
        full.term_set().len(),
        full.len()
    );
    let fit = Approximant::fit(nodes.clone(), &y, Arc::new(full), 1.0, &cfg)?;

    let active = fit.approximant.active_set_threshold(&[0.01, 0.01])?;
    let kept: Vec<String> = active
        .terms()
        .iter()
        .skip(1)
        .map(|u| u.to_string())
        .collect();
    println!("terms with GSI > 1%: {}", kept.join(" "));

    let reduced = build_index_set(&active, &schedule)?;
    println!("reduced model: |I| = {}", reduced.len());
    let refit = Approximant::fit(nodes.clone(), &y, Arc::new(reduced), 1.0, &cfg)?;

    let rms = |f: &Approximant| -> anova_normal::Result<f64> {
        let pred = f.evaluate_many(nodes.points())?;
        Ok((pred
            .iter()
            .zip(&y)
            .map(|(p, t)| (p - t).powi(2))
            .sum::<f64>()
            / y.len() as f64)
            .sqrt())
    };
    println!(
        "training RMS error: full {:.4}, reduced {:.4}",
        rms(&fit.approximant)?,
        rms(&refit.approximant)?
    );
    Ok(())
}
