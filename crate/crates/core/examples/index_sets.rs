//! Term sets and frequency index sets for the forest-fires attribute
//! selections.
//!
//! ```text
//! cargo run --example index_sets
//! ```

use anova_normal::terms::{
    build_index_set, build_term_set, cardinality_bound, BandwidthSchedule, IndexShape,
};

fn main() -> anova_normal::Result<()> {
    let terms = build_term_set(12, 2)?;
    println!(
        "U(12, 2): {} nonempty terms (bound {:.2}), first ones: {}",
        terms.len() - 1,
        cardinality_bound(12, 2),
        terms.terms()[..6]
            .iter()
            .map(|u| u.to_string())
            .collect::<Vec<_>>()
            .join(" ")
    );

    println!(
        "\n{:<8} {:>3} {:>8} {:>10} {:>10}",
        "name", "d", "N", "diagonal", "full grid"
    );
    for (name, d, n2) in [("STFWI", 8, 6), ("STM", 8, 10), ("FWI", 4, 4), ("M", 4, 8)] {
        let terms = build_term_set(d, 2)?;
        let size = |shape| -> anova_normal::Result<usize> {
            Ok(build_index_set(&terms, &BandwidthSchedule::new(vec![2, n2], shape)?)?.len())
        };
        println!(
            "{name:<8} {d:>3} {:>8} {:>10} {:>10}",
            format!("(2,{n2})"),
            size(IndexShape::Diagonal)?,
            size(IndexShape::FullGrid)?
        );
    }

    let small = build_index_set(
        &build_term_set(3, 2)?,
        &BandwidthSchedule::new(vec![3, 3], IndexShape::FullGrid)?,
    )?;
    println!("\nLayout for d = 3, N = (3, 3), full grid:");
    println!("{}", serde_json::to_string_pretty(&small.report())?);
    Ok(())
}
