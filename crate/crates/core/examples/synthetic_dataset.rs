//! Writes a synthetic file in the forest-fires CSV layout.
//!
//! The records mimic the value ranges of the real data and make burned area
//! depend on month, DC and temperature. Handy for trying the CLI when the UCI
//! file is not at hand.
//!
//! ```text
//! cargo run --example synthetic_dataset -- synthetic.csv 517 42
//! ```

use anova_normal::dataset::{records_to_csv, synthetic_records, CANONICAL_ROWS};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let mut args = std::env::args().skip(1);
    let path = args
        .next()
        .unwrap_or_else(|| "synthetic_forestfires.csv".into());
    let rows = args
        .next()
        .map(|s| s.parse())
        .transpose()?
        .unwrap_or(CANONICAL_ROWS);
    let seed = args.next().map(|s| s.parse()).transpose()?.unwrap_or(0);
    let records = synthetic_records(rows, seed);
    std::fs::write(&path, records_to_csv(&records))?;
    println!("wrote {rows} records to {path}");
    Ok(())
}
