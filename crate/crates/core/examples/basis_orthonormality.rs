//! Orthonormality of the transformed cosine basis under the standard normal
//! density, checked by Monte Carlo and against cube quadrature.
//!
//! ```text
//! cargo run --release --example basis_orthonormality
//! ```

use anova_normal::basis::{cube_inner_product, mc_gram, FrequencyIndex};

fn main() -> anova_normal::Result<()> {
    let family: Vec<FrequencyIndex> = [[0, 0], [1, 0], [0, 2], [1, 1], [3, 2]]
        .into_iter()
        .map(|k| FrequencyIndex::new(k.to_vec()))
        .collect();
    let n = 400_000;
    let gram = mc_gram(&family, n, 7)?;

    println!("Monte Carlo Gram matrix over N(0, I₂), n = {n} (estimate / standard errors from δ):");
    for a in 0..family.len() {
        let row: Vec<String> = (0..family.len())
            .map(|b| {
                let e = gram.entry(a, b);
                let target = if a == b { 1.0 } else { 0.0 };
                let z = if e.std_error > 0.0 {
                    (e.estimate - target) / e.std_error
                } else {
                    0.0
                };
                format!("{:>7.4} ({:+.1})", e.estimate, z)
            })
            .collect();
        println!("  {:<7} {}", family[a].to_string(), row.join(" "));
    }

    println!("\nSame inner products on the cube with Gauss–Legendre quadrature:");
    for a in 0..family.len() {
        let row: Vec<String> = (0..family.len())
            .map(|b| {
                format!(
                    "{:>7.4}",
                    cube_inner_product(&family[a], &family[b], 12).unwrap()
                )
            })
            .collect();
        println!("  {:<7} {}", family[a].to_string(), row.join(" "));
    }
    Ok(())
}
