//! The coordinate transformation between the unit cube and the real line.
//!
//! `psi(t) = √2·erf⁻¹(2t − 1)` maps cube coordinates to standard-normal
//! coordinates and the normal CDF maps them back. The inverse error function
//! is evaluated on the complement in the tails, so deep-tail points keep full
//! relative accuracy.
//!
//! ```text
//! cargo run --example transform_round_trip
//! ```

use anova_normal::transform::{erf, erf_inv, normal_cdf, psi_inv_scalar, psi_scalar};

fn main() -> anova_normal::Result<()> {
    println!(
        "{:>8} {:>24} {:>24} {:>10}",
        "x", "t = Φ(x)", "ψ(t)", "|ψ(t) − x|"
    );
    for x in [-8.0, -6.0, -3.0, -1.0, 0.0, 0.5, 2.0, 4.0, 6.0] {
        let t = psi_inv_scalar(x);
        let back = psi_scalar(t)?;
        println!(
            "{x:>8} {t:>24.17e} {back:>24.17} {:>10.1e}",
            (back - x).abs()
        );
    }

    println!("\nerf⁻¹ round trips:");
    for y in [1e-12, 0.3, 0.5, 0.9, 0.999_999, 1.0 - 1e-15] {
        let x = erf_inv(y)?;
        println!(
            "  y = {y:<22} erf⁻¹(y) = {x:<22.17} relative error {:.1e}",
            (erf(x) - y).abs() / y
        );
    }

    // Far tails are clamped to stay strictly inside the cube.
    println!(
        "\nΦ(−40) = {:e} is clamped to {:e}",
        normal_cdf(-40.0),
        psi_inv_scalar(-40.0)
    );
    Ok(())
}
