//! Two-sided Mann–Whitney U test, exact for small samples and normal
//! approximation for larger ones.

use sewil::pipeline::{mann_whitney_u, SIGNIFICANCE_LEVEL};

fn main() -> sewil::Result<()> {
    let small = mann_whitney_u(&[0.91, 0.93, 0.95], &[0.81, 0.84, 0.86])?;
    println!("small: U = {}, p = {:.4} ({:?})", small.u_x, small.p_value, small.method);

    let a: Vec<f64> = (0..20).map(|i| 0.80 + 0.005 * i as f64).collect();
    let b: Vec<f64> = (0..20).map(|i| 0.85 + 0.005 * i as f64).collect();
    let large = mann_whitney_u(&a, &b)?;
    println!(
        "large: U = {}, p = {:.2e} ({:?}), significant at {}: {}",
        large.u_x,
        large.p_value,
        large.method,
        SIGNIFICANCE_LEVEL,
        large.significant(SIGNIFICANCE_LEVEL)
    );
    Ok(())
}
