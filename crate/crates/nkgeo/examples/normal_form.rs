//! Build null-Kähler structures in normal form and run the structure checks.

use nkgeo::expr::parse;
use nkgeo::nullkahler::{build_normal_form, random_polynomial_theta, verify_structure};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let theta = random_polynomial_theta(1, 4, &mut rng);
    println!("Theta = {theta}");
    let s = build_normal_form(1, theta)?;
    let report = verify_structure(&s, &mut s.sample_space(0), 50, 1e-9)?;
    for c in &report.checks {
        println!("  {:<28} pass={} max={:.1e}", c.name, c.pass, c.max_residual);
    }

    // doubling the off-diagonal Walker entry breaks parallelism of N
    let broken = build_normal_form(1, parse("x1*y1^2*y2")?)?.sabotaged();
    let report = verify_structure(&broken, &mut broken.sample_space(0), 50, 1e-9)?;
    println!("sabotaged structure passes: {}", report.pass());
    Ok(())
}
