//! Einstein, heavenly and self-duality residuals of a potential.

use nkgeo::expr::{parse, Expr};
use nkgeo::pde::{
    asd_residual, einstein_residual, footnote_residual, heavenly_residual, ricci_potential_f, sd_residual,
    weyl_parts_max, ResidualOptions,
};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let rho = parse("y1*x2 - y2*x1")?;
    let theta = parse("3/(y1*x2 - y2*x1)")?;
    let opts = ResidualOptions::default().avoid(rho, 0.5);

    println!("f = {}", ricci_potential_f(&theta, 1).simplify());
    for rep in [
        // Einstein with G = 0, F = 0, i.e. Ricci-flat
        einstein_residual(&theta, 1, &Expr::zero(), &[Expr::zero(), Expr::zero()], &opts)?,
        asd_residual(&theta, &opts)?,
        footnote_residual(&theta, 1, &opts)?,
    ] {
        println!("{:<10} pass={} symbolic={} max={:.1e}", rep.name, rep.pass, rep.symbolic_zero, rep.max_residual);
    }
    let (plus, minus) = weyl_parts_max(&theta, &opts.clone().points(10))?;
    println!("|C+| = {plus:.1e}, |C-| = {minus:.2e}");

    // cubic in y: self-dual but not heavenly
    let cubic = parse("x1*y1^3 - x2*y2^3")?;
    let o = ResidualOptions::default();
    println!("sd: {}", sd_residual(&cubic, &o)?.pass);
    println!("heavenly: {}", heavenly_residual(&cubic, &o)?.pass);
    Ok(())
}
