//! A Ricci-flat, non-flat metric from Θ = sinh(y1)/x1 and its discrete symmetries.

use nkgeo::expr::{format_point, parse, Point};
use nkgeo::geometry::MetricJet;
use nkgeo::nullkahler::build_normal_form;
use nkgeo::pde::{hk_hierarchy_residual, joyce_checks, ricci_max, ResidualOptions};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let theta = parse("sinh(y1)/x1")?;
    let opts = ResidualOptions::default().avoid(parse("x1")?, 0.1);

    let (h, _) = hk_hierarchy_residual(&theta, 1, &opts)?;
    println!("H = {:?}", h.iter().map(|row| row.iter().map(|e| e.simplify().to_string()).collect::<Vec<_>>()).collect::<Vec<_>>());
    println!("max |Ric| = {:.1e}", ricci_max(&theta, 1, &opts, false)?.max_residual);

    let s = build_normal_form(1, theta.clone())?;
    let p = Point::from_real(&[("x1", 0.7), ("x2", -0.4), ("y1", 1.1), ("y2", 0.3)]);
    println!("max |Riem| at {} = {:.3}", format_point(&p), MetricJet::new(s.metric()).eval(&p)?.riemann.max_abs());

    let j = joyce_checks(&theta, 1, &opts)?;
    for r in [&j.odd, &j.homothety, &j.lattice] {
        println!("{:<16} pass={}", r.name, r.pass);
    }
    Ok(())
}
