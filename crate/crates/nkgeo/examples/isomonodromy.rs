//! Lax pair compatibility and path independence of the isomonodromic flow.

use nkgeo::expr::{Expr, SampleSpace};
use nkgeo::isomonodromy::{
    classify_gauge, compatibility_matches_flow, flatness_check, integrate_flow, pii_parametrization, NumericLax,
    Rectangle, M2,
};
use nkgeo::ode::OdeOptions;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let space = || SampleSpace::new(0).range("u", 0.5, 2.0).range("t", -1.0, 1.0);
    let rep = compatibility_matches_flow(&mut space(), 20)?;
    println!("zero curvature expands to the flow: {} (symbolic {})", rep.pass, rep.symbolic_zero);

    let param = pii_parametrization(&Expr::int(0));
    let rep = param.check_compatibility(&mut space(), 20, 1e-10)?;
    println!("PII parametrization compatible: {}", rep.pass);

    let lax = NumericLax::from_parametrization(&param)?;
    let defect = flatness_check(&lax, &Rectangle::new((0.0, 1.0), (0.0, 0.5)), &[1.0, 0.1, 0.2], &OdeOptions::default())?;
    println!("holonomy defect around the rectangle: {defect:.1e}");

    let p = M2::new(0.0, 1.0, 1.0, 0.0);
    let q = M2::new(0.2, 0.0, 0.5, -0.2);
    let r = M2::new(0.0, 0.3, -0.1, 0.0);
    let states = integrate_flow([p, q, r], 0.0, &[0.5, 1.0], &OdeOptions::default())?;
    for s in &states {
        println!("Q = {:?}, trace {:.1e}", s[1].as_slice(), s[1].trace());
    }
    println!("class: {}", classify_gauge(&p, &r, 1e-10)?.label());
    Ok(())
}
