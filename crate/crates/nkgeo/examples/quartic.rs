//! The quartic of a tetrad along the α-plane family, by two routes.

use nkgeo::expr::{Expr, Point};
use nkgeo::geometry::FrameField;
use nkgeo::painleve::build_pii_metric;
use nkgeo::sl2::{build_sl2_frame, quartic_direct, quartic_from_frame};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let fam = build_pii_metric(0.0)?;
    let frame = FrameField::new(fam.chart.clone(), fam.tetrad.clone(), None)?;
    let at = Point::from_real(&[("t", 0.4), ("p", 0.3), ("q", -0.2), ("r", 0.5), ("u", 1.1), ("y", -0.2), ("z", -0.5)]);

    let q = quartic_from_frame(&frame, &Expr::int(-1), &Expr::zero(), "lam", &at)?;
    println!("coefficients {:?}, degree {:?}", q.coeffs, q.degree(1e-12));

    let group = build_sl2_frame();
    for lam in [-1.0, 0.0, 2.0] {
        let d = quartic_direct(&frame, &group, &Expr::int(-1), &Expr::zero(), "lam", &at.clone().with("lam", lam))?;
        println!("five-form route at lambda = {lam}: {d:.6}");
    }
    Ok(())
}
