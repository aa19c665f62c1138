//! Left and right invariant frames on SL(2, R).

use nkgeo::sl2::build_sl2_frame;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let frame = build_sl2_frame();
    println!("G(p, q, r) = {:?}", frame.group_element().simplify());
    let report = frame.check(0, 50, 1e-10)?;
    for r in report.rows() {
        println!("{:<20} pass={} symbolic={} max={:.1e}", r.name, r.pass, r.symbolic_zero, r.max_residual);
    }
    Ok(())
}
