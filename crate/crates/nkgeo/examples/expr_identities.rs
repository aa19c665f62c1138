//! Parse, differentiate and zero-test expressions.

use nkgeo::expr::{parse, SampleSpace, Verdict};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let e = parse("sinh(y1)/x1 + x2*y2^3")?;
    let dy = e.diff("y1").simplify();
    println!("d/dy1 {e} = {dy}");

    // symbolic fast path first, random points otherwise
    for text in ["cosh(y1)^2 - sinh(y1)^2 - 1", "tanh(y1)*cosh(y1) - sinh(y1)"] {
        let id = parse(text)?;
        let mut space = SampleSpace::new(0);
        match id.is_zero(&mut space, 50, 1e-9)? {
            Verdict::SymbolicZero => println!("{id}: symbolic zero"),
            Verdict::NumericZero { points, max_abs } => println!("{id}: zero at {points} points (max {max_abs:.1e})"),
            Verdict::NonZero { witness, value } => println!("{id}: nonzero {value} at {witness:?}"),
        }
    }

    // a nonzero expression comes back with a witness point
    let bad = parse("x1*y1 - y1*x1 + x1/1000")?;
    let v = bad.is_zero(&mut SampleSpace::new(1).avoid(parse("x1")?, 0.5), 50, 1e-9)?;
    if let Verdict::NonZero { witness, value } = v {
        println!("{bad}: {value} at {}", nkgeo::expr::format_point(&witness));
    }
    Ok(())
}
