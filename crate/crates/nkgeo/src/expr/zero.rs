use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{normalize_zero, EvalError, Expr, Point, Tape, C64};

/// Budget for the rational normal form tried before numeric sampling.
pub const SYMBOLIC_TERM_BUDGET: usize = 4_000;
/// Trees larger than this skip the symbolic attempt entirely.
pub const SYMBOLIC_SIZE_LIMIT: usize = 20_000;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ZeroTestError {
    #[error("no regular sample point found after {tries} tries (last: {last})")]
    Exhausted { tries: usize, last: String },
    #[error(transparent)]
    Eval(#[from] EvalError),
}

/// Seeded sampler over a box, with excluded neighbourhoods of singular loci.
///
/// Points are drawn with ChaCha8 seeded from a `u64`, coordinates in sorted
/// name order, so a seed fixes the whole sequence on every platform.
#[derive(Clone, Debug)]
pub struct SampleSpace {
    ranges: BTreeMap<String, (f64, f64)>,
    default_range: (f64, f64),
    fixed: Point,
    avoid: Vec<(Expr, f64)>,
    max_tries: usize,
    rng: ChaCha8Rng,
}

impl SampleSpace {
    pub fn new(seed: u64) -> SampleSpace {
        SampleSpace {
            ranges: BTreeMap::new(),
            default_range: (-2.0, 2.0),
            fixed: Point::new(),
            avoid: Vec::new(),
            max_tries: 10_000,
            rng: ChaCha8Rng::seed_from_u64(seed),
        }
    }

    /// Declare sampled coordinates with the default range.
    pub fn vars<'a>(mut self, names: impl IntoIterator<Item = &'a str>) -> SampleSpace {
        self.declare(names);
        self
    }

    /// Declare any coordinates not yet known (neither sampled nor fixed).
    pub fn declare<'a>(&mut self, names: impl IntoIterator<Item = &'a str>) {
        for n in names {
            if self.fixed.get(n).is_none() {
                self.ranges.entry(n.to_string()).or_insert(self.default_range);
            }
        }
    }

    pub fn range(mut self, var: &str, lo: f64, hi: f64) -> SampleSpace {
        self.ranges.insert(var.to_string(), (lo, hi));
        self
    }

    /// Bind a variable to a constant instead of sampling it.
    pub fn fixed(mut self, var: &str, value: f64) -> SampleSpace {
        self.ranges.remove(var);
        self.fixed.set_real(var, value);
        self
    }

    /// Reject points where `|locus| < margin`.
    pub fn avoid(mut self, locus: Expr, margin: f64) -> SampleSpace {
        self.avoid.push((locus, margin));
        self
    }

    pub fn max_tries(mut self, n: usize) -> SampleSpace {
        self.max_tries = n.max(1);
        self
    }

    pub fn sampled_vars(&self) -> impl Iterator<Item = &str> {
        self.ranges.keys().map(String::as_str)
    }

    fn draw(&mut self) -> Point {
        let mut p = self.fixed.clone();
        for (name, (lo, hi)) in &self.ranges {
            let v = if hi > lo { self.rng.gen_range(*lo..*hi) } else { *lo };
            p.set_real(name, v);
        }
        p
    }

    fn acceptable(&self, p: &Point) -> bool {
        self.avoid.iter().all(|(locus, margin)| match locus.eval(p) {
            Ok(v) => v.norm() >= *margin,
            Err(_) => false,
        })
    }

    /// Draw a point outside every declared singular neighbourhood.
    pub fn sample(&mut self) -> Result<Point, ZeroTestError> {
        let mut last = Point::new();
        for _ in 0..self.max_tries {
            let p = self.draw();
            if self.acceptable(&p) {
                return Ok(p);
            }
            last = p;
        }
        Err(ZeroTestError::Exhausted { tries: self.max_tries, last: format_point(&last) })
    }

    /// Draw a point at which `check` also succeeds (used to skip points where
    /// the tested expressions themselves are singular).
    pub fn sample_where<T>(
        &mut self,
        mut check: impl FnMut(&Point) -> Result<T, EvalError>,
    ) -> Result<(Point, T), ZeroTestError> {
        let mut last = String::new();
        for _ in 0..self.max_tries {
            let p = self.draw();
            if !self.acceptable(&p) {
                continue;
            }
            match check(&p) {
                Ok(v) => return Ok((p, v)),
                Err(EvalError::Singular { .. }) => last = format_point(&p),
                Err(e) => return Err(e.into()),
            }
        }
        Err(ZeroTestError::Exhausted { tries: self.max_tries, last })
    }
}

pub fn format_point(p: &Point) -> String {
    let parts: Vec<String> = p
        .iter()
        .map(|(k, v)| if v.im == 0.0 { format!("{k}={}", v.re) } else { format!("{k}={v}") })
        .collect();
    format!("{{{}}}", parts.join(", "))
}

#[derive(Debug, Clone, PartialEq)]
pub enum Verdict {
    SymbolicZero,
    NumericZero { points: usize, max_abs: f64 },
    NonZero { witness: Point, value: C64 },
}

impl Verdict {
    pub fn is_zero(&self) -> bool {
        !matches!(self, Verdict::NonZero { .. })
    }
}

/// Best-effort symbolic zero test: simplification, then the rational normal form.
pub fn symbolic_zero(e: &Expr) -> bool {
    if e.size() > SYMBOLIC_SIZE_LIMIT {
        return false;
    }
    let s = e.simplify();
    if s.is_zero_literal() {
        return true;
    }
    normalize_zero(&s, SYMBOLIC_TERM_BUDGET) == Some(true)
}

impl Expr {
    /// Identity test: symbolic fast path, then `count` random points.
    pub fn is_zero(
        &self,
        space: &mut SampleSpace,
        count: usize,
        tol: f64,
    ) -> Result<Verdict, ZeroTestError> {
        if symbolic_zero(self) {
            return Ok(Verdict::SymbolicZero);
        }
        let tape = Tape::compile(std::slice::from_ref(self));
        space.declare(tape.var_names().iter().map(String::as_str));
        let mut max_abs: f64 = 0.0;
        for _ in 0..count.max(1) {
            let (p, v) = space.sample_where(|p| tape.eval(p).map(|v| v[0]))?;
            if v.norm() >= tol {
                return Ok(Verdict::NonZero { witness: p, value: v });
            }
            max_abs = max_abs.max(v.norm());
        }
        Ok(Verdict::NumericZero { points: count.max(1), max_abs })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::parse;

    #[test]
    fn symbolic_cases() {
        let mut s = SampleSpace::new(1);
        assert_eq!(Expr::zero().is_zero(&mut s, 5, 1e-9).unwrap(), Verdict::SymbolicZero);
        let e = parse("x1*y1 - y1*x1").unwrap();
        assert_eq!(e.is_zero(&mut s, 5, 1e-9).unwrap(), Verdict::SymbolicZero);
    }

    #[test]
    fn nonzero_gets_witness() {
        let mut s = SampleSpace::new(2);
        let v = parse("x - 2*y").unwrap().is_zero(&mut s, 20, 1e-9).unwrap();
        match v {
            Verdict::NonZero { witness, value } => {
                let x = witness.real("x").unwrap();
                let y = witness.real("y").unwrap();
                assert!((value.re - (x - 2.0 * y)).abs() < 1e-12);
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn avoided_loci_are_respected() {
        let mut s = SampleSpace::new(3).vars(["x1"]).avoid(Expr::var("x1"), 0.5);
        for _ in 0..200 {
            assert!(s.sample().unwrap().real("x1").unwrap().abs() >= 0.5);
        }
    }

    #[test]
    fn exhaustion_is_an_error() {
        let mut s = SampleSpace::new(4).vars(["x"]).avoid(Expr::one(), 2.0).max_tries(10);
        assert!(matches!(s.sample(), Err(ZeroTestError::Exhausted { .. })));
    }

    #[test]
    fn numeric_identity_beyond_normal_form() {
        // ln(x^2) - 2 ln(x) vanishes for x > 0 but is out of reach of the normal form
        let mut s = SampleSpace::new(5).range("x", 0.5, 2.0);
        let e = parse("ln(x^2) - 2*ln(x)").unwrap();
        assert!(matches!(e.is_zero(&mut s, 30, 1e-12).unwrap(), Verdict::NumericZero { .. }));
    }

    #[test]
    fn same_seed_same_points() {
        let mut a = SampleSpace::new(9).vars(["x", "y"]);
        let mut b = SampleSpace::new(9).vars(["x", "y"]);
        for _ in 0..10 {
            assert_eq!(a.sample().unwrap(), b.sample().unwrap());
        }
    }
}
