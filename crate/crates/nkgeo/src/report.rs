//! Pass/fail records shared by every verification routine.

use std::collections::BTreeMap;

use serde::Serialize;

use crate::expr::{symbolic_zero, EvalError, Expr, Point, SampleSpace, Tape, ZeroTestError};
use crate::geometry::GeometryError;

/// Outcome of one identity or PDE check.
///
/// `pass` holds exactly when the residual vanished symbolically or its
/// largest sampled magnitude stayed below `tolerance`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ResidualReport {
    #[serde(rename = "system")]
    pub name: String,
    pub pass: bool,
    pub symbolic_zero: bool,
    pub max_residual: f64,
    pub tolerance: f64,
    pub points: usize,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub residuals: Vec<f64>,
    pub witness: Option<BTreeMap<String, f64>>,
}

impl ResidualReport {
    pub fn symbolic(name: &str, tolerance: f64) -> ResidualReport {
        ResidualReport {
            name: name.to_string(),
            pass: true,
            symbolic_zero: true,
            max_residual: 0.0,
            tolerance,
            points: 0,
            residuals: Vec::new(),
            witness: None,
        }
    }

    /// A check that compares against a threshold from above (e.g. "some
    /// component is nonzero"): passes when the sampled maximum exceeds `floor`.
    pub fn at_least(name: &str, value: f64, floor: f64) -> ResidualReport {
        ResidualReport {
            name: name.to_string(),
            pass: value > floor,
            symbolic_zero: false,
            max_residual: value,
            tolerance: floor,
            points: 1,
            residuals: Vec::new(),
            witness: None,
        }
    }

    pub fn from_samples(
        name: &str,
        samples: Vec<(Point, f64)>,
        tolerance: f64,
    ) -> ResidualReport {
        let mut max = 0.0f64;
        let mut worst: Option<&Point> = None;
        for (p, r) in &samples {
            if !(r.abs() <= max) {
                max = if r.is_nan() { f64::INFINITY } else { r.abs() };
                worst = Some(p);
            }
        }
        let pass = max < tolerance;
        ResidualReport {
            name: name.to_string(),
            pass,
            symbolic_zero: false,
            max_residual: max,
            tolerance,
            points: samples.len(),
            residuals: samples.iter().map(|(_, r)| *r).collect(),
            witness: if pass { None } else { worst.map(point_map) },
        }
    }

    pub fn renamed(mut self, name: &str) -> ResidualReport {
        self.name = name.to_string();
        self
    }

    /// Drop per-point values (keeps JSON output compact).
    pub fn compact(mut self) -> ResidualReport {
        self.residuals.clear();
        self
    }
}

pub fn point_map(p: &Point) -> BTreeMap<String, f64> {
    p.iter().map(|(k, v)| (k.to_string(), v.re)).collect()
}

fn retryable(e: &GeometryError) -> bool {
    matches!(
        e,
        GeometryError::Eval(EvalError::Singular { .. }) | GeometryError::DegenerateAt { .. }
    )
}

/// Evaluate `f` at `points` sampled points, skipping points where it is singular.
pub fn sample_points<T>(
    space: &mut SampleSpace,
    points: usize,
    mut f: impl FnMut(&Point) -> Result<T, GeometryError>,
) -> Result<Vec<(Point, T)>, GeometryError> {
    let mut out = Vec::with_capacity(points);
    let mut misses = 0;
    while out.len() < points {
        let p = space.sample()?;
        match f(&p) {
            Ok(v) => out.push((p, v)),
            Err(e) if retryable(&e) => {
                misses += 1;
                if misses > 200 {
                    return Err(ZeroTestError::Exhausted {
                        tries: misses,
                        last: crate::expr::format_point(&p),
                    }
                    .into());
                }
            }
            Err(e) => return Err(e),
        }
    }
    Ok(out)
}

/// Sampled scalar residual check.
pub fn sampled_check(
    name: &str,
    space: &mut SampleSpace,
    points: usize,
    tolerance: f64,
    f: impl FnMut(&Point) -> Result<f64, GeometryError>,
) -> Result<ResidualReport, GeometryError> {
    let samples = sample_points(space, points, f)?;
    Ok(ResidualReport::from_samples(name, samples, tolerance))
}

/// Check that every expression vanishes: symbolically when possible,
/// otherwise by the maximum magnitude over sampled points.
pub fn expr_check(
    name: &str,
    exprs: &[Expr],
    space: &mut SampleSpace,
    points: usize,
    tolerance: f64,
) -> Result<ResidualReport, GeometryError> {
    if exprs.iter().all(symbolic_zero) {
        return Ok(ResidualReport::symbolic(name, tolerance));
    }
    let tape = Tape::compile(exprs);
    space.declare(tape.var_names().iter().map(String::as_str));
    sampled_check(name, space, points, tolerance, |p| {
        Ok(tape.eval(p)?.iter().fold(0.0, |a, z| a.max(z.norm())))
    })
}
