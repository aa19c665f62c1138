//! Coordinate-chart tensor calculus.
//!
//! Curvature convention, used everywhere in the crate:
//!
//! ```text
//! R^a_{bcd} V^b = [∇_c, ∇_d] V^a
//! R^a_{bcd} = ∂_c Γ^a_{db} − ∂_d Γ^a_{cb} + Γ^a_{ce} Γ^e_{db} − Γ^a_{de} Γ^e_{cb}
//! r_{bd}    = R^a_{bad},    S = g^{bd} r_{bd},    R_{abcd} = g_{ae} R^e_{bcd}
//! ```
//!
//! Numeric tensors are flat row-major arrays, first index slowest.

mod fd;
mod forms;
mod hodge;
mod numeric;
mod symbolic;

use crate::expr::{Derivation, Expr, Point, SampleSpace, Tape, ZeroTestError};

pub use fd::{fd_christoffel, fd_curvature, fd_riemann, FdCurvature};
pub use forms::DiffForm;
pub use hodge::{
    hodge_star_2form, levi_civita, weyl_split, WeylSplit, ORIENTATION_SIGN,
};
pub use numeric::{covariant_derivative_at, curvature_at, Curvature, FieldJet, MetricJet, NumTensor};
pub use symbolic::{
    bracket, christoffel, covariant_derivative, inverse_metric, invert_matrix, lie_derivative_covector,
    lie_derivative_cov2, ricci, riemann, scalar_curvature,
};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum GeometryError {
    #[error("chart coordinates must be distinct and non-empty")]
    BadChart,
    #[error("metric is not symmetric at ({0}, {1})")]
    NotSymmetric(usize, usize),
    #[error("expected a {expected}x{expected} array, got {got}")]
    Shape { expected: usize, got: usize },
    #[error("metric determinant vanishes identically")]
    SingularMetric,
    #[error("degenerate metric at {point}")]
    DegenerateAt { point: String },
    #[error("symbolic inverse limited to dimension <= 6 (got {0})")]
    TooLarge(usize),
    #[error("operation requires dimension 4 (got {0})")]
    NotFourDimensional(usize),
    #[error("tensor rank {0} unsupported here")]
    Rank(usize),
    #[error(transparent)]
    Eval(#[from] crate::expr::EvalError),
    #[error(transparent)]
    Sampling(#[from] ZeroTestError),
}

/// Ordered coordinate names with one derivation per coordinate.
///
/// By default the derivation of coordinate `x` is `∂/∂x`. A coordinate may
/// instead carry a total derivative: for a metric depending on `t` through
/// unknowns `y(t), z(t)`, the `t` derivation can send `y -> z` and
/// `z -> 6 y^2 + t`, which imposes the ODE while differentiating.
#[derive(Clone, Debug)]
pub struct Chart {
    coords: Vec<String>,
    derivations: Vec<Derivation>,
}

impl Chart {
    pub fn new<S: AsRef<str>>(coords: &[S]) -> Result<Chart, GeometryError> {
        let coords: Vec<String> = coords.iter().map(|s| s.as_ref().to_string()).collect();
        let mut sorted = coords.clone();
        sorted.sort();
        sorted.dedup();
        if coords.is_empty() || sorted.len() != coords.len() {
            return Err(GeometryError::BadChart);
        }
        let derivations = coords.iter().map(|c| Derivation::partial(c)).collect();
        Ok(Chart { coords, derivations })
    }

    /// Replace the derivation attached to `coord`. The coordinate must map to 1.
    pub fn with_derivation(mut self, coord: &str, d: Derivation) -> Chart {
        let i = self.index(coord).expect("unknown chart coordinate");
        self.derivations[i] = d.with(coord, Expr::one());
        self
    }

    pub fn dim(&self) -> usize {
        self.coords.len()
    }

    pub fn coords(&self) -> &[String] {
        &self.coords
    }

    pub fn index(&self, name: &str) -> Option<usize> {
        self.coords.iter().position(|c| c == name)
    }

    pub fn derivation(&self, i: usize) -> &Derivation {
        &self.derivations[i]
    }

    /// `∂_i e` using the chart's derivation for coordinate `i`.
    pub fn partial(&self, i: usize, e: &Expr) -> Expr {
        self.derivations[i].apply(e)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, serde::Serialize)]
pub enum Variance {
    Up,
    Down,
}

/// Symmetric covariant 2-tensor on a chart.
#[derive(Clone, Debug)]
pub struct MetricField {
    chart: Chart,
    g: Vec<Vec<Expr>>,
}

impl MetricField {
    pub fn new(chart: Chart, g: Vec<Vec<Expr>>) -> Result<MetricField, GeometryError> {
        let d = chart.dim();
        if g.len() != d || g.iter().any(|row| row.len() != d) {
            return Err(GeometryError::Shape { expected: d, got: g.len() });
        }
        for a in 0..d {
            for b in a + 1..d {
                if g[a][b] != g[b][a] && g[a][b].simplify() != g[b][a].simplify() {
                    return Err(GeometryError::NotSymmetric(a, b));
                }
            }
        }
        Ok(MetricField { chart, g })
    }

    pub fn chart(&self) -> &Chart {
        &self.chart
    }

    pub fn dim(&self) -> usize {
        self.chart.dim()
    }

    pub fn component(&self, a: usize, b: usize) -> &Expr {
        &self.g[a][b]
    }

    pub fn components(&self) -> &[Vec<Expr>] {
        &self.g
    }

    pub fn map(&self, f: impl Fn(&Expr) -> Expr) -> MetricField {
        MetricField {
            chart: self.chart.clone(),
            g: self.g.iter().map(|row| row.iter().map(&f).collect()).collect(),
        }
    }

    pub fn with_chart(&self, chart: Chart) -> MetricField {
        assert_eq!(chart.dim(), self.dim());
        MetricField { chart, g: self.g.clone() }
    }

    /// Numeric components at a point.
    pub fn eval(&self, p: &Point) -> Result<Vec<f64>, GeometryError> {
        let flat: Vec<Expr> = self.g.iter().flatten().cloned().collect();
        Ok(Tape::compile(&flat).eval(p)?.into_iter().map(|z| z.re).collect())
    }

    /// Signature (positive, negative) eigenvalue counts at a point.
    pub fn signature_at(&self, p: &Point) -> Result<(usize, usize), GeometryError> {
        let d = self.dim();
        let m = nalgebra::DMatrix::from_row_slice(d, d, &self.eval(p)?);
        let eig = m.symmetric_eigen();
        let scale = eig.eigenvalues.iter().fold(0.0f64, |a, v| a.max(v.abs())).max(1e-300);
        let pos = eig.eigenvalues.iter().filter(|v| **v > 1e-12 * scale).count();
        let neg = eig.eigenvalues.iter().filter(|v| **v < -1e-12 * scale).count();
        Ok((pos, neg))
    }

    /// Check nondegeneracy at sampled points.
    pub fn check_nondegenerate(
        &self,
        space: &mut SampleSpace,
        count: usize,
    ) -> Result<(), GeometryError> {
        let d = self.dim();
        let flat: Vec<Expr> = self.g.iter().flatten().cloned().collect();
        let tape = Tape::compile(&flat);
        space.declare(tape.var_names().iter().map(String::as_str));
        for _ in 0..count {
            let (p, v) = space.sample_where(|p| tape.eval(p))?;
            let m = nalgebra::DMatrix::from_iterator(d, d, v.iter().map(|z| z.re));
            let scale = m.iter().fold(0.0f64, |a, x| a.max(x.abs())).max(1e-300);
            if m.determinant().abs() < 1e-10 * scale.powi(d as i32) {
                return Err(GeometryError::DegenerateAt {
                    point: crate::expr::format_point(&p),
                });
            }
        }
        Ok(())
    }
}

/// Dense tensor field with variance tags; components row-major.
#[derive(Clone, Debug)]
pub struct TensorField {
    chart: Chart,
    variance: Vec<Variance>,
    comps: Vec<Expr>,
}

impl TensorField {
    pub fn new(
        chart: Chart,
        variance: Vec<Variance>,
        comps: Vec<Expr>,
    ) -> Result<TensorField, GeometryError> {
        let want = chart.dim().pow(variance.len() as u32);
        if comps.len() != want {
            return Err(GeometryError::Shape { expected: want, got: comps.len() });
        }
        Ok(TensorField { chart, variance, comps })
    }

    pub fn zeros(chart: Chart, variance: Vec<Variance>) -> TensorField {
        let n = chart.dim().pow(variance.len() as u32);
        TensorField { chart, variance, comps: vec![Expr::zero(); n] }
    }

    pub fn chart(&self) -> &Chart {
        &self.chart
    }

    pub fn rank(&self) -> usize {
        self.variance.len()
    }

    pub fn variance(&self) -> &[Variance] {
        &self.variance
    }

    pub fn comps(&self) -> &[Expr] {
        &self.comps
    }

    pub fn offset(&self, idx: &[usize]) -> usize {
        let d = self.chart.dim();
        idx.iter().fold(0, |acc, i| acc * d + i)
    }

    pub fn get(&self, idx: &[usize]) -> &Expr {
        &self.comps[self.offset(idx)]
    }

    pub fn set(&mut self, idx: &[usize], e: Expr) {
        let o = self.offset(idx);
        self.comps[o] = e;
    }

    pub fn map(&self, f: impl Fn(&Expr) -> Expr) -> TensorField {
        TensorField {
            chart: self.chart.clone(),
            variance: self.variance.clone(),
            comps: self.comps.iter().map(f).collect(),
        }
    }

    pub fn with_chart(&self, chart: Chart) -> TensorField {
        assert_eq!(chart.dim(), self.chart.dim());
        TensorField { chart, variance: self.variance.clone(), comps: self.comps.clone() }
    }
}

/// Vector field as components on a chart.
pub type VectorField = Vec<Expr>;

/// Null tetrad `E_{ij}` (i, j in {1, 2}) with an optional dual co-frame.
#[derive(Clone, Debug)]
pub struct FrameField {
    chart: Chart,
    /// `vectors[i][j]` is `E_{(i+1)(j+1)}`.
    pub vectors: [[VectorField; 2]; 2],
    /// `coframe[i][j]` is `e^{(i+1)(j+1)}`, as covector components.
    pub coframe: Option<[[VectorField; 2]; 2]>,
}

impl FrameField {
    pub fn new(
        chart: Chart,
        vectors: [[VectorField; 2]; 2],
        coframe: Option<[[VectorField; 2]; 2]>,
    ) -> Result<FrameField, GeometryError> {
        let d = chart.dim();
        for v in vectors.iter().flatten().chain(coframe.iter().flatten().flatten()) {
            if v.len() != d {
                return Err(GeometryError::Shape { expected: d, got: v.len() });
            }
        }
        Ok(FrameField { chart, vectors, coframe })
    }

    pub fn chart(&self) -> &Chart {
        &self.chart
    }

    /// Max |⟨e^{mn}, E_{ij}⟩ − δ^m_i δ^n_j| at a point (requires the co-frame).
    pub fn duality_defect(&self, p: &Point) -> Result<f64, GeometryError> {
        let Some(co) = &self.coframe else { return Ok(0.0) };
        let mut worst: f64 = 0.0;
        for (m, n) in [(0, 0), (0, 1), (1, 0), (1, 1)] {
            for (i, j) in [(0, 0), (0, 1), (1, 0), (1, 1)] {
                let pairing: Expr = co[m][n]
                    .iter()
                    .zip(&self.vectors[i][j])
                    .map(|(a, b)| a * b)
                    .sum();
                let want = if (m, n) == (i, j) { 1.0 } else { 0.0 };
                worst = worst.max((pairing.eval(p)?.re - want).abs());
            }
        }
        Ok(worst)
    }

    /// Metric `½(e¹¹⊙e²² − e¹²⊙e²¹)` from the co-frame.
    pub fn metric(&self) -> Result<MetricField, GeometryError> {
        let co = self.coframe.as_ref().ok_or(GeometryError::SingularMetric)?;
        metric_from_coframe(&self.chart, co)
    }
}

/// `g = ½(e¹¹⊙e²² − e¹²⊙e²¹)` with `α⊙β = α⊗β + β⊗α`.
pub fn metric_from_coframe(
    chart: &Chart,
    e: &[[VectorField; 2]; 2],
) -> Result<MetricField, GeometryError> {
    let d = chart.dim();
    let mut g = vec![vec![Expr::zero(); d]; d];
    let half = Expr::rational(1, 2);
    for a in 0..d {
        for b in 0..d {
            let s = &e[0][0][a] * &e[1][1][b] + &e[1][1][a] * &e[0][0][b]
                - &e[0][1][a] * &e[1][0][b]
                - &e[1][0][a] * &e[0][1][b];
            g[a][b] = (&half * s).simplify();
        }
    }
    MetricField::new(chart.clone(), g)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn chart_rejects_duplicates() {
        assert!(Chart::new(&["x", "x"]).is_err());
        assert!(Chart::new::<&str>(&[]).is_err());
        assert_eq!(Chart::new(&["x", "y"]).unwrap().dim(), 2);
    }

    #[test]
    fn flat_coframe_has_split_signature() {
        let chart = Chart::new(&["x1", "x2", "y1", "y2"]).unwrap();
        let unit = |k: usize| -> VectorField {
            (0..4).map(|i| if i == k { Expr::one() } else { Expr::zero() }).collect()
        };
        let co = [[unit(0), unit(2)], [unit(3), unit(1)]];
        let g = metric_from_coframe(&chart, &co).unwrap();
        assert_eq!(g.signature_at(&Point::new()).unwrap(), (2, 2));
    }
}
