//! Left-invariant frames on SL(2) and SL(2)-invariant metrics on ℝ × SL(2).
//!
//! The group is parametrized as `G(p, q, r) = exp(pL₃) exp(qL₁) exp(rL₂)`.
//! In these coordinates
//!
//! ```text
//! σ¹ = dq − 2r e^q dp      L₁ = ∂q − r ∂r          R₁ = −p ∂p + ∂q
//! σ² = r dq + dr − r² e^q dp   L₂ = ∂r             R₂ = −p² ∂p + 2p ∂q + e^{−q} ∂r
//! σ³ = e^q dp              L₃ = e^{−q} ∂p + 2r ∂q − r² ∂r   R₃ = ∂p
//! ```
//!
//! and `σ¹∧σ²∧σ³` evaluates to `+1` on both `(L₁, L₂, L₃)` and `(R₁, R₂, R₃)`.

mod matrix;
mod quartic;

pub use matrix::{basis, coeffs, commutator, from_coeffs, ExprMat2, Mat2};
pub use quartic::{quartic_direct, quartic_expr, quartic_from_frame, Quartic};

use serde::Serialize;

use crate::expr::{parse, symbolic_zero, Expr, Point, SampleSpace, Tape};
use crate::geometry::{
    bracket, invert_matrix, lie_derivative_cov2, lie_derivative_covector, metric_from_coframe,
    Chart, DiffForm, FrameField, GeometryError, MetricField, VectorField,
};
use crate::report::{expr_check, sampled_check, ResidualReport};

pub const GROUP_COORDS: [&str; 3] = ["p", "q", "r"];

#[derive(Debug, thiserror::Error)]
pub enum Sl2Error {
    #[error("chart lacks coordinate {0}")]
    MissingCoordinate(String),
    #[error("gamma is not symmetric at ({0}, {1})")]
    NotSymmetric(usize, usize),
    #[error("co-frame is linearly dependent")]
    DependentFrame,
    #[error("quartic is not polynomial of degree <= {0} in the fibre coordinate")]
    NotPolynomial(usize),
    #[error(transparent)]
    Geometry(#[from] GeometryError),
}

fn e(s: &str) -> Expr {
    parse(s).expect("built-in expression")
}

/// `σ^α`, `L_α` and `R_α` on the group chart `(p, q, r)`.
#[derive(Clone, Debug)]
pub struct LeftInvariantFrame {
    chart: Chart,
    pub sigma: [Vec<Expr>; 3],
    pub left: [VectorField; 3],
    pub right: [VectorField; 3],
}

pub fn build_sl2_frame() -> LeftInvariantFrame {
    let row = |v: [&str; 3]| v.iter().map(|s| e(s)).collect::<Vec<_>>();
    LeftInvariantFrame {
        chart: Chart::new(&GROUP_COORDS).expect("distinct coordinates"),
        sigma: [
            row(["-2*r*exp(q)", "1", "0"]),
            row(["-r^2*exp(q)", "r", "1"]),
            row(["exp(q)", "0", "0"]),
        ],
        left: [
            row(["0", "1", "-r"]),
            row(["0", "0", "1"]),
            row(["exp(-q)", "2*r", "-r^2"]),
        ],
        right: [
            row(["-p", "1", "0"]),
            row(["-p^2", "2*p", "exp(-q)"]),
            row(["1", "0", "0"]),
        ],
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct FrameReport {
    pub group_element: ResidualReport,
    pub maurer_cartan: ResidualReport,
    pub duality: ResidualReport,
    pub left_brackets: ResidualReport,
    pub commuting: ResidualReport,
    pub right_invariance: ResidualReport,
    pub volume: ResidualReport,
}

impl FrameReport {
    pub fn rows(&self) -> Vec<&ResidualReport> {
        vec![
            &self.group_element,
            &self.maurer_cartan,
            &self.duality,
            &self.left_brackets,
            &self.commuting,
            &self.right_invariance,
            &self.volume,
        ]
    }

    pub fn pass(&self) -> bool {
        self.rows().iter().all(|r| r.pass)
    }
}

impl LeftInvariantFrame {
    pub fn chart(&self) -> &Chart {
        &self.chart
    }

    /// `G(p, q, r) = exp(pL₃) exp(qL₁) exp(rL₂)`.
    pub fn group_element(&self) -> ExprMat2 {
        let lower = ExprMat2::new(Expr::one(), Expr::zero(), Expr::var("p"), Expr::one());
        let diag = ExprMat2::new(e("exp(q/2)"), Expr::zero(), Expr::zero(), e("exp(-q/2)"));
        let upper = ExprMat2::new(Expr::one(), Expr::var("r"), Expr::zero(), Expr::one());
        lower.mul(&diag).mul(&upper)
    }

    fn place(&self, chart: &Chart, comps: &[Expr]) -> Result<Vec<Expr>, Sl2Error> {
        let mut out = vec![Expr::zero(); chart.dim()];
        for (name, c) in GROUP_COORDS.iter().zip(comps) {
            let i = chart.index(name).ok_or_else(|| Sl2Error::MissingCoordinate(name.to_string()))?;
            out[i] = c.clone();
        }
        Ok(out)
    }

    /// `σ^α` as covector components on a larger chart containing `p, q, r`.
    pub fn sigma_on(&self, chart: &Chart) -> Result<[Vec<Expr>; 3], Sl2Error> {
        Ok([
            self.place(chart, &self.sigma[0])?,
            self.place(chart, &self.sigma[1])?,
            self.place(chart, &self.sigma[2])?,
        ])
    }

    pub fn left_on(&self, chart: &Chart) -> Result<[VectorField; 3], Sl2Error> {
        Ok([
            self.place(chart, &self.left[0])?,
            self.place(chart, &self.left[1])?,
            self.place(chart, &self.left[2])?,
        ])
    }

    pub fn right_on(&self, chart: &Chart) -> Result<[VectorField; 3], Sl2Error> {
        Ok([
            self.place(chart, &self.right[0])?,
            self.place(chart, &self.right[1])?,
            self.place(chart, &self.right[2])?,
        ])
    }

    fn form(&self, a: usize) -> DiffForm {
        DiffForm::one_form(self.chart.clone(), &self.sigma[a])
    }

    /// `dσ¹ − 2σ³∧σ²`, `dσ² − σ²∧σ¹`, `dσ³ − σ¹∧σ³`.
    pub fn maurer_cartan_residuals(&self) -> [DiffForm; 3] {
        let s = [self.form(0), self.form(1), self.form(2)];
        let minus = |w: DiffForm| w.scale(&Expr::int(-1));
        [
            s[0].d().plus(&minus(s[2].wedge(&s[1]).scale(&Expr::int(2)))).simplify(),
            s[1].d().plus(&minus(s[1].wedge(&s[0]))).simplify(),
            s[2].d().plus(&minus(s[0].wedge(&s[2]))).simplify(),
        ]
    }

    /// `G⁻¹ ∂_v G − Σ_α σ^α_v L_α` for each coordinate `v`.
    pub fn group_element_residuals(&self) -> Vec<Expr> {
        let g = self.group_element();
        let ginv = g.inverse();
        let mut out = Vec::new();
        for (v, name) in GROUP_COORDS.iter().enumerate() {
            let mc = ginv.mul(&g.diff(name));
            let k = mc.coeffs();
            for a in 0..3 {
                out.push((&k[a] - &self.sigma[a][v]).simplify());
            }
            out.push(mc.trace().simplify());
        }
        out
    }

    pub fn sample_space(&self, seed: u64) -> SampleSpace {
        SampleSpace::new(seed)
            .vars(GROUP_COORDS)
            .range("p", -1.5, 1.5)
            .range("q", -1.5, 1.5)
            .range("r", -1.5, 1.5)
    }

    /// Every frame identity, at `points` sampled points with tolerance `tol`.
    pub fn check(&self, seed: u64, points: usize, tol: f64) -> Result<FrameReport, Sl2Error> {
        let mut space = self.sample_space(seed);
        let chart = &self.chart;

        let group_element = expr_check(
            "group_element",
            &self.group_element_residuals(),
            &mut space,
            points,
            tol,
        )?;

        let mc: Vec<Expr> = self
            .maurer_cartan_residuals()
            .iter()
            .flat_map(|w| w.terms().map(|(_, c)| c.clone()).collect::<Vec<_>>())
            .collect();
        let maurer_cartan = expr_check("maurer_cartan", &mc, &mut space, points, tol)?;

        let mut pairings = Vec::new();
        for a in 0..3 {
            for b in 0..3 {
                let dot: Expr = self.left[a].iter().zip(&self.sigma[b]).map(|(x, y)| x * y).sum();
                let want = if a == b { Expr::one() } else { Expr::zero() };
                pairings.push((dot - want).simplify());
            }
        }
        let duality = expr_check("duality", &pairings, &mut space, points, tol)?;

        let sub = |x: &VectorField, y: &VectorField, k: i64| -> Vec<Expr> {
            x.iter().zip(y).map(|(a, b)| (a - Expr::int(k) * b).simplify()).collect()
        };
        let l = &self.left;
        let mut brackets = sub(&bracket(chart, &l[0], &l[1]), &l[1], 1);
        brackets.extend(sub(&bracket(chart, &l[0], &l[2]), &l[2], -1));
        brackets.extend(sub(&bracket(chart, &l[1], &l[2]), &l[0], 2));
        let left_brackets = expr_check("left_brackets", &brackets, &mut space, points, tol)?;

        let mut comm = Vec::new();
        for a in 0..3 {
            for b in 0..3 {
                comm.extend(bracket(chart, &self.left[a], &self.right[b]));
            }
        }
        let commuting = numeric_check("commuting", &comm, &mut space, points, tol)?;

        let mut inv = Vec::new();
        for a in 0..3 {
            for b in 0..3 {
                inv.extend(lie_derivative_covector(chart, &self.right[a], &self.sigma[b]));
            }
        }
        let right_invariance = expr_check("right_invariance", &inv, &mut space, points, tol)?;

        let vol_l = volume(&self.sigma, &self.left);
        let vol_r = volume(&self.sigma, &self.right);
        let volume = expr_check(
            "volume",
            &[(&vol_l - Expr::one()).simplify(), (&vol_r - Expr::one()).simplify()],
            &mut space,
            points,
            tol,
        )?;

        Ok(FrameReport {
            group_element,
            maurer_cartan,
            duality,
            left_brackets,
            commuting,
            right_invariance,
            volume,
        })
    }
}

/// `(σ¹∧σ²∧σ³)(V₁, V₂, V₃) = det[σ^α(V_β)]`.
fn volume(sigma: &[Vec<Expr>; 3], v: &[VectorField; 3]) -> Expr {
    let m: Vec<Vec<Expr>> = (0..3)
        .map(|a| (0..3).map(|b| sigma[a].iter().zip(&v[b]).map(|(x, y)| x * y).sum()).collect())
        .collect();
    let at = |i: usize, j: usize| &m[i][j];
    let det = at(0, 0) * (at(1, 1) * at(2, 2) - at(1, 2) * at(2, 1))
        - at(0, 1) * (at(1, 0) * at(2, 2) - at(1, 2) * at(2, 0))
        + at(0, 2) * (at(1, 0) * at(2, 1) - at(1, 1) * at(2, 0));
    det.simplify()
}

/// Sampled-only check (no symbolic attempt), for residual lists that are
/// known to be large expressions.
fn numeric_check(
    name: &str,
    exprs: &[Expr],
    space: &mut SampleSpace,
    points: usize,
    tol: f64,
) -> Result<ResidualReport, GeometryError> {
    let tape = Tape::compile(exprs);
    space.declare(tape.var_names().iter().map(String::as_str));
    sampled_check(name, space, points, tol, |p| {
        Ok(tape.eval(p)?.iter().fold(0.0, |a, z| a.max(z.norm())))
    })
}

/// Chart `(t, p, q, r)` for cohomogeneity-one metrics.
pub fn orbit_chart() -> Chart {
    Chart::new(&["t", "p", "q", "r"]).expect("distinct coordinates")
}

/// `g = Σ γ_{αβ} σ^α⊗σ^β + Σ n_α (σ^α⊗dt + dt⊗σ^α)` on a chart containing
/// `t, p, q, r`.
#[derive(Clone, Debug)]
pub struct CohomogeneityOneMetric {
    pub gamma: [[Expr; 3]; 3],
    pub n: [Expr; 3],
    metric: MetricField,
    right: [VectorField; 3],
    sigma: [Vec<Expr>; 3],
}

pub fn cohomogeneity_metric(
    gamma: [[Expr; 3]; 3],
    n: [Expr; 3],
    frame: &LeftInvariantFrame,
    chart: &Chart,
) -> Result<CohomogeneityOneMetric, Sl2Error> {
    for a in 0..3 {
        for b in a + 1..3 {
            if !symbolic_zero(&(&gamma[a][b] - &gamma[b][a])) {
                return Err(Sl2Error::NotSymmetric(a, b));
            }
        }
    }
    let ti = chart.index("t").ok_or_else(|| Sl2Error::MissingCoordinate("t".into()))?;
    let sigma = frame.sigma_on(chart)?;
    let d = chart.dim();
    let mut g = vec![vec![Expr::zero(); d]; d];
    for i in 0..d {
        for j in i..d {
            let mut terms = Vec::new();
            for a in 0..3 {
                for b in 0..3 {
                    if !sigma[a][i].is_zero_literal() && !sigma[b][j].is_zero_literal() {
                        terms.push(&gamma[a][b] * &sigma[a][i] * &sigma[b][j]);
                    }
                }
                if j == ti {
                    terms.push(&n[a] * &sigma[a][i]);
                }
                if i == ti {
                    terms.push(&n[a] * &sigma[a][j]);
                }
            }
            let v = Expr::sum(terms).simplify();
            g[i][j] = v.clone();
            g[j][i] = v;
        }
    }
    let metric = MetricField::new(chart.clone(), g)?;
    let right = frame.right_on(chart)?;
    let out = CohomogeneityOneMetric { gamma, n, metric, right, sigma };
    out.reject_identically_degenerate()?;
    Ok(out)
}

impl CohomogeneityOneMetric {
    pub fn metric(&self) -> &MetricField {
        &self.metric
    }

    pub fn sigma(&self) -> &[Vec<Expr>; 3] {
        &self.sigma
    }

    /// Errors only if the metric is degenerate at every one of a handful of
    /// sampled points, which catches identically degenerate assemblies.
    fn reject_identically_degenerate(&self) -> Result<(), Sl2Error> {
        let mut last = None;
        for seed in 0..4 {
            let mut space = SampleSpace::new(seed).range("t", 0.2, 0.9);
            match self.metric.check_nondegenerate(&mut space, 1) {
                Ok(()) => return Ok(()),
                Err(e @ GeometryError::DegenerateAt { .. }) => last = Some(e),
                Err(GeometryError::Sampling(_)) => continue,
                Err(e) => return Err(e.into()),
            }
        }
        Err(last.unwrap_or(GeometryError::SingularMetric).into())
    }

    /// Components of `L_{R_α} g` for α = 1, 2, 3.
    pub fn killing_residuals(&self) -> Vec<Expr> {
        let chart = self.metric.chart();
        let mut out = Vec::new();
        for r in &self.right {
            let l = lie_derivative_cov2(chart, r, self.metric.components());
            out.extend(l.into_iter().flatten());
        }
        out
    }

    pub fn check_killing(
        &self,
        space: &mut SampleSpace,
        points: usize,
        tol: f64,
    ) -> Result<ResidualReport, GeometryError> {
        expr_check("killing", &self.killing_residuals(), space, points, tol)
    }
}

/// Dual co-frame of a tetrad given as vector fields `E[i][j] = E_{(i+1)(j+1)}`.
pub fn frame_from_vectors(
    chart: &Chart,
    vectors: [[VectorField; 2]; 2],
) -> Result<FrameField, Sl2Error> {
    let order = [(0, 0), (1, 0), (0, 1), (1, 1)];
    let d = chart.dim();
    if d != 4 {
        return Err(GeometryError::NotFourDimensional(d).into());
    }
    // columns are the vectors in `order`; rows of the inverse are the dual forms
    let m: Vec<Vec<Expr>> = (0..4)
        .map(|a| order.iter().map(|&(i, j)| vectors[i][j][a].clone()).collect())
        .collect();
    let (_, inv) = invert_matrix(&m).map_err(|e| match e {
        GeometryError::SingularMetric => Sl2Error::DependentFrame,
        other => other.into(),
    })?;
    let mut co: [[VectorField; 2]; 2] = Default::default();
    for (row, &(i, j)) in inv.into_iter().zip(&order) {
        co[i][j] = row;
    }
    Ok(FrameField::new(chart.clone(), vectors, Some(co))?)
}

/// `½(e¹¹⊙e²² − e¹²⊙e²¹)` scaled by `k`.
pub fn scaled_coframe_metric(
    chart: &Chart,
    coframe: &[[VectorField; 2]; 2],
    k: &Expr,
) -> Result<MetricField, GeometryError> {
    Ok(metric_from_coframe(chart, coframe)?.map(|g| (k * g).simplify()))
}

/// Largest entry of `g₁ − g₂` over sampled points, or a symbolic zero.
pub fn compare_metrics(
    name: &str,
    a: &MetricField,
    b: &MetricField,
    space: &mut SampleSpace,
    points: usize,
    tol: f64,
) -> Result<ResidualReport, GeometryError> {
    let d = a.dim();
    let mut diffs = Vec::new();
    for i in 0..d {
        for j in i..d {
            diffs.push((a.component(i, j) - b.component(i, j)).simplify());
        }
    }
    expr_check(name, &diffs, space, points, tol)
}

/// Point on the orbit chart with the group coordinates at fixed generic values.
pub fn orbit_point(t: f64) -> Point {
    Point::from_real(&[("t", t), ("p", 0.31), ("q", -0.27), ("r", 0.43)])
}

#[cfg(test)]
mod tests {
    use super::*;

    fn diag3(v: i64) -> [[Expr; 3]; 3] {
        let z = Expr::zero;
        [[Expr::int(v), z(), z()], [z(), Expr::int(v), z()], [z(), z(), Expr::int(v)]]
    }

    #[test]
    fn frame_identities_hold() {
        let f = build_sl2_frame();
        let rep = f.check(3, 50, 1e-10).unwrap();
        assert!(rep.pass(), "{rep:#?}");
        assert!(rep.maurer_cartan.symbolic_zero);
    }

    #[test]
    fn identity_element_has_coordinate_coframe() {
        let f = build_sl2_frame();
        let o = Point::from_real(&[("p", 0.0), ("q", 0.0), ("r", 0.0)]);
        let vals: Vec<Vec<f64>> = f
            .sigma
            .iter()
            .map(|s| s.iter().map(|c| c.eval_real(&o).unwrap()).collect())
            .collect();
        // σ¹ = dq, σ² = dr, σ³ = dp
        assert_eq!(vals, vec![vec![0.0, 1.0, 0.0], vec![0.0, 0.0, 1.0], vec![1.0, 0.0, 0.0]]);
    }

    #[test]
    fn assembly_without_dt_is_degenerate() {
        let f = build_sl2_frame();
        let z = [Expr::zero(), Expr::zero(), Expr::zero()];
        let err = cohomogeneity_metric(diag3(1), z, &f, &orbit_chart()).unwrap_err();
        assert!(matches!(err, Sl2Error::Geometry(GeometryError::DegenerateAt { .. })), "{err}");
    }

    #[test]
    fn right_fields_are_killing() {
        let f = build_sl2_frame();
        let n = [Expr::one(), Expr::zero(), Expr::zero()];
        let m = cohomogeneity_metric(diag3(1), n, &f, &orbit_chart()).unwrap();
        let mut space = f.sample_space(1).range("t", 0.1, 1.0);
        let rep = m.check_killing(&mut space, 20, 1e-10).unwrap();
        assert!(rep.pass, "{rep:?}");
    }

    #[test]
    fn flat_coframe_metric() {
        let chart = Chart::new(&["x1", "x2", "y1", "y2"]).unwrap();
        let unit = |k: usize| -> VectorField {
            (0..4).map(|i| if i == k { Expr::one() } else { Expr::zero() }).collect()
        };
        let fr = frame_from_vectors(&chart, [[unit(0), unit(2)], [unit(3), unit(1)]]).unwrap();
        let p = Point::new();
        assert!(fr.duality_defect(&p).unwrap() < 1e-15);
        assert_eq!(fr.metric().unwrap().signature_at(&p).unwrap(), (2, 2));
    }

    #[test]
    fn dependent_tetrad_rejected() {
        let chart = orbit_chart();
        let v = |k: usize| -> VectorField {
            (0..4).map(|i| if i == k { Expr::one() } else { Expr::zero() }).collect()
        };
        let err = frame_from_vectors(&chart, [[v(0), v(1)], [v(2), v(2)]]).unwrap_err();
        assert!(matches!(err, Sl2Error::DependentFrame));
    }
}
