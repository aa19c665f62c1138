//! Null-Kähler normal form on `TM`, its structure tensors and checks.
//!
//! Coordinates are `x1..x2n, y1..y2n` in that chart order, with
//!
//! ```text
//! g(∂x^i, ∂x^j) = Θ_{y^i y^j},   g(∂y^i, ∂x^j) = ½ ω_ij,   g(∂y^i, ∂y^j) = 0
//! N = Σ dx^i ⊗ ∂/∂y^i,           Ω(X, Y) = g(NX, Y)
//! ```
//!
//! and `ω = [[0, I], [−I, 0]]`.

mod gauge;
mod quaternionic;
mod random;

use serde::Serialize;

use crate::expr::{Expr, SampleSpace};
use crate::geometry::{
    covariant_derivative_at, Chart, Curvature, DiffForm, GeometryError, MetricField, MetricJet,
    NumTensor, TensorField, Variance,
};
use crate::report::{sample_points, ResidualReport};

pub use gauge::{gauge_transform, GaugeTransform};
pub use quaternionic::{
    partner_null_structure, pseudo_quaternionic_triple, standard_null_block, QMat,
    QuaternionicReport,
};
pub use random::random_polynomial_theta;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum NkError {
    #[error("n must be at least 1")]
    BadDimension,
    #[error("potential depends on foreign variable `{0}`")]
    ForeignVariable(String),
    #[error("`{0}` must depend on x-coordinates only")]
    DependsOnFibre(String),
    #[error("expected {expected} entries, got {got}")]
    Arity { expected: usize, got: usize },
    #[error("precondition failed: {0}")]
    Precondition(String),
    #[error(transparent)]
    Geometry(#[from] GeometryError),
}

pub fn x_name(i: usize) -> String {
    format!("x{}", i + 1)
}

pub fn y_name(i: usize) -> String {
    format!("y{}", i + 1)
}

/// `ω_ij` for `2n` indices.
pub fn omega_lower(n: usize) -> Vec<Vec<i64>> {
    let m = 2 * n;
    let mut w = vec![vec![0; m]; m];
    for i in 0..n {
        w[i][i + n] = 1;
        w[i + n][i] = -1;
    }
    w
}

/// `ω^ij`, the matrix inverse of `ω_ij` (equal to `−ω_ij`).
pub fn omega_upper(n: usize) -> Vec<Vec<i64>> {
    omega_lower(n).into_iter().map(|r| r.into_iter().map(|v| -v).collect()).collect()
}

#[derive(Clone, Debug)]
pub struct NullKahlerStructure {
    pub n: usize,
    pub theta: Option<Expr>,
    chart: Chart,
    metric: MetricField,
    n_tensor: TensorField,
    omega: TensorField,
}

impl NullKahlerStructure {
    pub fn chart(&self) -> &Chart {
        &self.chart
    }

    pub fn metric(&self) -> &MetricField {
        &self.metric
    }

    /// `N^a_b`
    pub fn null_structure(&self) -> &TensorField {
        &self.n_tensor
    }

    /// `Ω_ab`
    pub fn fundamental_form(&self) -> &TensorField {
        &self.omega
    }

    pub fn x_vars(&self) -> Vec<String> {
        (0..2 * self.n).map(x_name).collect()
    }

    pub fn y_vars(&self) -> Vec<String> {
        (0..2 * self.n).map(y_name).collect()
    }

    /// Walker block `g(∂x^i, ∂x^j)`.
    pub fn walker_block(&self) -> Vec<Vec<Expr>> {
        let m = 2 * self.n;
        (0..m).map(|i| (0..m).map(|j| self.metric.component(i, j).clone()).collect()).collect()
    }

    /// Same structure with only the off-diagonal `g(∂x¹, ∂x²)` entry doubled.
    /// The block is then no longer a Hessian, so `∇N = 0` breaks.
    pub fn sabotaged(&self) -> NullKahlerStructure {
        let mut block = self.walker_block();
        block[0][1] = (Expr::int(2) * &block[0][1]).simplify();
        block[1][0] = block[0][1].clone();
        from_walker_block(self.n, block).expect("same shape")
    }

    /// `Ω` as a differential form.
    pub fn omega_form(&self) -> DiffForm {
        let d = self.chart.dim();
        let f: Vec<Vec<Expr>> =
            (0..d).map(|a| (0..d).map(|b| self.omega.get(&[a, b]).clone()).collect()).collect();
        DiffForm::two_form(self.chart.clone(), &f)
    }

    /// Sample space over the chart coordinates.
    pub fn sample_space(&self, seed: u64) -> SampleSpace {
        SampleSpace::new(seed).vars(self.chart.coords().iter().map(String::as_str))
    }

    pub fn to_json(&self, checks: Option<&StructureReport>) -> serde_json::Value {
        let d = self.chart.dim();
        let metric: Vec<Vec<String>> = (0..d)
            .map(|a| (0..d).map(|b| self.metric.component(a, b).to_string()).collect())
            .collect();
        serde_json::json!({
            "n": self.n,
            "theta": self.theta.as_ref().map(|t| t.to_string()),
            "metric": metric,
            "checks": checks.map(|c| serde_json::to_value(c).unwrap()),
        })
    }
}

fn chart_for(n: usize) -> Chart {
    let names: Vec<String> = (0..2 * n).map(x_name).chain((0..2 * n).map(y_name)).collect();
    Chart::new(&names).expect("distinct names")
}

/// The normal-form structure of a potential `Θ(x, y)`.
pub fn build_normal_form(n: usize, theta: Expr) -> Result<NullKahlerStructure, NkError> {
    if n == 0 {
        return Err(NkError::BadDimension);
    }
    let chart = chart_for(n);
    if let Some(v) = theta.free_vars().into_iter().find(|v| chart.index(v).is_none()) {
        return Err(NkError::ForeignVariable(v));
    }
    let m = 2 * n;
    let ys: Vec<Expr> = (0..m).map(|i| theta.diff(&y_name(i)).simplify()).collect();
    let mut block = vec![vec![Expr::zero(); m]; m];
    for i in 0..m {
        for j in i..m {
            let h = ys[i].diff(&y_name(j)).simplify();
            block[i][j] = h.clone();
            block[j][i] = h;
        }
    }
    let mut s = from_walker_block(n, block)?;
    s.theta = Some(theta);
    Ok(s)
}

/// Walker metric with arbitrary symmetric block `g(∂x^i, ∂x^j) = h_ij`.
pub fn from_walker_block(n: usize, block: Vec<Vec<Expr>>) -> Result<NullKahlerStructure, NkError> {
    if n == 0 {
        return Err(NkError::BadDimension);
    }
    let m = 2 * n;
    if block.len() != m || block.iter().any(|r| r.len() != m) {
        return Err(NkError::Arity { expected: m, got: block.len() });
    }
    let chart = chart_for(n);
    let d = 2 * m;
    let w = omega_lower(n);
    let half = |k: i64| Expr::rational(k, 2);
    let mut g = vec![vec![Expr::zero(); d]; d];
    for i in 0..m {
        for j in 0..m {
            g[i][j] = block[i][j].clone();
            if w[i][j] != 0 {
                g[m + i][j] = half(w[i][j]);
                g[j][m + i] = half(w[i][j]);
            }
        }
    }
    let metric = MetricField::new(chart.clone(), g)?;
    let mut nt = TensorField::zeros(chart.clone(), vec![Variance::Up, Variance::Down]);
    for i in 0..m {
        nt.set(&[m + i, i], Expr::one());
    }
    // Ω_ab = g_cb N^c_a
    let mut om = TensorField::zeros(chart.clone(), vec![Variance::Down, Variance::Down]);
    for a in 0..d {
        for b in 0..d {
            let e = Expr::sum((0..d).map(|c| metric.component(c, b) * nt.get(&[c, a])).collect());
            om.set(&[a, b], e.simplify());
        }
    }
    Ok(NullKahlerStructure { n, theta: None, chart, metric, n_tensor: nt, omega: om })
}

#[derive(Clone, Debug, Serialize)]
pub struct StructureReport {
    pub checks: Vec<ResidualReport>,
}

impl StructureReport {
    pub fn pass(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }

    pub fn get(&self, name: &str) -> Option<&ResidualReport> {
        self.checks.iter().find(|c| c.name == name)
    }
}

pub const CHECK_NAMES: [&str; 8] = [
    "compatibility",
    "nabla_n",
    "omega_closed_parallel",
    "curvature_commutes_with_n",
    "ricci_annihilates_ker",
    "scalar_curvature",
    "omega_powers",
    "walker",
];

fn constant_tensor(t: &TensorField) -> NumTensor {
    let d = t.chart().dim();
    NumTensor {
        d,
        rank: t.rank(),
        data: t.comps().iter().map(|e| e.eval_real(&Default::default()).unwrap_or(f64::NAN)).collect(),
    }
}

fn nabla_constant(var: &[Variance], t: &NumTensor, c: &Curvature) -> f64 {
    let zero = NumTensor::zeros(t.d, t.rank + 1);
    covariant_derivative_at(var, t, &zero, c).max_abs()
}

/// Run the eight structure checks at `points` sampled points.
pub fn verify_structure(
    s: &NullKahlerStructure,
    space: &mut SampleSpace,
    points: usize,
    tol: f64,
) -> Result<StructureReport, NkError> {
    let d = s.chart.dim();
    let n = s.n;
    let mut checks = Vec::new();

    // (a) compatibility: Ω_ab + Ω_ba = 0
    let sym: Vec<Expr> = (0..d)
        .flat_map(|a| (0..d).map(move |b| (a, b)))
        .map(|(a, b)| s.omega.get(&[a, b]) + s.omega.get(&[b, a]))
        .collect();
    checks.push(crate::report::expr_check(CHECK_NAMES[0], &sym, space, points, tol)?);

    // N and Ω are constant in these coordinates
    let nn = constant_tensor(&s.n_tensor);
    let om = constant_tensor(&s.omega);
    let jet = MetricJet::new(&s.metric);
    let curv = sample_points(space, points, |p| jet.eval(p))?;
    let per_point = |f: &dyn Fn(&Curvature) -> f64| -> Vec<(crate::expr::Point, f64)> {
        curv.iter().map(|(p, c)| (p.clone(), f(c))).collect()
    };

    let nabla_n = per_point(&|c| nabla_constant(&[Variance::Up, Variance::Down], &nn, c));
    checks.push(ResidualReport::from_samples(CHECK_NAMES[1], nabla_n, tol));

    // (c) dΩ symbolically, ∇Ω numerically
    let d_omega = s.omega_form().d();
    let closed = d_omega.terms().all(|(_, e)| crate::expr::symbolic_zero(e));
    let mut c_rep = ResidualReport::from_samples(
        CHECK_NAMES[2],
        per_point(&|c| nabla_constant(&[Variance::Down, Variance::Down], &om, c)),
        tol,
    );
    if !closed {
        c_rep.pass = false;
        c_rep.max_residual = f64::INFINITY;
    }
    checks.push(c_rep);

    // (d)-(f) are cancellations among curvature components, so they are
    // measured relative to 1 + max|R| at each point
    let scale = |c: &Curvature| 1.0 + c.riemann.max_abs();

    // (d) R∘N = N∘R on the endomorphism slots, and R(NX, Y) = −R(X, NY) on both pairs
    let commute = per_point(&|c| {
        let r = &c.riemann;
        let rl = &c.riemann_down;
        let mut worst = 0.0f64;
        for a in 0..d {
            for e in 0..d {
                for cc in 0..d {
                    for dd in 0..d {
                        let mut s1 = 0.0;
                        let mut s2 = 0.0;
                        let mut s3 = 0.0;
                        for m in 0..d {
                            s1 += r.at(&[a, m, cc, dd]) * nn.at(&[m, e])
                                - nn.at(&[a, m]) * r.at(&[m, e, cc, dd]);
                            s2 += nn.at(&[m, a]) * rl.at(&[m, e, cc, dd])
                                + nn.at(&[m, e]) * rl.at(&[a, m, cc, dd]);
                            s3 += nn.at(&[m, cc]) * rl.at(&[a, e, m, dd])
                                + nn.at(&[m, dd]) * rl.at(&[a, e, cc, m]);
                        }
                        worst = worst.max(s1.abs()).max(s2.abs()).max(s3.abs());
                    }
                }
            }
        }
        worst / scale(c)
    });
    checks.push(ResidualReport::from_samples(CHECK_NAMES[3], commute, tol));

    // (e) r_ab N^b_c = 0
    let ric = per_point(&|c| {
        let mut worst = 0.0f64;
        for a in 0..d {
            for cc in 0..d {
                let v: f64 = (0..d).map(|b| c.ricci.at(&[a, b]) * nn.at(&[b, cc])).sum();
                worst = worst.max(v.abs());
            }
        }
        worst / scale(c)
    });
    checks.push(ResidualReport::from_samples(CHECK_NAMES[4], ric, tol));

    let scalar = per_point(&|c| c.scalar / scale(c));
    checks.push(ResidualReport::from_samples(CHECK_NAMES[5], scalar, tol));

    // (g) Ω^n ≠ 0, Ω^{n+1} = 0
    let w = s.omega_form();
    let mut power = w.clone();
    for _ in 1..n {
        power = power.wedge(&w);
    }
    let top_nonzero = !power.simplify().is_literal_zero();
    let next_zero = power.wedge(&w).terms().all(|(_, e)| crate::expr::symbolic_zero(e));
    let mut g_rep = ResidualReport::symbolic(CHECK_NAMES[6], tol);
    if !(top_nonzero && next_zero) {
        g_rep.pass = false;
        g_rep.symbolic_zero = false;
        g_rep.max_residual = f64::INFINITY;
    }
    checks.push(g_rep);

    // (h) N ∇_c (N ∂_e) = N^a_b Γ^b_{cm} N^m_e = 0
    let walker = per_point(&|c| {
        let mut worst = 0.0f64;
        for a in 0..d {
            for cc in 0..d {
                for e in 0..d {
                    let mut v = 0.0;
                    for b in 0..d {
                        if nn.at(&[a, b]) == 0.0 {
                            continue;
                        }
                        for m in 0..d {
                            v += nn.at(&[a, b]) * c.gamma.at(&[b, cc, m]) * nn.at(&[m, e]);
                        }
                    }
                    worst = worst.max(v.abs());
                }
            }
        }
        worst
    });
    checks.push(ResidualReport::from_samples(CHECK_NAMES[7], walker, tol));

    Ok(StructureReport { checks: checks.into_iter().map(ResidualReport::compact).collect() })
}

/// `(ĝ, Ω̂) = (F² g, F³ Ω)` and the residual of `∇̂Ω̂ = 0`.
pub fn restricted_conformal_rescale(
    s: &NullKahlerStructure,
    f: &Expr,
    space: &mut SampleSpace,
    points: usize,
    tol: f64,
) -> Result<(MetricField, TensorField, ResidualReport), NkError> {
    if s.n != 1 {
        return Err(NkError::Precondition("conformal rescaling needs n = 1".into()));
    }
    let f2 = f.sqr();
    let f3 = f.clone().powi(3);
    let g_hat = s.metric.map(|e| (&f2 * e).simplify());
    let om_hat = s.omega.map(|e| (&f3 * e).simplify());
    let jet = MetricJet::new(&g_hat);
    let field = crate::geometry::FieldJet::new(&om_hat);
    let samples = sample_points(space, points, |p| {
        let c = jet.eval(p)?;
        let (v, dv) = field.eval(p)?;
        Ok(covariant_derivative_at(field.variance(), &v, &dv, &c).max_abs())
    })?;
    let rep = ResidualReport::from_samples("conformal_parallel", samples, tol).compact();
    Ok((g_hat, om_hat, rep))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::parse;

    #[test]
    fn flat_structure_has_constant_omega_blocks() {
        let s = build_normal_form(1, Expr::zero()).unwrap();
        let g = s.metric();
        assert_eq!(g.component(2, 1), &Expr::rational(1, 2));
        assert_eq!(g.component(3, 0), &Expr::rational(-1, 2));
        assert_eq!(s.fundamental_form().get(&[0, 1]), &Expr::rational(1, 2));
        assert_eq!(s.fundamental_form().get(&[1, 0]), &Expr::rational(-1, 2));
    }

    #[test]
    fn foreign_variables_rejected() {
        assert!(matches!(
            build_normal_form(1, parse("z*y1").unwrap()),
            Err(NkError::ForeignVariable(_))
        ));
    }

    #[test]
    fn polynomial_potential_passes_and_sabotage_fails() {
        let s = build_normal_form(1, parse("y1^3*x2 + y1*y2^2*x1 - 2*y2^4 + x1*y1^2").unwrap())
            .unwrap();
        let rep = verify_structure(&s, &mut s.sample_space(3), 20, 1e-9).unwrap();
        assert!(rep.pass(), "{rep:#?}");
        let bad = verify_structure(&s.sabotaged(), &mut s.sample_space(3), 20, 1e-9).unwrap();
        let b = bad.get("nabla_n").unwrap();
        assert!(!b.pass && b.witness.is_some());
    }

    #[test]
    fn conformal_rescale_depends_on_restriction() {
        let s = build_normal_form(1, parse("y1^2*y2*x1 + y2^3").unwrap()).unwrap();
        let (_, _, ok) =
            restricted_conformal_rescale(&s, &parse("exp(x1)").unwrap(), &mut s.sample_space(1), 10, 1e-9)
                .unwrap();
        assert!(ok.pass, "{ok:?}");
        let (_, _, bad) =
            restricted_conformal_rescale(&s, &parse("exp(y1)").unwrap(), &mut s.sample_space(1), 10, 1e-9)
                .unwrap();
        assert!(!bad.pass);
    }
}
