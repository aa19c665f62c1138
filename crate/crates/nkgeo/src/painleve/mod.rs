//! Null-Kähler cohomogeneity-one metrics built from Painlevé I, Painlevé II
//! and the solvable nilpotent case.
//!
//! Each family is assembled twice: from `γ, n` in
//! `g = γ_{αβ} σ^α σ^β + 2 n_α σ^α dt`, and from the dual co-frame of the
//! tetrad read off the Lax pair, rescaled by a conformal factor. The chart's
//! `t` derivation imposes the Painlevé system, so every identity that holds
//! modulo the ODE can be tested at arbitrary values of `y, z, u`.

use rand::{Rng, SeedableRng};
use serde::Serialize;

use crate::expr::{parse, symbolic_zero, Derivation, Expr, Point, SampleSpace};
use crate::geometry::{
    covariant_derivative_at, hodge_star_2form, weyl_split, Chart, Curvature, DiffForm, FieldJet,
    GeometryError, MetricJet, NumTensor, TensorField, Variance, VectorField,
};
use crate::isomonodromy::{
    integrate_unknowns, pi_parametrization, pii_parametrization, solvable_solution, IsoError,
    Parametrization,
};
use crate::ode::OdeOptions;
use crate::report::ResidualReport;
use crate::sl2::{
    build_sl2_frame, cohomogeneity_metric, compare_metrics, frame_from_vectors, orbit_chart,
    scaled_coframe_metric, CohomogeneityOneMetric, LeftInvariantFrame, Sl2Error, GROUP_COORDS,
};

#[derive(Debug, thiserror::Error)]
pub enum PainleveError {
    #[error("sample range meets a singular locus: {0}")]
    SingularLocus(String),
    #[error(transparent)]
    Sl2(#[from] Sl2Error),
    #[error(transparent)]
    Iso(#[from] IsoError),
    #[error(transparent)]
    Geometry(#[from] GeometryError),
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
#[serde(tag = "kind")]
pub enum FamilyKind {
    PI,
    PII { alpha: f64 },
    Solvable { a: f64, b: f64, c: f64 },
}

impl FamilyKind {
    pub fn label(&self) -> String {
        match self {
            FamilyKind::PI => "PI".into(),
            FamilyKind::PII { alpha } => format!("PII(alpha={alpha})"),
            FamilyKind::Solvable { a, b, c } => format!("solvable(a={a},b={b},c={c})"),
        }
    }
}

/// Exact rational when `x` has a short binary expansion, else a float constant.
pub fn constant(x: f64) -> Expr {
    let s = x * 1024.0;
    if s.fract() == 0.0 && s.abs() < 1e12 {
        Expr::rational(s as i64, 1024)
    } else {
        Expr::decimal(x)
    }
}

#[derive(Clone, Debug)]
pub struct PainleveFamily {
    pub kind: FamilyKind,
    pub param: Parametrization,
    pub chart: Chart,
    pub metric: CohomogeneityOneMetric,
    /// Ω as a two-form on the chart.
    pub omega: DiffForm,
    /// Conformal factor applied to the co-frame metric and two-form.
    pub k: Expr,
    /// Multiple of `½(e¹¹⊙e²² − e¹²⊙e²¹)` that equals the `γ, n` metric.
    pub coframe_scale: Expr,
    pub tetrad: [[VectorField; 2]; 2],
    /// The displayed endomorphism `N` (PI only).
    pub null_structure: Option<TensorField>,
    /// Loci that sampling avoids.
    singular: Vec<Expr>,
    group: LeftInvariantFrame,
}

fn chart_for(param: &Parametrization) -> Chart {
    let mut d = Derivation::new();
    for (v, r) in &param.rates {
        d.set(v, r.clone());
    }
    orbit_chart().with_derivation("t", d)
}

/// `Σ k_i L_i + c ∂_t` as a vector field.
fn vector(left: &[VectorField; 3], k: &[Expr; 3], dt: Expr) -> VectorField {
    (0..4)
        .map(|a| {
            let mut terms: Vec<Expr> = (0..3).map(|i| &k[i] * &left[i][a]).collect();
            if a == 0 {
                terms.push(dt.clone());
            }
            Expr::sum(terms).simplify()
        })
        .collect()
}

/// `E₁₁ = Q`, `E₂₂ = P`, `E₁₂ = −2∂_t + shift`, `E₂₁ = 2∂_t − R − shift`.
fn tetrad(
    group: &LeftInvariantFrame,
    chart: &Chart,
    param: &Parametrization,
    shift: [Expr; 3],
) -> Result<[[VectorField; 2]; 2], Sl2Error> {
    let left = group.left_on(chart)?;
    let r = param.r.coeffs();
    let neg_r = [-(&r[0] + &shift[0]), -(&r[1] + &shift[1]), -(&r[2] + &shift[2])];
    Ok([
        [vector(&left, &param.q.coeffs(), Expr::zero()), vector(&left, &shift, Expr::int(-2))],
        [vector(&left, &neg_r, Expr::int(2)), vector(&left, &param.p.coeffs(), Expr::zero())],
    ])
}

fn sym3(m: [[&str; 3]; 3]) -> [[Expr; 3]; 3] {
    m.map(|row| row.map(|s| parse(s).expect("built-in entry")))
}

fn two_form(group: &LeftInvariantFrame, chart: &Chart, a: usize, b: usize, c: Expr) -> Result<DiffForm, Sl2Error> {
    let s = group.sigma_on(chart)?;
    let wa = DiffForm::one_form(chart.clone(), &s[a]);
    let wb = DiffForm::one_form(chart.clone(), &s[b]);
    Ok(wa.wedge(&wb).scale(&c).simplify())
}

impl PainleveFamily {
    #[allow(clippy::too_many_arguments)]
    fn assemble(
        kind: FamilyKind,
        param: Parametrization,
        gamma: [[Expr; 3]; 3],
        n: [Expr; 3],
        omega: (usize, usize, Expr),
        k: Expr,
        coframe_scale: Expr,
        shift: [Expr; 3],
        singular: Vec<Expr>,
    ) -> Result<PainleveFamily, PainleveError> {
        let group = build_sl2_frame();
        let chart = chart_for(&param);
        let metric = cohomogeneity_metric(gamma, n, &group, &chart)?;
        let omega = two_form(&group, &chart, omega.0, omega.1, omega.2)?;
        let tetrad = tetrad(&group, &chart, &param, shift)?;
        Ok(PainleveFamily {
            kind,
            param,
            chart,
            metric,
            omega,
            k,
            coframe_scale,
            tetrad,
            null_structure: None,
            singular,
            group,
        })
    }

    /// `(g, Ω) → (f g, f Ω)`: a different conformal factor for the same tetrad.
    pub fn rescaled(&self, f: &Expr) -> Result<PainleveFamily, PainleveError> {
        let gamma = self.metric.gamma.clone().map(|row| row.map(|e| (f * e).simplify()));
        let n = self.metric.n.clone().map(|e| (f * e).simplify());
        let metric = cohomogeneity_metric(gamma, n, &self.group, &self.chart)?;
        Ok(PainleveFamily {
            metric,
            omega: self.omega.scale(f).simplify(),
            k: (f * &self.k).simplify(),
            coframe_scale: (f * &self.coframe_scale).simplify(),
            ..self.clone()
        })
    }

    /// The same displays with one ODE rate replaced (negative controls).
    pub fn with_rate(&self, var: &str, rate: Expr) -> Result<PainleveFamily, PainleveError> {
        let param = self.param.with_rate(var, rate);
        let chart = chart_for(&param);
        let metric =
            cohomogeneity_metric(self.metric.gamma.clone(), self.metric.n.clone(), &self.group, &chart)?;
        let mut omega = DiffForm::zero(chart.clone(), 2);
        for (idx, c) in self.omega.terms() {
            omega.add(idx, c.clone());
        }
        let null_structure = self.null_structure.as_ref().map(|n| n.with_chart(chart.clone()));
        Ok(PainleveFamily { param, chart, metric, omega, null_structure, ..self.clone() })
    }

    pub fn unknowns(&self) -> Vec<String> {
        self.param.unknowns()
    }

    pub fn gamma(&self) -> &[[Expr; 3]; 3] {
        &self.metric.gamma
    }

    pub fn n(&self) -> &[Expr; 3] {
        &self.metric.n
    }

    pub fn group(&self) -> &LeftInvariantFrame {
        &self.group
    }

    /// Random points on the declared ranges, away from the singular loci.
    pub fn sample_space(&self, seed: u64) -> SampleSpace {
        let mut s = SampleSpace::new(seed);
        for c in GROUP_COORDS {
            s = s.range(c, -1.5, 1.5);
        }
        s = match self.kind {
            FamilyKind::PI => s.range("t", -1.0, 1.0).range("y", -1.0, 1.0).range("z", -2.0, 2.0),
            FamilyKind::PII { .. } => s
                .range("t", -1.0, 1.0)
                .range("y", -1.0, 1.0)
                .range("z", -1.0, 1.0)
                .range("u", 0.5, 2.0),
            FamilyKind::Solvable { .. } => s.range("t", 0.2, 1.5),
        };
        for locus in &self.singular {
            s = s.avoid(locus.clone(), 0.2);
        }
        s
    }

    /// Metric from the tetrad's dual co-frame times `coframe_scale`.
    pub fn coframe_metric(&self) -> Result<crate::geometry::MetricField, PainleveError> {
        let frame = frame_from_vectors(&self.chart, self.tetrad.clone())?;
        let co = frame.coframe.as_ref().expect("dual co-frame");
        Ok(scaled_coframe_metric(&self.chart, co, &self.coframe_scale)?)
    }

    /// The two metric assemblies agree.
    pub fn check_two_routes(&self, seed: u64, points: usize, tol: f64) -> Result<ResidualReport, PainleveError> {
        let other = self.coframe_metric()?;
        Ok(compare_metrics("two_route_metric", self.metric.metric(), &other, &mut self.sample_space(seed), points, tol)?)
    }

    pub fn omega_tensor(&self) -> TensorField {
        let d = self.chart.dim();
        let comps = (0..d * d).map(|i| self.omega.get(&[i / d, i % d])).collect();
        TensorField::new(self.chart.clone(), vec![Variance::Down, Variance::Down], comps)
            .expect("4x4 components")
    }

    /// `dΩ` as a symbolic check.
    pub fn check_closed(&self, tol: f64) -> ResidualReport {
        let d = self.omega.d();
        let mut rep = ResidualReport::symbolic("omega_closed", tol);
        if !d.terms().all(|(_, e)| symbolic_zero(e)) {
            rep.pass = false;
            rep.symbolic_zero = false;
            rep.max_residual = f64::INFINITY;
        }
        rep
    }

    /// Points for numeric checks.
    pub fn points(&self, source: &SampleSource) -> Result<Vec<Point>, PainleveError> {
        match source {
            SampleSource::Random { seed, points } => {
                let mut space = self.sample_space(*seed);
                let mut vars: Vec<String> = vec!["t".into()];
                vars.extend(GROUP_COORDS.iter().map(|s| s.to_string()));
                vars.extend(self.unknowns());
                space.declare(vars.iter().map(String::as_str));
                (0..*points).map(|_| Ok(space.sample().map_err(GeometryError::from)?)).collect()
            }
            SampleSource::Trajectory { t0, start, times, seed, opts } => {
                if let FamilyKind::Solvable { .. } = self.kind {
                    if times.iter().any(|t| t.abs() < 1e-3) {
                        return Err(PainleveError::SingularLocus("t = 0".into()));
                    }
                }
                let traj = integrate_unknowns(&self.param.rates, *t0, start, times, opts)?;
                let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(*seed);
                let names = self.unknowns();
                let mut out = Vec::with_capacity(times.len());
                for (t, vals) in times.iter().zip(traj) {
                    let mut p = Point::from_real(&[("t", *t)]);
                    for c in GROUP_COORDS {
                        p.set_real(c, rng.gen_range(-1.5..1.5));
                    }
                    for (n, v) in names.iter().zip(vals) {
                        p.set_real(n, v);
                    }
                    out.push(p);
                }
                // a locus changing sign between samples was crossed
                for locus in &self.singular {
                    let mut prev: Option<(f64, f64)> = None;
                    for p in &out {
                        let v = locus.eval_real(p).map_err(GeometryError::from)?;
                        let t = p.real("t").unwrap_or(f64::NAN);
                        if v.abs() < 1e-6 || prev.is_some_and(|(pv, _)| pv * v < 0.0) {
                            let from = prev.map_or(t, |(_, pt)| pt);
                            return Err(PainleveError::SingularLocus(format!(
                                "{locus} vanishes for t in [{from}, {t}]"
                            )));
                        }
                        prev = Some((v, t));
                    }
                }
                Ok(out)
            }
        }
    }
}

/// Where numeric checks are evaluated.
#[derive(Clone, Debug)]
pub enum SampleSource {
    /// Seeded random points in the family's box; valid because the chart imposes the ODE.
    Random { seed: u64, points: usize },
    /// Along an integrated solution, with random group coordinates.
    Trajectory { t0: f64, start: Vec<f64>, times: Vec<f64>, seed: u64, opts: OdeOptions },
}

/// Painlevé I family with `k = 16z`.
///
/// ```text
/// γ = −[[(12y² + 2t)/z, 4, −3y], [4, 0, 0], [−3y, 0, z]],  n = (0, 0, −z),  Ω = 2σ³∧σ¹
/// N = g⁻¹Ω = ½ σ³ ⊗ L₂ − (2/z) σ¹ ⊗ ∂_t
/// ```
pub fn build_pi_metric() -> Result<PainleveFamily, PainleveError> {
    let param = pi_parametrization();
    let gamma = sym3([
        ["-(12*y^2 + 2*t)/z", "-4", "3*y"],
        ["-4", "0", "0"],
        ["3*y", "0", "-z"],
    ]);
    let n = [Expr::zero(), Expr::zero(), -Expr::var("z")];
    let k = parse("16*z").unwrap();
    let shift = [Expr::zero(), Expr::var("y"), Expr::zero()];
    let mut fam = PainleveFamily::assemble(
        FamilyKind::PI,
        param,
        gamma,
        n,
        (2, 0, Expr::int(2)),
        k.clone(),
        k,
        shift,
        vec![Expr::var("z")],
    )?;
    fam.null_structure = Some(pi_null_structure(&fam)?);
    Ok(fam)
}

/// `N^a_b = ½ L₂^a σ³_b − (2/z) δ^a_t σ¹_b`.
fn pi_null_structure(fam: &PainleveFamily) -> Result<TensorField, PainleveError> {
    let s = fam.group.sigma_on(&fam.chart)?;
    let l2 = &fam.group.left_on(&fam.chart)?[1];
    let ti = fam.chart.index("t").expect("t coordinate");
    let z = Expr::var("z");
    let half = Expr::rational(1, 2);
    let mut comps = Vec::with_capacity(16);
    for a in 0..4 {
        for b in 0..4 {
            let mut v = &half * &l2[a] * &s[2][b];
            if a == ti {
                v = v - Expr::int(2) / &z * &s[0][b];
            }
            comps.push(v.simplify());
        }
    }
    Ok(TensorField::new(fam.chart.clone(), vec![Variance::Up, Variance::Down], comps)?)
}

/// Painlevé II family with `k = 4yz + 1 − 2α` and `Ω = 2σ³∧σ²`.
pub fn build_pii_metric(alpha: f64) -> Result<PainleveFamily, PainleveError> {
    let al = constant(alpha);
    let param = pii_parametrization(&al);
    let (y, z, u, t) = (Expr::var("y"), Expr::var("z"), Expr::var("u"), Expr::var("t"));
    let two = Expr::int(2);
    let k = (Expr::int(4) * &y * &z + Expr::one() - &two * &al).simplify();
    let half_minus = &al - Expr::rational(1, 2);
    let g22 = (Expr::int(8) * z.clone().powi(3)
        + (Expr::int(8) * y.sqr() + Expr::int(4) * &t) * z.sqr()
        + (Expr::int(8) - Expr::int(16) * &al) * &y * &z
        + Expr::int(8) * half_minus.sqr())
        / (&k * u.sqr());
    let g23 = -(&two * (&two * y.sqr() * &z + (Expr::one() - &two * &al) * &y - &z * (&two * &z + &t))) / &k;
    let g33 = u.sqr() * (&two * y.sqr() + &two * &z + &t) / &k;
    let g12 = &z / &u;
    let g13 = &u / &two;
    let gamma = [
        [Expr::zero(), g12.clone(), g13.clone()],
        [g12, g22, g23.clone()],
        [g13, g23, g33],
    ];
    let n = [
        Expr::zero(),
        (&two * &y * &z - &two * &al + Expr::one()) / (&two * &u),
        -(&y * &u) / &two,
    ];
    let scale = (Expr::int(-2) * &k).simplify();
    PainleveFamily::assemble(
        FamilyKind::PII { alpha },
        param,
        gamma,
        n,
        (2, 1, Expr::int(2)),
        k.clone(),
        scale,
        [Expr::zero(), Expr::zero(), Expr::zero()],
        vec![u, k],
    )
}

/// Solvable family with `k = 8 sinh t / cosh³ t` and `Ω = σ³∧σ¹`.
pub fn build_solvable_metric(a: f64, b: f64, c: f64) -> Result<PainleveFamily, PainleveError> {
    let (ae, be, ce) = (constant(a), constant(b), constant(c));
    let param = solvable_solution(&ae, &be, &ce);
    let t = Expr::var("t");
    let s = (&ae + &be * &t).simplify();
    let (sh, ch) = (t.clone().sinh(), t.clone().cosh());
    let coth = &ch / &sh;
    let tanh = &sh / &ch;
    let two = Expr::int(2);
    let s2t = &two * &sh * &ch;
    let g13 = &two * &s * &coth;
    let g23 = -(&two * &tanh);
    let g33 = Expr::int(4) * s.sqr() * &coth
        + s2t.sqr() / Expr::int(8) * (Expr::one() + &two * &ce * &coth);
    let gamma = [
        [&two / &s2t, Expr::zero(), g13.clone()],
        [Expr::zero(), Expr::zero(), g23.clone()],
        [g13, g23, g33],
    ];
    let sech2 = ch.sqr().recip();
    let n = [sech2.clone(), Expr::zero(), &two * &s * &sech2 + &two * &be * &tanh];
    let k = Expr::int(8) * &sh / ch.clone().powi(3);
    PainleveFamily::assemble(
        FamilyKind::Solvable { a, b, c },
        param,
        gamma,
        n,
        (2, 0, Expr::one()),
        k.clone(),
        Expr::int(-2) * k,
        [Expr::zero(), Expr::zero(), Expr::zero()],
        vec![t],
    )
}

/// Pointwise numeric geometry of a family.
struct Evaluator {
    jet: MetricJet,
    omega: FieldJet,
    null: Option<FieldJet>,
}

impl Evaluator {
    fn new(fam: &PainleveFamily) -> Evaluator {
        Evaluator {
            jet: MetricJet::new(fam.metric.metric()),
            omega: FieldJet::new(&fam.omega_tensor()),
            null: fam.null_structure.as_ref().map(FieldJet::new),
        }
    }

    fn curvature(&self, p: &Point) -> Result<Curvature, GeometryError> {
        self.jet.eval(p)
    }

    fn nabla_omega(&self, c: &Curvature, p: &Point) -> Result<NumTensor, GeometryError> {
        let (v, d) = self.omega.eval(p)?;
        Ok(covariant_derivative_at(self.omega.variance(), &v, &d, c))
    }
}

/// `+1` or `−1`: the orientation for which Ω is self-dual.
pub fn omega_orientation(omega: &NumTensor, c: &Curvature) -> f64 {
    let star = hodge_star_2form(omega, &c.g, &c.ginv, 1.0);
    if star.max_diff(omega) <= star.scaled(-1.0).max_diff(omega) {
        1.0
    } else {
        -1.0
    }
}

/// `max |C₊|` in the orientation making Ω self-dual.
pub fn weyl_plus(omega: &NumTensor, c: &Curvature) -> f64 {
    let sign = omega_orientation(omega, c);
    weyl_split(&c.weyl(), &c.g, &c.ginv, sign).plus.max_abs()
}

#[derive(Clone, Debug, Serialize)]
pub struct FamilyReport {
    pub family: String,
    pub orientation: f64,
    pub checks: Vec<ResidualReport>,
}

impl FamilyReport {
    pub fn pass(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }

    pub fn get(&self, name: &str) -> Option<&ResidualReport> {
        self.checks.iter().find(|c| c.name == name)
    }
}

/// All checks of a family at the given points.
pub fn verify_family(
    fam: &PainleveFamily,
    source: &SampleSource,
    tol: f64,
) -> Result<FamilyReport, PainleveError> {
    let (_, mut rep) = verify_family_detailed(fam, source, tol)?;
    rep.checks = rep.checks.into_iter().map(ResidualReport::compact).collect();
    Ok(rep)
}

/// Like [`verify_family`], also returning the sample points. Rows evaluated
/// at those points keep their per-point residuals, in the same order.
pub fn verify_family_detailed(
    fam: &PainleveFamily,
    source: &SampleSource,
    tol: f64,
) -> Result<(Vec<Point>, FamilyReport), PainleveError> {
    let pts = fam.points(source)?;
    let ev = Evaluator::new(fam);
    let mut checks = vec![fam.check_two_routes(11, 10, tol)?, fam.check_closed(tol)];
    let mut rows: Vec<(&str, Vec<(Point, f64)>)> = vec![("nabla_omega", vec![]), ("weyl_plus", vec![])];
    let mut orientation = 0.0;
    let mut null_rows: Vec<(&str, Vec<(Point, f64)>)> =
        vec![("n_squared", vec![]), ("n_skew", vec![]), ("n_from_omega", vec![])];
    let mut ricci_row = Vec::new();
    let sigma3 = fam.group.sigma_on(&fam.chart)?[2].clone();
    let ricci_target: Vec<Expr> = match fam.kind {
        FamilyKind::Solvable { .. } => {
            let t = Expr::var("t");
            let f = Expr::rational(1, 2) * t.clone().sinh() * t.cosh().powi(3);
            (0..16).map(|i| (&f * &sigma3[i / 4] * &sigma3[i % 4]).simplify()).collect()
        }
        _ => Vec::new(),
    };
    let ricci_tape = crate::expr::Tape::compile(&ricci_target);
    for p in &pts {
        let c = ev.curvature(p)?;
        let (om, _) = ev.omega.eval(p)?;
        orientation = omega_orientation(&om, &c);
        rows[0].1.push((p.clone(), ev.nabla_omega(&c, p)?.max_abs()));
        rows[1].1.push((p.clone(), weyl_plus(&om, &c)));
        if let Some(nj) = &ev.null {
            let (nn, _) = nj.eval(p)?;
            let mut sq = 0.0f64;
            let mut skew = 0.0f64;
            let mut from = 0.0f64;
            for a in 0..4 {
                for b in 0..4 {
                    let s: f64 = (0..4).map(|m| nn.at(&[a, m]) * nn.at(&[m, b])).sum();
                    sq = sq.max(s.abs());
                    let k: f64 = (0..4)
                        .map(|m| c.g.at(&[a, m]) * nn.at(&[m, b]) + c.g.at(&[b, m]) * nn.at(&[m, a]))
                        .sum();
                    skew = skew.max(k.abs());
                    let raised: f64 = (0..4).map(|m| c.ginv.at(&[a, m]) * om.at(&[m, b])).sum();
                    from = from.max((nn.at(&[a, b]) - raised).abs());
                }
            }
            null_rows[0].1.push((p.clone(), sq));
            null_rows[1].1.push((p.clone(), skew));
            null_rows[2].1.push((p.clone(), from));
        }
        if !ricci_target.is_empty() {
            let want = ricci_tape.eval(p).map_err(GeometryError::from)?;
            let worst = (0..16).fold(0.0f64, |acc, i| acc.max((c.ricci.data[i] - want[i].re).abs()));
            ricci_row.push((p.clone(), worst));
        }
    }
    for (name, v) in rows {
        checks.push(ResidualReport::from_samples(name, v, tol));
    }
    let mut space = fam.sample_space(17);
    checks.push(fam.metric.check_killing(&mut space, 10, tol)?.renamed("killing"));
    if fam.null_structure.is_some() {
        for (name, v) in null_rows {
            checks.push(ResidualReport::from_samples(name, v, tol));
        }
    }
    if !ricci_row.is_empty() {
        checks.push(ResidualReport::from_samples("ricci_profile", ricci_row, tol));
    }
    let checks = checks
        .into_iter()
        .map(|c| if matches!(c.name.as_str(), "two_route_metric" | "omega_closed" | "killing") { c.compact() } else { c })
        .collect();
    Ok((pts, FamilyReport { family: fam.kind.label(), orientation, checks }))
}

/// `∇Ω` for PI with `ẏ, ż` left free (as `ydot`, `zdot`) against
/// `(3(z − ẏ)/(2z) σ¹ + (ż − 6y² − t)/(2z) σ³) ⊗ Ω`, the derivative slot last.
/// Both coefficients vanish exactly on solutions of PI.
pub fn pi_nabla_omega_free(seed: u64, points: usize, tol: f64) -> Result<ResidualReport, PainleveError> {
    let fam = build_pi_metric()?;
    let free = orbit_chart().with_derivation(
        "t",
        Derivation::new().with("y", Expr::var("ydot")).with("z", Expr::var("zdot")),
    );
    let metric = fam.metric.metric().with_chart(free.clone());
    let omega = fam.omega_tensor().with_chart(free.clone());
    let jet = MetricJet::new(&metric);
    let oj = FieldJet::new(&omega);
    let s = fam.group.sigma_on(&free)?;
    let w: Vec<Expr> = (0..4)
        .map(|c| {
            (parse("3*(z - ydot)/(2*z)").unwrap() * &s[0][c]
                + parse("(zdot - 6*y^2 - t)/(2*z)").unwrap() * &s[2][c])
                .simplify()
        })
        .collect();
    let wt = crate::expr::Tape::compile(&w);
    let mut space = fam.sample_space(seed).range("ydot", -2.0, 2.0).range("zdot", -2.0, 2.0);
    let samples = crate::report::sample_points(&mut space, points, |p| {
        let c = jet.eval(p)?;
        let (v, d) = oj.eval(p)?;
        let nab = covariant_derivative_at(oj.variance(), &v, &d, &c);
        let wv = wt.eval(p)?;
        let mut worst = 0.0f64;
        for a in 0..4 {
            for b in 0..4 {
                for cc in 0..4 {
                    worst = worst.max((nab.at(&[a, b, cc]) - wv[cc].re * v.at(&[a, b])).abs());
                }
            }
        }
        Ok(worst)
    })?;
    Ok(ResidualReport::from_samples("pi_nabla_omega_free", samples, tol))
}

/// With `a = b = c = 0` and `τ = tanh t` the solvable metric is
/// `(1−τ²)/τ σ¹σ¹ + σ¹⊙dτ − 2τ σ²⊙σ³ + τ²/(2(1−τ²)²) σ³σ³`.
pub fn solvable_tau_check(seed: u64, points: usize, tol: f64) -> Result<ResidualReport, PainleveError> {
    let fam = build_solvable_metric(0.0, 0.0, 0.0)?;
    let t = Expr::var("t");
    let tau = t.clone().tanh();
    let one_minus = Expr::one() - tau.sqr();
    let z = Expr::zero;
    let gamma = [
        [&one_minus / &tau, z(), z()],
        [z(), z(), Expr::int(-2) * &tau],
        [z(), Expr::int(-2) * &tau, tau.sqr() / (Expr::int(2) * one_minus.sqr())],
    ];
    let dtau = t.cosh().sqr().recip();
    let n = [dtau, z(), z()];
    let reduced = cohomogeneity_metric(gamma, n, &fam.group, &fam.chart)?;
    Ok(compare_metrics(
        "solvable_tau_form",
        fam.metric.metric(),
        reduced.metric(),
        &mut fam.sample_space(seed),
        points,
        tol,
    )?)
}

/// `∇Ω` residual after replacing `k` by `k(1 + ε h(t))`.
pub fn conformal_probe(
    fam: &PainleveFamily,
    eps: f64,
    h: &Expr,
    source: &SampleSource,
    tol: f64,
) -> Result<ResidualReport, PainleveError> {
    let f = Expr::one() + Expr::decimal(eps) * h;
    let moved = fam.rescaled(&f)?;
    let pts = moved.points(source)?;
    let ev = Evaluator::new(&moved);
    let mut v = Vec::with_capacity(pts.len());
    for p in pts {
        let c = ev.curvature(&p)?;
        let r = ev.nabla_omega(&c, &p)?.max_abs();
        v.push((p, r));
    }
    Ok(ResidualReport::from_samples("conformal_probe", v, tol))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum KernelType {
    Nilpotent,
    NonNilpotent,
}

#[derive(Clone, Debug, Serialize)]
pub struct KernelDiagnostic {
    pub kind: KernelType,
    /// `L`-basis coefficients of the orbit-tangent kernel direction.
    pub element: [f64; 3],
}

/// Intersect the kernel of Ω (equivalently of `N = g⁻¹Ω`) with the orbit
/// tangent space and test whether that Lie-algebra element is nilpotent.
pub fn kernel_type_diagnostic(fam: &PainleveFamily) -> Result<KernelDiagnostic, PainleveError> {
    let mut space = fam.sample_space(5);
    space.declare(fam.unknowns().iter().map(String::as_str));
    space.declare(["t", "p", "q", "r"]);
    let p = space.sample().map_err(GeometryError::from)?;
    let left = fam.group.left_on(&fam.chart)?;
    let om = fam.omega.eval_2form(&p)?;
    let ti = fam.chart.index("t").expect("t coordinate");
    // basis (L₁, L₂, L₃, ∂_t) at p
    let mut basis = Vec::with_capacity(4);
    for l in &left {
        let v: Result<Vec<f64>, _> = l.iter().map(|e| e.eval_real(&p)).collect();
        basis.push(v.map_err(GeometryError::from)?);
    }
    basis.push((0..4).map(|a| if a == ti { 1.0 } else { 0.0 }).collect());
    let w = nalgebra::Matrix4::from_fn(|i, j| {
        let mut s = 0.0;
        for a in 0..4 {
            for b in 0..4 {
                s += basis[i][a] * om.at(&[a, b]) * basis[j][b];
            }
        }
        s
    });
    let svd = w.svd(true, true);
    let vt = svd.v_t.expect("requested");
    let top = svd.singular_values.max();
    let kernel: Vec<nalgebra::Vector4<f64>> = (0..4)
        .filter(|&i| svd.singular_values[i] < 1e-9 * top.max(1.0))
        .map(|i| vt.row(i).transpose())
        .collect();
    let x = match kernel.as_slice() {
        [] => return Err(PainleveError::Geometry(GeometryError::SingularMetric)),
        [v] => *v,
        [v1, v2, ..] => {
            if v1[3].abs() < 1e-12 && v2[3].abs() < 1e-12 {
                *v1
            } else {
                v1 * v2[3] - v2 * v1[3]
            }
        }
    };
    let norm = (x[0] * x[0] + x[1] * x[1] + x[2] * x[2]).sqrt().max(1e-300);
    let e = [x[0] / norm, x[1] / norm, x[2] / norm];
    // det(x₁L₁ + x₂L₂ + x₃L₃) = −x₁²/4 − x₂x₃
    let det = -e[0] * e[0] / 4.0 - e[1] * e[2];
    let kind = if det.abs() < 1e-9 { KernelType::Nilpotent } else { KernelType::NonNilpotent };
    Ok(KernelDiagnostic { kind, element: e })
}

#[cfg(test)]
mod tests;
