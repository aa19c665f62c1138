//! PDE systems attached to a potential `Θ(x, y)`.
//!
//! `ω^{ij}` is the matrix inverse of `ω_ij` throughout. With the normal form of
//! [`crate::nullkahler`] the Ricci tensor is `r = c₀ Σ f_{y^i y^j} dx^i ⊗ dx^j`
//! with [`RICCI_CALIBRATION`] `c₀ = 2`.

use std::collections::BTreeMap;

use serde::Serialize;

use crate::expr::{Expr, Point, SampleSpace, C64};
use crate::geometry::{
    bracket, fd_riemann, weyl_split, Chart, GeometryError, MetricJet, VectorField,
    ORIENTATION_SIGN,
};
use crate::nullkahler::{build_normal_form, omega_upper, x_name, y_name, NkError};
use crate::report::{expr_check, sample_points, sampled_check, ResidualReport};

/// `r_{x^i x^j} = c₀ ∂²f/∂y^i∂y^j` for the normal form.
pub const RICCI_CALIBRATION: f64 = 2.0;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum PdeError {
    #[error("this system is defined for n = 1 only")]
    NeedsN1,
    #[error("`{0}` must depend on x-coordinates only")]
    DependsOnFibre(String),
    #[error("cannot integrate {0} symbolically")]
    NotIntegrable(String),
    #[error(transparent)]
    Nk(#[from] NkError),
    #[error(transparent)]
    Geometry(#[from] GeometryError),
}

impl From<crate::expr::ZeroTestError> for PdeError {
    fn from(e: crate::expr::ZeroTestError) -> Self {
        PdeError::Geometry(e.into())
    }
}

/// Sampling policy for residual checks.
#[derive(Clone, Debug)]
pub struct ResidualOptions {
    pub seed: u64,
    pub points: usize,
    pub tol: f64,
    pub range: (f64, f64),
    /// Singular loci `(expr, margin)`: points with `|expr| < margin` are skipped.
    pub avoid: Vec<(Expr, f64)>,
}

impl Default for ResidualOptions {
    fn default() -> Self {
        ResidualOptions { seed: 0, points: 50, tol: 1e-9, range: (-2.0, 2.0), avoid: Vec::new() }
    }
}

impl ResidualOptions {
    pub fn seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn points(mut self, points: usize) -> Self {
        self.points = points;
        self
    }

    pub fn tol(mut self, tol: f64) -> Self {
        self.tol = tol;
        self
    }

    pub fn avoid(mut self, locus: Expr, margin: f64) -> Self {
        self.avoid.push((locus, margin));
        self
    }

    pub fn space(&self, n: usize) -> SampleSpace {
        let names: Vec<String> = (0..2 * n).map(x_name).chain((0..2 * n).map(y_name)).collect();
        let mut s = SampleSpace::new(self.seed);
        for v in &names {
            s = s.range(v, self.range.0, self.range.1);
        }
        for (e, m) in &self.avoid {
            s = s.avoid(e.clone(), *m);
        }
        s
    }
}

fn ty(theta: &Expr, i: usize) -> Expr {
    theta.diff(&y_name(i))
}

fn hessian_y(theta: &Expr, n: usize) -> Vec<Vec<Expr>> {
    let m = 2 * n;
    let first: Vec<Expr> = (0..m).map(|i| ty(theta, i).simplify()).collect();
    (0..m).map(|i| (0..m).map(|j| first[i].diff(&y_name(j)).simplify()).collect()).collect()
}

/// `f = Σ ω^{ij} Θ_{y^i x^j} + ½ Σ ω^{ik} ω^{jl} Θ_{y^i y^j} Θ_{y^k y^l}`.
pub fn ricci_potential_f(theta: &Expr, n: usize) -> Expr {
    let m = 2 * n;
    let w = omega_upper(n);
    let h = hessian_y(theta, n);
    let mut terms = Vec::new();
    for i in 0..m {
        for j in 0..m {
            if w[i][j] != 0 {
                terms.push(Expr::int(w[i][j]) * ty(theta, i).diff(&x_name(j)));
            }
        }
    }
    for i in 0..m {
        for k in 0..m {
            if w[i][k] == 0 {
                continue;
            }
            for j in 0..m {
                for l in 0..m {
                    if w[j][l] != 0 {
                        terms.push(Expr::rational(w[i][k] * w[j][l], 2) * &h[i][j] * &h[k][l]);
                    }
                }
            }
        }
    }
    Expr::sum(terms).simplify()
}

/// The `n = 1` display `f = Θ_{x¹y²} − Θ_{x²y¹} + Θ_{y¹y¹}Θ_{y²y²} − Θ_{y¹y²}²`.
pub fn ricci_potential_f_n1(theta: &Expr) -> Expr {
    let d = |a: &str, b: &str| theta.diff(a).diff(b);
    (d("x1", "y2") - d("x2", "y1") + d("y1", "y1") * d("y2", "y2") - d("y1", "y2").sqr())
        .simplify()
}

/// `Δ_g f` for `n = 1`.
pub fn laplacian_n1(theta: &Expr, f: &Expr) -> Expr {
    let t = |a: &str, b: &str| theta.diff(a).diff(b);
    let g = |a: &str, b: &str| f.diff(a).diff(b);
    (g("x1", "y2") - g("x2", "y1") + t("y2", "y2") * g("y1", "y1") + t("y1", "y1") * g("y2", "y2")
        - Expr::int(2) * t("y1", "y2") * g("y1", "y2"))
    .simplify()
}

fn check_base_only(name: &str, e: &Expr, n: usize) -> Result<(), PdeError> {
    if (0..2 * n).any(|i| e.depends_on(&y_name(i))) {
        return Err(PdeError::DependsOnFibre(name.to_string()));
    }
    Ok(())
}

/// `f − G − Σ y^i F_i ≡ 0`.
pub fn einstein_residual(
    theta: &Expr,
    n: usize,
    g: &Expr,
    f: &[Expr],
    opts: &ResidualOptions,
) -> Result<ResidualReport, PdeError> {
    check_base_only("G", g, n)?;
    for (i, e) in f.iter().enumerate() {
        check_base_only(&format!("F{}", i + 1), e, n)?;
    }
    let mut r = ricci_potential_f(theta, n) - g;
    for (i, e) in f.iter().enumerate() {
        r = r - Expr::var(&y_name(i)) * e;
    }
    Ok(expr_check("einstein", &[r], &mut opts.space(n), opts.points, opts.tol)?)
}

fn need_n1(theta: &Expr) -> Result<(), PdeError> {
    if theta.free_vars().iter().any(|v| !matches!(v.as_str(), "x1" | "x2" | "y1" | "y2")) {
        return Err(PdeError::NeedsN1);
    }
    Ok(())
}

/// `Δ_g f = 0` (vanishing of `C₊`), `n = 1`.
pub fn asd_residual(theta: &Expr, opts: &ResidualOptions) -> Result<ResidualReport, PdeError> {
    need_n1(theta)?;
    let f = ricci_potential_f(theta, 1);
    let r = laplacian_n1(theta, &f);
    Ok(expr_check("asd", &[r], &mut opts.space(1), opts.points, opts.tol)?)
}

/// All fourth pure-`y` derivatives (vanishing of `C₋`), `n = 1`.
pub fn sd_residual(theta: &Expr, opts: &ResidualOptions) -> Result<ResidualReport, PdeError> {
    need_n1(theta)?;
    let mut rs = Vec::new();
    for a in 0..=4 {
        let mut e = theta.clone();
        for _ in 0..a {
            e = e.diff("y1");
        }
        for _ in a..4 {
            e = e.diff("y2");
        }
        rs.push(e.simplify());
    }
    Ok(expr_check("sd", &rs, &mut opts.space(1), opts.points, opts.tol)?)
}

/// Second heavenly equation `f ≡ 0`, `n = 1`.
pub fn heavenly_residual(theta: &Expr, opts: &ResidualOptions) -> Result<ResidualReport, PdeError> {
    need_n1(theta)?;
    let f = ricci_potential_f(theta, 1);
    Ok(expr_check("heavenly", &[f], &mut opts.space(1), opts.points, opts.tol)?)
}

/// `H_ij = Θ_{y^i x^j} − Θ_{y^j x^i} + Σ ω^{kl} Θ_{y^i y^k} Θ_{y^j y^l}`.
pub fn hk_matrix(theta: &Expr, n: usize) -> Vec<Vec<Expr>> {
    let m = 2 * n;
    let w = omega_upper(n);
    let h = hessian_y(theta, n);
    let mut out = vec![vec![Expr::zero(); m]; m];
    for i in 0..m {
        for j in i + 1..m {
            let mut terms = vec![
                ty(theta, i).diff(&x_name(j)),
                -ty(theta, j).diff(&x_name(i)),
            ];
            for k in 0..m {
                for l in 0..m {
                    if w[k][l] != 0 {
                        terms.push(Expr::int(w[k][l]) * &h[i][k] * &h[j][l]);
                    }
                }
            }
            let e = Expr::sum(terms).simplify();
            out[j][i] = (-&e).simplify();
            out[i][j] = e;
        }
    }
    out
}

/// `H_ij ≡ 0` for all `i < j`, returning the matrix as well.
pub fn hk_hierarchy_residual(
    theta: &Expr,
    n: usize,
    opts: &ResidualOptions,
) -> Result<(Vec<Vec<Expr>>, ResidualReport), PdeError> {
    let h = hk_matrix(theta, n);
    let upper: Vec<Expr> =
        (0..2 * n).flat_map(|i| (i + 1..2 * n).map(move |j| (i, j))).map(|(i, j)| h[i][j].clone()).collect();
    let rep = expr_check("hk_hierarchy", &upper, &mut opts.space(n), opts.points, opts.tol)?;
    Ok((h, rep))
}

/// `Σ ω^{ij} H_ij − 2f ≡ 0`.
pub fn footnote_residual(theta: &Expr, n: usize, opts: &ResidualOptions) -> Result<ResidualReport, PdeError> {
    let h = hk_matrix(theta, n);
    let w = omega_upper(n);
    let mut terms = vec![Expr::int(-2) * ricci_potential_f(theta, n)];
    for i in 0..2 * n {
        for j in 0..2 * n {
            if w[i][j] != 0 {
                terms.push(Expr::int(w[i][j]) * &h[i][j]);
            }
        }
    }
    Ok(expr_check("footnote", &[Expr::sum(terms)], &mut opts.space(n), opts.points, opts.tol)?)
}

/// `∂H_ij/∂y^k ≡ 0`; on success also returns `C_ij(x) = H_ij`.
pub fn weaker_residual(
    theta: &Expr,
    n: usize,
    opts: &ResidualOptions,
) -> Result<(ResidualReport, Option<Vec<Vec<Expr>>>), PdeError> {
    let h = hk_matrix(theta, n);
    let m = 2 * n;
    let mut rs = Vec::new();
    for i in 0..m {
        for j in i + 1..m {
            for k in 0..m {
                rs.push(h[i][j].diff(&y_name(k)).simplify());
            }
        }
    }
    let rep = expr_check("weaker", &rs, &mut opts.space(n), opts.points, opts.tol)?;
    let c = rep.pass.then_some(h);
    Ok((rep, c))
}

/// Chart `(x, y, lambda)` and the fields
/// `l_i = ∂_{y^i} + λ(∂_{x^i} + Σ ω^{kj} Θ_{y^i y^j} ∂_{y^k})`.
pub fn lax_fields(theta: &Expr, n: usize) -> (Chart, Vec<VectorField>) {
    let m = 2 * n;
    let names: Vec<String> = (0..m)
        .map(x_name)
        .chain((0..m).map(y_name))
        .chain(std::iter::once("lambda".to_string()))
        .collect();
    let chart = Chart::new(&names).expect("distinct names");
    let w = omega_upper(n);
    let h = hessian_y(theta, n);
    let lam = Expr::var("lambda");
    let fields = (0..m)
        .map(|i| {
            let mut v = vec![Expr::zero(); 2 * m + 1];
            v[i] = lam.clone();
            for k in 0..m {
                let s = Expr::sum(
                    (0..m).filter(|j| w[k][*j] != 0).map(|j| Expr::int(w[k][j]) * &h[i][j]).collect(),
                );
                v[m + k] = (&lam * s).simplify();
            }
            v[m + i] = (&v[m + i] + Expr::one()).simplify();
            v
        })
        .collect();
    (chart, fields)
}

/// All brackets `[l_i, l_j]` vanish.
pub fn lax_distribution_check(theta: &Expr, n: usize, opts: &ResidualOptions) -> Result<ResidualReport, PdeError> {
    let (chart, l) = lax_fields(theta, n);
    let mut comps = Vec::new();
    for i in 0..l.len() {
        for j in i + 1..l.len() {
            comps.extend(bracket(&chart, &l[i], &l[j]));
        }
    }
    let mut space = opts.space(n).range("lambda", -2.0, 2.0);
    Ok(expr_check("lax", &comps, &mut space, opts.points, opts.tol)?)
}

#[derive(Clone, Debug, Serialize)]
pub struct JoyceReport {
    pub odd: ResidualReport,
    pub homothety: ResidualReport,
    pub lattice: ResidualReport,
}

impl JoyceReport {
    pub fn pass(&self) -> bool {
        self.odd.pass && self.homothety.pass && self.lattice.pass
    }
}

/// Oddness in `y`, weight `−1` under `x ↦ e^s x`, and `2πi` periodicity in each `y^j`.
pub fn joyce_checks(theta: &Expr, n: usize, opts: &ResidualOptions) -> Result<JoyceReport, PdeError> {
    let m = 2 * n;
    let flip: BTreeMap<String, Expr> = (0..m).map(|i| (y_name(i), -Expr::var(&y_name(i)))).collect();
    let odd = expr_check("odd", &[theta.subs(&flip) + theta], &mut opts.space(n), opts.points, opts.tol)?;
    let euler = Expr::sum((0..m).map(|i| Expr::var(&x_name(i)) * theta.diff(&x_name(i))).collect());
    let homothety =
        expr_check("homothety", &[euler + theta], &mut opts.space(n), opts.points, opts.tol)?;
    let tape = crate::expr::Tape::compile(std::slice::from_ref(theta));
    let mut space = opts.space(n);
    space.declare(tape.var_names().iter().map(String::as_str));
    let shift = C64::new(0.0, 2.0 * std::f64::consts::PI);
    let lattice = sampled_check("lattice", &mut space, opts.points, opts.tol, |p| {
        let base = tape.eval(p)?[0];
        let mut worst = 0.0f64;
        for j in 0..m {
            let y = y_name(j);
            let q: Point = p.shifted(&y, shift);
            worst = worst.max((tape.eval(&q)?[0] - base).norm());
        }
        Ok(worst)
    })?;
    Ok(JoyceReport { odd, homothety, lattice })
}

/// Antiderivative in `var` of an expression polynomial in `var`.
fn integrate_polynomial(e: &Expr, var: &str) -> Result<Expr, PdeError> {
    use crate::expr::Node;
    let fail = || PdeError::NotIntegrable(e.to_string());
    let expanded = e.expand(10_000).ok_or_else(fail)?;
    let terms: Vec<Expr> = match expanded.node() {
        Node::Sum(c) => c.clone(),
        _ => vec![expanded.clone()],
    };
    let mut out = Vec::new();
    for t in terms {
        let factors: Vec<Expr> = match t.node() {
            Node::Product(c) => c.clone(),
            _ => vec![t.clone()],
        };
        let mut deg = 0i64;
        let mut rest = Vec::new();
        for f in factors {
            match f.node() {
                Node::Var(v) if &**v == var => deg += 1,
                Node::Pow(b, k) if b.as_var() == Some(var) => {
                    deg += k.as_num().and_then(|n| n.as_integer()).filter(|k| *k >= 0).ok_or_else(fail)?
                }
                _ if f.depends_on(var) => return Err(fail()),
                _ => rest.push(f),
            }
        }
        let coeff = Expr::product(rest);
        out.push(coeff * Expr::var(var).powi(deg + 1) / Expr::int(deg + 1));
    }
    Ok(Expr::sum(out).simplify())
}

/// `n = 1`: shift `Θ → Θ + y¹ Q₁(x)` so that `C₁₂ = H₁₂` becomes zero.
/// Requires `H₁₂` independent of `y` and polynomial in `x2`.
pub fn normalize_c(theta: &Expr, opts: &ResidualOptions) -> Result<Expr, PdeError> {
    need_n1(theta)?;
    let (rep, c) = weaker_residual(theta, 1, opts)?;
    let Some(c) = c else {
        return Err(PdeError::NotIntegrable(format!("H12 depends on y (residual {})", rep.max_residual)));
    };
    // H'_12 = H_12 + ∂_{x2} Q_1 − ∂_{x1} Q_2; take Q_2 = 0
    let q1 = -integrate_polynomial(&c[0][1], "x2")?;
    Ok((theta + Expr::var("y1") * q1).simplify())
}

/// Cross-check: max |Ricci| over sampled points, jet route (`n = 1`) or finite differences.
pub fn ricci_max(theta: &Expr, n: usize, opts: &ResidualOptions, fd: bool) -> Result<ResidualReport, PdeError> {
    let s = build_normal_form(n, theta.clone())?;
    let mut space = opts.space(n);
    if fd {
        Ok(sampled_check("ricci", &mut space, opts.points, opts.tol, |p| {
            Ok(fd_riemann(s.metric(), p, 1e-3)?.ricci.max_abs())
        })?)
    } else {
        let jet = MetricJet::new(s.metric());
        Ok(sampled_check("ricci", &mut space, opts.points, opts.tol, |p| Ok(jet.eval(p)?.ricci.max_abs()))?)
    }
}

/// Cross-check: `(max |C₊|, max |C₋|)` over sampled points, `n = 1`.
pub fn weyl_parts_max(theta: &Expr, opts: &ResidualOptions) -> Result<(f64, f64), PdeError> {
    need_n1(theta)?;
    let s = build_normal_form(1, theta.clone())?;
    let jet = MetricJet::new(s.metric());
    let mut space = opts.space(1);
    let vals = sample_points(&mut space, opts.points, |p| {
        let c = jet.eval(p)?;
        let w = weyl_split(&c.weyl(), &c.g, &c.ginv, ORIENTATION_SIGN);
        Ok((w.plus.max_abs(), w.minus.max_abs()))
    })?;
    Ok(vals.iter().fold((0.0, 0.0), |(a, b), (_, (p, m))| (f64::max(a, *p), f64::max(b, *m))))
}

/// Ratio `r_{x^i x^j} / f_{y^i y^j}` at a point (FD oracle), taken on the entry
/// where `|f_{y^i y^j}|` is largest.
pub fn ricci_calibration_ratio(theta: &Expr, n: usize, p: &Point) -> Result<f64, PdeError> {
    let s = build_normal_form(n, theta.clone())?;
    let fd = fd_riemann(s.metric(), p, 1e-3)?;
    let f = ricci_potential_f(theta, n);
    let mut best = (0.0f64, 0.0f64);
    for i in 0..2 * n {
        for j in 0..2 * n {
            let fyy = f.diff(&y_name(i)).diff(&y_name(j)).eval_real(p).map_err(GeometryError::from)?;
            if fyy.abs() > best.0.abs() {
                best = (fyy, fd.ricci.at(&[i, j]));
            }
        }
    }
    Ok(best.1 / best.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::parse;
    use crate::expr::symbolic_zero;

    fn e(s: &str) -> Expr {
        parse(s).unwrap()
    }

    fn st(c: &str) -> (Expr, ResidualOptions) {
        let rho = e("y1*x2 - y2*x1");
        let theta = (e(c) / rho.clone()).simplify();
        (theta, ResidualOptions::default().avoid(rho, 0.1))
    }

    #[test]
    fn f_matches_n1_display() {
        let theta = e("y1^3*x2 + x1^2*y2^2*y1 - y2^4*x1 + y1*y2*x2^2");
        assert!(symbolic_zero(&(ricci_potential_f(&theta, 1) - ricci_potential_f_n1(&theta))));
    }

    #[test]
    fn sparling_tod_is_heavenly() {
        let (theta, opts) = st("3");
        assert!(heavenly_residual(&theta, &opts).unwrap().pass);
        assert!(asd_residual(&theta, &opts).unwrap().pass);
    }

    #[test]
    fn heavenly_examples() {
        let o = ResidualOptions::default();
        assert!(heavenly_residual(&e("x1*y1^2"), &o).unwrap().pass);
        let bad = heavenly_residual(&e("y1^2*y2^2"), &o).unwrap();
        assert!(!bad.pass && bad.witness.is_some());
    }

    #[test]
    fn sd_examples() {
        let o = ResidualOptions::default();
        assert!(sd_residual(&e("x1*y1^3 + sin(x2)*y1*y2^2"), &o).unwrap().pass);
        assert!(!sd_residual(&e("y1^4"), &o).unwrap().pass);
        let o = o.avoid(e("x1"), 0.1);
        assert!(!sd_residual(&e("sinh(y1)/x1"), &o).unwrap().pass);
    }

    #[test]
    fn joyce_example() {
        let o = ResidualOptions::default().avoid(e("x1"), 0.1);
        let j = joyce_checks(&e("sinh(y1)/x1"), 1, &o).unwrap();
        assert!(j.pass(), "{j:?}");
        let (h, rep) = hk_hierarchy_residual(&e("sinh(y1)/x1"), 1, &o).unwrap();
        assert!(rep.pass && h[0][1].is_zero_literal());
        assert!(!joyce_checks(&e("cosh(y1)/x1"), 1, &o).unwrap().odd.pass);
        assert!(!joyce_checks(&e("sinh(y1)/x1^2"), 1, &o).unwrap().homothety.pass);
    }

    #[test]
    fn footnote_identity_random_polynomials() {
        for n in 1..=2 {
            let mut rng = <rand_chacha::ChaCha8Rng as rand::SeedableRng>::seed_from_u64(n as u64);
            for _ in 0..5 {
                let theta = crate::nullkahler::random_polynomial_theta(n, 4, &mut rng);
                let r = footnote_residual(&theta, n, &ResidualOptions::default()).unwrap();
                assert!(r.pass, "{theta}: {r:?}");
            }
        }
    }

    #[test]
    fn lax_brackets_follow_hierarchy() {
        let o = ResidualOptions::default().avoid(e("x1"), 0.1);
        assert!(lax_distribution_check(&e("sinh(y1)/x1"), 1, &o).unwrap().pass);
        assert!(lax_distribution_check(&Expr::zero(), 1, &o).unwrap().pass);
        assert!(!lax_distribution_check(&e("y1^2*y2"), 1, &o).unwrap().pass);
        // heavenly solutions with nonzero y-Hessian of the linear part
        let theta = e("-y1^2*y2/(4*x1)");
        assert!(heavenly_residual(&theta, &o).unwrap().pass);
        assert!(hk_hierarchy_residual(&theta, 1, &o).unwrap().1.pass);
        assert!(lax_distribution_check(&theta, 1, &o).unwrap().pass);
    }

    #[test]
    fn weaker_and_normalization() {
        let o = ResidualOptions::default().avoid(e("x1"), 0.1);
        let theta = e("sinh(y1)/x1 + y1*x2^2*x1 + y2*x1^3");
        let (rep, c) = weaker_residual(&theta, 1, &o).unwrap();
        assert!(rep.pass);
        assert!(!c.unwrap()[0][1].is_zero_literal());
        let fixed = normalize_c(&theta, &o).unwrap();
        assert!(hk_hierarchy_residual(&fixed, 1, &o).unwrap().1.pass);
        assert!(!weaker_residual(&e("y1^2*y2"), 1, &o).unwrap().0.pass);
    }

    #[test]
    fn einstein_examples() {
        let (theta, opts) = st("2");
        assert!(einstein_residual(&theta, 1, &Expr::zero(), &[Expr::zero(), Expr::zero()], &opts).unwrap().pass);
        let r = einstein_residual(&e("y1^2*y2^2"), 1, &Expr::zero(), &[Expr::zero(), Expr::zero()], &opts).unwrap();
        assert!(!r.pass);
    }

    #[test]
    fn calibration_constant() {
        let theta = e("y1^3*x2 + x1^2*y2^2*y1 - y2^4*x1 + y1*y2*x2^2");
        let p = Point::from_real(&[("x1", 0.4), ("x2", -0.3), ("y1", 0.7), ("y2", 1.1)]);
        let r = ricci_calibration_ratio(&theta, 1, &p).unwrap();
        assert!((r - RICCI_CALIBRATION).abs() < 1e-5 * RICCI_CALIBRATION, "{r}");
    }
}
