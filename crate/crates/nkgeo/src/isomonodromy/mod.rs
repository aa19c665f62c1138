//! The flow `Ṗ = 0, Q̇ = ½[R,Q] + ½P, Ṙ = ½[P,Q]`, its Lax pair
//! `A = Q + λR + λ²P`, `B = ½R + ½λP`, and the three gauge classes.

mod numeric;

pub use numeric::{
    alt_frame_check, alt_frame_rhs, classify_gauge, flatness_check, flow_rhs, integrate_flow, integrate_unknowns,
    trajectory_check, AltFrameReport, ConstantPair, GaugeClass, LaxSystem, M2, NumericLax,
    Perturbed, Rectangle, Trajectory, TrajectoryRow,
};

use std::collections::BTreeMap;

use crate::expr::{parse, symbolic_zero, Derivation, Expr, SampleSpace};
use crate::geometry::GeometryError;
use crate::ode::OdeError;
use crate::report::{expr_check, ResidualReport};
use crate::sl2::ExprMat2;

pub const LAMBDA: &str = "lam";

#[derive(Debug, thiserror::Error)]
pub enum IsoError {
    #[error("P vanishes; the gauge class is undefined")]
    ZeroP,
    #[error("classification is borderline: {0}")]
    Borderline(String),
    #[error("u vanishes")]
    ZeroU,
    #[error("r1 is constant: this branch gives a degenerate tetrad")]
    SingularBranch,
    #[error("gauge matrix is singular")]
    SingularGauge,
    #[error("unbound symbol {0} in a numeric Lax system")]
    Unbound(String),
    #[error(transparent)]
    Ode(#[from] OdeError),
    #[error(transparent)]
    Geometry(#[from] GeometryError),
}

fn e(s: &str) -> Expr {
    parse(s).expect("built-in expression")
}

fn l(k1: Expr, k2: Expr, k3: Expr) -> ExprMat2 {
    ExprMat2::from_coeffs([k1, k2, k3])
}

/// `(Ṗ, Q̇, Ṙ)` of the flow, symbolically.
pub fn flow_rhs_expr(p: &ExprMat2, q: &ExprMat2, r: &ExprMat2) -> [ExprMat2; 3] {
    let half = Expr::rational(1, 2);
    [
        ExprMat2::zero(),
        r.commutator(q).add(p).scale(&half),
        p.commutator(q).scale(&half),
    ]
}

/// Lax pair with `A, B` matrices of expressions in `t`, `λ` and unknowns.
#[derive(Clone, Debug)]
pub struct LaxPair {
    pub a: ExprMat2,
    pub b: ExprMat2,
}

impl LaxPair {
    /// `A = Q + λR + λ²P`, `B = ½R + ½λP`.
    pub fn default_gauge(p: &ExprMat2, q: &ExprMat2, r: &ExprMat2) -> LaxPair {
        let lam = Expr::var(LAMBDA);
        let half = Expr::rational(1, 2);
        LaxPair {
            a: q.add(&r.scale(&lam)).add(&p.scale(&lam.sqr())),
            b: r.add(&p.scale(&lam)).scale(&half),
        }
    }

    /// `∂_t A − ∂_λ B + [A, B]` with `∂_t` the given total derivative.
    pub fn compatibility_residual(&self, dt: &Derivation) -> ExprMat2 {
        self.a
            .derive(dt)
            .sub(&self.b.diff(LAMBDA))
            .add(&self.a.commutator(&self.b))
            .simplify()
    }

    /// `A → γAγ⁻¹ + ∂_λγ γ⁻¹`, `B → γBγ⁻¹ + ∂_tγ γ⁻¹`.
    pub fn gauge_transform(&self, gamma: &ExprMat2, dt: &Derivation) -> Result<LaxPair, IsoError> {
        if gamma.det().simplify().is_zero_literal() {
            return Err(IsoError::SingularGauge);
        }
        let gi = gamma.inverse();
        let conj = |m: &ExprMat2| gamma.mul(m).mul(&gi);
        Ok(LaxPair {
            a: conj(&self.a).add(&gamma.diff(LAMBDA).mul(&gi)).simplify(),
            b: conj(&self.b).add(&gamma.derive(dt).mul(&gi)).simplify(),
        })
    }
}

/// `γ(t) = [[e^{at}, b sin t], [ct, e^{−at}(1 + bct sin t)]]`, unimodular for all `t`.
pub fn random_gauge(seed: u64) -> ExprMat2 {
    use rand::{Rng, SeedableRng};
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let mut k = || Expr::decimal(rng.gen_range(-1.0..1.0));
    let (a, b, c) = (k(), k(), k());
    let t = Expr::var("t");
    let at = &a * &t;
    ExprMat2::new(
        at.clone().exp(),
        &b * t.clone().sin(),
        &c * &t,
        (-at).exp() * (Expr::one() + &b * &c * &t * t.clone().sin()),
    )
}

/// Entries of `res(γ·pair) − γ res(pair) γ⁻¹`, which vanish for any `γ(t)`.
pub fn gauge_covariance_defect(
    pair: &LaxPair,
    gamma: &ExprMat2,
    dt: &Derivation,
) -> Result<Vec<Expr>, IsoError> {
    let moved = pair.gauge_transform(gamma, dt)?.compatibility_residual(dt);
    let conj = gamma.mul(&pair.compatibility_residual(dt)).mul(&gamma.inverse());
    Ok(moved.sub(&conj).entries().cloned().collect())
}

/// Coefficients of `λ⁰ … λ^max` of a matrix polynomial in `λ`.
pub fn lambda_coefficients(m: &ExprMat2, max_degree: usize) -> Vec<ExprMat2> {
    let zero = Expr::zero();
    let mut out = Vec::new();
    let mut cur = m.clone();
    let mut fact = 1i64;
    for k in 0..=max_degree {
        if k > 0 {
            fact *= k as i64;
            cur = cur.diff(LAMBDA).simplify();
        }
        out.push(cur.subs_one(LAMBDA, &zero).scale(&Expr::rational(1, fact)).simplify());
    }
    out
}

/// `t` derivative with the unknowns' rates.
pub fn time_derivation(rates: &[(String, Expr)]) -> Derivation {
    let mut d = Derivation::partial("t");
    for (v, r) in rates {
        d.set(v, r.clone());
    }
    d
}

/// Expands the compatibility condition of the default-gauge pair for generic
/// `P, Q, R` (nine unknown functions with independent derivative symbols) and
/// compares each `λ` coefficient with the corresponding flow equation:
/// `λ⁰ ↔ Q̇`, `λ¹ ↔ Ṙ`, `λ² ↔ Ṗ`, `λ³ ↔ 0`.
pub fn compatibility_matches_flow(
    space: &mut SampleSpace,
    points: usize,
) -> Result<ResidualReport, GeometryError> {
    let mut rates = Vec::new();
    let mut mk = |m: &str| {
        let ks: Vec<Expr> = (1..=3)
            .map(|i| {
                let name = format!("{m}{i}");
                rates.push((name.clone(), Expr::var(&format!("d{m}{i}"))));
                Expr::var(&name)
            })
            .collect();
        l(ks[0].clone(), ks[1].clone(), ks[2].clone())
    };
    let (p, q, r) = (mk("p"), mk("q"), mk("r"));
    let dt = time_derivation(&rates);
    let res = LaxPair::default_gauge(&p, &q, &r).compatibility_residual(&dt);
    let coeffs = lambda_coefficients(&res, 4);
    let [fp, fq, fr] = flow_rhs_expr(&p, &q, &r);
    let expect = [
        q.derive(&dt).sub(&fq),
        r.derive(&dt).sub(&fr),
        p.derive(&dt).sub(&fp),
        ExprMat2::zero(),
        ExprMat2::zero(),
    ];
    let diffs: Vec<Expr> = coeffs
        .iter()
        .zip(&expect)
        .flat_map(|(c, w)| c.sub(w).simplify().entries().cloned().collect::<Vec<_>>())
        .collect();
    expr_check("compatibility_is_flow", &diffs, space, points, 1e-12)
}

/// One of the explicit solutions: `P, Q, R` in terms of unknowns of `t`, the
/// unknowns' rates, and the extra term added to `B` by the gauge choice.
#[derive(Clone, Debug)]
pub struct Parametrization {
    pub name: String,
    pub p: ExprMat2,
    pub q: ExprMat2,
    pub r: ExprMat2,
    /// `B = ½R + ½λP + b_shift`.
    pub b_shift: ExprMat2,
    pub rates: Vec<(String, Expr)>,
}

impl Parametrization {
    pub fn derivation(&self) -> Derivation {
        time_derivation(&self.rates)
    }

    pub fn lax_pair(&self) -> LaxPair {
        let mut lp = LaxPair::default_gauge(&self.p, &self.q, &self.r);
        lp.b = lp.b.add(&self.b_shift);
        lp
    }

    pub fn compatibility(&self) -> ExprMat2 {
        self.lax_pair().compatibility_residual(&self.derivation())
    }

    /// Flow residuals `Ṗ − …, Q̇ − …, Ṙ − …` (meaningful in the default gauge).
    pub fn flow_residual(&self) -> [ExprMat2; 3] {
        let dt = self.derivation();
        let [fp, fq, fr] = flow_rhs_expr(&self.p, &self.q, &self.r);
        [
            self.p.derive(&dt).sub(&fp).simplify(),
            self.q.derive(&dt).sub(&fq).simplify(),
            self.r.derive(&dt).sub(&fr).simplify(),
        ]
    }

    /// Replace the rate of one unknown (used for negative controls).
    pub fn with_rate(&self, var: &str, rate: Expr) -> Parametrization {
        let mut out = self.clone();
        for (v, r) in out.rates.iter_mut() {
            if v == var {
                *r = rate.clone();
            }
        }
        out
    }

    pub fn unknowns(&self) -> Vec<String> {
        self.rates.iter().map(|(v, _)| v.clone()).collect()
    }

    /// Compatibility residual entries, zero-tested.
    pub fn check_compatibility(
        &self,
        space: &mut SampleSpace,
        points: usize,
        tol: f64,
    ) -> Result<ResidualReport, GeometryError> {
        let c: Vec<Expr> = self.compatibility().entries().cloned().collect();
        expr_check(&format!("{}_compatibility", self.name), &c, space, points, tol)
    }
}

/// Painlevé II normal form:
///
/// ```text
/// P = 2L₁,  R = uL₂ − 2(z/u)L₃,  Q = (2z + t)L₁ − uyL₂ − ((2yz + 1 − 2α)/u)L₃
/// u̇ = −yu,  ż = −2yz + α − ½,  ẏ = z + y² + t/2
/// ```
pub fn pii_parametrization(alpha: &Expr) -> Parametrization {
    let (y, z, u, t) = (Expr::var("y"), Expr::var("z"), Expr::var("u"), Expr::var("t"));
    let two = Expr::int(2);
    let p = l(two.clone(), Expr::zero(), Expr::zero());
    let r = l(Expr::zero(), u.clone(), -(&two * &z / &u));
    let l3 = -((&two * &y * &z + Expr::one() - &two * alpha) / &u);
    let q = l(&two * &z + &t, -(&u * &y), l3);
    Parametrization {
        name: "PII".into(),
        p,
        q,
        r,
        b_shift: ExprMat2::zero(),
        rates: vec![
            ("u".into(), -(&y * &u)),
            ("y".into(), &z + y.sqr() + &t / Expr::int(2)),
            ("z".into(), -(&two * &y * &z) + alpha - Expr::rational(1, 2)),
        ],
    }
}

/// `u ≠ 0` guard for a numeric PII state.
pub fn pii_check_u(u: f64) -> Result<(), IsoError> {
    if u == 0.0 {
        Err(IsoError::ZeroU)
    } else {
        Ok(())
    }
}

/// Painlevé I after the gauge `∂_tγ γ⁻¹ = ½yP`:
///
/// ```text
/// P = L₂,  R = yL₂ + 4L₃,  Q = −2zL₁ + (y² + t/2)L₂ − 4yL₃,  B = ½(R + yL₂) + ½λP
/// ẏ = z,  ż = 6y² + t
/// ```
pub fn pi_parametrization() -> Parametrization {
    let (y, z, t) = (Expr::var("y"), Expr::var("z"), Expr::var("t"));
    Parametrization {
        name: "PI".into(),
        p: l(Expr::zero(), Expr::one(), Expr::zero()),
        q: l(Expr::int(-2) * &z, y.sqr() + &t / Expr::int(2), Expr::int(-4) * &y),
        r: l(Expr::zero(), y.clone(), Expr::int(4)),
        b_shift: l(Expr::zero(), &y / Expr::int(2), Expr::zero()),
        rates: vec![("y".into(), z.clone()), ("z".into(), Expr::int(6) * y.sqr() + &t)],
    }
}

/// `γ = exp(w L₂)` with `ẇ = ½y`, relating the default and PI gauges.
pub fn pi_gauge() -> (ExprMat2, (String, Expr)) {
    let gamma = ExprMat2::new(Expr::one(), Expr::var("w"), Expr::zero(), Expr::one());
    (gamma, ("w".into(), e("y/2")))
}

/// Nilpotent case with `Tr(PR) = 0`: `P = L₂`, `R = r₁L₁ + r₂L₂`,
/// `Q = −2ṙ₂ L₁ + q₂ L₂ + ṙ₁ L₃`.
pub fn solvable_state(r1: &Expr, r2: &Expr, q2: &Expr) -> Result<Parametrization, IsoError> {
    let d1 = r1.diff("t").simplify();
    if symbolic_zero(&d1) {
        return Err(IsoError::SingularBranch);
    }
    let d2 = r2.diff("t").simplify();
    Ok(Parametrization {
        name: "solvable".into(),
        p: l(Expr::zero(), Expr::one(), Expr::zero()),
        q: l(Expr::int(-2) * d2, q2.clone(), d1),
        r: l(r1.clone(), r2.clone(), Expr::zero()),
        b_shift: ExprMat2::zero(),
        rates: Vec::new(),
    })
}

/// Closed forms `r₁ = 4 tanh t`, `r₂ = (a + bt) r₁ − 4b`,
/// `q₂ = ¼ sinh 2t − d/dt((a + bt) r₂) + c cosh² t`.
pub fn solvable_closed_form(a: &Expr, b: &Expr, c: &Expr) -> (Expr, Expr, Expr) {
    let t = Expr::var("t");
    let s = a + b * &t;
    let r1 = Expr::int(4) * t.clone().tanh();
    let r2 = &s * &r1 - Expr::int(4) * b;
    let q2 = (Expr::int(2) * &t).sinh() / Expr::int(4) - (&s * &r2).diff("t")
        + c * t.clone().cosh().sqr();
    (r1, r2, q2.simplify())
}

pub fn solvable_solution(a: &Expr, b: &Expr, c: &Expr) -> Parametrization {
    let (r1, r2, q2) = solvable_closed_form(a, b, c);
    solvable_state(&r1, &r2, &q2).expect("tanh is not constant")
}

/// The three scalar equations of the nilpotent, trace-free case:
/// `2r̈₁ + ṙ₁r₁`, `2r̈₂ + ṙ₁r₂`, `2q̇₂ − 2r₂ṙ₂ − q₂r₁ − 1`.
pub fn solvable_equations(r1: &Expr, r2: &Expr, q2: &Expr) -> [Expr; 3] {
    let d = |x: &Expr| x.diff("t");
    let two = Expr::int(2);
    [
        (&two * d(&d(r1)) + d(r1) * r1).simplify(),
        (&two * d(&d(r2)) + d(r1) * r2).simplify(),
        (&two * d(q2) - &two * r2 * d(r2) - q2 * r1 - Expr::one()).simplify(),
    ]
}

/// Substitution map for numeric parameter values.
pub fn params(pairs: &[(&str, f64)]) -> BTreeMap<String, Expr> {
    pairs.iter().map(|(k, v)| (k.to_string(), Expr::decimal(*v))).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::Point;

    fn space() -> SampleSpace {
        SampleSpace::new(7).range("u", 0.5, 2.0).range("t", -1.0, 1.0)
    }

    #[test]
    fn compatibility_expands_to_flow() {
        let rep = compatibility_matches_flow(&mut space(), 20).unwrap();
        assert!(rep.pass && rep.symbolic_zero, "{rep:?}");
    }

    #[test]
    fn pii_flow_holds_identically() {
        for alpha in [0.0, 1.0, 0.3] {
            let p = pii_parametrization(&Expr::decimal(alpha));
            let res: Vec<Expr> = p.flow_residual().iter().flat_map(|m| m.entries().cloned().collect::<Vec<_>>()).collect();
            let rep = expr_check("pii", &res, &mut space(), 20, 1e-10).unwrap();
            assert!(rep.pass, "{rep:?}");
        }
    }

    #[test]
    fn pii_alpha_sabotage_fails() {
        let p = pii_parametrization(&Expr::zero());
        let bad = p.with_rate("z", e("-2*y*z + 1 - 1/2"));
        let rep = bad.check_compatibility(&mut space(), 20, 1e-10).unwrap();
        assert!(!rep.pass && rep.witness.is_some());
    }

    #[test]
    fn pi_compatibility_and_sabotage() {
        let p = pi_parametrization();
        assert!(p.check_compatibility(&mut space(), 20, 1e-10).unwrap().pass);
        let bad = p.with_rate("z", e("6*y^2 + t + 1"));
        assert!(!bad.check_compatibility(&mut space(), 20, 1e-10).unwrap().pass);
        // y = Tr(R²)/8
        let r2 = p.r.mul(&p.r).trace();
        assert!(symbolic_zero(&(r2 / Expr::int(8) - Expr::var("y"))));
    }

    #[test]
    fn pi_gauge_relates_default_pair() {
        let pi = pi_parametrization();
        let (gamma, rate) = pi_gauge();
        let mut rates = pi.rates.clone();
        rates.push(rate);
        let dt = time_derivation(&rates);
        // default-gauge data γ⁻¹(P, Q, R)γ maps onto the PI pair
        let gi = gamma.inverse();
        let back = |m: &ExprMat2| gi.mul(m).mul(&gamma).simplify();
        let default = LaxPair::default_gauge(&back(&pi.p), &back(&pi.q), &back(&pi.r));
        let moved = default.gauge_transform(&gamma, &dt).unwrap();
        let target = pi.lax_pair();
        let diffs: Vec<Expr> = moved
            .a
            .sub(&target.a)
            .entries()
            .chain(moved.b.sub(&target.b).entries())
            .map(|x| x.simplify())
            .collect();
        let rep = expr_check("gauge", &diffs, &mut space(), 20, 1e-10).unwrap();
        assert!(rep.pass, "{rep:?}");
    }

    #[test]
    fn solvable_closed_forms() {
        let (a, b, c) = (e("a"), e("b"), e("c"));
        let (r1, r2, q2) = solvable_closed_form(&a, &b, &c);
        let eqs = solvable_equations(&r1, &r2, &q2);
        let mut sp = SampleSpace::new(3).range("t", 0.2, 1.5);
        let rep = expr_check("casel3", &eqs, &mut sp, 20, 1e-9).unwrap();
        assert!(rep.pass && rep.symbolic_zero, "{rep:?}");
        let flow = solvable_solution(&a, &b, &c).flow_residual();
        let ent: Vec<Expr> = flow.iter().flat_map(|m| m.entries().cloned().collect::<Vec<_>>()).collect();
        assert!(expr_check("flow", &ent, &mut sp, 20, 1e-9).unwrap().pass);
    }

    #[test]
    fn constant_r1_rejected() {
        assert!(matches!(
            solvable_state(&Expr::int(3), &Expr::var("t"), &Expr::zero()),
            Err(IsoError::SingularBranch)
        ));
    }

    #[test]
    fn residual_is_gauge_covariant() {
        // an incompatible pair, so the residual itself is nonzero
        let pii = pii_parametrization(&Expr::zero()).with_rate("z", e("y + t"));
        let dt = pii.derivation();
        for seed in 0..10 {
            let d = gauge_covariance_defect(&pii.lax_pair(), &random_gauge(seed), &dt).unwrap();
            let rep = expr_check("covariance", &d, &mut space(), 5, 1e-9).unwrap();
            assert!(rep.pass, "{rep:?}");
        }
    }

    #[test]
    fn singular_gauge_rejected() {
        let pii = pii_parametrization(&Expr::zero());
        let g = ExprMat2::new(Expr::one(), Expr::one(), Expr::one(), Expr::one());
        assert!(matches!(pii.lax_pair().gauge_transform(&g, &pii.derivation()), Err(IsoError::SingularGauge)));
    }

    #[test]
    fn identity_gauge_is_trivial() {
        let pii = pii_parametrization(&Expr::zero());
        let lp = pii.lax_pair();
        let moved = lp.gauge_transform(&ExprMat2::identity(), &pii.derivation()).unwrap();
        let p = Point::from_real(&[("t", 0.3), ("lam", 0.7), ("y", 0.1), ("z", 0.2), ("u", 1.1)]);
        assert_eq!(moved.a.eval(&p).unwrap(), lp.a.eval(&p).unwrap());
    }
}
