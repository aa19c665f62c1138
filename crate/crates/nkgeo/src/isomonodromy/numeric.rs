use nalgebra::Matrix2;
use serde::Serialize;

use super::{IsoError, LaxPair, Parametrization, LAMBDA};
use crate::expr::{Expr, Tape, C64};
use crate::ode::{solve_at, OdeOptions};
use crate::sl2::ExprMat2;

/// Real 2×2 matrix.
pub type M2 = Matrix2<f64>;

fn comm(a: &M2, b: &M2) -> M2 {
    a * b - b * a
}

/// `(Ṗ, Q̇, Ṙ) = (0, ½[R,Q] + ½P, ½[P,Q])`.
pub fn flow_rhs(p: &M2, q: &M2, r: &M2) -> (M2, M2, M2) {
    (M2::zeros(), 0.5 * (comm(r, q) + p), 0.5 * comm(p, q))
}

/// Right-hand side of the system written in the frame with `B = ¼R + ½λP`:
/// `Ṗ = ¼[P,R]`, `Q̇ = ¼[R,Q] + ½P`, `Ṙ = ½[P,Q]`.
pub fn alt_frame_rhs(p: &M2, q: &M2, r: &M2) -> (M2, M2, M2) {
    (0.25 * comm(p, r), 0.25 * comm(r, q) + 0.5 * p, 0.5 * comm(p, q))
}

fn pack(ms: &[&M2], out: &mut [f64]) {
    for (k, m) in ms.iter().enumerate() {
        out[4 * k] = m[(0, 0)];
        out[4 * k + 1] = m[(0, 1)];
        out[4 * k + 2] = m[(1, 0)];
        out[4 * k + 3] = m[(1, 1)];
    }
}

fn unpack(y: &[f64], k: usize) -> M2 {
    M2::new(y[4 * k], y[4 * k + 1], y[4 * k + 2], y[4 * k + 3])
}

/// Integrate the flow from `(P, Q, R)` at `t0` and return the state at each output time.
pub fn integrate_flow(
    state: [M2; 3],
    t0: f64,
    outputs: &[f64],
    opts: &OdeOptions,
) -> Result<Vec<[M2; 3]>, IsoError> {
    let mut y0 = vec![0.0; 12];
    pack(&[&state[0], &state[1], &state[2]], &mut y0);
    let ys = solve_at(
        |_, y, d| {
            let (dp, dq, dr) = flow_rhs(&unpack(y, 0), &unpack(y, 1), &unpack(y, 2));
            pack(&[&dp, &dq, &dr], d);
        },
        t0,
        &y0,
        outputs,
        opts,
    )?;
    Ok(ys.iter().map(|y| [unpack(y, 0), unpack(y, 1), unpack(y, 2)]).collect())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum GaugeClass {
    PainleveII,
    PainleveI,
    Solvable,
}

impl GaugeClass {
    pub fn label(self) -> &'static str {
        match self {
            GaugeClass::PainleveII => "PII",
            GaugeClass::PainleveI => "PI",
            GaugeClass::Solvable => "solvable",
        }
    }
}

/// Values below `tol` count as zero; values in `[tol, 100 tol)` are rejected.
const BORDER: f64 = 100.0;

/// Classify by the eigenstructure of `P` and `Tr(PR)`.
///
/// For trace-free `P` the discriminant of the characteristic polynomial is
/// `−4 det P`, so `P` has distinct eigenvalues exactly when `det P ≠ 0`, and is
/// nilpotent otherwise. Both quantities are conjugation invariant.
pub fn classify_gauge(p: &M2, r: &M2, tol: f64) -> Result<GaugeClass, IsoError> {
    let np = p.norm();
    if np < tol {
        return Err(IsoError::ZeroP);
    }
    let disc = -4.0 * p.determinant() / (np * np);
    let zero = |v: f64, what: &str| -> Result<bool, IsoError> {
        let a = v.abs();
        if a < tol {
            Ok(true)
        } else if a < BORDER * tol {
            Err(IsoError::Borderline(format!("{what} = {v:e}")))
        } else {
            Ok(false)
        }
    };
    if !zero(disc, "discriminant")? {
        return Ok(GaugeClass::PainleveII);
    }
    let tr = (p * r).trace() / (np * r.norm().max(1.0));
    if zero(tr, "Tr(PR)")? {
        Ok(GaugeClass::Solvable)
    } else {
        Ok(GaugeClass::PainleveI)
    }
}

/// Numeric `A(t, λ)`, `B(t, λ)` with auxiliary unknowns evolving by their own ODE.
pub trait LaxSystem {
    fn aux_dim(&self) -> usize;
    fn aux_rhs(&self, t: f64, aux: &[f64], out: &mut [f64]);
    fn a(&self, t: f64, lambda: f64, aux: &[f64]) -> M2;
    fn b(&self, t: f64, lambda: f64, aux: &[f64]) -> M2;
}

/// Tape whose variables are drawn from a fixed slot list.
#[derive(Clone, Debug)]
struct SlotTape {
    tape: Tape,
    slots: Vec<usize>,
}

impl SlotTape {
    fn new(exprs: &[Expr], names: &[String]) -> Result<SlotTape, IsoError> {
        let tape = Tape::compile(exprs);
        let slots = tape
            .var_names()
            .iter()
            .map(|v| names.iter().position(|n| n == v).ok_or_else(|| IsoError::Unbound(v.clone())))
            .collect::<Result<_, _>>()?;
        Ok(SlotTape { tape, slots })
    }

    fn eval(&self, vals: &[f64]) -> Vec<f64> {
        let inputs: Vec<C64> = self.slots.iter().map(|&i| C64::new(vals[i], 0.0)).collect();
        let mut scratch = Vec::new();
        let mut out = vec![C64::new(0.0, 0.0); self.tape.num_outputs()];
        match self.tape.eval_slots(&inputs, &mut scratch, &mut out) {
            Ok(()) => out.iter().map(|z| z.re).collect(),
            Err(_) => vec![f64::NAN; out.len()],
        }
    }
}

/// A symbolic Lax pair compiled for fast evaluation; variables are `t`, `λ`
/// and the unknowns in the order of `rates`.
#[derive(Clone, Debug)]
pub struct NumericLax {
    pub unknowns: Vec<String>,
    a: SlotTape,
    b: SlotTape,
    rates: SlotTape,
}

impl NumericLax {
    pub fn new(pair: &LaxPair, rates: &[(String, Expr)]) -> Result<NumericLax, IsoError> {
        let unknowns: Vec<String> = rates.iter().map(|(v, _)| v.clone()).collect();
        let mut names = vec!["t".to_string(), LAMBDA.to_string()];
        names.extend(unknowns.iter().cloned());
        let ent = |m: &ExprMat2| m.entries().cloned().collect::<Vec<_>>();
        let rate_exprs: Vec<Expr> = rates.iter().map(|(_, r)| r.clone()).collect();
        Ok(NumericLax {
            a: SlotTape::new(&ent(&pair.a), &names)?,
            b: SlotTape::new(&ent(&pair.b), &names)?,
            rates: SlotTape::new(&rate_exprs, &names)?,
            unknowns,
        })
    }

    pub fn from_parametrization(p: &Parametrization) -> Result<NumericLax, IsoError> {
        NumericLax::new(&p.lax_pair(), &p.rates)
    }

    fn vals(t: f64, lambda: f64, aux: &[f64]) -> Vec<f64> {
        let mut v = Vec::with_capacity(aux.len() + 2);
        v.push(t);
        v.push(lambda);
        v.extend_from_slice(aux);
        v
    }
}

fn m2(v: &[f64]) -> M2 {
    M2::new(v[0], v[1], v[2], v[3])
}

impl LaxSystem for NumericLax {
    fn aux_dim(&self) -> usize {
        self.unknowns.len()
    }

    fn aux_rhs(&self, t: f64, aux: &[f64], out: &mut [f64]) {
        out.copy_from_slice(&self.rates.eval(&Self::vals(t, 0.0, aux)));
    }

    fn a(&self, t: f64, lambda: f64, aux: &[f64]) -> M2 {
        m2(&self.a.eval(&Self::vals(t, lambda, aux)))
    }

    fn b(&self, t: f64, lambda: f64, aux: &[f64]) -> M2 {
        m2(&self.b.eval(&Self::vals(t, lambda, aux)))
    }
}

/// `A = Σ λᵏ Aₖ`, `B = Σ λᵏ Bₖ` with constant coefficients.
#[derive(Clone, Debug)]
pub struct ConstantPair {
    pub a: Vec<M2>,
    pub b: Vec<M2>,
}

fn poly(cs: &[M2], lambda: f64) -> M2 {
    cs.iter().rev().fold(M2::zeros(), |acc, c| acc * lambda + c)
}

impl ConstantPair {
    /// Entries uniform in `[−1, 1]`, trace removed; `degree` is the top power of `λ` in `A`.
    pub fn random(seed: u64, degree: usize) -> ConstantPair {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let mut m = || {
            let mut x = M2::from_fn(|_, _| rng.gen_range(-1.0..1.0));
            let tr = x.trace() / 2.0;
            x[(0, 0)] -= tr;
            x[(1, 1)] -= tr;
            x
        };
        ConstantPair { a: (0..=degree).map(|_| m()).collect(), b: (0..2).map(|_| m()).collect() }
    }
}

impl LaxSystem for ConstantPair {
    fn aux_dim(&self) -> usize {
        0
    }
    fn aux_rhs(&self, _: f64, _: &[f64], _: &mut [f64]) {}
    fn a(&self, _: f64, lambda: f64, _: &[f64]) -> M2 {
        poly(&self.a, lambda)
    }
    fn b(&self, _: f64, lambda: f64, _: &[f64]) -> M2 {
        poly(&self.b, lambda)
    }
}

/// `B → B + ε M` on top of another system.
pub struct Perturbed<'a, S: LaxSystem> {
    pub inner: &'a S,
    pub shift: M2,
}

impl<S: LaxSystem> LaxSystem for Perturbed<'_, S> {
    fn aux_dim(&self) -> usize {
        self.inner.aux_dim()
    }
    fn aux_rhs(&self, t: f64, aux: &[f64], out: &mut [f64]) {
        self.inner.aux_rhs(t, aux, out)
    }
    fn a(&self, t: f64, lambda: f64, aux: &[f64]) -> M2 {
        self.inner.a(t, lambda, aux)
    }
    fn b(&self, t: f64, lambda: f64, aux: &[f64]) -> M2 {
        self.inner.b(t, lambda, aux) + self.shift
    }
}

impl<'a, S: LaxSystem> Perturbed<'a, S> {
    pub fn new(inner: &'a S, shift: M2) -> Self {
        Perturbed { inner, shift }
    }
}

#[derive(Clone, Copy, Debug, Serialize)]
pub struct Rectangle {
    pub lambda0: f64,
    pub lambda1: f64,
    pub t0: f64,
    pub t1: f64,
}

impl Rectangle {
    pub fn new(lambda: (f64, f64), t: (f64, f64)) -> Rectangle {
        Rectangle { lambda0: lambda.0, lambda1: lambda.1, t0: t.0, t1: t.1 }
    }

    /// Same corner, both sides scaled by `s`.
    pub fn scaled(&self, s: f64) -> Rectangle {
        Rectangle {
            lambda1: self.lambda0 + s * (self.lambda1 - self.lambda0),
            t1: self.t0 + s * (self.t1 - self.t0),
            ..*self
        }
    }
}

/// `Ψ' = A(t, ·)Ψ` along `λ` at fixed `t` and aux values.
fn along_lambda<S: LaxSystem>(
    sys: &S,
    psi: M2,
    t: f64,
    aux: &[f64],
    l0: f64,
    l1: f64,
    opts: &OdeOptions,
) -> Result<M2, IsoError> {
    let mut y = vec![0.0; 4];
    pack(&[&psi], &mut y);
    let out = solve_at(
        |l, y, d| {
            let v = sys.a(t, l, aux) * unpack(y, 0);
            pack(&[&v], d);
        },
        l0,
        &y,
        &[l1],
        opts,
    )?;
    Ok(unpack(&out[0], 0))
}

/// `Ψ' = B(·, λ)Ψ` along `t`, with the aux unknowns carried along.
fn along_t<S: LaxSystem>(
    sys: &S,
    psi: M2,
    lambda: f64,
    aux: &[f64],
    t0: f64,
    t1: f64,
    opts: &OdeOptions,
) -> Result<(M2, Vec<f64>), IsoError> {
    let n = sys.aux_dim();
    let mut y = vec![0.0; 4 + n];
    pack(&[&psi], &mut y);
    y[4..].copy_from_slice(aux);
    let out = solve_at(
        |t, y, d| {
            let v = sys.b(t, lambda, &y[4..]) * unpack(y, 0);
            pack(&[&v], d);
            sys.aux_rhs(t, &y[4..], &mut d[4..]);
        },
        t0,
        &y,
        &[t1],
        opts,
    )?;
    Ok((unpack(&out[0], 0), out[0][4..].to_vec()))
}

/// Path-independence defect `‖Ψ₁ − Ψ₂‖` (Frobenius) of the fundamental
/// solution around the rectangle, with `Ψ = I` at `(λ₀, t₀)` and the aux
/// unknowns equal to `aux0` at `t₀`. Path 1 runs along `λ` first, path 2 along `t` first.
pub fn flatness_check<S: LaxSystem>(
    sys: &S,
    rect: &Rectangle,
    aux0: &[f64],
    opts: &OdeOptions,
) -> Result<f64, IsoError> {
    let id = M2::identity();
    let p1 = along_lambda(sys, id, rect.t0, aux0, rect.lambda0, rect.lambda1, opts)?;
    let (p1, _) = along_t(sys, p1, rect.lambda1, aux0, rect.t0, rect.t1, opts)?;
    let (p2, aux1) = along_t(sys, id, rect.lambda0, aux0, rect.t0, rect.t1, opts)?;
    let p2 = along_lambda(sys, p2, rect.t1, &aux1, rect.lambda0, rect.lambda1, opts)?;
    Ok((p1 - p2).norm())
}

/// Integrate `v̇ = rate_v(t, unknowns)` and return the unknowns at each output time.
pub fn integrate_unknowns(
    rates: &[(String, Expr)],
    t0: f64,
    start: &[f64],
    outputs: &[f64],
    opts: &OdeOptions,
) -> Result<Vec<Vec<f64>>, IsoError> {
    let mut names = vec!["t".to_string()];
    names.extend(rates.iter().map(|(v, _)| v.clone()));
    let tape = SlotTape::new(&rates.iter().map(|(_, e)| e.clone()).collect::<Vec<_>>(), &names)?;
    let mut buf = vec![0.0; names.len()];
    Ok(solve_at(
        |t, y, d| {
            buf[0] = t;
            buf[1..].copy_from_slice(y);
            d.copy_from_slice(&tape.eval(&buf));
        },
        t0,
        start,
        outputs,
        opts,
    )?)
}

#[derive(Clone, Debug, Serialize)]
pub struct TrajectoryRow {
    pub t: f64,
    pub aux: Vec<f64>,
    /// `P, Q, R` from the parametrization evaluated on the aux trajectory, row-major entries.
    pub state: [[f64; 4]; 3],
    /// `‖ΔP‖ + ‖ΔQ‖ + ‖ΔR‖` against the directly integrated matrix flow.
    pub residual: f64,
    /// `|Tr P| + |Tr Q| + |Tr R|` of the integrated flow.
    pub trace: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct Trajectory {
    pub name: String,
    pub unknowns: Vec<String>,
    pub rows: Vec<TrajectoryRow>,
    pub max_residual: f64,
    /// `max ‖P(t) − P(t₀)‖` along the integrated flow.
    pub p_drift: f64,
}

fn flat(m: &M2) -> [f64; 4] {
    [m[(0, 0)], m[(0, 1)], m[(1, 0)], m[(1, 1)]]
}

/// Integrate the aux ODEs of a parametrization, evaluate `P, Q, R` along the
/// result and compare with an independent integration of the matrix flow
/// started from the same initial matrices.
///
/// `gauge` (a matrix `γ` in an extra unknown, and that unknown's rate) maps a
/// non-default gauge back to the default one by `M → γ⁻¹Mγ`; the extra
/// unknown starts at zero.
pub fn trajectory_check(
    param: &Parametrization,
    gauge: Option<(ExprMat2, (String, Expr))>,
    t0: f64,
    aux0: &[f64],
    outputs: &[f64],
    opts: &OdeOptions,
) -> Result<Trajectory, IsoError> {
    let mut rates = param.rates.clone();
    let mut start = aux0.to_vec();
    let (mut p, mut q, mut r) = (param.p.clone(), param.q.clone(), param.r.clone());
    if let Some((g, rate)) = gauge {
        rates.push(rate);
        start.push(0.0);
        let gi = g.inverse();
        let back = |m: &ExprMat2| gi.mul(m).mul(&g).simplify();
        p = back(&p);
        q = back(&q);
        r = back(&r);
    }
    let unknowns: Vec<String> = rates.iter().map(|(v, _)| v.clone()).collect();
    let mut names = vec!["t".to_string()];
    names.extend(unknowns.iter().cloned());
    let mats: Vec<Expr> = [&p, &q, &r].iter().flat_map(|m| m.entries().cloned()).collect();
    let mat_tape = SlotTape::new(&mats, &names)?;
    let with_t = |t: f64, aux: &[f64]| {
        let mut v = vec![t];
        v.extend_from_slice(aux);
        v
    };
    let aux_traj = integrate_unknowns(&rates, t0, &start, outputs, opts)?;
    let m0 = mat_tape.eval(&with_t(t0, &start));
    let init = [m2(&m0[0..4]), m2(&m0[4..8]), m2(&m0[8..12])];
    let flow = integrate_flow(init, t0, outputs, opts)?;
    let mut rows = Vec::with_capacity(outputs.len());
    let (mut max_residual, mut p_drift) = (0.0f64, 0.0f64);
    for ((t, aux), fl) in outputs.iter().zip(&aux_traj).zip(&flow) {
        let v = mat_tape.eval(&with_t(*t, aux));
        let ms = [m2(&v[0..4]), m2(&v[4..8]), m2(&v[8..12])];
        let residual: f64 = ms.iter().zip(fl).map(|(a, b)| (a - b).norm()).sum();
        let residual = if residual.is_nan() { f64::INFINITY } else { residual };
        max_residual = max_residual.max(residual);
        p_drift = p_drift.max((fl[0] - init[0]).norm());
        rows.push(TrajectoryRow {
            t: *t,
            aux: aux.clone(),
            state: [flat(&ms[0]), flat(&ms[1]), flat(&ms[2])],
            residual,
            trace: fl.iter().map(|m| m.trace().abs()).sum(),
        });
    }
    Ok(Trajectory { name: param.name.clone(), unknowns, rows, max_residual, p_drift })
}

#[derive(Clone, Debug, Serialize)]
pub struct AltFrameReport {
    /// `max ‖P̃(t) − P̃(t₀)‖`.
    pub p_tilde_drift: f64,
    /// `max` over the outputs of `‖(P̃,Q̃,R̃) − flow of (P̃,Q̃,R̃)(t₀)‖`.
    pub flow_residual: f64,
}

/// Integrate the alternative system together with `γ̇ = ¼γR`, `γ(t₀) = I`,
/// and compare `γ(P,Q,R)γ⁻¹` with the default flow started from the same data.
pub fn alt_frame_check(
    state: [M2; 3],
    t0: f64,
    outputs: &[f64],
    opts: &OdeOptions,
) -> Result<AltFrameReport, IsoError> {
    let mut y0 = vec![0.0; 16];
    pack(&[&state[0], &state[1], &state[2], &M2::identity()], &mut y0);
    let ys = solve_at(
        |_, y, d| {
            let (p, q, r, g) = (unpack(y, 0), unpack(y, 1), unpack(y, 2), unpack(y, 3));
            let (dp, dq, dr) = alt_frame_rhs(&p, &q, &r);
            let dg = 0.25 * g * r;
            pack(&[&dp, &dq, &dr, &dg], d);
        },
        t0,
        &y0,
        outputs,
        opts,
    )?;
    let flow = integrate_flow(state, t0, outputs, opts)?;
    let mut rep = AltFrameReport { p_tilde_drift: 0.0, flow_residual: 0.0 };
    for (y, fl) in ys.iter().zip(&flow) {
        let g = unpack(y, 3);
        let gi = g.try_inverse().ok_or(IsoError::SingularGauge)?;
        let tilde: Vec<M2> = (0..3).map(|k| g * unpack(y, k) * gi).collect();
        rep.p_tilde_drift = rep.p_tilde_drift.max((tilde[0] - state[0]).norm());
        let res: f64 = tilde.iter().zip(fl).map(|(a, b)| (a - b).norm()).sum();
        rep.flow_residual = rep.flow_residual.max(res);
    }
    Ok(rep)
}

#[cfg(test)]
mod tests {
    use super::super::{pi_gauge, pi_parametrization, pii_parametrization};
    use super::*;
    use crate::ode::grid;

    fn l(k: [f64; 3]) -> M2 {
        M2::new(0.5 * k[0], k[1], k[2], -0.5 * k[0])
    }

    #[test]
    fn zero_state_has_zero_rhs() {
        let z = M2::zeros();
        let (a, b, c) = flow_rhs(&z, &z, &z);
        assert_eq!(a + b + c, z);
        let (a, b, c) = alt_frame_rhs(&z, &z, &z);
        assert_eq!(a + b + c, z);
    }

    #[test]
    fn classification_examples() {
        let tol = 1e-10;
        assert_eq!(classify_gauge(&l([2.0, 0.0, 0.0]), &l([0.0, 1.0, 0.3]), tol).unwrap(), GaugeClass::PainleveII);
        assert_eq!(classify_gauge(&l([0.0, 1.0, 0.0]), &l([0.0, 0.7, 4.0]), tol).unwrap(), GaugeClass::PainleveI);
        assert_eq!(classify_gauge(&l([0.0, 1.0, 0.0]), &l([1.3, 0.2, 0.0]), tol).unwrap(), GaugeClass::Solvable);
        assert!(matches!(classify_gauge(&M2::zeros(), &l([1.0, 0.0, 0.0]), tol), Err(IsoError::ZeroP)));
        assert!(matches!(
            classify_gauge(&l([4e-5, 1.0, 0.0]), &l([1.0, 0.0, 0.0]), tol),
            Err(IsoError::Borderline(_))
        ));
    }

    #[test]
    fn pii_trajectory_and_flatness() {
        let p = pii_parametrization(&Expr::zero());
        let ts = grid(0.0, 1.0, 10);
        // unknown order is u, y, z
        let traj = trajectory_check(&p, None, 0.0, &[1.0, 0.1, 0.2], &ts, &OdeOptions::default()).unwrap();
        assert!(traj.max_residual < 1e-8, "{}", traj.max_residual);
        assert!(traj.p_drift < 1e-10);
        let sys = NumericLax::from_parametrization(&p).unwrap();
        let rect = Rectangle::new((0.0, 1.0), (0.0, 0.5));
        let d = flatness_check(&sys, &rect, &[1.0, 0.1, 0.2], &OdeOptions::default()).unwrap();
        assert!(d < 1e-6, "{d}");
    }

    #[test]
    fn pi_trajectory() {
        let p = pi_parametrization();
        let traj =
            trajectory_check(&p, Some(pi_gauge()), 0.0, &[0.0, 1.0], &grid(0.0, 0.8, 8), &OdeOptions::default())
                .unwrap();
        assert!(traj.max_residual < 1e-8, "{}", traj.max_residual);
    }

    #[test]
    fn incompatible_and_perturbed_pairs() {
        let opts = OdeOptions::default();
        let rect = Rectangle::new((0.0, 1.0), (0.0, 0.5));
        let d = flatness_check(&ConstantPair::random(4, 2), &rect, &[], &opts).unwrap();
        assert!(d > 1e-2, "{d}");
        let sys = NumericLax::from_parametrization(&pii_parametrization(&Expr::zero())).unwrap();
        let pert = Perturbed::new(&sys, l([0.0, 1e-3, 0.0]));
        let small = Rectangle::new((0.0, 0.2), (0.0, 0.2));
        let d1 = flatness_check(&pert, &small, &[1.0, 0.1, 0.2], &opts).unwrap();
        let d2 = flatness_check(&pert, &small.scaled(0.5), &[1.0, 0.1, 0.2], &opts).unwrap();
        let ratio = d2 / d1;
        assert!((ratio - 0.25).abs() < 0.075, "{ratio}");
    }

    #[test]
    fn alternative_frame_equivalence() {
        let state = [l([0.3, -0.4, 0.8]), l([0.1, 0.5, -0.2]), l([-0.7, 0.2, 0.6])];
        let rep = alt_frame_check(state, 0.0, &grid(0.0, 1.0, 10), &OdeOptions::default()).unwrap();
        assert!(rep.p_tilde_drift < 1e-8 && rep.flow_residual < 1e-8, "{rep:?}");
    }
}
