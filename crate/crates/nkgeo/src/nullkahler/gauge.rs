use super::{build_normal_form, omega_lower, omega_upper, x_name, y_name, NkError, NullKahlerStructure};
use crate::expr::{Expr, Point, Tape};
use crate::geometry::GeometryError;

/// Infinitesimal coordinate change preserving the normal form, and the
/// induced change of potential.
#[derive(Clone, Debug)]
pub struct GaugeTransform {
    pub eps: f64,
    /// Generator `Y`, components in chart order.
    pub generator: Vec<Expr>,
    /// `x̃^i, ỹ^i = (x, y) + ε Y(x, y)` in chart order.
    pub new_coords: Vec<Expr>,
    pub delta_theta: Expr,
}

fn check_base_only(name: &str, e: &Expr, n: usize) -> Result<(), NkError> {
    if (0..2 * n).any(|i| e.depends_on(&y_name(i))) {
        return Err(NkError::DependsOnFibre(name.to_string()));
    }
    Ok(())
}

/// Generator `Y = ω^{ij} H_j ∂_{x^i} + (y^k ω^{ij} H_{jk} + T^i) ∂_{y^i}` and
///
/// ```text
/// δΘ = ⅙ y^i y^j y^k H_{ijk} − ½ y^j y^k ω_ij ∂_k T^i + y^i Q_i + R
/// ```
pub fn gauge_transform(
    s: &NullKahlerStructure,
    h: &Expr,
    t: &[Expr],
    q: &[Expr],
    r: &Expr,
    eps: f64,
) -> Result<GaugeTransform, NkError> {
    let m = 2 * s.n;
    for v in [t, q] {
        if v.len() != m {
            return Err(NkError::Arity { expected: m, got: v.len() });
        }
    }
    check_base_only("H", h, s.n)?;
    check_base_only("R", r, s.n)?;
    for (i, e) in t.iter().enumerate() {
        check_base_only(&format!("T{}", i + 1), e, s.n)?;
    }
    for (i, e) in q.iter().enumerate() {
        check_base_only(&format!("Q{}", i + 1), e, s.n)?;
    }
    let wl = omega_lower(s.n);
    let wu = omega_upper(s.n);
    let x: Vec<Expr> = (0..m).map(|i| Expr::var(&x_name(i))).collect();
    let y: Vec<Expr> = (0..m).map(|i| Expr::var(&y_name(i))).collect();
    let dh: Vec<Expr> = (0..m).map(|j| h.diff(&x_name(j))).collect();
    let ddh: Vec<Vec<Expr>> =
        (0..m).map(|j| (0..m).map(|k| dh[j].diff(&x_name(k))).collect()).collect();

    let mut gen = Vec::with_capacity(2 * m);
    for i in 0..m {
        let terms = (0..m).filter(|j| wu[i][*j] != 0).map(|j| Expr::int(wu[i][j]) * &dh[j]);
        gen.push(Expr::sum(terms.collect()).simplify());
    }
    for i in 0..m {
        let mut terms = vec![t[i].clone()];
        for j in 0..m {
            if wu[i][j] == 0 {
                continue;
            }
            for k in 0..m {
                terms.push(Expr::int(wu[i][j]) * &y[k] * &ddh[j][k]);
            }
        }
        gen.push(Expr::sum(terms).simplify());
    }

    let mut dt = Vec::new();
    for i in 0..m {
        for j in 0..m {
            for k in 0..m {
                let hijk = ddh[i][j].diff(&x_name(k));
                if !hijk.is_zero_literal() {
                    dt.push(Expr::rational(1, 6) * &y[i] * &y[j] * &y[k] * hijk);
                }
                if wl[i][j] != 0 {
                    let tik = t[i].diff(&x_name(k));
                    if !tik.is_zero_literal() {
                        dt.push(Expr::rational(-wl[i][j], 2) * &y[j] * &y[k] * tik);
                    }
                }
            }
        }
        dt.push(&y[i] * &q[i]);
    }
    dt.push(r.clone());
    let delta_theta = Expr::sum(dt).simplify();

    let e = Expr::decimal(eps);
    let new_coords =
        x.iter().chain(&y).zip(&gen).map(|(c, g)| (c + &e * g).simplify()).collect();
    Ok(GaugeTransform { eps, generator: gen, new_coords, delta_theta })
}

impl GaugeTransform {
    /// Max entry of `φ*(g̃) − g_Θ` at `p`, where `φ` is the new-coordinate map and
    /// `g̃` the normal-form metric of the transported potential `Θ̃`.
    /// The generator preserves the form to first order, so this is `O(ε²)`.
    pub fn defect_at(&self, s: &NullKahlerStructure, p: &Point) -> Result<f64, NkError> {
        let theta = s.theta.clone().ok_or_else(|| {
            NkError::Precondition("gauge check needs a structure built from a potential".into())
        })?;
        // Θ̃(x̃, ỹ) = Θ(x, y) + ε δΘ(x, y); as a function of the new coordinates this
        // is Θ + ε (δΘ − Y(Θ)) up to O(ε²)
        let y_theta: Vec<Expr> = s
            .chart()
            .coords()
            .iter()
            .zip(&self.generator)
            .map(|(v, c)| c * theta.diff(v))
            .collect();
        let first = &self.delta_theta - Expr::sum(y_theta);
        let shifted = (&theta + Expr::decimal(self.eps) * first).simplify();
        let target = build_normal_form(s.n, shifted)?;
        let chart = s.chart();
        let d = chart.dim();
        let coords = chart.coords();

        let phi = Tape::compile(&self.new_coords);
        let image = phi.eval(p).map_err(GeometryError::from)?;
        let mut q = p.clone();
        for (name, v) in coords.iter().zip(&image) {
            q.set(name, *v);
        }
        let gt = target.metric().eval(&q)?;
        let g0 = s.metric().eval(p)?;
        let jac: Vec<Expr> = self
            .new_coords
            .iter()
            .flat_map(|c| coords.iter().map(move |v| c.diff(v)))
            .collect();
        let j: Vec<f64> =
            Tape::compile(&jac).eval(p).map_err(GeometryError::from)?.iter().map(|z| z.re).collect();
        let mut worst = 0.0f64;
        for a in 0..d {
            for b in 0..d {
                let mut v = 0.0;
                for c in 0..d {
                    for e in 0..d {
                        v += j[c * d + a] * gt[c * d + e] * j[e * d + b];
                    }
                }
                worst = worst.max((v - g0[a * d + b]).abs());
            }
        }
        Ok(worst)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::parse;
    use crate::nullkahler::build_normal_form;

    fn e(s: &str) -> Expr {
        parse(s).unwrap()
    }

    #[test]
    fn translations_only_shift_potential_linearly() {
        let s = build_normal_form(1, e("y1^3*x2 + y2^2*x1")).unwrap();
        let g = gauge_transform(&s, &Expr::zero(), &[Expr::zero(), Expr::zero()], &[e("x1^2"), e("sin(x2)")], &e("x1*x2"), 1e-3)
            .unwrap();
        assert!(crate::expr::symbolic_zero(&(g.delta_theta - e("y1*x1^2 + y2*sin(x2) + x1*x2"))));
    }

    #[test]
    fn hamiltonian_gives_cubic_term() {
        let s = build_normal_form(1, e("y1^2*y2")).unwrap();
        let g = gauge_transform(&s, &e("x1^2*x2"), &[Expr::zero(), Expr::zero()], &[Expr::zero(), Expr::zero()], &Expr::zero(), 1e-3)
            .unwrap();
        // H_{112} = 2, three orderings of (1,1,2)
        assert!(crate::expr::symbolic_zero(&(g.delta_theta - e("y1^2*y2"))));
    }

    #[test]
    fn fibre_dependence_rejected() {
        let s = build_normal_form(1, Expr::zero()).unwrap();
        let z = [Expr::zero(), Expr::zero()];
        assert!(matches!(
            gauge_transform(&s, &e("y1"), &z, &z, &Expr::zero(), 1e-3),
            Err(NkError::DependsOnFibre(_))
        ));
    }

    #[test]
    fn defect_is_second_order() {
        let s = build_normal_form(1, e("y1^3*x2 + y1*y2^2 + x1*y2^3")).unwrap();
        let h = e("x1^2*x2 + x2^3/3");
        let t = [e("x1*x2"), e("x1^2")];
        let q = [e("x2"), e("x1")];
        let p = Point::from_real(&[("x1", 0.3), ("x2", -0.7), ("y1", 0.9), ("y2", 0.4)]);
        let d3 = gauge_transform(&s, &h, &t, &q, &e("x1"), 1e-3).unwrap().defect_at(&s, &p).unwrap();
        let d4 = gauge_transform(&s, &h, &t, &q, &e("x1"), 1e-4).unwrap().defect_at(&s, &p).unwrap();
        let ratio = d3 / d4;
        assert!((ratio - 100.0).abs() < 20.0, "ratio {ratio} ({d3}, {d4})");
    }
}
