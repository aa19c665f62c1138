use std::collections::HashMap;

use super::{Chart, GeometryError, MetricField, TensorField, Variance, VectorField};
use crate::expr::Expr;

struct Minors<'a> {
    m: &'a [Vec<Expr>],
    memo: HashMap<(u32, u32), Expr>,
}

impl Minors<'_> {
    /// Determinant of the submatrix on the given row and column masks
    /// (Laplace expansion along the lowest row, memoized).
    fn det(&mut self, rows: u32, cols: u32) -> Expr {
        if rows == 0 {
            return Expr::one();
        }
        if let Some(e) = self.memo.get(&(rows, cols)) {
            return e.clone();
        }
        let r = rows.trailing_zeros() as usize;
        let rest = rows & !(1 << r);
        let mut terms = Vec::new();
        let mut sign = 1;
        for c in 0..self.m.len() {
            if cols & (1 << c) == 0 {
                continue;
            }
            let entry = &self.m[r][c];
            if !entry.is_zero_literal() {
                let minor = self.det(rest, cols & !(1 << c));
                if !minor.is_zero_literal() {
                    let t = entry * &minor;
                    terms.push(if sign > 0 { t } else { -t });
                }
            }
            sign = -sign;
        }
        let d = Expr::sum(terms).simplify();
        self.memo.insert((rows, cols), d.clone());
        d
    }
}

/// Symbolic determinant and inverse by cofactors.
pub fn inverse_metric(g: &MetricField) -> Result<(Expr, Vec<Vec<Expr>>), GeometryError> {
    invert_matrix(g.components())
}

/// Determinant and inverse of a square matrix of expressions, by cofactors.
pub fn invert_matrix(m: &[Vec<Expr>]) -> Result<(Expr, Vec<Vec<Expr>>), GeometryError> {
    let d = m.len();
    if d > 6 {
        return Err(GeometryError::TooLarge(d));
    }
    if m.iter().any(|row| row.len() != d) {
        return Err(GeometryError::Shape { expected: d, got: m.len() });
    }
    let mut mn = Minors { m, memo: HashMap::new() };
    let full = (1u32 << d) - 1;
    let det = mn.det(full, full);
    if det.is_zero_literal() {
        return Err(GeometryError::SingularMetric);
    }
    let mut inv = vec![vec![Expr::zero(); d]; d];
    for a in 0..d {
        for b in 0..d {
            // (m^{-1})_{ab} = (−1)^{a+b} M_{ba} / det
            let minor = mn.det(full & !(1 << b), full & !(1 << a));
            let c = if (a + b) % 2 == 0 { minor } else { -minor };
            inv[a][b] = (c / &det).simplify();
        }
    }
    Ok((det, inv))
}

/// `Γ^a_bc` as a `(Up, Down, Down)` field.
pub fn christoffel(g: &MetricField) -> Result<TensorField, GeometryError> {
    let (_, ginv) = inverse_metric(g)?;
    let chart = g.chart();
    let d = chart.dim();
    let dg: Vec<Vec<Vec<Expr>>> = (0..d)
        .map(|c| {
            (0..d)
                .map(|a| (0..d).map(|b| chart.partial(c, g.component(a, b)).simplify()).collect())
                .collect()
        })
        .collect();
    let mut out = TensorField::zeros(chart.clone(), vec![Variance::Up, Variance::Down, Variance::Down]);
    let half = Expr::rational(1, 2);
    for a in 0..d {
        for b in 0..d {
            for c in b..d {
                let terms: Vec<Expr> = (0..d)
                    .filter(|m| !ginv[a][*m].is_zero_literal())
                    .map(|m| &ginv[a][m] * (&dg[b][m][c] + &dg[c][m][b] - &dg[m][b][c]))
                    .collect();
                let e = (&half * Expr::sum(terms)).simplify();
                out.set(&[a, b, c], e.clone());
                out.set(&[a, c, b], e);
            }
        }
    }
    Ok(out)
}

/// `R^a_bcd` as an `(Up, Down, Down, Down)` field.
pub fn riemann(g: &MetricField) -> Result<TensorField, GeometryError> {
    let gamma = christoffel(g)?;
    let chart = g.chart();
    let d = chart.dim();
    let mut out = TensorField::zeros(
        chart.clone(),
        vec![Variance::Up, Variance::Down, Variance::Down, Variance::Down],
    );
    for a in 0..d {
        for b in 0..d {
            for c in 0..d {
                for e in c + 1..d {
                    let mut terms = vec![
                        chart.partial(c, gamma.get(&[a, e, b])),
                        -chart.partial(e, gamma.get(&[a, c, b])),
                    ];
                    for m in 0..d {
                        terms.push(gamma.get(&[a, c, m]) * gamma.get(&[m, e, b]));
                        terms.push(-(gamma.get(&[a, e, m]) * gamma.get(&[m, c, b])));
                    }
                    let r = Expr::sum(terms).simplify();
                    out.set(&[a, b, e, c], (-&r).simplify());
                    out.set(&[a, b, c, e], r);
                }
            }
        }
    }
    Ok(out)
}

/// `r_bd = R^a_bad`.
pub fn ricci(g: &MetricField) -> Result<TensorField, GeometryError> {
    let r = riemann(g)?;
    let chart = g.chart();
    let d = chart.dim();
    let mut out = TensorField::zeros(chart.clone(), vec![Variance::Down, Variance::Down]);
    for b in 0..d {
        for e in 0..d {
            let s = Expr::sum((0..d).map(|a| r.get(&[a, b, a, e]).clone()).collect());
            out.set(&[b, e], s.simplify());
        }
    }
    Ok(out)
}

pub fn scalar_curvature(g: &MetricField) -> Result<Expr, GeometryError> {
    let (_, ginv) = inverse_metric(g)?;
    let r = ricci(g)?;
    let d = g.dim();
    let mut terms = Vec::new();
    for a in 0..d {
        for b in 0..d {
            terms.push(&ginv[a][b] * r.get(&[a, b]));
        }
    }
    Ok(Expr::sum(terms).simplify())
}

/// `∇T` with the derivative index appended last, given `Γ^a_bc`.
pub fn covariant_derivative(t: &TensorField, gamma: &TensorField) -> TensorField {
    let chart = t.chart();
    let d = chart.dim();
    let rank = t.rank();
    let mut variance = t.variance().to_vec();
    variance.push(Variance::Down);
    let mut out = TensorField::zeros(chart.clone(), variance);
    let total = d.pow(rank as u32);
    for k in 0..total {
        let mut idx = vec![0; rank];
        let mut r = k;
        for slot in idx.iter_mut().rev() {
            *slot = r % d;
            r /= d;
        }
        for c in 0..d {
            let mut terms = vec![chart.partial(c, t.get(&idx))];
            let mut j = idx.clone();
            for (slot, v) in t.variance().iter().enumerate() {
                let orig = idx[slot];
                for e in 0..d {
                    j[slot] = e;
                    match v {
                        Variance::Up => terms.push(gamma.get(&[orig, c, e]) * t.get(&j)),
                        Variance::Down => terms.push(-(gamma.get(&[e, c, orig]) * t.get(&j))),
                    }
                }
                j[slot] = orig;
            }
            let mut full = idx.clone();
            full.push(c);
            out.set(&full, Expr::sum(terms).simplify());
        }
    }
    out
}

/// `[X, Y]^a = X^b ∂_b Y^a − Y^b ∂_b X^a`.
pub fn bracket(chart: &Chart, x: &VectorField, y: &VectorField) -> VectorField {
    let d = chart.dim();
    (0..d)
        .map(|a| {
            let mut terms = Vec::new();
            for b in 0..d {
                terms.push(&x[b] * chart.partial(b, &y[a]));
                terms.push(-(&y[b] * chart.partial(b, &x[a])));
            }
            Expr::sum(terms).simplify()
        })
        .collect()
}

/// `(L_X α)_a = X^c ∂_c α_a + α_c ∂_a X^c`.
pub fn lie_derivative_covector(chart: &Chart, x: &VectorField, alpha: &[Expr]) -> Vec<Expr> {
    let d = chart.dim();
    (0..d)
        .map(|a| {
            let mut terms = Vec::new();
            for c in 0..d {
                terms.push(&x[c] * chart.partial(c, &alpha[a]));
                terms.push(&alpha[c] * chart.partial(a, &x[c]));
            }
            Expr::sum(terms).simplify()
        })
        .collect()
}

/// `(L_X h)_ab = X^c ∂_c h_ab + h_cb ∂_a X^c + h_ac ∂_b X^c` for any covariant 2-tensor.
pub fn lie_derivative_cov2(chart: &Chart, x: &VectorField, h: &[Vec<Expr>]) -> Vec<Vec<Expr>> {
    let d = chart.dim();
    let dx: Vec<Vec<Expr>> =
        (0..d).map(|a| (0..d).map(|c| chart.partial(a, &x[c])).collect()).collect();
    (0..d)
        .map(|a| {
            (0..d)
                .map(|b| {
                    let mut terms = Vec::new();
                    for c in 0..d {
                        terms.push(&x[c] * chart.partial(c, &h[a][b]));
                        terms.push(&h[c][b] * &dx[a][c]);
                        terms.push(&h[a][c] * &dx[b][c]);
                    }
                    Expr::sum(terms).simplify()
                })
                .collect()
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::{parse, symbolic_zero};

    fn e(s: &str) -> Expr {
        parse(s).unwrap()
    }

    #[test]
    fn inverse_of_walker_block() {
        let chart = Chart::new(&["x", "y", "u", "v"]).unwrap();
        let g = vec![
            vec![e("a*x^2"), e("b"), Expr::one(), Expr::zero()],
            vec![e("b"), e("c*x"), Expr::zero(), Expr::one()],
            vec![Expr::one(), Expr::zero(), Expr::zero(), Expr::zero()],
            vec![Expr::zero(), Expr::one(), Expr::zero(), Expr::zero()],
        ];
        let m = MetricField::new(chart, g).unwrap();
        let (_, inv) = inverse_metric(&m).unwrap();
        for i in 0..4 {
            for j in 0..4 {
                let prod = Expr::sum((0..4).map(|k| m.component(i, k) * &inv[k][j]).collect());
                let want = if i == j { Expr::one() } else { Expr::zero() };
                assert!(symbolic_zero(&(prod - want)), "({i},{j})");
            }
        }
    }

    #[test]
    fn sphere_symbolic_matches_known() {
        let chart = Chart::new(&["th", "ph"]).unwrap();
        let g = vec![vec![Expr::one(), Expr::zero()], vec![Expr::zero(), e("sin(th)^2")]];
        let m = MetricField::new(chart, g).unwrap();
        let s = scalar_curvature(&m).unwrap();
        assert!(symbolic_zero(&(s - Expr::int(2))));
        let r = riemann(&m).unwrap();
        // R^θ_{φθφ} = sin²θ
        assert!(symbolic_zero(&(r.get(&[0, 1, 0, 1]) - e("sin(th)^2"))));
    }

    #[test]
    fn killing_field_of_sphere() {
        let chart = Chart::new(&["th", "ph"]).unwrap();
        let g = vec![vec![Expr::one(), Expr::zero()], vec![Expr::zero(), e("sin(th)^2")]];
        let lie = lie_derivative_cov2(&chart, &vec![Expr::zero(), Expr::one()], &g);
        assert!(lie.iter().flatten().all(Expr::is_zero_literal));
        let rot = vec![e("sin(ph)"), e("cos(ph)*cos(th)/sin(th)")];
        let lie = lie_derivative_cov2(&chart, &rot, &g);
        assert!(lie.iter().flatten().all(symbolic_zero));
    }
}
