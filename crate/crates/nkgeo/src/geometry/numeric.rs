use nalgebra::DMatrix;

use super::{GeometryError, MetricField, TensorField, Variance};
use crate::expr::{Expr, Point, Tape, C64};

/// Dense real tensor with every index running over `0..d`.
#[derive(Clone, Debug, PartialEq)]
pub struct NumTensor {
    pub d: usize,
    pub rank: usize,
    pub data: Vec<f64>,
}

impl NumTensor {
    pub fn zeros(d: usize, rank: usize) -> NumTensor {
        NumTensor { d, rank, data: vec![0.0; d.pow(rank as u32)] }
    }

    pub fn from_fn(d: usize, rank: usize, f: impl Fn(&[usize]) -> f64) -> NumTensor {
        let mut t = NumTensor::zeros(d, rank);
        let mut idx = vec![0; rank];
        for k in 0..t.data.len() {
            let mut r = k;
            for slot in idx.iter_mut().rev() {
                *slot = r % d;
                r /= d;
            }
            t.data[k] = f(&idx);
        }
        t
    }

    #[inline]
    pub fn offset(&self, idx: &[usize]) -> usize {
        idx.iter().fold(0, |acc, i| acc * self.d + i)
    }

    #[inline]
    pub fn at(&self, idx: &[usize]) -> f64 {
        self.data[self.offset(idx)]
    }

    #[inline]
    pub fn at_mut(&mut self, idx: &[usize]) -> &mut f64 {
        let o = self.offset(idx);
        &mut self.data[o]
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |a, x| a.max(x.abs()))
    }

    pub fn max_diff(&self, other: &NumTensor) -> f64 {
        assert_eq!(self.data.len(), other.data.len());
        self.data.iter().zip(&other.data).fold(0.0, |a, (x, y)| a.max((x - y).abs()))
    }

    pub fn scaled(&self, s: f64) -> NumTensor {
        NumTensor { d: self.d, rank: self.rank, data: self.data.iter().map(|x| x * s).collect() }
    }

    pub fn matrix(&self) -> DMatrix<f64> {
        assert_eq!(self.rank, 2);
        DMatrix::from_row_slice(self.d, self.d, &self.data)
    }

    pub fn from_matrix(m: &DMatrix<f64>) -> NumTensor {
        NumTensor::from_fn(m.nrows(), 2, |i| m[(i[0], i[1])])
    }
}

/// Values and first coordinate derivatives of a tensor field's components.
pub struct FieldJet {
    d: usize,
    rank: usize,
    variance: Vec<Variance>,
    tape: Tape,
}

impl FieldJet {
    pub fn new(field: &TensorField) -> FieldJet {
        let chart = field.chart();
        let d = chart.dim();
        let mut outs: Vec<Expr> = field.comps().to_vec();
        for c in field.comps() {
            for i in 0..d {
                outs.push(chart.partial(i, c).simplify());
            }
        }
        FieldJet {
            d,
            rank: field.rank(),
            variance: field.variance().to_vec(),
            tape: Tape::compile(&outs),
        }
    }

    pub fn variance(&self) -> &[Variance] {
        &self.variance
    }

    /// Components and their derivatives; the derivative index is last.
    pub fn eval(&self, p: &Point) -> Result<(NumTensor, NumTensor), GeometryError> {
        let v = real_parts(self.tape.eval(p)?);
        let n = self.d.pow(self.rank as u32);
        let vals = NumTensor { d: self.d, rank: self.rank, data: v[..n].to_vec() };
        let ders = NumTensor { d: self.d, rank: self.rank + 1, data: v[n..].to_vec() };
        Ok((vals, ders))
    }
}

fn real_parts(v: Vec<C64>) -> Vec<f64> {
    v.into_iter().map(|z| z.re).collect()
}

/// Compiled second jet of a metric; evaluates curvature at points.
pub struct MetricJet {
    d: usize,
    tape: Tape,
}

impl MetricJet {
    pub fn new(metric: &MetricField) -> MetricJet {
        let chart = metric.chart();
        let d = chart.dim();
        let mut g = Vec::new();
        let mut dg = Vec::new();
        let mut ddg = Vec::new();
        for a in 0..d {
            for b in a..d {
                let gab = metric.component(a, b).clone();
                let firsts: Vec<Expr> =
                    (0..d).map(|c| chart.partial(c, &gab).simplify()).collect();
                for c in 0..d {
                    for e in c..d {
                        ddg.push(chart.partial(e, &firsts[c]).simplify());
                    }
                }
                g.push(gab);
                dg.extend(firsts);
            }
        }
        let mut outs = g;
        outs.extend(dg);
        outs.extend(ddg);
        MetricJet { d, tape: Tape::compile(&outs) }
    }

    pub fn dim(&self) -> usize {
        self.d
    }

    pub fn var_names(&self) -> &[String] {
        self.tape.var_names()
    }

    pub fn eval(&self, p: &Point) -> Result<Curvature, GeometryError> {
        let v = real_parts(self.tape.eval(p)?);
        let d = self.d;
        let npair = d * (d + 1) / 2;
        let mut g = NumTensor::zeros(d, 2);
        let mut dg = NumTensor::zeros(d, 3);
        let mut ddg = NumTensor::zeros(d, 4);
        let mut k = 0;
        for a in 0..d {
            for b in a..d {
                *g.at_mut(&[a, b]) = v[k];
                *g.at_mut(&[b, a]) = v[k];
                for c in 0..d {
                    let x = v[npair + k * d + c];
                    *dg.at_mut(&[c, a, b]) = x;
                    *dg.at_mut(&[c, b, a]) = x;
                }
                let base = npair * (d + 1) + k * (d * (d + 1) / 2);
                let mut m = 0;
                for c in 0..d {
                    for e in c..d {
                        let x = v[base + m];
                        for (i, j) in [(c, e), (e, c)] {
                            *ddg.at_mut(&[i, j, a, b]) = x;
                            *ddg.at_mut(&[i, j, b, a]) = x;
                        }
                        m += 1;
                    }
                }
                k += 1;
            }
        }
        Curvature::from_jets(g, dg, ddg, p)
    }
}

/// Curvature data at one point, assembled from the metric's second jet.
#[derive(Clone, Debug)]
pub struct Curvature {
    pub d: usize,
    /// `g_ab`
    pub g: NumTensor,
    /// `g^ab`
    pub ginv: NumTensor,
    /// `∂_c g_ab` stored as `[c][a][b]`
    pub dg: NumTensor,
    /// `Γ^a_bc` stored as `[a][b][c]`
    pub gamma: NumTensor,
    /// `∂_e Γ^a_bc` stored as `[e][a][b][c]`
    pub dgamma: NumTensor,
    /// `R^a_bcd`
    pub riemann: NumTensor,
    /// `R_abcd`
    pub riemann_down: NumTensor,
    pub ricci: NumTensor,
    pub scalar: f64,
}

impl Curvature {
    fn from_jets(
        g: NumTensor,
        dg: NumTensor,
        ddg: NumTensor,
        p: &Point,
    ) -> Result<Curvature, GeometryError> {
        let d = g.d;
        let ginv_m = g.matrix().try_inverse().ok_or_else(|| GeometryError::DegenerateAt {
            point: crate::expr::format_point(p),
        })?;
        let ginv = NumTensor::from_matrix(&ginv_m);
        // lowered Γ_{dbc} = ½(∂_b g_dc + ∂_c g_db − ∂_d g_bc) and its derivatives
        let low = NumTensor::from_fn(d, 3, |i| {
            let (dd, b, c) = (i[0], i[1], i[2]);
            0.5 * (dg.at(&[b, dd, c]) + dg.at(&[c, dd, b]) - dg.at(&[dd, b, c]))
        });
        let dlow = NumTensor::from_fn(d, 4, |i| {
            let (e, dd, b, c) = (i[0], i[1], i[2], i[3]);
            0.5 * (ddg.at(&[e, b, dd, c]) + ddg.at(&[e, c, dd, b]) - ddg.at(&[e, dd, b, c]))
        });
        let gamma = NumTensor::from_fn(d, 3, |i| {
            (0..d).map(|m| ginv.at(&[i[0], m]) * low.at(&[m, i[1], i[2]])).sum()
        });
        // ∂_e g^{am} = −g^{ap} ∂_e g_pq g^{qm}
        let dginv = NumTensor::from_fn(d, 3, |i| {
            let (e, a, m) = (i[0], i[1], i[2]);
            let mut s = 0.0;
            for pp in 0..d {
                for q in 0..d {
                    s -= ginv.at(&[a, pp]) * dg.at(&[e, pp, q]) * ginv.at(&[q, m]);
                }
            }
            s
        });
        let dgamma = NumTensor::from_fn(d, 4, |i| {
            let (e, a, b, c) = (i[0], i[1], i[2], i[3]);
            (0..d)
                .map(|m| {
                    dginv.at(&[e, a, m]) * low.at(&[m, b, c])
                        + ginv.at(&[a, m]) * dlow.at(&[e, m, b, c])
                })
                .sum()
        });
        let riemann = riemann_from(&gamma, &dgamma);
        Ok(Curvature::finish(g, ginv, dg, gamma, dgamma, riemann))
    }

    fn finish(
        g: NumTensor,
        ginv: NumTensor,
        dg: NumTensor,
        gamma: NumTensor,
        dgamma: NumTensor,
        riemann: NumTensor,
    ) -> Curvature {
        let d = g.d;
        let riemann_down = NumTensor::from_fn(d, 4, |i| {
            (0..d).map(|e| g.at(&[i[0], e]) * riemann.at(&[e, i[1], i[2], i[3]])).sum()
        });
        let ricci =
            NumTensor::from_fn(d, 2, |i| (0..d).map(|a| riemann.at(&[a, i[0], a, i[1]])).sum());
        let mut scalar = 0.0;
        for b in 0..d {
            for c in 0..d {
                scalar += ginv.at(&[b, c]) * ricci.at(&[b, c]);
            }
        }
        Curvature { d, g, ginv, dg, gamma, dgamma, riemann, riemann_down, ricci, scalar }
    }

    /// Weyl tensor `C_abcd` (dimension at least 3).
    pub fn weyl(&self) -> NumTensor {
        let d = self.d;
        let n = d as f64;
        let (g, r, s) = (&self.g, &self.ricci, self.scalar);
        NumTensor::from_fn(d, 4, |i| {
            let (a, b, c, e) = (i[0], i[1], i[2], i[3]);
            let t = g.at(&[a, c]) * r.at(&[b, e]) - g.at(&[a, e]) * r.at(&[b, c])
                - g.at(&[b, c]) * r.at(&[a, e])
                + g.at(&[b, e]) * r.at(&[a, c]);
            let gg = g.at(&[a, c]) * g.at(&[b, e]) - g.at(&[a, e]) * g.at(&[b, c]);
            self.riemann_down.at(i) - t / (n - 2.0) + s * gg / ((n - 1.0) * (n - 2.0))
        })
    }

    /// Raise the first index of a covariant 2-tensor: `T^a_b = g^{ac} T_cb`.
    pub fn raise_first(&self, t: &NumTensor) -> NumTensor {
        let d = self.d;
        NumTensor::from_fn(d, 2, |i| {
            (0..d).map(|c| self.ginv.at(&[i[0], c]) * t.at(&[c, i[1]])).sum()
        })
    }
}

fn riemann_from(gamma: &NumTensor, dgamma: &NumTensor) -> NumTensor {
    let d = gamma.d;
    NumTensor::from_fn(d, 4, |i| {
        let (a, b, c, dd) = (i[0], i[1], i[2], i[3]);
        let mut s = dgamma.at(&[c, a, dd, b]) - dgamma.at(&[dd, a, c, b]);
        for e in 0..d {
            s += gamma.at(&[a, c, e]) * gamma.at(&[e, dd, b])
                - gamma.at(&[a, dd, e]) * gamma.at(&[e, c, b]);
        }
        s
    })
}

/// `∇T` at a point from the field's jet; the derivative index is appended last.
pub fn covariant_derivative_at(
    variance: &[Variance],
    values: &NumTensor,
    derivs: &NumTensor,
    curv: &Curvature,
) -> NumTensor {
    let d = values.d;
    let rank = variance.len();
    let gamma = &curv.gamma;
    NumTensor::from_fn(d, rank + 1, |i| {
        let (idx, c) = (&i[..rank], i[rank]);
        let mut s = derivs.at(i);
        let mut j = idx.to_vec();
        for (slot, v) in variance.iter().enumerate() {
            let orig = idx[slot];
            for e in 0..d {
                j[slot] = e;
                match v {
                    Variance::Up => s += gamma.at(&[orig, c, e]) * values.at(&j),
                    Variance::Down => s -= gamma.at(&[e, c, orig]) * values.at(&j),
                }
            }
            j[slot] = orig;
        }
        s
    })
}

/// Convenience: curvature of a metric at one point.
pub fn curvature_at(metric: &MetricField, p: &Point) -> Result<Curvature, GeometryError> {
    MetricJet::new(metric).eval(p)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::parse;
    use crate::geometry::Chart;

    fn round_sphere() -> MetricField {
        let chart = Chart::new(&["th", "ph"]).unwrap();
        let g = vec![
            vec![Expr::one(), Expr::zero()],
            vec![Expr::zero(), parse("sin(th)^2").unwrap()],
        ];
        MetricField::new(chart, g).unwrap()
    }

    #[test]
    fn unit_sphere_has_scalar_two() {
        let c = curvature_at(&round_sphere(), &Point::from_real(&[("th", 0.7), ("ph", 0.1)]))
            .unwrap();
        assert!((c.scalar - 2.0).abs() < 1e-12, "{}", c.scalar);
        // R_{θφθφ} = sin²θ
        assert!((c.riemann_down.at(&[0, 1, 0, 1]) - 0.7f64.sin().powi(2)).abs() < 1e-12);
    }

    #[test]
    fn metric_is_parallel() {
        let m = round_sphere();
        let chart = m.chart().clone();
        let field = TensorField::new(
            chart,
            vec![Variance::Down, Variance::Down],
            m.components().iter().flatten().cloned().collect(),
        )
        .unwrap();
        let p = Point::from_real(&[("th", 1.1), ("ph", -0.3)]);
        let curv = curvature_at(&m, &p).unwrap();
        let (v, dv) = FieldJet::new(&field).eval(&p).unwrap();
        let nabla = covariant_derivative_at(field.variance(), &v, &dv, &curv);
        assert!(nabla.max_abs() < 1e-13);
    }
}
