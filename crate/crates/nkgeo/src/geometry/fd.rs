use nalgebra::DMatrix;

use super::numeric::NumTensor;
use super::{GeometryError, MetricField};
use crate::expr::{EvalError, Point, Tape};

/// Curvature from finite differences of metric values only.
///
/// Independent of the symbolic pipeline: derivatives are central differences
/// with one Richardson step (h and h/2), and Riemann uses the all-lower formula
/// `R_abcd = ½(g_ad,bc + g_bc,ad − g_ac,bd − g_bd,ac) + g_ef(Γ^e_bc Γ^f_ad − Γ^e_bd Γ^f_ac)`.
#[derive(Clone, Debug)]
pub struct FdCurvature {
    pub g: NumTensor,
    pub ginv: NumTensor,
    pub gamma: NumTensor,
    pub riemann_down: NumTensor,
    pub ricci: NumTensor,
    pub scalar: f64,
}

type MetricFn<'a> = dyn Fn(&[f64]) -> Result<Vec<f64>, EvalError> + 'a;

struct Stencil<'a> {
    f: &'a MetricFn<'a>,
    x: Vec<f64>,
}

impl Stencil<'_> {
    fn at(&self, shifts: &[(usize, f64)]) -> Result<Vec<f64>, EvalError> {
        let mut y = self.x.clone();
        for &(i, s) in shifts {
            y[i] += s;
        }
        (self.f)(&y)
    }

    fn first(&self, i: usize, h: f64) -> Result<Vec<f64>, EvalError> {
        let p = self.at(&[(i, h)])?;
        let m = self.at(&[(i, -h)])?;
        Ok(p.iter().zip(&m).map(|(a, b)| (a - b) / (2.0 * h)).collect())
    }

    fn second(&self, i: usize, j: usize, h: f64, f0: &[f64]) -> Result<Vec<f64>, EvalError> {
        if i == j {
            let p = self.at(&[(i, h)])?;
            let m = self.at(&[(i, -h)])?;
            Ok((0..f0.len()).map(|k| (p[k] - 2.0 * f0[k] + m[k]) / (h * h)).collect())
        } else {
            let pp = self.at(&[(i, h), (j, h)])?;
            let pm = self.at(&[(i, h), (j, -h)])?;
            let mp = self.at(&[(i, -h), (j, h)])?;
            let mm = self.at(&[(i, -h), (j, -h)])?;
            Ok((0..f0.len()).map(|k| (pp[k] - pm[k] - mp[k] + mm[k]) / (4.0 * h * h)).collect())
        }
    }
}

fn richardson(coarse: Vec<f64>, fine: Vec<f64>) -> Vec<f64> {
    coarse.iter().zip(&fine).map(|(c, f)| (4.0 * f - c) / 3.0).collect()
}

/// `metric(x)` returns the d×d components row-major at coordinates `x`.
pub fn fd_curvature(
    metric: &MetricFn<'_>,
    x: &[f64],
    h: f64,
) -> Result<FdCurvature, GeometryError> {
    let d = x.len();
    let st = Stencil { f: metric, x: x.to_vec() };
    let f0 = st.at(&[])?;
    if f0.len() != d * d {
        return Err(GeometryError::Shape { expected: d, got: f0.len() });
    }
    let g = NumTensor { d, rank: 2, data: f0.clone() };
    let ginv_m = DMatrix::from_row_slice(d, d, &f0)
        .try_inverse()
        .ok_or_else(|| GeometryError::DegenerateAt { point: format!("{x:?}") })?;
    let ginv = NumTensor::from_matrix(&ginv_m);

    // dg[c][a][b] = ∂_c g_ab
    let mut dg = NumTensor::zeros(d, 3);
    for c in 0..d {
        let v = richardson(st.first(c, h)?, st.first(c, h / 2.0)?);
        dg.data[c * d * d..(c + 1) * d * d].copy_from_slice(&v);
    }
    // ddg[i][j][a][b] = ∂_i ∂_j g_ab
    let mut ddg = NumTensor::zeros(d, 4);
    for i in 0..d {
        for j in i..d {
            let v = richardson(st.second(i, j, h, &f0)?, st.second(i, j, h / 2.0, &f0)?);
            for (p, q) in [(i, j), (j, i)] {
                let o = (p * d + q) * d * d;
                ddg.data[o..o + d * d].copy_from_slice(&v);
            }
        }
    }
    Ok(assemble(g, ginv, &dg, &ddg))
}

fn assemble(g: NumTensor, ginv: NumTensor, dg: &NumTensor, ddg: &NumTensor) -> FdCurvature {
    let d = g.d;
    let dd = |i: usize, j: usize, a: usize, b: usize| ddg.at(&[i, j, a, b]);
    let gamma = NumTensor::from_fn(d, 3, |i| {
        let (a, b, c) = (i[0], i[1], i[2]);
        (0..d)
            .map(|m| {
                0.5 * ginv.at(&[a, m])
                    * (dg.at(&[b, m, c]) + dg.at(&[c, m, b]) - dg.at(&[m, b, c]))
            })
            .sum()
    });
    let riemann_down = NumTensor::from_fn(d, 4, |i| {
        let (a, b, c, e) = (i[0], i[1], i[2], i[3]);
        let mut s = 0.5 * (dd(b, c, a, e) + dd(a, e, b, c) - dd(b, e, a, c) - dd(a, c, b, e));
        for p in 0..d {
            for q in 0..d {
                s += g.at(&[p, q])
                    * (gamma.at(&[p, b, c]) * gamma.at(&[q, a, e])
                        - gamma.at(&[p, b, e]) * gamma.at(&[q, a, c]));
            }
        }
        s
    });
    let ricci = NumTensor::from_fn(d, 2, |i| {
        let mut s = 0.0;
        for a in 0..d {
            for c in 0..d {
                s += ginv.at(&[a, c]) * riemann_down.at(&[a, i[0], c, i[1]]);
            }
        }
        s
    });
    let mut scalar = 0.0;
    for b in 0..d {
        for c in 0..d {
            scalar += ginv.at(&[b, c]) * ricci.at(&[b, c]);
        }
    }
    FdCurvature { g, ginv, gamma, riemann_down, ricci, scalar }
}

/// FD curvature of a metric on a plain chart. Chart coordinates are varied;
/// any other variable is held at its value in `base`.
pub fn fd_riemann(metric: &MetricField, base: &Point, h: f64) -> Result<FdCurvature, GeometryError> {
    let flat: Vec<_> = metric.components().iter().flatten().cloned().collect();
    let tape = Tape::compile(&flat);
    let coords = metric.chart().coords().to_vec();
    let x: Vec<f64> = coords
        .iter()
        .map(|c| base.real(c).ok_or_else(|| EvalError::Unbound(c.clone())))
        .collect::<Result<_, _>>()?;
    let f = |y: &[f64]| -> Result<Vec<f64>, EvalError> {
        let mut p = base.clone();
        for (name, v) in coords.iter().zip(y) {
            p.set_real(name, *v);
        }
        Ok(tape.eval(&p)?.into_iter().map(|z| z.re).collect())
    };
    fd_curvature(&f, &x, h)
}

/// Christoffel symbols by central differences (Richardson-extrapolated).
pub fn fd_christoffel(metric: &MetricField, base: &Point, h: f64) -> Result<NumTensor, GeometryError> {
    Ok(fd_riemann(metric, base, h)?.gamma)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::{parse, Expr};
    use crate::geometry::{curvature_at, Chart};

    #[test]
    fn agrees_with_jet_route() {
        let chart = Chart::new(&["u", "v", "w"]).unwrap();
        let e = |s: &str| parse(s).unwrap();
        let g = vec![
            vec![e("1 + u^2*v"), e("sin(w)/3"), Expr::zero()],
            vec![e("sin(w)/3"), e("2 + exp(u)"), e("u*w/5")],
            vec![Expr::zero(), e("u*w/5"), e("3 - v^2/4")],
        ];
        let m = MetricField::new(chart, g).unwrap();
        let p = Point::from_real(&[("u", 0.3), ("v", -0.4), ("w", 0.8)]);
        let jet = curvature_at(&m, &p).unwrap();
        let fd = fd_riemann(&m, &p, 2e-3).unwrap();
        assert!(jet.riemann_down.max_diff(&fd.riemann_down) < 1e-7);
        assert!(jet.ricci.max_diff(&fd.ricci) < 1e-7);
        assert!((jet.scalar - fd.scalar).abs() < 1e-7);
    }
}
