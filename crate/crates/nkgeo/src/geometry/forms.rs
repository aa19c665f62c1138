use std::collections::BTreeMap;

use super::numeric::NumTensor;
use super::{Chart, GeometryError, VectorField};
use crate::expr::{Expr, Point, Tape};

/// Differential form stored by strictly increasing index tuples.
///
/// `ω = Σ_{i1<…<ik} ω_{i1…ik} dx^{i1} ∧ … ∧ dx^{ik}`.
#[derive(Clone, Debug)]
pub struct DiffForm {
    chart: Chart,
    degree: usize,
    comps: BTreeMap<Vec<usize>, Expr>,
}

fn sort_with_sign(idx: &[usize]) -> Option<(Vec<usize>, i64)> {
    let mut v = idx.to_vec();
    let mut sign = 1;
    for i in 0..v.len() {
        for j in 0..v.len() - 1 - i {
            if v[j] > v[j + 1] {
                v.swap(j, j + 1);
                sign = -sign;
            } else if v[j] == v[j + 1] {
                return None;
            }
        }
    }
    if v.windows(2).any(|w| w[0] == w[1]) {
        return None;
    }
    Some((v, sign))
}

impl DiffForm {
    pub fn zero(chart: Chart, degree: usize) -> DiffForm {
        DiffForm { chart, degree, comps: BTreeMap::new() }
    }

    pub fn function(chart: Chart, f: Expr) -> DiffForm {
        let mut w = DiffForm::zero(chart, 0);
        w.add(&[], f);
        w
    }

    /// `dx^i` for a chart coordinate.
    pub fn coordinate(chart: Chart, i: usize) -> DiffForm {
        let mut w = DiffForm::zero(chart, 1);
        w.add(&[i], Expr::one());
        w
    }

    /// One-form from covector components.
    pub fn one_form(chart: Chart, comps: &[Expr]) -> DiffForm {
        let mut w = DiffForm::zero(chart, 1);
        for (i, c) in comps.iter().enumerate() {
            w.add(&[i], c.clone());
        }
        w
    }

    /// Two-form from a full antisymmetric array `F_ab` (only `a < b` is read).
    pub fn two_form(chart: Chart, f: &[Vec<Expr>]) -> DiffForm {
        let mut w = DiffForm::zero(chart, 2);
        for a in 0..f.len() {
            for b in a + 1..f.len() {
                w.add(&[a, b], f[a][b].clone());
            }
        }
        w
    }

    pub fn chart(&self) -> &Chart {
        &self.chart
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    /// Add `coeff · dx^{idx}`; `idx` need not be sorted.
    pub fn add(&mut self, idx: &[usize], coeff: Expr) {
        assert_eq!(idx.len(), self.degree);
        let Some((key, sign)) = sort_with_sign(idx) else { return };
        let c = if sign < 0 { -coeff } else { coeff };
        let entry = self.comps.entry(key).or_insert_with(Expr::zero);
        *entry = &*entry + &c;
    }

    pub fn get(&self, idx: &[usize]) -> Expr {
        match sort_with_sign(idx) {
            None => Expr::zero(),
            Some((key, sign)) => {
                let c = self.comps.get(&key).cloned().unwrap_or_else(Expr::zero);
                if sign < 0 {
                    -c
                } else {
                    c
                }
            }
        }
    }

    pub fn terms(&self) -> impl Iterator<Item = (&[usize], &Expr)> {
        self.comps.iter().map(|(k, v)| (k.as_slice(), v))
    }

    pub fn simplify(&self) -> DiffForm {
        let comps = self
            .comps
            .iter()
            .map(|(k, v)| (k.clone(), v.simplify()))
            .filter(|(_, v)| !v.is_zero_literal())
            .collect();
        DiffForm { chart: self.chart.clone(), degree: self.degree, comps }
    }

    pub fn scale(&self, s: &Expr) -> DiffForm {
        let comps = self.comps.iter().map(|(k, v)| (k.clone(), s * v)).collect();
        DiffForm { chart: self.chart.clone(), degree: self.degree, comps }
    }

    pub fn plus(&self, other: &DiffForm) -> DiffForm {
        assert_eq!(self.degree, other.degree);
        let mut out = self.clone();
        for (k, v) in &other.comps {
            out.add(k, v.clone());
        }
        out
    }

    pub fn wedge(&self, other: &DiffForm) -> DiffForm {
        let mut out = DiffForm::zero(self.chart.clone(), self.degree + other.degree);
        for (a, x) in &self.comps {
            for (b, y) in &other.comps {
                let mut idx = a.clone();
                idx.extend(b);
                out.add(&idx, x * y);
            }
        }
        out.simplify()
    }

    /// Exterior derivative using the chart's derivations.
    pub fn d(&self) -> DiffForm {
        let dim = self.chart.dim();
        let mut out = DiffForm::zero(self.chart.clone(), self.degree + 1);
        for (k, v) in &self.comps {
            for i in 0..dim {
                if k.contains(&i) {
                    continue;
                }
                let dv = self.chart.partial(i, v);
                if dv.is_zero_literal() {
                    continue;
                }
                let mut idx = vec![i];
                idx.extend(k);
                out.add(&idx, dv);
            }
        }
        out.simplify()
    }

    /// Interior product `ι_X ω`.
    pub fn interior(&self, x: &VectorField) -> DiffForm {
        assert!(self.degree > 0);
        let mut out = DiffForm::zero(self.chart.clone(), self.degree - 1);
        for (k, v) in &self.comps {
            for (pos, &i) in k.iter().enumerate() {
                if x[i].is_zero_literal() {
                    continue;
                }
                let mut rest = k.clone();
                rest.remove(pos);
                let c = &x[i] * v;
                out.add(&rest, if pos % 2 == 0 { c } else { -c });
            }
        }
        out.simplify()
    }

    /// Full antisymmetric component array of a 2-form at a point.
    pub fn eval_2form(&self, p: &Point) -> Result<NumTensor, GeometryError> {
        assert_eq!(self.degree, 2);
        let d = self.chart.dim();
        let keys: Vec<&Vec<usize>> = self.comps.keys().collect();
        let tape = Tape::compile(&self.comps.values().cloned().collect::<Vec<_>>());
        let vals = tape.eval(p)?;
        let mut t = NumTensor::zeros(d, 2);
        for (k, v) in keys.iter().zip(vals) {
            *t.at_mut(&[k[0], k[1]]) = v.re;
            *t.at_mut(&[k[1], k[0]]) = -v.re;
        }
        Ok(t)
    }

    /// Largest component magnitude at a point.
    pub fn max_abs_at(&self, p: &Point) -> Result<f64, GeometryError> {
        let tape = Tape::compile(&self.comps.values().cloned().collect::<Vec<_>>());
        Ok(tape.eval(p)?.iter().fold(0.0, |a, z| a.max(z.norm())))
    }

    pub fn is_literal_zero(&self) -> bool {
        self.comps.values().all(Expr::is_zero_literal)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::{parse, symbolic_zero};

    #[test]
    fn dd_vanishes() {
        let chart = Chart::new(&["x", "y", "z"]).unwrap();
        let f = DiffForm::function(chart.clone(), parse("sin(x*y) + z^3*exp(y)").unwrap());
        let dd = f.d().d();
        assert!(dd.terms().all(|(_, c)| symbolic_zero(c)));
        let a = DiffForm::one_form(
            chart,
            &[parse("y*z").unwrap(), parse("x^2").unwrap(), parse("cosh(x)").unwrap()],
        );
        assert!(a.d().d().terms().all(|(_, c)| symbolic_zero(c)));
    }

    #[test]
    fn wedge_is_graded_commutative() {
        let chart = Chart::new(&["x", "y"]).unwrap();
        let dx = DiffForm::coordinate(chart.clone(), 0);
        let dy = DiffForm::coordinate(chart, 1);
        let a = dx.wedge(&dy);
        let b = dy.wedge(&dx);
        assert_eq!(a.get(&[0, 1]), Expr::one());
        assert!(symbolic_zero(&(b.get(&[0, 1]) + Expr::one())));
        assert!(dx.wedge(&dx).is_literal_zero());
    }
}
