use nalgebra::Matrix2;

use crate::expr::{Derivation, EvalError, Expr, Point, Tape, C64};

/// Numeric 2×2 complex matrix.
pub type Mat2 = Matrix2<C64>;

fn c(re: f64) -> C64 {
    C64::new(re, 0.0)
}

/// `L₁ = diag(½, −½)`, `L₂ = [[0,1],[0,0]]`, `L₃ = [[0,0],[1,0]]`.
pub fn basis() -> [Mat2; 3] {
    let z = c(0.0);
    [
        Mat2::new(c(0.5), z, z, c(-0.5)),
        Mat2::new(z, c(1.0), z, z),
        Mat2::new(z, z, c(1.0), z),
    ]
}

pub fn from_coeffs(k: [C64; 3]) -> Mat2 {
    let b = basis();
    b[0] * k[0] + b[1] * k[1] + b[2] * k[2]
}

/// Coefficients in the `L` basis of the trace-free part.
pub fn coeffs(m: &Mat2) -> [C64; 3] {
    [m[(0, 0)] - m[(1, 1)], m[(0, 1)], m[(1, 0)]]
}

pub fn commutator(a: &Mat2, b: &Mat2) -> Mat2 {
    a * b - b * a
}

/// 2×2 matrix of expressions.
#[derive(Clone, Debug, PartialEq)]
pub struct ExprMat2(pub [[Expr; 2]; 2]);

impl ExprMat2 {
    pub fn new(a: Expr, b: Expr, c: Expr, d: Expr) -> ExprMat2 {
        ExprMat2([[a, b], [c, d]])
    }

    pub fn zero() -> ExprMat2 {
        ExprMat2::new(Expr::zero(), Expr::zero(), Expr::zero(), Expr::zero())
    }

    pub fn identity() -> ExprMat2 {
        ExprMat2::new(Expr::one(), Expr::zero(), Expr::zero(), Expr::one())
    }

    /// `k₁L₁ + k₂L₂ + k₃L₃`.
    pub fn from_coeffs(k: [Expr; 3]) -> ExprMat2 {
        let [k1, k2, k3] = k;
        let h = Expr::rational(1, 2) * &k1;
        ExprMat2::new(h.clone(), k2, k3, -h)
    }

    pub fn basis(i: usize) -> ExprMat2 {
        let mut k = [Expr::zero(), Expr::zero(), Expr::zero()];
        k[i] = Expr::one();
        ExprMat2::from_coeffs(k)
    }

    /// `L`-basis coefficients of the trace-free part.
    pub fn coeffs(&self) -> [Expr; 3] {
        let m = &self.0;
        [
            (&m[0][0] - &m[1][1]).simplify(),
            m[0][1].clone(),
            m[1][0].clone(),
        ]
    }

    pub fn get(&self, i: usize, j: usize) -> &Expr {
        &self.0[i][j]
    }

    pub fn map(&self, f: impl Fn(&Expr) -> Expr) -> ExprMat2 {
        let m = &self.0;
        ExprMat2([[f(&m[0][0]), f(&m[0][1])], [f(&m[1][0]), f(&m[1][1])]])
    }

    pub fn entries(&self) -> impl Iterator<Item = &Expr> {
        self.0.iter().flatten()
    }

    pub fn simplify(&self) -> ExprMat2 {
        self.map(Expr::simplify)
    }

    pub fn add(&self, o: &ExprMat2) -> ExprMat2 {
        let (a, b) = (&self.0, &o.0);
        ExprMat2([
            [&a[0][0] + &b[0][0], &a[0][1] + &b[0][1]],
            [&a[1][0] + &b[1][0], &a[1][1] + &b[1][1]],
        ])
    }

    pub fn sub(&self, o: &ExprMat2) -> ExprMat2 {
        self.add(&o.scale(&Expr::int(-1)))
    }

    pub fn scale(&self, s: &Expr) -> ExprMat2 {
        self.map(|e| s * e)
    }

    pub fn mul(&self, o: &ExprMat2) -> ExprMat2 {
        let (a, b) = (&self.0, &o.0);
        let entry = |i: usize, j: usize| &a[i][0] * &b[0][j] + &a[i][1] * &b[1][j];
        ExprMat2([[entry(0, 0), entry(0, 1)], [entry(1, 0), entry(1, 1)]])
    }

    pub fn commutator(&self, o: &ExprMat2) -> ExprMat2 {
        self.mul(o).sub(&o.mul(self))
    }

    pub fn trace(&self) -> Expr {
        &self.0[0][0] + &self.0[1][1]
    }

    pub fn det(&self) -> Expr {
        let m = &self.0;
        &m[0][0] * &m[1][1] - &m[0][1] * &m[1][0]
    }

    /// Inverse by the adjugate.
    pub fn inverse(&self) -> ExprMat2 {
        let m = &self.0;
        let r = self.det().recip();
        ExprMat2([
            [&r * &m[1][1], -(&r * &m[0][1])],
            [-(&r * &m[1][0]), &r * &m[0][0]],
        ])
    }

    pub fn diff(&self, var: &str) -> ExprMat2 {
        self.map(|e| e.diff(var))
    }

    pub fn derive(&self, d: &Derivation) -> ExprMat2 {
        self.map(|e| d.apply(e))
    }

    pub fn subs_one(&self, var: &str, value: &Expr) -> ExprMat2 {
        self.map(|e| e.subs_one(var, value))
    }

    pub fn eval(&self, p: &Point) -> Result<Mat2, EvalError> {
        let v = Tape::compile(&self.entries().cloned().collect::<Vec<_>>()).eval(p)?;
        Ok(Mat2::new(v[0], v[1], v[2], v[3]))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn basis_brackets() {
        let [l1, l2, l3] = basis();
        assert_eq!(commutator(&l1, &l2), l2);
        assert_eq!(commutator(&l1, &l3), -l3);
        assert_eq!(commutator(&l2, &l3), l1 * c(2.0));
    }

    #[test]
    fn coefficient_round_trip() {
        let k = [c(0.3), c(-1.2), c(2.5)];
        assert_eq!(coeffs(&from_coeffs(k)), k);
        let e = ExprMat2::from_coeffs([Expr::var("a"), Expr::var("b"), Expr::var("c")]);
        let back = e.coeffs();
        assert!(crate::expr::symbolic_zero(&(&back[0] - Expr::var("a"))));
    }
}
