use nalgebra::{DMatrix, Matrix5};

use super::{LeftInvariantFrame, Sl2Error};
use crate::expr::{symbolic_zero, Expr, Point, Tape, C64};
use crate::geometry::{FrameField, GeometryError};

const MAX_DEGREE: usize = 8;

/// `q*(s) = Σ f_i T_{jk} π^k ε^{ij}` in the affine chart `π = (1, −λ)`,
/// with `T_{ij} = E_{ij}(t)` and `ε^{12} = 1`:
///
/// ```text
/// q = f₁ (T₂₁ − λT₂₂) − f₂ (T₁₁ − λT₁₂)
/// ```
pub fn quartic_expr(
    frame: &FrameField,
    f1: &Expr,
    f2: &Expr,
    lambda: &str,
) -> Result<Expr, Sl2Error> {
    let ti = frame.chart().index("t").ok_or_else(|| Sl2Error::MissingCoordinate("t".into()))?;
    let t = |i: usize, j: usize| frame.vectors[i][j][ti].clone();
    let lam = Expr::var(lambda);
    let q = f1 * (t(1, 0) - &lam * t(1, 1)) - f2 * (t(0, 0) - &lam * t(0, 1));
    Ok(q.simplify())
}

/// Polynomial in `λ` with numeric coefficients, lowest degree first.
#[derive(Clone, Debug, PartialEq)]
pub struct Quartic {
    pub coeffs: Vec<C64>,
}

impl Quartic {
    /// Highest power with a coefficient above `tol`; `None` for the zero polynomial.
    pub fn degree(&self, tol: f64) -> Option<usize> {
        self.coeffs.iter().rposition(|c| c.norm() > tol)
    }

    pub fn is_zero(&self, tol: f64) -> bool {
        self.degree(tol).is_none()
    }

    pub fn eval(&self, lambda: C64) -> C64 {
        self.coeffs.iter().rev().fold(C64::new(0.0, 0.0), |acc, c| acc * lambda + c)
    }

    /// Roots from the eigenvalues of the companion matrix.
    pub fn roots(&self, tol: f64) -> Vec<C64> {
        let Some(deg) = self.degree(tol) else { return Vec::new() };
        if deg == 0 {
            return Vec::new();
        }
        let lead = self.coeffs[deg];
        let mut m = DMatrix::<C64>::zeros(deg, deg);
        for i in 1..deg {
            m[(i, i - 1)] = C64::new(1.0, 0.0);
        }
        for i in 0..deg {
            m[(i, deg - 1)] = -self.coeffs[i] / lead;
        }
        m.schur().eigenvalues().map(|v| v.iter().copied().collect()).unwrap_or_default()
    }
}

/// Coefficients of the quartic at a point (which fixes `t` and any parameters).
pub fn quartic_from_frame(
    frame: &FrameField,
    f1: &Expr,
    f2: &Expr,
    lambda: &str,
    at: &Point,
) -> Result<Quartic, Sl2Error> {
    let q = quartic_expr(frame, f1, f2, lambda)?;
    let mut derivs = vec![q];
    for _ in 0..=MAX_DEGREE {
        let next = derivs.last().unwrap().diff(lambda).simplify();
        derivs.push(next);
    }
    if !symbolic_zero(&derivs[MAX_DEGREE + 1]) {
        return Err(Sl2Error::NotPolynomial(MAX_DEGREE));
    }
    let mut p = at.clone();
    p.set_real(lambda, 0.0);
    let vals = Tape::compile(&derivs[..=MAX_DEGREE]).eval(&p).map_err(GeometryError::from)?;
    let mut fact = 1.0;
    let coeffs = vals
        .iter()
        .enumerate()
        .map(|(k, v)| {
            if k > 0 {
                fact *= k as f64;
            }
            v / fact
        })
        .collect();
    Ok(Quartic { coeffs })
}

/// Independent route: `(dλ∧dt∧σ¹∧σ²∧σ³)(l₁, l₂, R₁, R₂, R₃) / (σ¹∧σ²∧σ³)(R₁, R₂, R₃)`
/// with `l₁ = E₁₁ − λE₁₂ + f₁∂_λ`, `l₂ = E₂₁ − λE₂₂ + f₂∂_λ`, as a 5×5 determinant.
/// `at` must carry the group coordinates and `λ`.
pub fn quartic_direct(
    frame: &FrameField,
    group: &LeftInvariantFrame,
    f1: &Expr,
    f2: &Expr,
    lambda: &str,
    at: &Point,
) -> Result<f64, Sl2Error> {
    let chart = frame.chart();
    let ti = chart.index("t").ok_or_else(|| Sl2Error::MissingCoordinate("t".into()))?;
    let sigma = group.sigma_on(chart)?;
    let right = group.right_on(chart)?;
    let lam = Expr::var(lambda);
    let l = |i: usize| -> Vec<Expr> {
        (0..4).map(|a| &frame.vectors[i][0][a] - &lam * &frame.vectors[i][1][a]).collect()
    };
    // vectors as (dλ component, chart components)
    let vecs: Vec<(Expr, Vec<Expr>)> = vec![
        (f1.clone(), l(0)),
        (f2.clone(), l(1)),
        (Expr::zero(), right[0].clone()),
        (Expr::zero(), right[1].clone()),
        (Expr::zero(), right[2].clone()),
    ];
    let mut forms: Vec<Vec<Expr>> = vec![(0..4).map(|a| if a == ti { Expr::one() } else { Expr::zero() }).collect()];
    forms.extend(sigma.iter().cloned());
    let mut entries = Vec::with_capacity(25);
    for (dl, _) in &vecs {
        entries.push(dl.clone());
    }
    for w in &forms {
        for (_, v) in &vecs {
            entries.push(w.iter().zip(v).map(|(a, b)| a * b).sum());
        }
    }
    let vals = Tape::compile(&entries).eval(at).map_err(GeometryError::from)?;
    let m = Matrix5::from_row_iterator(vals.iter().map(|z| z.re));
    let vol_r = DMatrix::from_row_iterator(3, 3, m.view((2, 2), (3, 3)).iter().copied());
    Ok(m.determinant() / vol_r.determinant())
}
