use num_rational::Rational64;
use num_traits::{One, Zero};
use serde::Serialize;

use super::NkError;

/// Square matrix over the rationals.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct QMat(pub Vec<Vec<Rational64>>);

impl QMat {
    pub fn zeros(d: usize) -> QMat {
        QMat(vec![vec![Rational64::zero(); d]; d])
    }

    pub fn identity(d: usize) -> QMat {
        let mut m = QMat::zeros(d);
        for i in 0..d {
            m.0[i][i] = Rational64::one();
        }
        m
    }

    pub fn from_ints(rows: &[Vec<i64>]) -> QMat {
        QMat(rows.iter().map(|r| r.iter().map(|v| Rational64::from_integer(*v)).collect()).collect())
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn mul(&self, o: &QMat) -> QMat {
        let d = self.dim();
        let mut out = QMat::zeros(d);
        for i in 0..d {
            for k in 0..d {
                let a = self.0[i][k];
                if a.is_zero() {
                    continue;
                }
                for j in 0..d {
                    out.0[i][j] += a * o.0[k][j];
                }
            }
        }
        out
    }

    pub fn add(&self, o: &QMat) -> QMat {
        self.zip(o, |a, b| a + b)
    }

    pub fn sub(&self, o: &QMat) -> QMat {
        self.zip(o, |a, b| a - b)
    }

    pub fn neg(&self) -> QMat {
        QMat(self.0.iter().map(|r| r.iter().map(|v| -v).collect()).collect())
    }

    pub fn transpose(&self) -> QMat {
        let d = self.dim();
        let mut out = QMat::zeros(d);
        for i in 0..d {
            for j in 0..d {
                out.0[j][i] = self.0[i][j];
            }
        }
        out
    }

    fn zip(&self, o: &QMat, f: impl Fn(Rational64, Rational64) -> Rational64) -> QMat {
        QMat(
            self.0
                .iter()
                .zip(&o.0)
                .map(|(r, s)| r.iter().zip(s).map(|(a, b)| f(*a, *b)).collect())
                .collect(),
        )
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().flatten().all(Zero::is_zero)
    }
}

/// `N₀ = [[0, I_2n], [0, 0]]` on a `4n`-dimensional space.
pub fn standard_null_block(n: usize) -> QMat {
    let m = 2 * n;
    let mut q = QMat::zeros(2 * m);
    for i in 0..m {
        q.0[i][m + i] = Rational64::one();
    }
    q
}

/// Solve the linear system `N₁X + XN₁ = −Id` exactly, then search the solution
/// space (free parameters in {0, ±1}) for a null `X`.
pub fn partner_null_structure(n1: &QMat) -> Option<QMat> {
    let d = n1.dim();
    let unknowns = d * d;
    // row (i, j) of the system: Σ_k N1[i][k] X[k][j] + X[i][k] N1[k][j] = −δ_ij
    let mut rows: Vec<Vec<Rational64>> = Vec::with_capacity(unknowns);
    for i in 0..d {
        for j in 0..d {
            let mut row = vec![Rational64::zero(); unknowns + 1];
            for k in 0..d {
                row[k * d + j] += n1.0[i][k];
                row[i * d + k] += n1.0[k][j];
            }
            row[unknowns] = if i == j { -Rational64::one() } else { Rational64::zero() };
            rows.push(row);
        }
    }
    let (pivots, reduced) = rref(rows, unknowns);
    if reduced.iter().any(|r| r[..unknowns].iter().all(Zero::is_zero) && !r[unknowns].is_zero()) {
        return None;
    }
    let free: Vec<usize> = (0..unknowns).filter(|c| !pivots.contains(c)).collect();
    let solve = |vals: &[i64]| -> QMat {
        let mut x = vec![Rational64::zero(); unknowns];
        for (f, v) in free.iter().zip(vals) {
            x[*f] = Rational64::from_integer(*v);
        }
        for (r, &p) in pivots.iter().enumerate() {
            let mut v = reduced[r][unknowns];
            for f in &free {
                v -= reduced[r][*f] * x[*f];
            }
            x[p] = v;
        }
        QMat((0..d).map(|i| x[i * d..(i + 1) * d].to_vec()).collect())
    };
    // enumerate free assignments in order of increasing support
    let nf = free.len();
    for support in 0..=nf.min(3) {
        let mut found = None;
        for_each_assignment(nf, support, &mut |vals| {
            if found.is_none() {
                let x = solve(vals);
                if x.mul(&x).is_zero() {
                    found = Some(x);
                }
            }
        });
        if found.is_some() {
            return found;
        }
    }
    None
}

fn for_each_assignment(n: usize, support: usize, f: &mut dyn FnMut(&[i64])) {
    fn rec(pos: usize, left: usize, cur: &mut Vec<i64>, f: &mut dyn FnMut(&[i64])) {
        if pos == cur.len() {
            if left == 0 {
                f(cur);
            }
            return;
        }
        if cur.len() - pos > left {
            cur[pos] = 0;
            rec(pos + 1, left, cur, f);
        }
        if left > 0 {
            for v in [1, -1] {
                cur[pos] = v;
                rec(pos + 1, left - 1, cur, f);
            }
            cur[pos] = 0;
        }
    }
    let mut cur = vec![0; n];
    rec(0, support, &mut cur, f);
}

fn rref(mut rows: Vec<Vec<Rational64>>, cols: usize) -> (Vec<usize>, Vec<Vec<Rational64>>) {
    let mut pivots = Vec::new();
    let mut r = 0;
    for c in 0..cols {
        let Some(p) = (r..rows.len()).find(|&i| !rows[i][c].is_zero()) else { continue };
        rows.swap(r, p);
        let inv = rows[r][c].recip();
        for v in rows[r].iter_mut() {
            *v *= inv;
        }
        for i in 0..rows.len() {
            if i != r && !rows[i][c].is_zero() {
                let f = rows[i][c];
                let pivot_row = rows[r].clone();
                for (v, pv) in rows[i].iter_mut().zip(&pivot_row) {
                    *v -= f * pv;
                }
            }
        }
        pivots.push(c);
        r += 1;
        if r == rows.len() {
            break;
        }
    }
    (pivots, rows)
}

#[derive(Clone, Debug, Serialize)]
pub struct QuaternionicReport {
    pub i_squared_minus_id: bool,
    pub s_squared_id: bool,
    pub t_squared_id: bool,
    pub is_minus_t_minus_si: bool,
    pub it_s_minus_ti: bool,
    pub st_i_minus_ts: bool,
}

impl QuaternionicReport {
    pub fn all(&self) -> bool {
        self.i_squared_minus_id
            && self.s_squared_id
            && self.t_squared_id
            && self.is_minus_t_minus_si
            && self.it_s_minus_ti
            && self.st_i_minus_ts
    }
}

/// `I = N₁ + N₂, S = N₁ − N₂, T = [N₁, N₂]` with the six algebra identities
/// checked exactly.
pub fn pseudo_quaternionic_triple(
    n1: &QMat,
    n2: &QMat,
) -> Result<(QMat, QMat, QMat, QuaternionicReport), NkError> {
    let d = n1.dim();
    if n2.dim() != d {
        return Err(NkError::Arity { expected: d, got: n2.dim() });
    }
    if !n1.mul(n1).is_zero() || !n2.mul(n2).is_zero() {
        return Err(NkError::Precondition("N1 and N2 must square to zero".into()));
    }
    let id = QMat::identity(d);
    if n1.mul(n2).add(&n2.mul(n1)) != id.neg() {
        return Err(NkError::Precondition("N1 N2 + N2 N1 must equal -Id".into()));
    }
    let i = n1.add(n2);
    let s = n1.sub(n2);
    let t = n1.mul(n2).sub(&n2.mul(n1));
    let rep = QuaternionicReport {
        i_squared_minus_id: i.mul(&i) == id.neg(),
        s_squared_id: s.mul(&s) == id,
        t_squared_id: t.mul(&t) == id,
        is_minus_t_minus_si: i.mul(&s) == t.neg() && s.mul(&i) == t,
        it_s_minus_ti: i.mul(&t) == s && t.mul(&i) == s.neg(),
        st_i_minus_ts: s.mul(&t) == i && t.mul(&s) == i.neg(),
    };
    Ok((i, s, t, rep))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn standard_block_has_a_partner() {
        for n in 1..=2 {
            let n1 = standard_null_block(n);
            let n2 = partner_null_structure(&n1).unwrap();
            let (_, _, _, rep) = pseudo_quaternionic_triple(&n1, &n2).unwrap();
            assert!(rep.all(), "{rep:?}");
        }
    }

    #[test]
    fn equal_structures_violate_precondition() {
        let n1 = standard_null_block(1);
        assert!(matches!(
            pseudo_quaternionic_triple(&n1, &n1),
            Err(NkError::Precondition(_))
        ));
    }
}
