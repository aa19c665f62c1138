use super::numeric::NumTensor;

/// Orientation for charts ordered `(x^1..x^n, y^1..y^n)`: with this sign the
/// 2-form `Ω = ½ ω_ij dx^i ∧ dx^j` of a flat normal-form metric is self-dual.
pub const ORIENTATION_SIGN: f64 = 1.0;

fn perm_sign(idx: &[usize]) -> f64 {
    let mut s = 1.0;
    for i in 0..idx.len() {
        for j in i + 1..idx.len() {
            if idx[i] == idx[j] {
                return 0.0;
            }
            if idx[i] > idx[j] {
                s = -s;
            }
        }
    }
    s
}

/// `ε_abcd = s √|det g| [abcd]` in dimension 4.
pub fn levi_civita(g: &NumTensor, sign: f64) -> NumTensor {
    assert_eq!(g.d, 4, "volume form implemented for dimension 4");
    let vol = g.matrix().determinant().abs().sqrt();
    NumTensor::from_fn(4, 4, |i| sign * vol * perm_sign(i))
}

/// `(★F)_ab = ½ ε_ab^{cd} F_cd` for a 2-form given by its full antisymmetric array.
pub fn hodge_star_2form(f: &NumTensor, g: &NumTensor, ginv: &NumTensor, sign: f64) -> NumTensor {
    let eps = levi_civita(g, sign);
    let up = raise_pair(f, ginv);
    NumTensor::from_fn(4, 2, |i| {
        let mut s = 0.0;
        for c in 0..4 {
            for d in 0..4 {
                s += eps.at(&[i[0], i[1], c, d]) * up.at(&[c, d]);
            }
        }
        0.5 * s
    })
}

fn raise_pair(f: &NumTensor, ginv: &NumTensor) -> NumTensor {
    NumTensor::from_fn(4, 2, |i| {
        let mut s = 0.0;
        for a in 0..4 {
            for b in 0..4 {
                s += ginv.at(&[i[0], a]) * ginv.at(&[i[1], b]) * f.at(&[a, b]);
            }
        }
        s
    })
}

/// Self-dual and anti-self-dual parts of a Weyl-type tensor, split on the
/// second index pair: `C± = ½(C ± C★)`.
#[derive(Clone, Debug)]
pub struct WeylSplit {
    pub plus: NumTensor,
    pub minus: NumTensor,
}

pub fn weyl_split(c: &NumTensor, g: &NumTensor, ginv: &NumTensor, sign: f64) -> WeylSplit {
    let eps = levi_civita(g, sign);
    let mut star = NumTensor::zeros(4, 4);
    for a in 0..4 {
        for b in 0..4 {
            let pair = NumTensor::from_fn(4, 2, |i| c.at(&[a, b, i[0], i[1]]));
            let up = raise_pair(&pair, ginv);
            for p in 0..4 {
                for q in 0..4 {
                    let mut s = 0.0;
                    for e in 0..4 {
                        for f in 0..4 {
                            s += eps.at(&[p, q, e, f]) * up.at(&[e, f]);
                        }
                    }
                    *star.at_mut(&[a, b, p, q]) = 0.5 * s;
                }
            }
        }
    }
    let plus = NumTensor {
        d: 4,
        rank: 4,
        data: c.data.iter().zip(&star.data).map(|(x, y)| 0.5 * (x + y)).collect(),
    };
    let minus = NumTensor {
        d: 4,
        rank: 4,
        data: c.data.iter().zip(&star.data).map(|(x, y)| 0.5 * (x - y)).collect(),
    };
    WeylSplit { plus, minus }
}

#[cfg(test)]
mod tests {
    use super::*;

    // flat ½-normalized Walker metric, chart (x1, x2, y1, y2)
    fn flat() -> (NumTensor, NumTensor) {
        let mut g = NumTensor::zeros(4, 2);
        *g.at_mut(&[2, 1]) = 0.5;
        *g.at_mut(&[1, 2]) = 0.5;
        *g.at_mut(&[3, 0]) = -0.5;
        *g.at_mut(&[0, 3]) = -0.5;
        let ginv = NumTensor::from_matrix(&g.matrix().try_inverse().unwrap());
        (g, ginv)
    }

    #[test]
    fn omega_is_self_dual_with_chosen_orientation() {
        let (g, ginv) = flat();
        let mut om = NumTensor::zeros(4, 2);
        *om.at_mut(&[0, 1]) = 0.5;
        *om.at_mut(&[1, 0]) = -0.5;
        let star = hodge_star_2form(&om, &g, &ginv, ORIENTATION_SIGN);
        assert!(star.max_diff(&om) < 1e-14);
    }

    #[test]
    fn star_squares_to_identity_in_split_signature() {
        let (g, ginv) = flat();
        let f = NumTensor::from_fn(4, 2, |i| {
            let v = [[0.0, 1.0, 2.0, -1.0], [-1.0, 0.0, 0.5, 3.0], [-2.0, -0.5, 0.0, 1.5], [1.0, -3.0, -1.5, 0.0]];
            v[i[0]][i[1]]
        });
        let ss = hodge_star_2form(&hodge_star_2form(&f, &g, &ginv, 1.0), &g, &ginv, 1.0);
        assert!(ss.max_diff(&f) < 1e-12);
    }
}
