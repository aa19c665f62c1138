use rand::Rng;

use super::{x_name, y_name};
use crate::expr::Expr;

fn coefficient(rng: &mut impl Rng) -> Expr {
    let mut p = rng.gen_range(-3i64..=2);
    if p >= 0 {
        p += 1;
    }
    Expr::rational(p, rng.gen_range(1..=3))
}

/// Random polynomial potential in `x1..x2n, y1..y2n` of total degree ≤ `max_degree`.
///
/// Always contains a term cubic or quadratic in `y` so the metric is not flat.
pub fn random_polynomial_theta(n: usize, max_degree: u32, rng: &mut impl Rng) -> Expr {
    assert!(max_degree >= 2);
    let m = 2 * n;
    let vars: Vec<String> = (0..m).map(x_name).chain((0..m).map(y_name)).collect();
    let mut terms = Vec::new();
    // y-curved seed term
    let (a, b) = (rng.gen_range(0..m), rng.gen_range(0..m));
    let mut seed = coefficient(rng) * Expr::var(&y_name(a)) * Expr::var(&y_name(b));
    if max_degree >= 3 {
        seed = seed * Expr::var(&vars[rng.gen_range(0..2 * m)]);
    }
    terms.push(seed);
    let count = rng.gen_range(3..=6);
    for _ in 0..count {
        let deg = rng.gen_range(1..=max_degree);
        let mut mono = coefficient(rng);
        for _ in 0..deg {
            mono = mono * Expr::var(&vars[rng.gen_range(0..2 * m)]);
        }
        terms.push(mono);
    }
    Expr::sum(terms).simplify()
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;

    #[test]
    fn deterministic_for_a_seed() {
        let mut a = rand_chacha::ChaCha8Rng::seed_from_u64(5);
        let mut b = rand_chacha::ChaCha8Rng::seed_from_u64(5);
        for _ in 0..10 {
            let t = random_polynomial_theta(1, 4, &mut a);
            assert_eq!(t, random_polynomial_theta(1, 4, &mut b));
            assert!(t.depends_on("y1") || t.depends_on("y2"));
        }
    }
}
