use nkgeo::expr::{parse, symbolic_zero, Expr, Point, SampleSpace};
use nkgeo::geometry::{curvature_at, fd_riemann, hodge_star_2form, NumTensor, ORIENTATION_SIGN};
use nkgeo::isomonodromy::{classify_gauge, integrate_flow, M2};
use nkgeo::nullkahler::{build_normal_form, random_polynomial_theta, verify_structure};
use nkgeo::ode::OdeOptions;
use proptest::prelude::*;
use proptest::test_runner::{Config, RngSeed};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn config(cases: u32) -> Config {
    Config {
        cases,
        rng_seed: RngSeed::Fixed(0x6e6b_6765_6f),
        failure_persistence: None,
        ..Config::default()
    }
}

// Trees over x, y mixing polynomial, trigonometric and pole-free quotient nodes.
fn tree() -> impl Strategy<Value = Expr> {
    let leaf = prop_oneof![
        Just(Expr::var("x")),
        Just(Expr::var("y")),
        (-3i64..=3, 1i64..=3).prop_map(|(p, q)| Expr::rational(p, q)),
    ];
    leaf.prop_recursive(6, 48, 2, |inner| {
        prop_oneof![
            (inner.clone(), inner.clone()).prop_map(|(a, b)| a + b),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| a * b),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| a - b),
            (inner.clone(), 2i64..=3).prop_map(|(a, k)| a.powi(k)),
            inner.clone().prop_map(Expr::sin),
            inner.clone().prop_map(Expr::cos),
            inner.clone().prop_map(Expr::tanh),
            inner.clone().prop_map(|a| a.sin().exp()),
            (inner.clone(), inner).prop_map(|(a, b)| a / (Expr::int(2) + b.cos())),
        ]
    })
}

fn point(x: f64, y: f64) -> Point {
    Point::from_real(&[("x", x), ("y", y)])
}

fn value(e: &Expr, x: f64, y: f64) -> Option<f64> {
    e.eval_real(&point(x, y)).ok().filter(|v| v.is_finite() && v.abs() < 1e6)
}

/// Five-point central difference in `x`.
fn fd_x(e: &Expr, x: f64, y: f64) -> Option<f64> {
    let h = 1e-3;
    let f = |s: f64| value(e, x + s * h, y);
    Some((f(-2.0)? - 8.0 * f(-1.0)? + 8.0 * f(1.0)? - f(2.0)?) / (12.0 * h))
}

fn vanishes(e: &Expr, seed: u64) -> bool {
    let mut space = SampleSpace::new(seed).vars(["x", "y"]);
    e.is_zero(&mut space, 20, 1e-9).map(|v| v.is_zero()).unwrap_or(false)
}

proptest! {
    #![proptest_config(config(96))]

    #[test]
    fn derivative_matches_finite_difference(e in tree(), x in -1.0..1.0f64, y in -1.0..1.0f64) {
        let fd = fd_x(&e, x, y);
        prop_assume!(fd.is_some());
        let fd = fd.unwrap();
        let exact = e.diff("x").eval_real(&point(x, y)).unwrap();
        prop_assert!((exact - fd).abs() <= 1e-6 * (1.0 + fd.abs()), "{e}: {exact} vs {fd}");
    }

    #[test]
    fn derivative_is_linear(
        a in tree(), b in tree(),
        (p, q) in (-4i64..=4, 1i64..=4),
        (r, s) in (-4i64..=4, 1i64..=4),
    ) {
        let (ca, cb) = (Expr::rational(p, q), Expr::rational(r, s));
        let lhs = (&ca * &a + &cb * &b).diff("x").simplify();
        let rhs = (&ca * a.diff("x") + &cb * b.diff("x")).simplify();
        prop_assert!(lhs == rhs || symbolic_zero(&(&lhs - &rhs)) || vanishes(&(lhs - rhs), 1));
    }

    #[test]
    fn mixed_partials_commute(e in tree()) {
        let d = e.diff("x").diff("y") - e.diff("y").diff("x");
        prop_assert!(vanishes(&d, 2), "{e}");
    }

    #[test]
    fn simplify_is_idempotent(e in tree()) {
        let s = e.simplify();
        prop_assert_eq!(s.simplify(), s);
    }

    #[test]
    fn simplify_preserves_value(e in tree(), x in -1.0..1.0f64, y in -1.0..1.0f64) {
        let v = value(&e, x, y);
        prop_assume!(v.is_some());
        let v = v.unwrap();
        let w = e.simplify().eval_real(&point(x, y)).unwrap();
        prop_assert!((v - w).abs() <= 1e-9 * (1.0 + v.abs()), "{e}: {v} vs {w}");
    }

    #[test]
    fn printed_form_parses_back(e in tree(), x in -1.0..1.0f64, y in -1.0..1.0f64) {
        let v = value(&e, x, y);
        prop_assume!(v.is_some());
        let back = parse(&e.to_string()).unwrap();
        let w = back.eval_real(&point(x, y)).unwrap();
        prop_assert!((v.unwrap() - w).abs() <= 1e-9 * (1.0 + w.abs()), "{e}");
    }
}

fn conj(g: &M2, m: &M2) -> M2 {
    g * m * g.try_inverse().unwrap()
}

fn traceless(a: f64, b: f64, c: f64) -> M2 {
    M2::new(a, b, c, -a)
}

fn unit() -> std::ops::Range<f64> {
    -1.0..1.0
}

proptest! {
    #![proptest_config(config(64))]

    #[test]
    fn flow_keeps_traces_and_p(
        p in (unit(), unit(), unit()), q in (unit(), unit(), unit()), r in (unit(), unit(), unit()),
    ) {
        let state = [traceless(p.0, p.1, p.2), traceless(q.0, q.1, q.2), traceless(r.0, r.1, r.2)];
        let out = integrate_flow(state, 0.0, &[0.25, 0.5, 1.0], &OdeOptions::default()).unwrap();
        for s in &out {
            for m in s {
                prop_assert!(m.trace().abs() < 1e-12);
            }
            prop_assert!((s[0] - state[0]).norm() < 1e-10);
        }
    }

    #[test]
    fn classification_is_conjugation_invariant(
        kind in 0usize..3,
        (u, v, w) in (unit(), unit(), unit()),
        (a, b, c) in (unit(), unit(), unit()),
        gm in (unit(), unit(), unit(), unit()),
    ) {
        let gamma = M2::new(gm.0, gm.1, gm.2, gm.3) + M2::identity() * 1.5;
        prop_assume!(gamma.determinant().abs() > 0.2);
        let (p, r) = match kind {
            // generic P has distinct eigenvalues
            0 => (traceless(u, v, w), traceless(a, b, c)),
            // nilpotent P with Tr(PR) ≠ 0
            1 => (M2::new(u * v, -u * u, v * v, -u * v), traceless(a, b, c)),
            // nilpotent P with R ∝ P
            _ => {
                let p = M2::new(u * v, -u * u, v * v, -u * v);
                (p, p * (a + 2.0))
            }
        };
        prop_assume!(p.norm() > 0.1);
        let before = classify_gauge(&p, &r, 1e-10);
        prop_assume!(before.is_ok());
        let after = classify_gauge(&conj(&gamma, &p), &conj(&gamma, &r), 1e-10);
        prop_assume!(after.is_ok());
        prop_assert_eq!(before.unwrap(), after.unwrap());
    }
}

proptest! {
    #![proptest_config(config(6))]

    #[test]
    fn normal_form_structures_verify(seed in any::<u64>()) {
        let theta = random_polynomial_theta(1, 4, &mut ChaCha8Rng::seed_from_u64(seed));
        let s = build_normal_form(1, theta.clone()).unwrap();
        let report = verify_structure(&s, &mut s.sample_space(seed), 50, 1e-9).unwrap();
        prop_assert!(report.pass(), "{theta}");
    }

    #[test]
    fn riemann_symmetries_and_star(seed in any::<u64>()) {
        let theta = random_polynomial_theta(1, 4, &mut ChaCha8Rng::seed_from_u64(seed));
        let s = build_normal_form(1, theta).unwrap();
        let mut space = s.sample_space(seed);
        for _ in 0..5 {
            let p = space.sample().unwrap();
            let c = curvature_at(s.metric(), &p).unwrap();
            let r = &c.riemann_down;
            let scale = 1.0 + r.max_abs();
            let idx = (0..4).flat_map(|a| (0..4).flat_map(move |b| (0..4).flat_map(move |cc| (0..4).map(move |d| [a, b, cc, d]))));
            for [a, b, cc, d] in idx {
                let at = |i: [usize; 4]| r.at(&i);
                prop_assert!((at([a, b, cc, d]) + at([a, b, d, cc])).abs() < 1e-9 * scale);
                prop_assert!((at([a, b, cc, d]) + at([b, a, cc, d])).abs() < 1e-9 * scale);
                prop_assert!((at([a, b, cc, d]) - at([cc, d, a, b])).abs() < 1e-9 * scale);
                prop_assert!((at([a, b, cc, d]) + at([a, cc, d, b]) + at([a, d, b, cc])).abs() < 1e-9 * scale);
            }
            prop_assert!(c.scalar.abs() < 1e-9 * scale);

            let fd = fd_riemann(s.metric(), &p, 1e-3).unwrap();
            prop_assert!(fd.riemann_down.max_diff(r) <= 1e-4 * scale);

            for i in 0..4 {
                for j in (i + 1)..4 {
                    let f = NumTensor::from_fn(4, 2, |k| {
                        if (k[0], k[1]) == (i, j) { 1.0 } else if (k[0], k[1]) == (j, i) { -1.0 } else { 0.0 }
                    });
                    let once = hodge_star_2form(&f, &c.g, &c.ginv, ORIENTATION_SIGN);
                    let twice = hodge_star_2form(&once, &c.g, &c.ginv, ORIENTATION_SIGN);
                    prop_assert!(twice.max_diff(&f) < 1e-9);
                }
            }
        }
    }
}
