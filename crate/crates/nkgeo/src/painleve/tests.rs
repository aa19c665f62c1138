use super::*;
use crate::ode::grid;

fn random(points: usize) -> SampleSource {
    SampleSource::Random { seed: 1, points }
}

fn pi_trajectory() -> SampleSource {
    SampleSource::Trajectory {
        t0: 0.0,
        start: vec![0.0, 1.0],
        times: grid(0.0, 0.8, 9),
        seed: 2,
        opts: OdeOptions::default(),
    }
}

fn pii_trajectory(start: [f64; 3], t1: f64) -> SampleSource {
    // unknowns are ordered u, y, z
    SampleSource::Trajectory {
        t0: 0.0,
        start: start.to_vec(),
        times: grid(0.0, t1, 9),
        seed: 3,
        opts: OdeOptions::default(),
    }
}

#[test]
fn pi_family_passes_on_random_points_and_trajectory() {
    let fam = build_pi_metric().unwrap();
    for src in [random(10), pi_trajectory()] {
        let rep = verify_family(&fam, &src, 1e-6).unwrap();
        assert!(rep.pass(), "{rep:#?}");
        assert_eq!(rep.checks.len(), 8);
    }
}

#[test]
fn pi_reads_from_displays() {
    let fam = build_pi_metric().unwrap();
    assert_eq!(fam.n()[2], -Expr::var("z"));
    assert!(symbolic_zero(&(&fam.gamma()[0][1] + Expr::int(4))));
}

#[test]
fn pi_nabla_omega_before_the_ode() {
    let rep = pi_nabla_omega_free(4, 10, 1e-8).unwrap();
    assert!(rep.pass, "{rep:?}");
}

#[test]
fn pii_family_passes() {
    // k = 4yz + 1 - 2α keeps one sign on [0, 1] from this start for both α
    for alpha in [0.0, 1.0] {
        let fam = build_pii_metric(alpha).unwrap();
        for src in [random(10), pii_trajectory([1.0, -0.2, -0.5], 1.0)] {
            let rep = verify_family(&fam, &src, 1e-6).unwrap();
            assert!(rep.pass(), "alpha={alpha}: {rep:#?}");
        }
    }
}

#[test]
fn pii_alpha_one_trajectory_meets_k_zero() {
    // k = 4yz − 1 changes sign near t = 0.78
    let fam = build_pii_metric(1.0).unwrap();
    assert!(matches!(fam.points(&pii_trajectory([1.0, 0.1, 0.2], 1.0)), Err(PainleveError::SingularLocus(_))));
}

#[test]
fn pii_display_entries() {
    let fam = build_pii_metric(0.0).unwrap();
    let half_u = Expr::var("u") / Expr::int(2);
    assert!(symbolic_zero(&(&fam.gamma()[0][2] - &half_u)));
    assert!(symbolic_zero(&(&fam.n()[2] + Expr::var("y") * &half_u)));
}

#[test]
fn pii_wrong_conformal_factor_fails() {
    let fam = build_pii_metric(0.0).unwrap();
    // k with α replaced by α + ½
    let shifted = parse("(4*y*z)/(4*y*z + 1)").unwrap();
    let bad = fam.rescaled(&shifted).unwrap();
    let rep = verify_family(&bad, &random(10), 1e-6).unwrap();
    let row = rep.get("nabla_omega").unwrap();
    assert!(!row.pass && row.witness.is_some());
}

#[test]
fn wrong_ode_breaks_anti_self_duality() {
    let fam = build_pi_metric().unwrap().with_rate("z", parse("6*y^2 + t + 1").unwrap()).unwrap();
    let rep = verify_family(&fam, &random(5), 1e-6).unwrap();
    assert!(!rep.get("weyl_plus").unwrap().pass);
    assert!(rep.get("two_route_metric").unwrap().pass);
}

#[test]
fn solvable_family_passes_tight() {
    let fam = build_solvable_metric(0.3, -0.4, 0.9).unwrap();
    let rep = verify_family(&fam, &random(30), 1e-8).unwrap();
    assert!(rep.pass(), "{rep:#?}");
    assert!(rep.get("ricci_profile").is_some());
}

#[test]
fn solvable_tau_reduction() {
    assert!(solvable_tau_check(1, 10, 1e-10).unwrap().pass);
}

#[test]
fn solvable_rejects_t_zero() {
    let fam = build_solvable_metric(0.0, 0.0, 0.0).unwrap();
    let src = SampleSource::Trajectory {
        t0: 0.5,
        start: vec![],
        times: vec![0.5, 0.0],
        seed: 0,
        opts: OdeOptions::default(),
    };
    assert!(matches!(fam.points(&src), Err(PainleveError::SingularLocus(_))));
}

#[test]
fn pi_factor_is_unique() {
    let fam = build_pi_metric().unwrap();
    let t = Expr::var("t");
    let probe = conformal_probe(&fam, 1e-2, &t, &random(10), 1e-6).unwrap();
    assert!(!probe.pass);
    // a constant change of scale keeps Ω parallel
    let flat = conformal_probe(&fam, 1e-2, &Expr::one(), &random(10), 1e-6).unwrap();
    assert!(flat.pass);
}

#[test]
fn kernel_types() {
    let pi = kernel_type_diagnostic(&build_pi_metric().unwrap()).unwrap();
    assert_eq!(pi.kind, KernelType::Nilpotent);
    let pii = kernel_type_diagnostic(&build_pii_metric(0.0).unwrap()).unwrap();
    assert_eq!(pii.kind, KernelType::NonNilpotent);
    let solv = kernel_type_diagnostic(&build_solvable_metric(0.3, -0.4, 0.9).unwrap()).unwrap();
    assert_eq!(solv.kind, KernelType::Nilpotent);
}

