use std::collections::BTreeMap;

use serde::Serialize;

use super::args::{CaseArg, ExamplesArgs, FamilyArg, IsoArgs, PainleveArgs, VerifyArgs};
use super::potentials::{self, parse_potential, BUILTIN};
use super::{csv_num, CliError, Report, Table};
use crate::expr::{symbolic_zero, Expr, Point, SampleSpace};
use crate::isomonodromy::{
    classify_gauge, compatibility_matches_flow, flatness_check, pi_gauge, pi_parametrization,
    pii_parametrization, solvable_closed_form, solvable_equations, solvable_solution,
    trajectory_check, GaugeClass, NumericLax, Parametrization, Rectangle, M2,
};
use crate::nullkahler::{build_normal_form, verify_structure};
use crate::ode::{grid, OdeOptions};
use crate::painleve::{
    build_pi_metric, build_pii_metric, build_solvable_metric, constant, kernel_type_diagnostic,
    verify_family_detailed, SampleSource,
};
use crate::pde::{
    asd_residual, einstein_residual, footnote_residual, heavenly_residual, hk_hierarchy_residual,
    joyce_checks, lax_distribution_check, ricci_max, sd_residual, ResidualOptions,
};
use crate::report::{expr_check, ResidualReport};

const VERIFY_CHECKS: [&str; 10] =
    ["structure", "einstein", "heavenly", "asd", "sd", "footnote", "hk", "lax", "joyce", "ricci"];

fn expand_checks(requested: &[String], n: usize) -> Result<Vec<&'static str>, CliError> {
    let mut out: Vec<&'static str> = Vec::new();
    for c in requested {
        let c = c.trim();
        if c == "all" {
            let mut all = vec!["structure", "einstein", "footnote"];
            if n == 1 {
                all.push("asd");
            }
            for a in all {
                if !out.contains(&a) {
                    out.push(a);
                }
            }
            continue;
        }
        let Some(name) = VERIFY_CHECKS.iter().find(|k| **k == c) else {
            return Err(CliError::Usage(format!(
                "unknown check `{c}` (expected all or one of {})",
                VERIFY_CHECKS.join(", ")
            )));
        };
        if !out.contains(name) {
            out.push(name);
        }
    }
    if out.is_empty() {
        return Err(CliError::Usage("no checks selected".into()));
    }
    Ok(out)
}

/// Structure and PDE checks on one potential.
pub fn cmd_verify(a: &VerifyArgs) -> Result<Report, CliError> {
    let pot = potentials::load(&a.potential)?;
    let n = a.n.or(pot.n).unwrap_or(1);
    if n == 0 {
        return Err(CliError::Usage("n must be at least 1".into()));
    }
    if a.points == 0 || !(a.tol > 0.0) || !(a.range > 0.0) {
        return Err(CliError::Usage("points, tol and range must be positive".into()));
    }
    let checks = expand_checks(&a.checks, n)?;
    let mut opts = ResidualOptions::default().seed(a.common.seed).points(a.points).tol(a.tol);
    opts.range = (-a.range, a.range);
    for (e, m) in pot.avoid_exprs()? {
        opts = opts.avoid(e, m);
    }
    let theta = pot.expr.clone();
    let structure = build_normal_form(n, theta.clone())?;

    let mut rep = Report::new("verify", a.common.seed, a);
    rep.detail("potential", &pot);
    rep.detail("n", n);
    for c in checks {
        match c {
            "structure" => {
                let mut space = opts.space(n);
                for r in verify_structure(&structure, &mut space, a.points, a.tol)?.checks {
                    rep.push(r);
                }
            }
            "einstein" => {
                let zeros = vec![Expr::zero(); 2 * n];
                rep.push(einstein_residual(&theta, n, &Expr::zero(), &zeros, &opts)?);
            }
            "heavenly" => rep.push(heavenly_residual(&theta, &opts)?),
            "asd" => rep.push(asd_residual(&theta, &opts)?),
            "sd" => rep.push(sd_residual(&theta, &opts)?),
            "footnote" => rep.push(footnote_residual(&theta, n, &opts)?),
            "hk" => rep.push(hk_hierarchy_residual(&theta, n, &opts)?.1.renamed("hk")),
            "lax" => rep.push(lax_distribution_check(&theta, n, &opts)?),
            "joyce" => {
                let j = joyce_checks(&theta, n, &opts)?;
                rep.push(j.odd.renamed("joyce_odd"));
                rep.push(j.homothety.renamed("joyce_homothety"));
                rep.push(j.lattice.renamed("joyce_lattice"));
            }
            "ricci" => {
                // the finite-difference route for n > 1 is only good to ~1e-6
                let fd = n > 1;
                let o = if fd { opts.clone().tol(a.tol.max(1e-6)) } else { opts.clone() };
                rep.push(ricci_max(&theta, n, &o, fd)?);
            }
            _ => unreachable!("expand_checks returns known names"),
        }
    }
    Ok(rep)
}

#[derive(Serialize)]
struct SampleRow {
    t: f64,
    values: BTreeMap<String, f64>,
    residuals: BTreeMap<String, f64>,
}

/// Integrate a family's ODE and run the metric checks along the solution.
pub fn cmd_painleve(a: &PainleveArgs) -> Result<Report, CliError> {
    let (fam, t0, t1, start) = match a.kind {
        FamilyArg::I => (build_pi_metric()?, 0.0, 0.8, vec![0.0, 1.0]),
        FamilyArg::II => (build_pii_metric(a.alpha)?, 0.0, 1.0, vec![1.0, -0.2, -0.5]),
        FamilyArg::Solvable => (build_solvable_metric(a.a, a.b, a.c)?, 0.2, 1.5, vec![]),
    };
    let t0 = a.t0.unwrap_or(t0);
    let t1 = a.t1.unwrap_or(t1);
    let start = a.start.clone().unwrap_or(start);
    let unknowns = fam.unknowns();
    if start.len() != unknowns.len() {
        return Err(CliError::Usage(format!(
            "--start needs {} values ({})",
            unknowns.len(),
            unknowns.join(", ")
        )));
    }
    if a.samples == 0 || t0 == t1 || !t0.is_finite() || !t1.is_finite() {
        return Err(CliError::Usage("need samples >= 1 and distinct finite t0, t1".into()));
    }
    let opts = OdeOptions { blowup: a.blowup, ..OdeOptions::default() };
    let source = SampleSource::Trajectory {
        t0,
        start,
        times: grid(t0, t1, a.samples),
        seed: a.common.seed,
        opts,
    };
    let (pts, fam_rep) = verify_family_detailed(&fam, &source, a.tol)?;
    let kernel = kernel_type_diagnostic(&fam)?;

    let per_point: Vec<&ResidualReport> =
        fam_rep.checks.iter().filter(|c| c.residuals.len() == pts.len()).collect();
    let k_tape = crate::expr::Tape::compile(std::slice::from_ref(&fam.k));
    let mut rows = Vec::with_capacity(pts.len());
    let mut table = Table {
        header: std::iter::once("t".to_string())
            .chain(unknowns.iter().cloned())
            .chain(std::iter::once("k".to_string()))
            .chain(per_point.iter().map(|c| c.name.clone()))
            .collect(),
        rows: Vec::new(),
    };
    for (i, p) in pts.iter().enumerate() {
        let t = p.real("t").unwrap_or(f64::NAN);
        let mut values: BTreeMap<String, f64> =
            unknowns.iter().map(|u| (u.clone(), p.real(u).unwrap_or(f64::NAN))).collect();
        let k = k_tape.eval(p).map(|v| v[0].re).unwrap_or(f64::NAN);
        values.insert("k".into(), k);
        let residuals: BTreeMap<String, f64> =
            per_point.iter().map(|c| (c.name.clone(), c.residuals[i])).collect();
        let mut row = vec![csv_num(t)];
        row.extend(unknowns.iter().map(|u| csv_num(values[u])));
        row.push(csv_num(k));
        row.extend(per_point.iter().map(|c| csv_num(c.residuals[i])));
        table.rows.push(row);
        rows.push(SampleRow { t, values, residuals });
    }

    let mut rep = Report::new("painleve", a.common.seed, a);
    rep.detail("family", &fam_rep.family);
    rep.detail("orientation", fam_rep.orientation);
    rep.detail("kernel", &kernel);
    rep.detail("samples", &rows);
    for c in fam_rep.checks {
        rep.push(c);
    }
    if let Some(path) = &a.trajectory {
        table.write_csv(std::io::BufWriter::new(std::fs::File::create(path)?))?;
    }
    rep.table = Some(table);
    Ok(rep)
}

fn real(m: crate::sl2::Mat2) -> M2 {
    m.map(|z| z.re)
}

fn single(name: &str, at: Point, value: f64, tol: f64) -> ResidualReport {
    ResidualReport::from_samples(name, vec![(at, value)], tol)
}

/// Lax pair checks for one parametrization: symbolic compatibility, flow
/// expansion, trajectory against the matrix flow, flatness and gauge class.
pub fn cmd_isomonodromy(a: &IsoArgs) -> Result<Report, CliError> {
    if a.grid.len() != 4 {
        return Err(CliError::Usage("--grid takes lambda0,lambda1,t0,t1".into()));
    }
    if a.samples == 0 || a.points == 0 {
        return Err(CliError::Usage("samples and points must be positive".into()));
    }
    let rect = Rectangle::new((a.grid[0], a.grid[1]), (a.grid[2], a.grid[3]));
    let (param, gauge, start, expected): (Parametrization, _, Vec<f64>, GaugeClass) = match a.case {
        CaseArg::PII => (
            pii_parametrization(&constant(a.alpha)),
            None,
            vec![1.0, -0.2, -0.5],
            GaugeClass::PainleveII,
        ),
        CaseArg::PI => (pi_parametrization(), Some(pi_gauge()), vec![0.0, 1.0], GaugeClass::PainleveI),
        CaseArg::Solvable => {
            let (ka, kb, kc) = (constant(a.a), constant(a.b), constant(a.c));
            (solvable_solution(&ka, &kb, &kc), None, vec![], GaugeClass::Solvable)
        }
    };
    let start = a.start.clone().unwrap_or(start);
    let unknowns = param.unknowns();
    if start.len() != unknowns.len() {
        return Err(CliError::Usage(format!(
            "--start needs {} values ({})",
            unknowns.len(),
            unknowns.join(", ")
        )));
    }
    let opts = OdeOptions { blowup: a.blowup, ..OdeOptions::default() };
    let seed = a.common.seed;
    let space = || SampleSpace::new(seed).range("u", 0.5, 2.0).range("t", -1.0, 1.0);

    let mut rep = Report::new("isomonodromy", seed, a);
    rep.push(compatibility_matches_flow(&mut space(), a.points)?.renamed("flow_expansion"));
    rep.push(param.check_compatibility(&mut space(), a.points, a.tol)?.renamed("compatibility"));
    if let CaseArg::Solvable = a.case {
        let (ka, kb, kc) = (constant(a.a), constant(a.b), constant(a.c));
        let (r1, r2, q2) = solvable_closed_form(&ka, &kb, &kc);
        let eqs = solvable_equations(&r1, &r2, &q2);
        let mut s = space();
        rep.push(expr_check("closed_form", &eqs, &mut s, a.points, a.tol)?);
        rep.detail("closed_form_symbolic", eqs.iter().all(symbolic_zero));
    }

    let times = grid(rect.t0, rect.t1, a.samples);
    let traj = trajectory_check(&param, gauge, rect.t0, &start, &times, &opts)?;
    let at_t0 = Point::from_real(&[("t", rect.t0)]);
    rep.push(single("trajectory", at_t0.clone(), traj.max_residual, a.tol));
    rep.push(single("p_constant", at_t0.clone(), traj.p_drift, a.tol));

    let sys = NumericLax::from_parametrization(&param)?;
    let defect = flatness_check(&sys, &rect, &start, &opts)?;
    rep.push(single("flatness", at_t0.clone().with("lam", rect.lambda0), defect, a.tol));

    let mut p0 = at_t0;
    for (u, v) in unknowns.iter().zip(&start) {
        p0.set_real(u, *v);
    }
    let pm = real(param.p.eval(&p0).map_err(crate::geometry::GeometryError::from)?);
    let rm = real(param.r.eval(&p0).map_err(crate::geometry::GeometryError::from)?);
    let class = classify_gauge(&pm, &rm, 1e-9)?;
    rep.push(ResidualReport::at_least(
        &format!("class_{}", expected.label()),
        if class == expected { 1.0 } else { 0.0 },
        0.5,
    ));
    rep.detail("classification", class.label());
    rep.detail("flatness_defect", defect);

    let mut table = Table {
        header: std::iter::once("t".to_string())
            .chain(traj.unknowns.iter().cloned())
            .chain(["residual", "trace"].map(String::from))
            .collect(),
        rows: Vec::new(),
    };
    for r in &traj.rows {
        let mut row = vec![csv_num(r.t)];
        row.extend(r.aux.iter().map(|v| csv_num(*v)));
        row.push(csv_num(r.residual));
        row.push(csv_num(r.trace));
        table.rows.push(row);
    }
    rep.detail("trajectory", &traj);
    rep.table = Some(table);
    Ok(rep)
}

#[derive(Serialize)]
struct Listing {
    name: &'static str,
    n: Option<usize>,
    theta: String,
    avoid: Vec<(String, f64)>,
}

/// Built-in potentials, or one of them in full.
pub fn cmd_examples(a: &ExamplesArgs) -> Result<Report, CliError> {
    let mut rep = Report::new("examples", a.common.seed, a);
    match &a.name {
        None => {
            let mut list = Vec::new();
            for (name, text) in BUILTIN {
                let p = parse_potential(name, text)?;
                list.push(Listing { name, n: p.n, theta: p.theta, avoid: p.avoid });
            }
            rep.table = Some(Table {
                header: ["name", "n", "theta"].map(String::from).to_vec(),
                rows: list
                    .iter()
                    .map(|l| vec![l.name.into(), l.n.unwrap_or(1).to_string(), l.theta.clone()])
                    .collect(),
            });
            rep.detail("potentials", &list);
        }
        Some(name) => {
            let text = potentials::builtin(name)
                .ok_or_else(|| CliError::Usage(format!("no built-in potential `{name}`")))?;
            rep.detail("name", name);
            rep.detail("text", text);
            rep.table = Some(Table {
                header: vec!["line".into()],
                rows: text.lines().map(|l| vec![l.to_string()]).collect(),
            });
        }
    }
    Ok(rep)
}
