use std::path::PathBuf;

use nkgeo::cli::run;
use serde_json::Value;

struct Out {
    code: i32,
    stdout: String,
    stderr: String,
}

fn nkgeo(args: &[&str]) -> Out {
    let mut argv = vec!["nkgeo"];
    argv.extend_from_slice(args);
    let (mut o, mut e) = (Vec::new(), Vec::new());
    let code = run(argv, &mut o, &mut e);
    Out { code, stdout: String::from_utf8(o).unwrap(), stderr: String::from_utf8(e).unwrap() }
}

fn schema() -> jsonschema::JSONSchema {
    let path = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("report.schema.json");
    let v: Value = serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap();
    jsonschema::JSONSchema::compile(&v).unwrap()
}

fn json(out: &Out) -> Value {
    let v: Value = serde_json::from_str(&out.stdout).unwrap_or_else(|e| panic!("{e}: {}", out.stdout));
    let s = schema();
    if let Err(errs) = s.validate(&v) {
        let msgs: Vec<String> = errs.map(|e| format!("{e} at {}", e.instance_path)).collect();
        panic!("schema violations: {msgs:?}");
    }
    v
}

fn check<'a>(v: &'a Value, name: &str) -> &'a Value {
    v["checks"].as_array().unwrap().iter().find(|c| c["system"] == name).unwrap_or_else(|| panic!("no {name}"))
}

fn temp_file(name: &str, text: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("nkgeo-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p
}

#[test]
fn verify_sparling_tod_passes_all() {
    let out = nkgeo(&["verify", "--potential", "sparling_tod.txt", "--n", "1", "--checks", "all"]);
    assert_eq!(out.code, 0, "{}", out.stdout);
    let v = json(&out);
    assert_eq!(v["pass"], true);
    assert_eq!(v["checks"].as_array().unwrap().len(), 11);
    assert_eq!(check(&v, "einstein")["symbolic_zero"], true);
}

#[test]
fn verify_failure_carries_witness() {
    let out = nkgeo(&["verify", "--potential", "y1^2*y2^2", "--checks", "einstein"]);
    assert_eq!(out.code, 1);
    let v = json(&out);
    let e = check(&v, "einstein");
    assert_eq!(e["pass"], false);
    assert!(e["witness"]["y1"].is_number());
}

#[test]
fn verify_from_file_and_inline() {
    let p = temp_file("theta.txt", "# a heavenly potential\nx1*y1^2\n");
    let out = nkgeo(&["verify", "--potential", p.to_str().unwrap(), "--checks", "heavenly,einstein"]);
    assert_eq!(out.code, 0, "{}", out.stdout);
    let out = nkgeo(&["verify", "--potential", "joyce-sinh", "--checks", "joyce,hk"]);
    assert_eq!(out.code, 0, "{}", out.stdout);
    assert_eq!(json(&out)["checks"].as_array().unwrap().len(), 4);
}

#[test]
fn usage_errors_exit_two() {
    for args in [
        vec!["verify", "--potential", "y1^^2"],
        vec!["verify", "--potential", "z*y1"],
        vec!["verify", "--potential", "y1", "--checks", "bogus"],
        vec!["verify", "--potential", "y1*y3", "--n", "2", "--checks", "asd"],
        vec!["isomonodromy", "--case", "pIII"],
        vec!["painleve", "--kind", "II", "--start", "1,2"],
        vec!["examples", "nope"],
        vec!["frobnicate"],
    ] {
        let out = nkgeo(&args);
        assert_eq!(out.code, 2, "{args:?}: {}", out.stderr);
        assert!(!out.stderr.is_empty());
        if !out.stdout.is_empty() {
            assert_eq!(json(&out)["error"]["kind"], "usage");
        }
    }
}

#[test]
fn sampling_exhaustion_exits_three() {
    // every point of the box is within the excluded band
    let p = temp_file("blocked.txt", "n: 1\navoid: x1 - 10, 100\ntheta: x1*y1^4\n");
    let out = nkgeo(&["verify", "--potential", p.to_str().unwrap(), "--checks", "sd"]);
    assert_eq!(out.code, 3, "{}", out.stderr);
    assert_eq!(json(&out)["error"]["kind"], "sampling");
}

#[test]
fn pole_exits_four_with_time() {
    let out = nkgeo(&["painleve", "--kind", "I", "--t1", "10", "--blowup", "1e4"]);
    assert_eq!(out.code, 4, "{}", out.stderr);
    let v = json(&out);
    let t = v["error"]["t"].as_f64().unwrap();
    assert!(t > 0.0 && t < 10.0, "{t}");
}

#[test]
fn painleve_examples_pass() {
    for args in [
        vec!["painleve", "--kind", "solvable", "--a", "0", "--b", "0", "--c", "0"],
        vec!["painleve", "--kind", "I", "--t0", "0", "--t1", "0.8"],
        vec!["painleve", "--kind", "II", "--alpha", "0"],
        vec!["painleve", "--kind", "II", "--alpha", "1"],
    ] {
        let out = nkgeo(&args);
        assert_eq!(out.code, 0, "{args:?}: {}", out.stdout);
        let v = json(&out);
        let weyl = check(&v, "weyl_plus");
        assert!(weyl["max_residual"].as_f64().unwrap() < 1e-6);
        assert_eq!(v["details"]["samples"].as_array().unwrap().len(), 11);
    }
}

#[test]
fn painleve_csv_and_trajectory_file() {
    let dir = std::env::temp_dir().join(format!("nkgeo-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let traj = dir.join("pii.csv");
    let out = nkgeo(&[
        "painleve", "--kind", "II", "--samples", "4", "--format", "csv", "--trajectory",
        traj.to_str().unwrap(),
    ]);
    assert_eq!(out.code, 0);
    let lines: Vec<&str> = out.stdout.lines().collect();
    assert_eq!(lines[0], "t,u,y,z,k,nabla_omega,weyl_plus");
    assert_eq!(lines.len(), 6);
    assert_eq!(std::fs::read_to_string(traj).unwrap(), out.stdout);
}

#[test]
fn isomonodromy_cases() {
    let out = nkgeo(&["isomonodromy", "--case", "pII"]);
    assert_eq!(out.code, 0, "{}", out.stdout);
    let v = json(&out);
    assert!(v["details"]["flatness_defect"].as_f64().unwrap() < 1e-6);
    assert_eq!(v["details"]["classification"], "PII");

    let out = nkgeo(&["isomonodromy", "--case", "solvable"]);
    assert_eq!(out.code, 0, "{}", out.stdout);
    let v = json(&out);
    assert_eq!(check(&v, "closed_form")["symbolic_zero"], true);
    assert_eq!(v["details"]["closed_form_symbolic"], true);

    let out = nkgeo(&["isomonodromy", "--case", "PI", "--grid", "0,0.5,0,0.4"]);
    assert_eq!(out.code, 0, "{}", out.stdout);
    assert_eq!(json(&out)["details"]["classification"], "PI");
}

#[test]
fn reports_are_deterministic() {
    for args in [
        vec!["verify", "--potential", "cubic-sd", "--checks", "structure,sd", "--seed", "9", "--points", "10"],
        vec!["painleve", "--kind", "I", "--seed", "4"],
        vec!["isomonodromy", "--case", "pII", "--seed", "4"],
    ] {
        let a = nkgeo(&args);
        let b = nkgeo(&args);
        assert_eq!(a.stdout, b.stdout, "{args:?}");
        json(&a);
    }
    // the seed is honoured
    let a = nkgeo(&["verify", "--potential", "y1^2*y2^2", "--checks", "einstein", "--seed", "1"]);
    let b = nkgeo(&["verify", "--potential", "y1^2*y2^2", "--checks", "einstein", "--seed", "2"]);
    assert_ne!(a.stdout, b.stdout);
}

#[test]
fn out_flag_writes_the_same_bytes() {
    let dir = std::env::temp_dir().join(format!("nkgeo-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join("report.json");
    let out = nkgeo(&["examples", "--out", path.to_str().unwrap()]);
    assert_eq!(out.code, 0);
    assert!(out.stdout.is_empty());
    let direct = nkgeo(&["examples"]);
    assert_eq!(std::fs::read_to_string(path).unwrap(), direct.stdout);
    let v = json(&direct);
    let names: Vec<&str> =
        v["details"]["potentials"].as_array().unwrap().iter().map(|p| p["name"].as_str().unwrap()).collect();
    for want in ["sparling-tod", "joyce-sinh", "flat", "cubic-sd"] {
        assert!(names.contains(&want));
    }
}

#[test]
fn help_exits_zero() {
    let out = nkgeo(&["--help"]);
    assert_eq!(out.code, 0);
    assert!(out.stdout.contains("painleve"));
}
