//! Drive the `nkgeo` command line from code and read the JSON report.

fn main() {
    let args = ["nkgeo", "verify", "--potential", "sparling-tod", "--checks", "structure,einstein", "--points", "10"];
    let mut out = Vec::new();
    let code = nkgeo::cli::run(args, &mut out, &mut std::io::stderr());
    let report: serde_json::Value = serde_json::from_slice(&out).expect("json report");
    println!("exit {code}, pass = {}", report["pass"]);
    for c in report["checks"].as_array().into_iter().flatten() {
        println!("  {} {}", c["system"], c["max_residual"]);
    }
}
