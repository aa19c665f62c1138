//! Anti-self-dual null-Kähler metrics built from Painlevé I and II trajectories.

use nkgeo::ode::{grid, OdeOptions};
use nkgeo::painleve::{build_pi_metric, build_pii_metric, kernel_type_diagnostic, verify_family, SampleSource};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let runs = [
        ("PI", build_pi_metric()?, vec![0.0, 1.0], 0.8),
        ("PII alpha=1", build_pii_metric(1.0)?, vec![1.0, -0.2, -0.5], 1.0),
    ];
    for (label, fam, start, t1) in runs {
        let src = SampleSource::Trajectory {
            t0: 0.0,
            start,
            times: grid(0.0, t1, 10),
            seed: 0,
            opts: OdeOptions::default(),
        };
        let report = verify_family(&fam, &src, 1e-6)?;
        println!("{label}: pass={} kernel={:?}", report.pass(), kernel_type_diagnostic(&fam)?.kind);
        for c in &report.checks {
            println!("  {:<18} max={:.1e}", c.name, c.max_residual);
        }
    }
    Ok(())
}
