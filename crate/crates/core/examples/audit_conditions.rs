//! Condition reports for an admissible and an inadmissible Swift–Hohenberg
//! setup, plus the Allen–Cahn reference config.

use std::path::PathBuf;

use spdekit::cli::RunConfig;
use spdekit::conditions::audit_spec;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let dir = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../configs");
    for name in ["allen_cahn", "swift_hohenberg", "swift_hohenberg_d4_rho2"] {
        let cfg = RunConfig::from_toml(&std::fs::read_to_string(dir.join(format!("{name}.toml")))?)?;
        let (spec, _) = cfg.build()?;
        let rep = audit_spec(&spec, cfg.conditions.eta, &cfg.conditions.audit)?;
        println!("{name}: {}", if rep.passed { "pass" } else { "fail" });
        for c in &rep.conditions {
            println!("  {:<28} {:?}", c.id, c.status);
        }
        for a in &rep.admissibility {
            println!("  rho={} for {:?} in {}: {:?}", a.rho, a.slot, a.interval.as_deref().unwrap_or("-"), a.status);
        }
        println!("  theta {:.4}, M {:.4}", rep.coercivity.theta, rep.coercivity.m);
    }
    Ok(())
}
