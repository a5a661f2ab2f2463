//! Coupled-noise distance between solutions started `δ` apart, for
//! `δ = 2^{-n}`.

use std::path::PathBuf;

use spdekit::cli::RunConfig;
use spdekit::verify::{continuous_dependence_experiment, AuditedSpec, ContinuityConfig, EnsembleConfig};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let path = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../configs/allen_cahn.toml");
    let cfg = RunConfig::from_toml(&std::fs::read_to_string(path)?)?;
    let (spec, u0) = cfg.build()?;
    let audited = AuditedSpec::certify(&spec, cfg.conditions.eta, &cfg.conditions.audit)?;
    let cc = ContinuityConfig::dyadic(6, cfg.solver.clone(), EnsembleConfig::new(32, cfg.seed));
    let rep = continuous_dependence_experiment(&audited, &u0, &u0, &cc)?;
    for r in &rep.rows {
        println!("delta {:.5}: median {:.4e}, ratio {:?}{}", r.delta, r.median, r.ratio, if r.at_floor { " (floor)" } else { "" });
    }
    println!("delta = 0 bitwise zero: {:?}; {:?}", rep.zero_bitwise, rep.verdict);
    Ok(())
}
