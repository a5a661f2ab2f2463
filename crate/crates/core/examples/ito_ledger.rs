//! Discrete Itô energy ledger: the cumulative residual has mean zero for
//! additive noise and shrinks with `dt` for Allen–Cahn.

use std::path::PathBuf;

use spdekit::cli::RunConfig;
use spdekit::verify::{ledger_experiment, ledger_refinement, EnsembleConfig};

fn load(name: &str) -> Result<RunConfig, Box<dyn std::error::Error>> {
    let path = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../configs").join(name);
    Ok(RunConfig::from_toml(&std::fs::read_to_string(path)?)?)
}

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let cfg = load("ledger_additive.toml")?;
    let (spec, u0) = cfg.build()?;
    let (rep, _) = ledger_experiment(&spec, &u0, &cfg.solver, &EnsembleConfig::new(2000, cfg.seed))?;
    let r = rep.cumulative_residual;
    println!("additive: residual {:.3e} +- {:.3e} (z = {:.2}): {:?}", r.mean, r.stderr, rep.z_score, rep.verdict);

    let cfg = load("allen_cahn_refinement.toml")?;
    let (spec, u0) = cfg.build()?;
    let rep = ledger_refinement(&spec, &u0, &cfg.solver, &EnsembleConfig::new(128, cfg.seed), 0.2)?;
    println!(
        "Allen-Cahn: dt {} -> {}: residual {:.3e} -> {:.3e}, ratio {:.3}: {:?}",
        rep.dt_coarse, rep.dt_fine, rep.coarse.mean, rep.fine.mean, rep.ratio, rep.verdict
    );
    Ok(())
}
