//! Anti-dissipative `f = +y³` blows up near `1/(2c₀²)`; the dissipative
//! twin `f = −y³` completes.

use std::path::PathBuf;

use spdekit::cli::RunConfig;
use spdekit::noise::NoiseStream;
use spdekit::verify::{blowup_ensemble, blowup_time_convergence, EnsembleConfig};

fn load(name: &str) -> Result<RunConfig, Box<dyn std::error::Error>> {
    let path = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../configs").join(name);
    Ok(RunConfig::from_toml(&std::fs::read_to_string(path)?)?)
}

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let cfg = load("blowup_probe.toml")?;
    let (spec, u0) = cfg.build()?;
    let conv = blowup_time_convergence(&spec, &u0, &cfg.solver, &[1e-2, 1e-3, 1e-4], 0.125, 0.1, &NoiseStream::new(cfg.seed, 0))?;
    for r in &conv.rows {
        println!("dt {:e}: {:?}, relative error {:?}", r.dt, r.status, r.relative_error);
    }
    println!("probe: {:?}", conv.verdict);

    let cfg = load("dissipative_twin.toml")?;
    let (spec, u0) = cfg.build()?;
    let (rep, _) = blowup_ensemble(&spec, &u0, &cfg.solver, &EnsembleConfig::new(64, cfg.seed))?;
    println!("twin: {} of {} paths halted", rep.halted, rep.paths);
    Ok(())
}
