//! One sample path of each model equation from its shipped config.

use std::path::PathBuf;

use spdekit::cli::RunConfig;
use spdekit::noise::NoiseStream;
use spdekit::solver::simulate_path;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let dir = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../configs");
    for name in ["second_order_burgers", "quasi_linear", "allen_cahn", "cahn_hilliard", "swift_hohenberg", "tamed_ns"] {
        let cfg = RunConfig::from_toml(&std::fs::read_to_string(dir.join(format!("{name}.toml")))?)?;
        let (spec, u0) = cfg.build()?;
        let tr = simulate_path(&spec, &u0, &cfg.solver, &NoiseStream::new(cfg.seed, 0))?;
        println!(
            "{:<22} d={} |u0|_H {:.4} -> |u(T)|_H {:.4}, int |u|_V^2 {:.4}, {:?}",
            spec.variant().to_string(),
            spec.dimension(),
            tr.h_norm_series[0],
            tr.h_norm_series.last().copied().unwrap_or(f64::NAN),
            tr.v_energy_running.last().copied().unwrap_or(f64::NAN),
            tr.status
        );
    }
    Ok(())
}
