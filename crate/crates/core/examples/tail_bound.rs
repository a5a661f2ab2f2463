//! Empirical tail of `sup_t ‖u‖_H` against a fitted `c / log γ` for
//! Allen–Cahn with quadratic noise at `η = 0`.

use std::path::PathBuf;

use spdekit::cli::{ExperimentSection, RunConfig};
use spdekit::verify::{tail_experiment, AuditedSpec, EnsembleConfig, TailConfig};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let path = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../configs/allen_cahn_tail.toml");
    let cfg = RunConfig::from_toml(&std::fs::read_to_string(path)?)?;
    let (spec, u0) = cfg.build()?;
    let Some(ExperimentSection::Tail { gammas, min_exceedances, .. }) = cfg.experiment.clone() else {
        return Err("expected a tail experiment".into());
    };
    let audited = AuditedSpec::certify(&spec, cfg.conditions.eta, &cfg.conditions.audit)?;
    let tc = TailConfig { gammas, solver: cfg.solver.clone(), ensemble: EnsembleConfig::new(1000, cfg.seed), min_exceedances };
    let (rep, _) = tail_experiment(&audited, &u0, &tc)?;
    for r in &rep.rows {
        let b = r.bound.map(|b| format!("{b:.4}")).unwrap_or_else(|| "-".into());
        println!("gamma {:>5}: P {:.4} ({} hits), bound {b}, within {:?}", r.gamma, r.empirical.p, r.empirical.hits, r.within);
    }
    println!("c_hat {:?}, turned over {:?}: {:?}", rep.c_hat, rep.turned_over, rep.verdict);
    Ok(())
}
