//! Affine fit of the energy against `E‖u₀‖²_H` for the heat equation with
//! additive noise.

use std::path::PathBuf;

use spdekit::cli::{ExperimentSection, RunConfig};
use spdekit::verify::{apriori_experiment, AprioriConfig, AuditedSpec, EnsembleConfig};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let path = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../configs/heat_additive.toml");
    let cfg = RunConfig::from_toml(&std::fs::read_to_string(path)?)?;
    let (spec, u0) = cfg.build()?;
    let Some(ExperimentSection::Apriori { scales, .. }) = cfg.experiment.clone() else {
        return Err("expected an apriori experiment".into());
    };
    let audited = AuditedSpec::certify(&spec, cfg.conditions.eta, &cfg.conditions.audit)?;
    let ac = AprioriConfig { scales, solver: cfg.solver.clone(), ensemble: EnsembleConfig::new(200, cfg.seed) };
    let (rep, _) = apriori_experiment(&audited, &u0, &ac)?;
    for r in &rep.rows {
        println!("scale {:>4}: E|u0|^2 {:.4}, energy {:.4} +- {:.4}", r.scale, r.initial_h_sq, r.lhs.mean, r.lhs.stderr);
    }
    println!("slope {:.4}, intercept {:.4}, R^2 {:.6}: {:?}", rep.fit.slope, rep.fit.intercept, rep.fit.r_squared, rep.verdict);
    Ok(())
}
