//! Bisects the largest noise strength ‖γ‖² at which the Allen–Cahn
//! coercivity audit still passes, for quadratic noise `γ_n u²`.

use spdekit::conditions::{audit_coercivity, bisect_threshold, AuditConfig, ConditionError};
use spdekit::noise::NoiseSpec;
use spdekit::operators::{Equation, EquationSpec};
use spdekit::spaces::{Polynomial, WaveGrid};

fn main() -> Result<(), ConditionError> {
    let grid = WaveGrid::torus(2, 16)?;
    let build = |gamma_sq: f64| {
        let noise = NoiseSpec::multiplicative(NoiseSpec::harmonic_gamma(8, gamma_sq), Polynomial::monomial(2, 1.0));
        Ok(EquationSpec::new(Equation::allen_cahn(), grid.clone(), noise, None)?)
    };
    let cfg = AuditConfig { samples: 2000, ..AuditConfig::default() };
    let eta = 1e-3;
    for g in [1.4, 1.6] {
        let a = audit_coercivity(&build(g)?, eta, &cfg)?;
        println!("|gamma|^2 = {g}: {} (theta = {:.4}, M = {:.4}, min margin = {:.3e})", a.verdict, a.theta, a.m, a.sampled_min_margin);
        if let Some(w) = &a.failure_witness {
            println!("  witness: {:?} at amplitude {}", w.shape, w.amplitude);
        }
    }
    let (lo, hi) = bisect_threshold(build, 1.0, 2.0, 10, eta, &cfg)?;
    println!("threshold bracket: [{lo:.4}, {hi:.4}]");
    Ok(())
}
