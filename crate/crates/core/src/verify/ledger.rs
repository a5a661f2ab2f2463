use rayon::prelude::*;
use serde::Serialize;

use crate::noise::{sample_increments, NoiseStream};
use crate::operators::EquationSpec;
use crate::solver::{simulate_with, SolverConfig, SolverError};
use crate::spaces::SpectralField;

use super::ensemble::{run_ensemble, EnsembleConfig, EnsembleResult};
use super::stats::{stderr, Estimate};
use super::{Verdict, VerifyError};

#[derive(Clone, Debug, Serialize)]
pub struct LedgerReport {
    /// Cumulative residual `Σ r_n` over the ensemble.
    pub cumulative_residual: Estimate,
    /// `mean / stderr`.
    pub z_score: f64,
    pub halted: usize,
    /// `|mean| ≤ 4 · stderr`.
    pub passed: bool,
    pub verdict: Verdict,
}

/// Ensemble mean of the per-path cumulative ledger residual against 0.
pub fn ledger_experiment(
    spec: &EquationSpec,
    u0: &SpectralField,
    solver: &SolverConfig,
    ens: &EnsembleConfig,
) -> Result<(LedgerReport, EnsembleResult), VerifyError> {
    let cfg = SolverConfig { ledger: true, ..solver.clone() };
    let res = run_ensemble(spec, u0, &cfg, ens)?;
    let col = res.column(|p| p.cumulative_residual);
    let est = Estimate::of(&col, ens.seed ^ 0x1ed9);
    let z = est.mean / est.stderr;
    let passed = res.halted == 0 && (est.mean.abs() <= 4.0 * est.stderr || est.mean == 0.0);
    let report =
        LedgerReport { cumulative_residual: est, z_score: z, halted: res.halted, passed, verdict: Verdict::from_bool(passed) };
    Ok((report, res))
}

#[derive(Clone, Debug, Serialize)]
pub struct RefinementReport {
    pub dt_coarse: f64,
    pub dt_fine: f64,
    pub coarse: Estimate,
    pub fine: Estimate,
    /// Standard error of the paired difference `coarse − fine`.
    pub paired_stderr: f64,
    /// `mean(coarse) / mean(fine)`.
    pub ratio: f64,
    /// Accepted band for the ratio.
    pub band: (f64, f64),
    pub halted: usize,
    pub passed: bool,
    pub verdict: Verdict,
    /// `(coarse, fine)` cumulative residual per path; `None` where a run halted.
    #[serde(skip)]
    pub per_path: Vec<(Option<f64>, Option<f64>)>,
}

/// Cumulative ledger residual at `dt` and `dt/2` on the same Brownian path:
/// each coarse increment is the sum of two fine ones. The mean should halve.
pub fn ledger_refinement(
    spec: &EquationSpec,
    u0: &SpectralField,
    solver: &SolverConfig,
    ens: &EnsembleConfig,
    tolerance: f64,
) -> Result<RefinementReport, VerifyError> {
    let coarse_cfg = SolverConfig { ledger: true, ..solver.clone() };
    let fine_cfg = SolverConfig { dt: solver.dt / 2.0, ..coarse_cfg.clone() };
    coarse_cfg.validate()?;
    let n = coarse_cfg.step_sizes().len();
    if fine_cfg.step_sizes().len() != 2 * n || (solver.horizon / solver.dt - n as f64).abs() > 1e-9 {
        return Err(VerifyError::Invalid("refinement needs the horizon to be a whole number of steps".into()));
    }
    let m = spec.noise().mode_count;
    let pairs: Vec<(Option<f64>, Option<f64>)> = (0..ens.paths)
        .into_par_iter()
        .map(|i| -> Result<_, VerifyError> {
            let stream = NoiseStream::new(ens.seed, ens.path_offset + i as u64);
            let h = fine_cfg.dt;
            let fine = simulate_with(spec, u0, &fine_cfg, |k, dt| Ok(sample_increments(&stream.at(k as u64), dt, m)?))?;
            let coarse = simulate_with(spec, u0, &coarse_cfg, |k, _| {
                let a = sample_increments(&stream.at(2 * k as u64), h, m)?;
                let b = sample_increments(&stream.at(2 * k as u64 + 1), h, m)?;
                Ok::<_, SolverError>(a.merged(&b))
            })?;
            let get = |t: &crate::solver::Trajectory| t.status.is_completed().then(|| t.cumulative_residual());
            Ok((get(&coarse), get(&fine)))
        })
        .collect::<Result<_, _>>()?;
    let kept: Vec<(f64, f64)> = pairs.iter().filter_map(|&(a, b)| Some((a?, b?))).collect();
    let halted = pairs.len() - kept.len();
    let c: Vec<f64> = kept.iter().map(|p| p.0).collect();
    let f: Vec<f64> = kept.iter().map(|p| p.1).collect();
    let d: Vec<f64> = kept.iter().map(|p| p.0 - p.1).collect();
    let coarse = Estimate::of(&c, ens.seed ^ 0xc0a5);
    let fine = Estimate::of(&f, ens.seed ^ 0xf1e);
    let ratio = coarse.mean / fine.mean;
    let band = (2.0 * (1.0 - tolerance), 2.0 * (1.0 + tolerance));
    let passed = halted == 0 && ratio >= band.0 && ratio <= band.1;
    Ok(RefinementReport {
        dt_coarse: coarse_cfg.dt,
        dt_fine: fine_cfg.dt,
        coarse,
        fine,
        paired_stderr: stderr(&d),
        ratio,
        band,
        halted,
        passed,
        verdict: Verdict::from_bool(passed),
        per_path: pairs,
    })
}
