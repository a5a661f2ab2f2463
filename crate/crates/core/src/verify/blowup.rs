use serde::Serialize;

use crate::noise::NoiseStream;
use crate::operators::EquationSpec;
use crate::solver::{simulate_path, PathStatus, SolverConfig};
use crate::spaces::SpectralField;

use super::ensemble::{run_ensemble, EnsembleConfig, EnsembleResult};
use super::stats::Estimate;
use super::{Verdict, VerifyError};

#[derive(Clone, Debug, Serialize)]
pub struct BlowupRow {
    pub dt: f64,
    #[serde(flatten)]
    pub status: PathStatus,
    pub relative_error: Option<f64>,
}

#[derive(Clone, Debug, Serialize)]
pub struct BlowupTimeReport {
    pub oracle: f64,
    pub rows: Vec<BlowupRow>,
    pub all_blown_up: bool,
    /// Relative error at the smallest `dt`.
    pub finest_error: Option<f64>,
    pub tolerance: f64,
    pub passed: bool,
    pub verdict: Verdict,
}

/// Threshold crossing time of one path per `dt`, against an oracle blow-up
/// time. Passes when every run halts before the horizon and the finest
/// run lands within `tolerance` of the oracle.
pub fn blowup_time_convergence(
    spec: &EquationSpec,
    u0: &SpectralField,
    solver: &SolverConfig,
    dts: &[f64],
    oracle: f64,
    tolerance: f64,
    stream: &NoiseStream,
) -> Result<BlowupTimeReport, VerifyError> {
    if dts.is_empty() {
        return Err(VerifyError::Invalid("no step sizes given".into()));
    }
    let mut dts = dts.to_vec();
    dts.sort_by(|a, b| b.total_cmp(a));
    let mut rows = Vec::with_capacity(dts.len());
    for &dt in &dts {
        let tr = simulate_path(spec, u0, &SolverConfig { dt, ..solver.clone() }, stream)?;
        rows.push(BlowupRow {
            dt,
            status: tr.status,
            relative_error: tr.status.halt_time().map(|t| (t - oracle).abs() / oracle),
        });
    }
    let all_blown_up = rows.iter().all(|r| r.status.halt_time().is_some_and(|t| t < solver.horizon));
    let finest_error = rows.last().and_then(|r| r.relative_error);
    let passed = all_blown_up && finest_error.is_some_and(|e| e <= tolerance);
    Ok(BlowupTimeReport { oracle, rows, all_blown_up, finest_error, tolerance, passed, verdict: Verdict::from_bool(passed) })
}

#[derive(Clone, Debug, Serialize)]
pub struct BlowupEnsembleReport {
    pub paths: usize,
    pub halted: usize,
    pub blowup_fraction: f64,
    pub halt_time: Option<Estimate>,
}

/// Halting statistics of an ensemble, with no audit required.
pub fn blowup_ensemble(
    spec: &EquationSpec,
    u0: &SpectralField,
    solver: &SolverConfig,
    ens: &EnsembleConfig,
) -> Result<(BlowupEnsembleReport, EnsembleResult), VerifyError> {
    let res = run_ensemble(spec, u0, solver, ens)?;
    let times = res.halt_times();
    let report = BlowupEnsembleReport {
        paths: res.path_count,
        halted: res.halted,
        blowup_fraction: res.blowup_fraction,
        halt_time: (!times.is_empty()).then(|| Estimate::of(&times, ens.seed)),
    };
    Ok((report, res))
}
