use serde::Serialize;

use crate::conditions::AuditMode;
use crate::solver::SolverConfig;
use crate::spaces::SpectralField;

use super::ensemble::{run_ensemble, AuditedSpec, EnsembleConfig, EnsembleResult};
use super::stats::{fit_affine, AffineFit, Estimate};
use super::{Verdict, VerifyError};

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct AprioriConfig {
    /// Initial data are `c · profile` for each `c`.
    pub scales: Vec<f64>,
    pub solver: SolverConfig,
    pub ensemble: EnsembleConfig,
}

#[derive(Clone, Debug, Serialize)]
pub struct ScaleRow {
    pub scale: f64,
    /// `E‖u₀‖²_H`.
    pub initial_h_sq: f64,
    /// `E sup‖u‖²_H + E∫‖u‖²_V`.
    pub lhs: Estimate,
    pub sup_h_sq: Estimate,
    pub v_integral: Estimate,
    pub halted: usize,
    pub fitted: f64,
    pub residual: f64,
    /// `|residual| ≤ 3 · (bootstrap CI half-width)`.
    pub within_ci: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct AprioriReport {
    pub rows: Vec<ScaleRow>,
    /// Slope is the empirical `C_T`; the intercept carries the inhomogeneous part.
    pub fit: AffineFit,
    /// Fit of `E∫‖u‖²_V` alone, which is exactly affine for linear equations.
    pub v_integral_fit: AffineFit,
    /// Smallest `C` with `LHS ≤ C (1 + E‖u₀‖²_H)` on every scale.
    pub envelope: f64,
    pub residuals_within_ci: bool,
    /// Scale at which the first path halted.
    pub blowup_witness: Option<f64>,
    pub passed: bool,
    pub verdict: Verdict,
}

/// Energy of `u₀ = c · profile` against `E‖u₀‖²_H`, fitted affinely.
///
/// Passes when no path halts and every estimate and the fit are finite.
pub fn apriori_experiment(
    audited: &AuditedSpec,
    profile: &SpectralField,
    cfg: &AprioriConfig,
) -> Result<(AprioriReport, Vec<EnsembleResult>), VerifyError> {
    audited.require(&[AuditMode::EtaPositive, AuditMode::WeakVariant], "a priori experiment")?;
    if cfg.scales.len() < 2 {
        return Err(VerifyError::Invalid("a priori fit needs at least two scales".into()));
    }
    let spec = audited.spec();
    let profile_sq = spec.triple().h_norm_sq(profile);
    let mut ensembles = Vec::with_capacity(cfg.scales.len());
    let mut rows = Vec::with_capacity(cfg.scales.len());
    let mut blowup_witness = None;
    for &c in &cfg.scales {
        let res = run_ensemble(spec, &profile.scaled(c), &cfg.solver, &cfg.ensemble)?;
        if res.halted > 0 && blowup_witness.is_none() {
            blowup_witness = Some(c);
        }
        let lhs_col = res.column(|p| p.sup_h_sq + p.v_integral);
        rows.push(ScaleRow {
            scale: c,
            initial_h_sq: c * c * profile_sq,
            lhs: Estimate::of(&lhs_col, cfg.ensemble.seed ^ c.to_bits()),
            sup_h_sq: res.sup_h_sq,
            v_integral: res.v_integral,
            halted: res.halted,
            fitted: f64::NAN,
            residual: f64::NAN,
            within_ci: false,
        });
        ensembles.push(res);
    }
    let x: Vec<f64> = rows.iter().map(|r| r.initial_h_sq).collect();
    let y: Vec<f64> = rows.iter().map(|r| r.lhs.mean).collect();
    let fit = fit_affine(&x, &y);
    let yv: Vec<f64> = rows.iter().map(|r| r.v_integral.mean).collect();
    let v_integral_fit = fit_affine(&x, &yv);
    let envelope = rows.iter().map(|r| r.lhs.mean / (1.0 + r.initial_h_sq)).fold(0.0, f64::max);
    for r in rows.iter_mut() {
        r.fitted = fit.eval(r.initial_h_sq);
        r.residual = r.lhs.mean - r.fitted;
        let half = 0.5 * (r.lhs.ci_high - r.lhs.ci_low);
        r.within_ci = r.residual.abs() <= 3.0 * half;
    }
    let finite = fit.is_finite() && rows.iter().all(|r| r.lhs.is_finite());
    let passed = blowup_witness.is_none() && finite;
    Ok((
        AprioriReport {
            residuals_within_ci: rows.iter().all(|r| r.within_ci),
            rows,
            fit,
            v_integral_fit,
            envelope,
            blowup_witness,
            passed,
            verdict: Verdict::from_bool(passed),
        },
        ensembles,
    ))
}
