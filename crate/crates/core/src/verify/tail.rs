use serde::Serialize;

use crate::conditions::AuditMode;
use crate::solver::SolverConfig;
use crate::spaces::SpectralField;

use super::ensemble::{run_ensemble, AuditedSpec, EnsembleConfig, EnsembleResult};
use super::stats::{fit_affine, Proportion};
use super::{Verdict, VerifyError};

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TailConfig {
    pub gammas: Vec<f64>,
    pub solver: SolverConfig,
    pub ensemble: EnsembleConfig,
    /// A grid point is resolvable with at least this many exceedances.
    pub min_exceedances: usize,
}

#[derive(Clone, Debug, Serialize)]
pub struct TailRow {
    pub gamma: f64,
    pub empirical: Proportion,
    pub resolvable: bool,
    /// `ĉ / log γ` on the checked points.
    pub bound: Option<f64>,
    pub within: Option<bool>,
}

#[derive(Clone, Debug, Serialize)]
pub struct TailReport {
    pub rows: Vec<TailRow>,
    /// Resolvable points used to fit `ĉ`.
    pub fit_gammas: Vec<f64>,
    /// Fit point attaining `ĉ`.
    pub anchor_gamma: Option<f64>,
    /// `ĉ = max p(γ) log γ` over the fit points.
    pub c_hat: Option<f64>,
    /// `p log γ` at the top resolvable point sits more than three standard
    /// errors below `ĉ`.
    pub turned_over: Option<bool>,
    /// `max p log γ` over the lower half of the fit points alone.
    pub holdout_c_hat: Option<f64>,
    /// Upper-half points within `holdout_c_hat / log γ + 3·stderr`. Reported, not gating.
    pub holdout_within: Option<bool>,
    /// Slope of `log p` against `log γ` on the resolvable points.
    pub power_exponent: Option<f64>,
    /// Slope of `log p` against `γ` on the resolvable points.
    pub exponential_rate: Option<f64>,
    /// `sup_t Ê‖u(t)‖²_H`.
    pub sup_t_mean_h_sq: f64,
    pub blowup_fraction: f64,
    pub verdict: Verdict,
}

/// Empirical `P(sup_t ‖u‖_H ≥ γ)` against `ĉ/log γ`.
///
/// `ĉ = max p log γ` over the resolvable `γ > 1`, and every resolvable point
/// must satisfy `p ≤ ĉ/log γ + 3·stderr`. The verdict passes once `p log γ`
/// has turned over inside the grid; an envelope still attained at the top
/// point, or fewer than two resolvable points, gives `Inconclusive`.
pub fn tail_experiment(
    audited: &AuditedSpec,
    u0: &SpectralField,
    cfg: &TailConfig,
) -> Result<(TailReport, EnsembleResult), VerifyError> {
    audited.require(&[AuditMode::EtaZero], "tail experiment")?;
    if cfg.gammas.iter().any(|g| !(g.is_finite() && *g > 0.0)) {
        return Err(VerifyError::Invalid("tail grid must be positive".into()));
    }
    let mut gammas = cfg.gammas.clone();
    gammas.sort_by(f64::total_cmp);
    let res = run_ensemble(audited.spec(), u0, &cfg.solver, &cfg.ensemble)?;
    let mut rows: Vec<TailRow> = res
        .tail(&gammas)
        .into_iter()
        .map(|t| TailRow {
            gamma: t.gamma,
            resolvable: t.gamma > 1.0 && t.tail.hits >= cfg.min_exceedances,
            empirical: t.tail,
            bound: None,
            within: None,
        })
        .collect();
    let fit: Vec<usize> = (0..rows.len()).filter(|&i| rows[i].resolvable).collect();
    let score = |r: &TailRow| r.empirical.p * r.gamma.ln();
    let score_se = |r: &TailRow| r.empirical.stderr * r.gamma.ln();
    let envelope = |pts: &[usize]| pts.iter().copied().max_by(|&a, &b| score(&rows[a]).total_cmp(&score(&rows[b])));
    let within = |r: &TailRow, c: f64| r.empirical.p <= c / r.gamma.ln() + 3.0 * r.empirical.stderr;
    let anchor = envelope(&fit);
    let c_hat = anchor.map(|a| score(&rows[a]));
    let (lower, upper) = fit.split_at(fit.len().div_ceil(2));
    let holdout_c_hat = envelope(lower).map(|a| score(&rows[a]));
    let holdout_within = match (holdout_c_hat, upper.is_empty()) {
        (Some(c), false) => Some(upper.iter().all(|&i| within(&rows[i], c))),
        _ => None,
    };
    let mut verdict = Verdict::Inconclusive;
    let mut turned_over = None;
    if let (Some(c), true) = (c_hat, fit.len() >= 2) {
        let mut ok = true;
        for &i in &fit {
            let w = within(&rows[i], c);
            let r = &mut rows[i];
            r.bound = Some(c / r.gamma.ln());
            r.within = Some(w);
            ok &= w;
        }
        let top = &rows[*fit.last().expect("two resolvable points")];
        let turned = score(top) + 3.0 * score_se(top) < c;
        turned_over = Some(turned);
        verdict = match (ok, turned) {
            (false, _) => Verdict::Fail,
            (true, true) => Verdict::Pass,
            (true, false) => Verdict::Inconclusive,
        };
    }
    let fit_gammas: Vec<f64> = fit.iter().map(|&i| rows[i].gamma).collect();
    let resolved: Vec<&TailRow> = rows.iter().filter(|r| r.resolvable).collect();
    let (power_exponent, exponential_rate) = if resolved.len() >= 2 {
        let lp: Vec<f64> = resolved.iter().map(|r| r.empirical.p.ln()).collect();
        let lg: Vec<f64> = resolved.iter().map(|r| r.gamma.ln()).collect();
        let g: Vec<f64> = resolved.iter().map(|r| r.gamma).collect();
        (Some(fit_affine(&lg, &lp).slope), Some(fit_affine(&g, &lp).slope))
    } else {
        (None, None)
    };
    Ok((
        TailReport {
            anchor_gamma: anchor.map(|a| rows[a].gamma),
            rows,
            fit_gammas,
            c_hat,
            turned_over,
            holdout_c_hat,
            holdout_within,
            power_exponent,
            exponential_rate,
            sup_t_mean_h_sq: res.sup_t_mean_h_sq,
            blowup_fraction: res.blowup_fraction,
            verdict,
        },
        res,
    ))
}
