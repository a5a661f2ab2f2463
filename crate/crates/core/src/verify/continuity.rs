use rayon::prelude::*;
use serde::Serialize;

use crate::noise::{sample_increments, NoiseStream};
use crate::operators::OperatorError;
use crate::solver::{step, SolverConfig};
use crate::spaces::SpectralField;

use super::ensemble::{AuditedSpec, EnsembleConfig};
use super::stats::{bootstrap_ci, mean, quantile};
use super::{Verdict, VerifyError};

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ContinuityConfig {
    /// Perturbation sizes; initial data are `u₀ + δ · direction`.
    pub deltas: Vec<f64>,
    pub solver: SolverConfig,
    pub ensemble: EnsembleConfig,
    /// Required median ratio per halving of `δ`.
    pub min_ratio: f64,
    /// Medians below `floor_factor · floor` count as at the floor.
    pub floor_factor: f64,
}

impl ContinuityConfig {
    /// `δ_n = 2^{−n}` for `n = 0..=levels`, then `δ = 0`.
    pub fn dyadic(levels: u32, solver: SolverConfig, ensemble: EnsembleConfig) -> Self {
        Self {
            deltas: (0..=levels).map(|n| 2f64.powi(-(n as i32))).chain([0.0]).collect(),
            solver,
            ensemble,
            min_ratio: 1.5,
            floor_factor: 10.0,
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct ContinuityRow {
    pub delta: f64,
    pub pairs: usize,
    pub excluded: usize,
    pub median: f64,
    pub median_ci: (f64, f64),
    pub p90: f64,
    pub p90_ci: (f64, f64),
    /// `E[Z]`, the `q = 1` moment.
    pub mean: f64,
    /// Previous median over this one, when `δ` halved.
    pub ratio: Option<f64>,
    pub at_floor: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct ContinuityReport {
    pub rows: Vec<ContinuityRow>,
    /// Median `Z` at `δ = ε`.
    pub floor: f64,
    /// All distances at `δ = 0` are exactly zero, when `0` is on the grid.
    pub zero_bitwise: Option<bool>,
    pub monotone: bool,
    pub ratios_ok: bool,
    pub excluded_fraction: f64,
    pub verdict: Verdict,
    /// Per path and `δ`, in grid order; `None` marks an excluded pair.
    #[serde(skip)]
    pub distances: Vec<Vec<Option<f64>>>,
}

struct Member {
    u: SpectralField,
    alive: bool,
    sup_h: f64,
    integral: f64,
    x_prev: f64,
}

/// Coupled paths sharing the noise stream; returns `Z` per member, `None`
/// if either the base or the member halted.
fn coupled_path(
    audited: &AuditedSpec,
    u0: &SpectralField,
    direction: &SpectralField,
    deltas: &[f64],
    cfg: &SolverConfig,
    stream: &NoiseStream,
) -> Result<Vec<Option<f64>>, VerifyError> {
    let spec = audited.spec();
    let triple = spec.triple();
    let m = spec.noise().mode_count;
    let mut base = u0.clone();
    let mut members: Vec<Member> = deltas
        .iter()
        .map(|&d| -> Result<Member, VerifyError> {
            let mut u = u0.clone();
            u.axpy(d, direction).map_err(OperatorError::from)?;
            Ok(Member { u, alive: true, sup_h: 0.0, integral: 0.0, x_prev: 0.0 })
        })
        .collect::<Result<_, _>>()?;
    let diff = |a: &SpectralField, b: &SpectralField| -> Result<SpectralField, VerifyError> {
        let mut d = a.clone();
        d.axpy(-1.0, b).map_err(OperatorError::from)?;
        Ok(d)
    };
    for mb in members.iter_mut() {
        let d = diff(&mb.u, &base)?;
        mb.sup_h = triple.h_norm(&d);
        mb.x_prev = triple.v_norm_sq(&d);
    }
    let over = |u: &SpectralField, integral: f64| {
        triple.h_norm_sq(u) > cfg.blowup_h_threshold || integral > cfg.blowup_v_integral_threshold
    };
    let mut t = 0.0;
    let mut base_integral = 0.0;
    let mut base_x = triple.v_norm_sq(&base);
    for (k, &dt) in cfg.step_sizes().iter().enumerate() {
        let dw = sample_increments(&stream.at(k as u64), dt, m).map_err(crate::solver::SolverError::from)?;
        base = match step(spec, &base, t, &dw, cfg.scheme) {
            Ok(v) => v,
            Err(e) if e.is_overflow() => return Ok(vec![None; deltas.len()]),
            Err(e) => return Err(e.into()),
        };
        let x = triple.v_norm_sq(&base);
        base_integral += 0.5 * dt * (base_x + x);
        base_x = x;
        if over(&base, base_integral) {
            return Ok(vec![None; deltas.len()]);
        }
        for mb in members.iter_mut().filter(|m| m.alive) {
            match step(spec, &mb.u, t, &dw, cfg.scheme) {
                Ok(v) => mb.u = v,
                Err(e) if e.is_overflow() => {
                    mb.alive = false;
                    continue;
                }
                Err(e) => return Err(e.into()),
            }
            if over(&mb.u, 0.0) {
                mb.alive = false;
                continue;
            }
            let d = diff(&mb.u, &base)?;
            mb.sup_h = mb.sup_h.max(triple.h_norm(&d));
            let x = triple.v_norm_sq(&d);
            mb.integral += 0.5 * dt * (mb.x_prev + x);
            mb.x_prev = x;
        }
        t += dt;
    }
    Ok(members.iter().map(|m| m.alive.then(|| m.sup_h + m.integral.sqrt())).collect())
}

/// Distance `Z = sup_t‖u − u_δ‖_H + (∫‖u − u_δ‖²_V)^{1/2}` between coupled
/// solutions along the `δ` grid.
pub fn continuous_dependence_experiment(
    audited: &AuditedSpec,
    u0: &SpectralField,
    direction: &SpectralField,
    cfg: &ContinuityConfig,
) -> Result<ContinuityReport, VerifyError> {
    if cfg.deltas.is_empty() || cfg.deltas.iter().any(|d| !(d.is_finite() && *d >= 0.0)) {
        return Err(VerifyError::Invalid("perturbation sizes must be nonnegative".into()));
    }
    if cfg.ensemble.paths < 2 {
        return Err(VerifyError::Invalid("continuity experiment needs at least two paths".into()));
    }
    cfg.solver.validate()?;
    let mut deltas = cfg.deltas.clone();
    deltas.sort_by(|a, b| b.total_cmp(a));
    let mut members = deltas.clone();
    members.push(f64::EPSILON);
    let per_path: Vec<Vec<Option<f64>>> = (0..cfg.ensemble.paths)
        .into_par_iter()
        .map(|i| {
            let stream = NoiseStream::new(cfg.ensemble.seed, cfg.ensemble.path_offset + i as u64);
            coupled_path(audited, u0, direction, &members, &cfg.solver, &stream)
        })
        .collect::<Result<_, _>>()?;

    let column = |j: usize| -> Vec<f64> { per_path.iter().filter_map(|z| z[j]).collect() };
    let floor_col = column(members.len() - 1);
    let floor = if floor_col.is_empty() { f64::NAN } else { quantile(&floor_col, 0.5) };
    let seed = cfg.ensemble.seed;
    let mut rows: Vec<ContinuityRow> = Vec::with_capacity(deltas.len());
    for (j, &delta) in deltas.iter().enumerate() {
        let z = column(j);
        let median = quantile(&z, 0.5);
        let prev = rows.last();
        let halved = prev.is_some_and(|p: &ContinuityRow| (p.delta - 2.0 * delta).abs() <= 1e-12 * p.delta);
        rows.push(ContinuityRow {
            delta,
            pairs: z.len(),
            excluded: per_path.len() - z.len(),
            median,
            median_ci: bootstrap_ci(&z, |s| quantile(s, 0.5), 200, 0.95, seed ^ (j as u64 + 1)),
            p90: quantile(&z, 0.9),
            p90_ci: bootstrap_ci(&z, |s| quantile(s, 0.9), 200, 0.95, seed ^ (j as u64 + 101)),
            mean: mean(&z),
            ratio: if halved { prev.map(|p| p.median / median) } else { None },
            at_floor: delta == 0.0 || median <= cfg.floor_factor * floor,
        });
    }
    let zero_bitwise = deltas
        .iter()
        .position(|&d| d == 0.0)
        .map(|j| per_path.iter().all(|z| z[j].is_some_and(|v| v == 0.0)));
    let mut monotone = true;
    let mut ratios_ok = true;
    for w in rows.windows(2) {
        let (a, b) = (&w[0], &w[1]);
        if b.at_floor {
            continue;
        }
        monotone &= b.median_ci.0 <= a.median_ci.1 && b.p90_ci.0 <= a.p90_ci.1;
        if let Some(r) = b.ratio {
            ratios_ok &= r >= cfg.min_ratio;
        }
    }
    let pairs_total = per_path.len() * deltas.len();
    let excluded: usize = rows.iter().map(|r| r.excluded).sum();
    let ok = monotone && ratios_ok && zero_bitwise.unwrap_or(true) && rows.iter().all(|r| r.pairs > 0);
    Ok(ContinuityReport {
        rows,
        floor,
        zero_bitwise,
        monotone,
        ratios_ok,
        excluded_fraction: excluded as f64 / pairs_total as f64,
        verdict: Verdict::from_bool(ok),
        distances: per_path.into_iter().map(|mut z| {
            z.pop();
            z
        }).collect(),
    })
}
