use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::noise::operator_norm_h;
use crate::operators::{coercivity_terms, CoercivityTerms, EquationSpec, OperatorError};
use crate::spaces::{FourierTerm, SpectralField};

use super::sampling::{sample_shapes, Shape, ShapeKind};
use super::ConditionError;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AuditMode {
    /// `⟨v,A⟩ − (½+η)|||B|||² ≥ θ‖v‖²_V − M‖v‖²_H − φ²` with `η > 0`.
    EtaPositive,
    /// The same at `η = 0`, plus the growth bound on `‖B(v)‖`.
    EtaZero,
    /// `η ‖B^* v‖²/‖v‖²_H` in place of `η |||B|||²`.
    WeakVariant,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FixedConstants {
    pub theta: f64,
    pub m: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct AuditConfig {
    pub mode: AuditMode,
    /// Lower bound on the number of sampled fields.
    pub samples: usize,
    pub seed: u64,
    /// Amplitude ladder applied to every unit shape.
    pub amplitudes: Vec<f64>,
    pub time: f64,
    /// Relative tolerance on the margin.
    pub tolerance: f64,
    /// Constant inhomogeneity `φ²`; calibrated from the smallest amplitude when absent.
    pub phi_sq: Option<f64>,
    /// Skip the fit and use these constants.
    pub fixed: Option<FixedConstants>,
    /// `H`-norm bounds at which margins are also reported.
    pub h_levels: Vec<f64>,
    /// Step of the symmetric difference that extracts quadratic parts.
    pub probe_step: f64,
}

impl Default for AuditConfig {
    fn default() -> Self {
        Self {
            mode: AuditMode::EtaPositive,
            samples: 2000,
            seed: 0,
            amplitudes: vec![0.01, 0.1, 0.5, 1.0, 2.0, 5.0, 10.0, 50.0],
            time: 0.0,
            tolerance: 1e-8,
            phi_sq: None,
            fixed: None,
            h_levels: vec![1.0, 10.0],
            probe_step: 1e-3,
        }
    }
}

/// A sampled field with its margin.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct FieldWitness {
    pub shape: ShapeKind,
    pub amplitude: f64,
    pub h_norm_sq: f64,
    pub v_norm_sq: f64,
    pub functional: f64,
    pub margin: f64,
    /// Coefficient dump of the field.
    pub terms: Vec<FourierTerm>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LevelMargin {
    pub h_bound: f64,
    pub samples: usize,
    pub min_margin: Option<f64>,
}

/// `‖B(v)‖_op / ((1+‖v‖_H)(φ+‖v‖_V))` on the top amplitude against the rest.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct GrowthProbe {
    pub max_ratio_top: f64,
    pub max_ratio_rest: f64,
    pub bounded: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CoercivityAudit {
    pub mode: AuditMode,
    pub eta: f64,
    pub theta: f64,
    pub m: f64,
    pub phi_sq: f64,
    pub phi_calibrated: bool,
    pub sample_count: usize,
    pub shape_count: usize,
    pub sampled_min_margin: f64,
    /// Smallest `margin / scale`.
    pub min_relative_margin: f64,
    pub tolerance: f64,
    pub passed: bool,
    pub failure_witness: Option<FieldWitness>,
    pub levels: Vec<LevelMargin>,
    pub growth: Option<GrowthProbe>,
    pub verdict: String,
    pub notes: Vec<String>,
}

struct Evaluated {
    q: f64,
    x: f64,
    samples: Vec<(f64, CoercivityTerms, f64)>,
}

fn value(mode: AuditMode, eta: f64, t: &CoercivityTerms) -> f64 {
    match mode {
        AuditMode::EtaPositive => t.functional(eta),
        AuditMode::EtaZero => t.functional(0.0),
        AuditMode::WeakVariant => t.weak_functional(eta),
    }
}

fn abort(shape: &Shape, amplitude: f64, e: OperatorError) -> ConditionError {
    if !e.is_overflow() {
        return ConditionError::Operator(e);
    }
    let v = shape.field.scaled(amplitude);
    ConditionError::NonFinite(Box::new(FieldWitness {
        shape: shape.kind.clone(),
        amplitude,
        h_norm_sq: amplitude * amplitude,
        v_norm_sq: f64::NAN,
        functional: f64::NAN,
        margin: f64::NAN,
        terms: v.to_terms(0.0),
    }))
}

fn evaluate(spec: &EquationSpec, eta: f64, cfg: &AuditConfig, e0: f64, shape: &Shape) -> Result<Evaluated, ConditionError> {
    let f = |a: f64| -> Result<f64, ConditionError> {
        let t = coercivity_terms(spec, cfg.time, &shape.field.scaled(a)).map_err(|e| abort(shape, a, e))?;
        Ok(value(cfg.mode, eta, &t))
    };
    let h = cfg.probe_step;
    let d1 = (f(h)? + f(-h)? - 2.0 * e0) / (2.0 * h * h);
    let d2 = (f(2.0 * h)? + f(-2.0 * h)? - 2.0 * e0) / (8.0 * h * h);
    let q = (4.0 * d1 - d2) / 3.0;
    let x = spec.triple().v_norm_sq(&shape.field);
    let mut samples = Vec::with_capacity(cfg.amplitudes.len());
    for &a in &cfg.amplitudes {
        let v = shape.field.scaled(a);
        let t = coercivity_terms(spec, cfg.time, &v).map_err(|e| abort(shape, a, e))?;
        let op = if cfg.mode == AuditMode::EtaZero {
            operator_norm_h(spec, cfg.time, &v).map_err(|e| abort(shape, a, e.into()))?
        } else {
            0.0
        };
        samples.push((a, t, op));
    }
    Ok(Evaluated { q, x, samples })
}

/// Least squares of `q ≈ θX − M` over unit shapes with `θ ≥ 0`, then `M`
/// raised until every shape satisfies the quadratic bound.
fn fit(evals: &[Evaluated]) -> (f64, f64) {
    let n = evals.len() as f64;
    let mx = evals.iter().map(|e| e.x).sum::<f64>() / n;
    let mq = evals.iter().map(|e| e.q).sum::<f64>() / n;
    let sxx: f64 = evals.iter().map(|e| (e.x - mx).powi(2)).sum();
    let sxq: f64 = evals.iter().map(|e| (e.x - mx) * (e.q - mq)).sum();
    let theta = if sxx > 0.0 { (sxq / sxx).max(0.0) } else { 0.0 };
    let m_ls = theta * mx - mq;
    let m = evals.iter().map(|e| theta * e.x - e.q).fold(m_ls, f64::max);
    (theta, m)
}

/// Samples the coercivity inequality of the chosen mode. Passing means no
/// violation was found, not that the inequality holds.
pub fn audit_coercivity(spec: &EquationSpec, eta: f64, cfg: &AuditConfig) -> Result<CoercivityAudit, ConditionError> {
    if cfg.samples < 100 {
        return Err(ConditionError::Invalid(format!("audit needs at least 100 samples, got {}", cfg.samples)));
    }
    if cfg.amplitudes.is_empty() || cfg.amplitudes.iter().any(|a| !(a.is_finite() && *a > 0.0)) {
        return Err(ConditionError::Invalid("amplitudes must be positive and finite".into()));
    }
    if !(eta.is_finite() && eta >= 0.0) {
        return Err(ConditionError::Invalid(format!("eta = {eta} must be nonnegative")));
    }
    let mut amps = cfg.amplitudes.clone();
    amps.sort_by(f64::total_cmp);
    let cfg = AuditConfig { amplitudes: amps, ..cfg.clone() };
    let shapes = sample_shapes(spec, cfg.samples.div_ceil(cfg.amplitudes.len()), cfg.seed);
    let zero = SpectralField::zeros(spec.grid());
    let t0 = coercivity_terms(spec, cfg.time, &zero)?;
    let e0 = value(cfg.mode, eta, &t0);
    let evals: Vec<Evaluated> =
        shapes.par_iter().map(|s| evaluate(spec, eta, &cfg, e0, s)).collect::<Result<_, _>>()?;

    let mut notes = Vec::new();
    let (theta, m) = match cfg.fixed {
        Some(c) => (c.theta, c.m),
        None => fit(&evals),
    };
    let raw = |e: &CoercivityTerms| value(cfg.mode, eta, e) - theta * e.v_sq + m * e.h_sq;
    let (phi_sq, phi_calibrated) = match cfg.phi_sq {
        Some(p) => (p, false),
        None => {
            let low = evals.iter().map(|e| -raw(&e.samples[0].1)).fold(-e0, f64::max);
            (low.max(0.0), true)
        }
    };
    if cfg.mode == AuditMode::WeakVariant && !spec.noise().vanishes_at_zero() {
        notes.push("B(t,0) != 0: the weak variant's value at v = 0 is set by convention".into());
    }

    let mut min_margin = e0 + phi_sq;
    let mut min_rel = min_margin / (e0.abs() + phi_sq).max(f64::MIN_POSITIVE);
    if min_margin == 0.0 {
        min_rel = 0.0;
    }
    let mut worst: Option<(usize, usize, f64)> = None;
    let mut passed = theta > 0.0 && min_margin >= -cfg.tolerance * (e0.abs() + phi_sq);
    let mut levels: Vec<LevelMargin> =
        cfg.h_levels.iter().map(|&h| LevelMargin { h_bound: h, samples: 0, min_margin: None }).collect();
    let top = cfg.amplitudes.len() - 1;
    let phi = phi_sq.sqrt();
    let (mut ratio_top, mut ratio_rest) = (0.0f64, 0.0f64);
    for (i, e) in evals.iter().enumerate() {
        for (j, (a, t, op)) in e.samples.iter().enumerate() {
            let x = t.v_sq;
            let val = value(cfg.mode, eta, t);
            let margin = val - theta * x + m * t.h_sq + phi_sq;
            let scale = val.abs() + theta * x + m.abs() * t.h_sq + phi_sq;
            let rel = if scale > 0.0 { margin / scale } else { 0.0 };
            min_margin = min_margin.min(margin);
            if margin < -cfg.tolerance * scale {
                passed = false;
            }
            if rel < min_rel {
                min_rel = rel;
                worst = Some((i, j, margin));
            }
            for l in levels.iter_mut() {
                if *a <= l.h_bound * (1.0 + 1e-12) {
                    l.samples += 1;
                    l.min_margin = Some(l.min_margin.map_or(margin, |x: f64| x.min(margin)));
                }
            }
            if cfg.mode == AuditMode::EtaZero {
                let r = op / ((1.0 + t.h_sq.sqrt()) * (phi + x.sqrt()));
                if j == top {
                    ratio_top = ratio_top.max(r);
                } else {
                    ratio_rest = ratio_rest.max(r);
                }
            }
        }
    }
    let growth = (cfg.mode == AuditMode::EtaZero).then(|| {
        let bounded = top == 0 || ratio_top <= 2.0 * ratio_rest + 1e-300;
        GrowthProbe { max_ratio_top: ratio_top, max_ratio_rest: ratio_rest, bounded }
    });
    if let Some(g) = &growth {
        passed &= g.bounded;
    }
    if theta <= 0.0 {
        notes.push("fitted theta is not positive".into());
    }
    let failure_witness = if passed {
        None
    } else {
        worst.map(|(i, j, margin)| {
            let (a, t, _) = &evals[i].samples[j];
            let v = shapes[i].field.scaled(*a);
            FieldWitness {
                shape: shapes[i].kind.clone(),
                amplitude: *a,
                h_norm_sq: t.h_sq,
                v_norm_sq: t.v_sq,
                functional: value(cfg.mode, eta, t),
                margin,
                terms: v.to_terms(1e-14 * a),
            }
        })
    };
    let sample_count = evals.len() * cfg.amplitudes.len();
    let verdict = if passed {
        format!("no violation found in {sample_count} samples")
    } else if theta <= 0.0 {
        "no positive theta fits the samples".into()
    } else if growth.is_some_and(|g| !g.bounded) {
        "growth ratio increases with the amplitude".into()
    } else {
        "violation found".into()
    };
    Ok(CoercivityAudit {
        mode: cfg.mode,
        eta,
        theta,
        m,
        phi_sq,
        phi_calibrated,
        sample_count,
        shape_count: evals.len(),
        sampled_min_margin: min_margin,
        min_relative_margin: min_rel,
        tolerance: cfg.tolerance,
        passed,
        failure_witness,
        levels,
        growth,
        verdict,
        notes,
    })
}

/// Bisects the largest parameter value at which the audit passes, assuming
/// pass below and fail above. Returns the final bracket.
pub fn bisect_threshold<F>(
    build: F,
    mut lo: f64,
    mut hi: f64,
    steps: usize,
    eta: f64,
    cfg: &AuditConfig,
) -> Result<(f64, f64), ConditionError>
where
    F: Fn(f64) -> Result<EquationSpec, ConditionError>,
{
    for _ in 0..steps {
        let mid = 0.5 * (lo + hi);
        if audit_coercivity(&build(mid)?, eta, cfg)?.passed {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok((lo, hi))
}
