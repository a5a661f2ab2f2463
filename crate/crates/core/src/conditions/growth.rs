use rayon::prelude::*;
use serde::Serialize;

use crate::noise::operator_norm_h;
use crate::operators::{EquationSpec, Slot};
use crate::Rational;

use super::criticality::{classify_pair, PairStatus};
use super::sampling::sample_shapes;
use super::{AuditConfig, ConditionError};

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct GrowthEntry {
    #[serde(with = "crate::ratio_serde")]
    pub rho: Rational,
    #[serde(with = "crate::ratio_serde")]
    pub beta: Rational,
    pub rho_at_most_one: bool,
    pub subcritical: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RatioProbe {
    pub samples: usize,
    pub max_ratio_top: f64,
    pub max_ratio_rest: f64,
    pub bounded: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct GrowthReport {
    pub entries: Vec<GrowthEntry>,
    pub symbolic_pass: bool,
    /// `B₀` does not depend on the state, so its part of the bound is free.
    pub transport_auto_pass: bool,
    pub numeric: Option<RatioProbe>,
    pub passed: bool,
    pub note: String,
}

/// Quadratic growth of `B`: every G-slot pair needs `ρ ≤ 1` and
/// `2β ≤ 1 + 1/(ρ+1)`. When that holds, `‖B(v)‖ / ((1+‖v‖_H)(1+‖v‖_V))`
/// is sampled along an amplitude ladder and must not grow at the top.
pub fn check_quadratic_growth(spec: &EquationSpec, cfg: &AuditConfig) -> Result<GrowthReport, ConditionError> {
    let one = Rational::from_integer(1);
    let entries: Vec<GrowthEntry> = spec
        .params()
        .iter()
        .filter(|p| p.slot == Slot::G)
        .map(|p| {
            let (_, status) = classify_pair(p.rho, p.beta);
            GrowthEntry {
                rho: p.rho,
                beta: p.beta,
                rho_at_most_one: p.rho <= one,
                subcritical: status != PairStatus::Inadmissible,
            }
        })
        .collect();
    let symbolic_pass = entries.iter().all(|e| e.rho_at_most_one && e.subcritical);
    let transport_auto_pass = spec.is_semilinear();
    let mut report = GrowthReport {
        entries,
        symbolic_pass,
        transport_auto_pass,
        numeric: None,
        passed: false,
        note: String::new(),
    };
    if !symbolic_pass {
        report.note = "a G-slot exponent exceeds 1; growth has to come from the eta_zero audit".into();
        return Ok(report);
    }
    let mut amps = cfg.amplitudes.clone();
    amps.sort_by(f64::total_cmp);
    if amps.is_empty() {
        return Err(ConditionError::Invalid("amplitude ladder is empty".into()));
    }
    let shapes = sample_shapes(spec, cfg.samples.div_ceil(amps.len()).max(1), cfg.seed);
    let triple = *spec.triple();
    let ratios: Vec<Vec<f64>> = shapes
        .par_iter()
        .map(|s| {
            amps.iter()
                .map(|&a| {
                    let v = s.field.scaled(a);
                    let op = operator_norm_h(spec, cfg.time, &v)?;
                    Ok(op / ((1.0 + triple.h_norm(&v)) * (1.0 + triple.v_norm(&v))))
                })
                .collect::<Result<Vec<f64>, crate::noise::NoiseError>>()
        })
        .collect::<Result<_, _>>()
        .map_err(|e| ConditionError::Operator(e.into()))?;
    let top = amps.len() - 1;
    let mut max_top = 0.0f64;
    let mut max_rest = 0.0f64;
    for r in &ratios {
        max_top = max_top.max(r[top]);
        for &x in &r[..top] {
            max_rest = max_rest.max(x);
        }
    }
    let finite = max_top.is_finite() && max_rest.is_finite();
    let bounded = finite && (top == 0 || max_top <= 2.0 * max_rest);
    report.numeric =
        Some(RatioProbe { samples: ratios.len() * amps.len(), max_ratio_top: max_top, max_ratio_rest: max_rest, bounded });
    report.passed = bounded;
    report.note = if transport_auto_pass {
        "semi-linear: the transport part is state independent".into()
    } else {
        "quasi-linear: transport part sampled with the rest".into()
    };
    Ok(report)
}
