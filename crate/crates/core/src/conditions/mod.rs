//! Auditor for the variational setting: exact exponent bookkeeping and
//! sampling audits of parabolicity, coercivity and growth.
//!
//! The sampling audits falsify; a pass reads "no violation found".

mod coercivity;
mod criticality;
mod growth;
mod parabolicity;
mod sampling;

pub use coercivity::{
    audit_coercivity, bisect_threshold, AuditConfig, AuditMode, CoercivityAudit, FieldWitness, FixedConstants,
    GrowthProbe, LevelMargin,
};
pub use criticality::{
    admissible_rho, check_declared, check_subcriticality, classify_pair, CriticalityReport, PairEntry, PairStatus,
    RhoInterval,
};
pub use growth::{check_quadratic_growth, GrowthEntry, GrowthReport, RatioProbe};
pub use parabolicity::{check_parabolicity, ParabolicityReport, ParabolicityWitness};
pub use sampling::{sample_shapes, Shape, ShapeKind};

use serde::Serialize;

use crate::operators::{EquationSpec, OperatorError, Slot, Variant};
use crate::Rational;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ConditionError {
    #[error("invalid audit input: {0}")]
    Invalid(String),
    #[error("{variant} has no tabulated exponent range for slot {slot:?}")]
    NotParameterized { variant: Variant, slot: Slot },
    #[error("non-finite functional at amplitude {}", .0.amplitude)]
    NonFinite(Box<FieldWitness>),
    #[error(transparent)]
    Operator(#[from] OperatorError),
}

impl From<crate::spaces::SpaceError> for ConditionError {
    fn from(e: crate::spaces::SpaceError) -> Self {
        Self::Operator(e.into())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ConditionStatus {
    Pass,
    Fail,
    NotApplicable,
}

impl ConditionStatus {
    fn of(ok: bool) -> Self {
        if ok {
            Self::Pass
        } else {
            Self::Fail
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct AdmissibilityEntry {
    pub slot: Slot,
    #[serde(with = "crate::ratio_serde")]
    pub rho: Rational,
    pub interval: Option<String>,
    pub status: ConditionStatus,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ConditionEntry {
    pub id: &'static str,
    pub status: ConditionStatus,
}

/// Everything the auditor knows about one spec.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ConditionReport {
    pub variant: Variant,
    pub dimension: usize,
    pub conditions: Vec<ConditionEntry>,
    pub criticality: CriticalityReport,
    pub admissibility: Vec<AdmissibilityEntry>,
    pub parabolicity: ParabolicityReport,
    pub coercivity: CoercivityAudit,
    pub growth: GrowthReport,
    pub passed: bool,
}

impl ConditionReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}

/// Declared `ρ` of each pair against the tabulated range of its slot.
pub fn check_admissibility(spec: &EquationSpec) -> Vec<AdmissibilityEntry> {
    spec.params()
        .iter()
        .map(|p| match admissible_rho(spec.variant(), spec.dimension(), p.slot) {
            Ok(iv) => AdmissibilityEntry {
                slot: p.slot,
                rho: p.rho,
                interval: Some(iv.to_string()),
                status: ConditionStatus::of(iv.contains(p.rho)),
            },
            Err(_) => AdmissibilityEntry { slot: p.slot, rho: p.rho, interval: None, status: ConditionStatus::NotApplicable },
        })
        .collect()
}

/// Runs every check. Growth counts toward the verdict only in `eta_zero`
/// mode, where either the symbolic route or the audit's own probe suffices.
pub fn audit_spec(spec: &EquationSpec, eta: f64, cfg: &AuditConfig) -> Result<ConditionReport, ConditionError> {
    let criticality = check_declared(spec);
    let admissibility = check_admissibility(spec);
    let parabolicity = check_parabolicity(spec);
    let coercivity = audit_coercivity(spec, eta, cfg)?;
    let growth = check_quadratic_growth(spec, cfg)?;

    let adm_ok = admissibility.iter().all(|e| e.status != ConditionStatus::Fail);
    let growth_status = if cfg.mode != AuditMode::EtaZero && !growth.symbolic_pass {
        ConditionStatus::NotApplicable
    } else {
        ConditionStatus::of(growth.passed || coercivity.growth.is_some_and(|g| g.bounded))
    };
    let conditions = vec![
        ConditionEntry { id: "criticality", status: ConditionStatus::of(criticality.passed()) },
        ConditionEntry {
            id: "admissible_rho",
            status: if admissibility.iter().all(|e| e.status == ConditionStatus::NotApplicable) {
                ConditionStatus::NotApplicable
            } else {
                ConditionStatus::of(adm_ok)
            },
        },
        ConditionEntry { id: "parabolicity", status: ConditionStatus::of(parabolicity.passed) },
        ConditionEntry { id: "coercivity", status: ConditionStatus::of(coercivity.passed) },
        ConditionEntry { id: "quadratic_growth", status: growth_status },
    ];
    let passed = criticality.passed()
        && adm_ok
        && parabolicity.passed
        && coercivity.passed
        && (cfg.mode != AuditMode::EtaZero || growth_status == ConditionStatus::Pass);
    Ok(ConditionReport {
        variant: spec.variant(),
        dimension: spec.dimension(),
        conditions,
        criticality,
        admissibility,
        parabolicity,
        coercivity,
        growth,
        passed,
    })
}
