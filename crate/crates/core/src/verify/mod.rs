//! Monte-Carlo harnesses for the energy, tail, continuity and Gronwall
//! bounds. Every experiment tests the form of a bound, never its constant.

mod apriori;
mod blowup;
mod continuity;
mod ensemble;
mod gronwall;
mod ledger;
pub mod plot;
pub mod stats;
mod tail;

pub use apriori::{apriori_experiment, AprioriConfig, AprioriReport, ScaleRow};
pub use blowup::{blowup_ensemble, blowup_time_convergence, BlowupEnsembleReport, BlowupRow, BlowupTimeReport};
pub use continuity::{continuous_dependence_experiment, ContinuityConfig, ContinuityReport, ContinuityRow};
pub use ensemble::{run_ensemble, run_ensemble_with, AuditedSpec, EnsembleConfig, EnsembleResult, PathStats, TailPoint};
pub use gronwall::{
    gronwall_bound, gronwall_harness, GronwallBound, GronwallFamily, GronwallInstance, GronwallReport, GronwallRow,
    SpotCheck,
};
pub use ledger::{ledger_experiment, ledger_refinement, LedgerReport, RefinementReport};
pub use tail::{tail_experiment, TailConfig, TailReport, TailRow};

use serde::Serialize;

use crate::conditions::ConditionError;
use crate::operators::OperatorError;
use crate::solver::SolverError;

#[derive(Debug, thiserror::Error)]
pub enum VerifyError {
    /// The hypothesis an experiment relies on was not certified.
    #[error("precondition refused: {0}")]
    Precondition(String),
    #[error("invalid experiment: {0}")]
    Invalid(String),
    #[error(transparent)]
    Solver(#[from] SolverError),
    #[error(transparent)]
    Condition(#[from] ConditionError),
    #[error(transparent)]
    Operator(#[from] OperatorError),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Pass,
    Fail,
    /// Not enough data to decide.
    Inconclusive,
}

impl Verdict {
    pub fn from_bool(ok: bool) -> Self {
        if ok {
            Verdict::Pass
        } else {
            Verdict::Fail
        }
    }

    /// `Fail` dominates `Inconclusive`, which dominates `Pass`.
    pub fn and(self, other: Verdict) -> Verdict {
        match (self, other) {
            (Verdict::Fail, _) | (_, Verdict::Fail) => Verdict::Fail,
            (Verdict::Inconclusive, _) | (_, Verdict::Inconclusive) => Verdict::Inconclusive,
            _ => Verdict::Pass,
        }
    }
}
