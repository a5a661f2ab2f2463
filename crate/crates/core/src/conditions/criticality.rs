use std::fmt;

use serde::Serialize;

use crate::operators::{EquationSpec, Slot, Variant};
use crate::Rational;

use super::ConditionError;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum PairStatus {
    Subcritical,
    Critical,
    Inadmissible,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PairEntry {
    pub index: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub slot: Option<Slot>,
    #[serde(with = "crate::ratio_serde")]
    pub rho: Rational,
    #[serde(with = "crate::ratio_serde")]
    pub beta: Rational,
    /// `1 + 1/(ρ+1) − 2β`; absent when `ρ ≤ −1`.
    #[serde(serialize_with = "opt_ratio")]
    pub slack: Option<Rational>,
    pub status: PairStatus,
}

fn opt_ratio<S: serde::Serializer>(r: &Option<Rational>, s: S) -> Result<S::Ok, S::Error> {
    match r {
        Some(r) => s.serialize_str(&r.to_string()),
        None => s.serialize_none(),
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CriticalityReport {
    pub entries: Vec<PairEntry>,
}

impl CriticalityReport {
    /// No pair is inadmissible.
    pub fn passed(&self) -> bool {
        self.entries.iter().all(|e| e.status != PairStatus::Inadmissible)
    }

    pub fn critical_count(&self) -> usize {
        self.entries.iter().filter(|e| e.status == PairStatus::Critical).count()
    }
}

/// Classifies one pair exactly.
pub fn classify_pair(rho: Rational, beta: Rational) -> (Option<Rational>, PairStatus) {
    let one = Rational::from_integer(1);
    let slack = if rho > -one { Some(one + (rho + one).recip() - beta * 2) } else { None };
    let in_range = beta > Rational::new(1, 2) && beta < one && rho >= Rational::from_integer(0);
    let status = match slack {
        Some(s) if in_range && s > Rational::from_integer(0) => PairStatus::Subcritical,
        Some(s) if in_range && s == Rational::from_integer(0) => PairStatus::Critical,
        _ => PairStatus::Inadmissible,
    };
    (slack, status)
}

/// Exact test of `2β ≤ 1 + 1/(ρ+1)` for every pair.
pub fn check_subcriticality(pairs: &[(Rational, Rational)]) -> CriticalityReport {
    let entries = pairs
        .iter()
        .enumerate()
        .map(|(index, &(rho, beta))| {
            let (slack, status) = classify_pair(rho, beta);
            PairEntry { index, slot: None, rho, beta, slack, status }
        })
        .collect();
    CriticalityReport { entries }
}

/// Classifies the declared pairs of a spec, keeping their slots.
pub fn check_declared(spec: &EquationSpec) -> CriticalityReport {
    let pairs: Vec<(Rational, Rational)> = spec.params().iter().map(|p| (p.rho, p.beta)).collect();
    let mut report = check_subcriticality(&pairs);
    for (e, p) in report.entries.iter_mut().zip(spec.params()) {
        e.slot = Some(p.slot);
    }
    report
}

/// Interval of rationals with open or closed ends.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct RhoInterval {
    #[serde(with = "crate::ratio_serde")]
    pub lower: Rational,
    #[serde(with = "crate::ratio_serde")]
    pub upper: Rational,
    pub lower_closed: bool,
    pub upper_closed: bool,
}

impl RhoInterval {
    pub fn closed(lower: Rational, upper: Rational) -> Self {
        Self { lower, upper, lower_closed: true, upper_closed: true }
    }

    /// `[lower, upper)`.
    pub fn right_open(lower: Rational, upper: Rational) -> Self {
        Self { lower, upper, lower_closed: true, upper_closed: false }
    }

    pub fn contains(&self, x: Rational) -> bool {
        let lo = if self.lower_closed { x >= self.lower } else { x > self.lower };
        let hi = if self.upper_closed { x <= self.upper } else { x < self.upper };
        lo && hi
    }

    /// Both ends multiplied by a positive factor.
    pub fn scaled(&self, c: Rational) -> Self {
        Self { lower: self.lower * c, upper: self.upper * c, ..*self }
    }
}

impl fmt::Display for RhoInterval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let l = if self.lower_closed { '[' } else { '(' };
        let r = if self.upper_closed { ']' } else { ')' };
        write!(f, "{l}{}, {}{r}", self.lower, self.upper)
    }
}

/// Admissible growth exponents for one nonlinearity of a variant on the
/// `d`-torus.
///
/// Cahn–Hilliard: `f` in `[0, 4/d]`, Lipschitz `g` so `[0, 0]`.
/// Second order: `f` in `[0,3]`, `[0,2)` or `[0,4/d]`; `f̄` and `g` in `[0, 2/d]`.
/// Swift–Hohenberg: `f` in `[0,(d+4)/d]`, `[0,2)` or `[0,8/d]`; the noise grows with half that exponent.
pub fn admissible_rho(variant: Variant, d: usize, slot: Slot) -> Result<RhoInterval, ConditionError> {
    if d == 0 {
        return Err(ConditionError::Invalid("dimension must be at least 1".into()));
    }
    let r = |p: i64, q: usize| Rational::new(p, q as i64);
    let zero = Rational::from_integer(0);
    let out = match (variant, slot) {
        (Variant::CahnHilliard, Slot::F) => RhoInterval::closed(zero, r(4, d)),
        (Variant::CahnHilliard, Slot::G) => RhoInterval::closed(zero, zero),
        (Variant::SecondOrder, Slot::F) => match d {
            1 => RhoInterval::closed(zero, r(3, 1)),
            2 => RhoInterval::right_open(zero, r(2, 1)),
            _ => RhoInterval::closed(zero, r(4, d)),
        },
        (Variant::SecondOrder, Slot::Fbar | Slot::G) => RhoInterval::closed(zero, r(2, d)),
        (Variant::SwiftHohenberg, s @ (Slot::F | Slot::G)) => {
            let full = match d {
                1..=3 => RhoInterval::closed(zero, r(d as i64 + 4, d)),
                4 => RhoInterval::right_open(zero, r(2, 1)),
                _ => RhoInterval::closed(zero, r(8, d)),
            };
            if s == Slot::G {
                full.scaled(Rational::new(1, 2))
            } else {
                full
            }
        }
        _ => return Err(ConditionError::NotParameterized { variant, slot }),
    };
    Ok(out)
}
