use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, Normal};

use crate::noise::NoiseStream;

use super::stats::{mean, stderr, Proportion};
use super::{Verdict, VerifyError};

/// `(4C/γ) e^{4CR} (E X(0) + η)`, evaluated in log space.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct GronwallBound {
    /// `+∞` when `overflow` is set.
    pub value: f64,
    pub log_value: f64,
    pub overflow: bool,
}

pub fn gronwall_bound(c: f64, eta: f64, r: f64, gamma: f64, ex0: f64) -> Result<GronwallBound, VerifyError> {
    if !(c >= 1.0 && c.is_finite()) {
        return Err(VerifyError::Invalid(format!("C = {c} must be at least 1")));
    }
    if !(eta >= 0.0 && eta.is_finite()) {
        return Err(VerifyError::Invalid(format!("eta = {eta} must be nonnegative")));
    }
    if !(gamma > 0.0 && gamma.is_finite()) || !(r >= 0.0 && r.is_finite()) || !(ex0 >= 0.0 && ex0.is_finite()) {
        return Err(VerifyError::Invalid(format!("bound needs gamma > 0, R >= 0, E X(0) >= 0 (got {gamma}, {r}, {ex0})")));
    }
    let base = ex0 + eta;
    if base == 0.0 {
        return Ok(GronwallBound { value: 0.0, log_value: f64::NEG_INFINITY, overflow: false });
    }
    let log_value = (4.0 * c).ln() - gamma.ln() + 4.0 * c * r + base.ln();
    let overflow = log_value >= f64::MAX.ln();
    let value = if overflow { f64::INFINITY } else { log_value.exp() };
    Ok(GronwallBound { value, log_value, overflow })
}

/// Generators of `(X, Y, f)` with `Y ≡ 0` and `f ≡ rate`, stopped at the
/// horizon. Each satisfies the integrated comparison hypothesis with `C = 1`:
/// `E X(Λ) + η = (E X(λ) + η) e^a` with `a = rate (Λ − λ)`, and
/// `e^a ≤ 1 + a e^a`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case", deny_unknown_fields)]
pub enum GronwallFamily {
    /// `X' = rate · X`.
    Deterministic { x0: f64, rate: f64 },
    /// `dX = rate X dt + σ X dW`, sampled exactly.
    Lognormal { x0: f64, rate: f64, sigma: f64 },
    /// `X(0) = 0` with `X + η` a geometric Brownian motion from `η`.
    Inhomogeneous { rate: f64, sigma: f64 },
}

impl GronwallFamily {
    fn rate(&self) -> f64 {
        match *self {
            GronwallFamily::Deterministic { rate, .. }
            | GronwallFamily::Lognormal { rate, .. }
            | GronwallFamily::Inhomogeneous { rate, .. } => rate,
        }
    }

    fn sigma(&self) -> f64 {
        match *self {
            GronwallFamily::Deterministic { .. } => 0.0,
            GronwallFamily::Lognormal { sigma, .. } | GronwallFamily::Inhomogeneous { sigma, .. } => sigma,
        }
    }

    /// `X(0)` and the shift `s` with `X + s` geometric.
    fn start(&self, eta: f64) -> (f64, f64) {
        match *self {
            GronwallFamily::Deterministic { x0, .. } | GronwallFamily::Lognormal { x0, .. } => (x0, 0.0),
            GronwallFamily::Inhomogeneous { .. } => (0.0, eta),
        }
    }
}

fn default_steps() -> usize {
    64
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GronwallInstance {
    pub family: GronwallFamily,
    /// `C ≥ 1`.
    pub c: f64,
    /// `η ≥ 0`.
    pub eta: f64,
    /// `τ`, reached after `steps` grid steps.
    pub horizon: f64,
    #[serde(default = "default_steps")]
    pub steps: usize,
    pub gammas: Vec<f64>,
    pub rs: Vec<f64>,
    /// Grid indices `(λ, Λ)` of the spot checks; quarter points when empty.
    #[serde(default)]
    pub spot_pairs: Vec<(usize, usize)>,
    /// Slack `(bound + P(∫f > R)) / p` demanded at informative points.
    #[serde(default)]
    pub required_slack: Option<f64>,
}

impl GronwallInstance {
    pub fn validate(&self) -> Result<(), VerifyError> {
        if !(self.c >= 1.0 && self.c.is_finite()) {
            return Err(VerifyError::Invalid(format!("C = {} must be at least 1", self.c)));
        }
        if !(self.eta >= 0.0 && self.eta.is_finite()) {
            return Err(VerifyError::Invalid(format!("eta = {} must be nonnegative", self.eta)));
        }
        if !(self.horizon > 0.0 && self.horizon.is_finite()) || self.steps == 0 {
            return Err(VerifyError::Invalid("horizon and step count must be positive".into()));
        }
        let (x0, shift) = self.family.start(self.eta);
        if !(x0 >= 0.0 && x0.is_finite()) || !self.family.rate().is_finite() || !(self.family.sigma() >= 0.0) {
            return Err(VerifyError::Invalid("family needs X(0) >= 0, finite rate and sigma >= 0".into()));
        }
        if matches!(self.family, GronwallFamily::Inhomogeneous { .. }) && shift == 0.0 {
            return Err(VerifyError::Invalid("inhomogeneous family needs eta > 0".into()));
        }
        if self.gammas.is_empty() || self.rs.is_empty() {
            return Err(VerifyError::Invalid("gamma and R grids must be nonempty".into()));
        }
        if self.spot_pairs.iter().any(|&(a, b)| a > b || b > self.steps) {
            return Err(VerifyError::Invalid("spot pairs need lambda <= Lambda <= steps".into()));
        }
        Ok(())
    }

    fn pairs(&self) -> Vec<(usize, usize)> {
        if !self.spot_pairs.is_empty() {
            return self.spot_pairs.clone();
        }
        let q: Vec<usize> = (0..=4).map(|i| i * self.steps / 4).collect();
        let mut out = Vec::new();
        for i in 0..q.len() {
            for j in i + 1..q.len() {
                out.push((q[i], q[j]));
            }
        }
        out
    }

    /// Path values `X(t_0..=t_steps)`.
    fn path(&self, seed: u64, index: u64) -> Vec<f64> {
        let h = self.horizon / self.steps as f64;
        let (x0, shift) = self.family.start(self.eta);
        let (rate, sigma) = (self.family.rate(), self.family.sigma());
        let z = if sigma > 0.0 { NoiseStream::new(seed, index).normals(0, self.steps) } else { vec![0.0; self.steps] };
        let mut out = Vec::with_capacity(self.steps + 1);
        let mut g = x0 + shift;
        out.push(x0);
        for n in 0..self.steps {
            g *= ((rate - 0.5 * sigma * sigma) * h + sigma * h.sqrt() * z[n]).exp();
            out.push(g - shift);
        }
        if sigma == 0.0 {
            for (n, v) in out.iter_mut().enumerate() {
                *v = (x0 + shift) * (rate * n as f64 * h).exp() - shift;
            }
        }
        out
    }

    /// Closed-form `P(X(τ) ≥ γ)` of the geometric families.
    fn oracle(&self, gamma: f64) -> Option<f64> {
        let sigma = self.family.sigma();
        if sigma == 0.0 {
            return None;
        }
        let (x0, shift) = self.family.start(self.eta);
        let t = self.horizon;
        let m = (x0 + shift).ln() + (self.family.rate() - 0.5 * sigma * sigma) * t;
        let n = Normal::new(m, sigma * t.sqrt()).ok()?;
        Some(1.0 - n.cdf((gamma + shift).ln()))
    }
}

#[derive(Clone, Copy, Debug, Serialize)]
pub struct SpotCheck {
    pub lambda: f64,
    pub big_lambda: f64,
    /// Mean of `X(Λ) − C(X(λ)+η) − (X(Λ)+η)∫_λ^Λ f`.
    pub mean_defect: f64,
    pub stderr: f64,
    pub passed: bool,
}

#[derive(Clone, Copy, Debug, Serialize)]
pub struct GronwallRow {
    pub gamma: f64,
    pub r: f64,
    pub bound: GronwallBound,
    /// `P(∫f > R)`.
    pub f_exceeds: f64,
    /// `P(X(τ) + ∫Y ≥ γ)`.
    pub empirical: Proportion,
    pub rhs: f64,
    pub passed: bool,
    /// The right side is below 1.
    pub informative: bool,
    /// `rhs / max(p̂, 3/n)` on informative points; `3/n` bounds a zero count at 95%.
    pub slack: Option<f64>,
    pub oracle: Option<f64>,
    pub oracle_agrees: Option<bool>,
}

#[derive(Clone, Debug, Serialize)]
pub struct GronwallReport {
    pub instance: GronwallInstance,
    pub paths: usize,
    pub spot_checks: Vec<SpotCheck>,
    pub rows: Vec<GronwallRow>,
    pub bound_passed: bool,
    pub min_slack: Option<f64>,
    pub slack_passed: bool,
    pub oracle_passed: Option<bool>,
    /// `X(τ) ≤ 4C e^{4C∫f} X(0)` on every path of the deterministic family.
    pub corollary: Option<bool>,
    pub verdict: Verdict,
}

/// Spot-checks the hypothesis on `(λ, Λ)` pairs, then tests the tail bound
/// on every `(γ, R)` pair. A failed spot check refuses the instance.
pub fn gronwall_harness(instance: &GronwallInstance, paths: usize, seed: u64) -> Result<GronwallReport, VerifyError> {
    instance.validate()?;
    if paths < 2 {
        return Err(VerifyError::Invalid("harness needs at least two paths".into()));
    }
    let h = instance.horizon / instance.steps as f64;
    let rate = instance.family.rate();
    let (c, eta) = (instance.c, instance.eta);
    let pairs = instance.pairs();
    let samples: Vec<(f64, Vec<f64>)> = (0..paths as u64)
        .into_par_iter()
        .map(|i| {
            let x = instance.path(seed, i);
            let defects = pairs
                .iter()
                .map(|&(a, b)| {
                    let f_int = rate * (b - a) as f64 * h;
                    x[b] - c * (x[a] + eta) - (x[b] + eta) * f_int
                })
                .collect();
            (x[instance.steps], defects)
        })
        .collect();

    let spot_checks: Vec<SpotCheck> = pairs
        .iter()
        .enumerate()
        .map(|(j, &(a, b))| {
            let d: Vec<f64> = samples.iter().map(|s| s.1[j]).collect();
            let (m, se) = (mean(&d), stderr(&d));
            SpotCheck { lambda: a as f64 * h, big_lambda: b as f64 * h, mean_defect: m, stderr: se, passed: m <= 3.0 * se }
        })
        .collect();
    if let Some(bad) = spot_checks.iter().find(|s| !s.passed) {
        return Err(VerifyError::Precondition(format!(
            "hypothesis spot check failed at (lambda, Lambda) = ({}, {}): mean defect {:e} > 3 stderr {:e}",
            bad.lambda, bad.big_lambda, bad.mean_defect, bad.stderr
        )));
    }

    let (x0, _) = instance.family.start(eta);
    let f_total = rate * instance.horizon;
    let terminal: Vec<f64> = samples.iter().map(|s| s.0).collect();
    let mut rows = Vec::with_capacity(instance.gammas.len() * instance.rs.len());
    for &gamma in &instance.gammas {
        let hits = terminal.iter().filter(|&&x| x >= gamma).count();
        let empirical = Proportion::new(hits, paths);
        let oracle = instance.oracle(gamma);
        let oracle_agrees = oracle.map(|p| {
            let se = (p * (1.0 - p) / paths as f64).sqrt();
            (empirical.p - p).abs() <= 3.0 * se + 1.0 / paths as f64
        });
        for &r in &instance.rs {
            let bound = gronwall_bound(c, eta, r, gamma, x0)?;
            let f_exceeds = if f_total > r { 1.0 } else { 0.0 };
            let rhs = bound.value + f_exceeds;
            let informative = rhs < 1.0;
            rows.push(GronwallRow {
                gamma,
                r,
                bound,
                f_exceeds,
                empirical,
                rhs,
                passed: empirical.p <= rhs + 3.0 * empirical.stderr,
                informative,
                slack: informative.then(|| rhs / empirical.p.max(3.0 / paths as f64)),
                oracle,
                oracle_agrees,
            });
        }
    }
    let bound_passed = rows.iter().all(|r| r.passed);
    let min_slack = rows.iter().filter_map(|r| r.slack).reduce(f64::min);
    let slack_passed = match (instance.required_slack, min_slack) {
        (Some(req), Some(s)) => s >= req,
        (Some(_), None) => false,
        (None, _) => true,
    };
    let oracle_passed = if instance.family.sigma() > 0.0 {
        Some(rows.iter().all(|r| r.oracle_agrees.unwrap_or(true)))
    } else {
        None
    };
    let corollary = matches!(instance.family, GronwallFamily::Deterministic { .. })
        .then(|| terminal.iter().all(|&x| x <= 4.0 * c * (4.0 * c * f_total).exp() * x0));
    let ok = bound_passed && slack_passed && oracle_passed.unwrap_or(true) && corollary.unwrap_or(true);
    Ok(GronwallReport {
        instance: instance.clone(),
        paths,
        spot_checks,
        rows,
        bound_passed,
        min_slack,
        slack_passed,
        oracle_passed,
        corollary,
        verdict: Verdict::from_bool(ok),
    })
}
