//! IMEX Euler–Maruyama on the spectral Galerkin space, with the per-step
//! Itô energy ledger and a threshold blow-up monitor.

mod export;
mod path;

pub use export::{read_snapshots, write_norms_csv, write_snapshots};
pub use path::{energy_ledger_step, simulate_path, simulate_with, LedgerRow, PathStatus, Snapshot, Trajectory};

use serde::{Deserialize, Serialize};

use crate::noise::{apply_diffusion, NoiseError, WienerIncrement};
use crate::operators::{drift, imex_split, EquationSpec, OperatorError};
use crate::spaces::SpectralField;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Scheme {
    ImexEuler,
    ExplicitEuler,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SolverConfig {
    pub dt: f64,
    /// Final time `T`; the last step is shortened to land on it.
    pub horizon: f64,
    pub scheme: Scheme,
    /// Halt once `‖u‖²_H` exceeds this.
    pub blowup_h_threshold: f64,
    /// Halt once `∫‖u‖²_V dt` exceeds this.
    pub blowup_v_integral_threshold: f64,
    /// Keep every `record_stride`-th state, plus the last.
    pub record_stride: usize,
    /// Record the energy ledger.
    pub ledger: bool,
    /// `η` of the recorded coercivity functional.
    pub eta: f64,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            dt: 1e-3,
            horizon: 1.0,
            scheme: Scheme::ImexEuler,
            blowup_h_threshold: 1e6,
            blowup_v_integral_threshold: 1e12,
            record_stride: 0,
            ledger: false,
            eta: 0.0,
        }
    }
}

impl SolverConfig {
    pub fn new(dt: f64, horizon: f64) -> Self {
        Self { dt, horizon, ..Self::default() }
    }

    pub fn validate(&self) -> Result<(), SolverError> {
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return Err(SolverError::Config(format!("dt = {} must be positive", self.dt)));
        }
        if !(self.horizon.is_finite() && self.dt <= self.horizon * (1.0 + 1e-12)) {
            return Err(SolverError::Config(format!("dt = {} exceeds the horizon {}", self.dt, self.horizon)));
        }
        if !(self.blowup_h_threshold > 0.0 && self.blowup_v_integral_threshold > 0.0) {
            return Err(SolverError::Config("blow-up thresholds must be positive".into()));
        }
        if !(self.eta >= 0.0 && self.eta.is_finite()) {
            return Err(SolverError::Config(format!("eta = {} must be nonnegative", self.eta)));
        }
        Ok(())
    }

    /// Step sizes covering `[0, T]`.
    pub fn step_sizes(&self) -> Vec<f64> {
        let n = ((self.horizon / self.dt) - 1e-9).ceil().max(1.0) as usize;
        let mut out = vec![self.dt; n];
        let last = self.horizon - (n - 1) as f64 * self.dt;
        out[n - 1] = last.clamp(f64::MIN_POSITIVE, self.dt);
        out
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum SolverError {
    #[error("solver configuration: {0}")]
    Config(String),
    #[error("non-finite state")]
    Overflow,
    #[error(transparent)]
    Operator(#[from] OperatorError),
    #[error(transparent)]
    Noise(#[from] NoiseError),
}

impl SolverError {
    pub fn is_overflow(&self) -> bool {
        match self {
            SolverError::Overflow => true,
            SolverError::Operator(e) => e.is_overflow(),
            SolverError::Noise(e) => OperatorError::Noise(e.clone()).is_overflow(),
            SolverError::Config(_) => false,
        }
    }
}

/// One step of length `dw.dt` from `(t, u)`.
///
/// `imex_euler` solves `(I + dt L) u' = u + dt N(u) + B(u) dW` mode-wise;
/// `explicit_euler` uses `u' = u + dt (−Lu + N(u)) + B(u) dW`.
pub fn step(
    spec: &EquationSpec,
    u: &SpectralField,
    t: f64,
    dw: &WienerIncrement,
    scheme: Scheme,
) -> Result<SpectralField, SolverError> {
    if !u.is_finite() {
        return Err(SolverError::Overflow);
    }
    let dt = dw.dt;
    let mut next = match scheme {
        Scheme::ImexEuler => {
            let split = imex_split(spec, t, u)?;
            let mut rhs = u.clone();
            rhs.axpy(dt, &split.remainder).map_err(OperatorError::from)?;
            rhs.axpy(1.0, &apply_diffusion(spec, t, u, dw)?).map_err(OperatorError::from)?;
            let len = u.grid().len();
            let sym = &split.symbol;
            if sym.iter().any(|&s| 1.0 + dt * s <= 0.0) {
                return Err(SolverError::Config("implicit multiplier 1 + dt L is not positive".into()));
            }
            rhs.multiply(|i| 1.0 / (1.0 + dt * sym[i % len]))
        }
        Scheme::ExplicitEuler => {
            let mut next = u.clone();
            next.axpy(dt, &drift(spec, t, u)?).map_err(OperatorError::from)?;
            next.axpy(1.0, &apply_diffusion(spec, t, u, dw)?).map_err(OperatorError::from)?;
            next
        }
    };
    if !next.is_finite() {
        return Err(SolverError::Overflow);
    }
    next.symmetrize();
    Ok(next)
}

#[cfg(test)]
mod tests;
