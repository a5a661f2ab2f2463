use serde::Serialize;

use crate::noise::{sample_increments, NoiseStream, WienerIncrement};
use crate::operators::{coercivity_terms, EquationSpec, OperatorError};
use crate::spaces::{SpaceError, SpectralField};

use super::{step, SolverConfig, SolverError};

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum PathStatus {
    Completed,
    /// A threshold was crossed after `step` steps.
    BlownUp { step: usize, time: f64 },
    /// The state stopped being finite at `step`.
    Overflow { step: usize, time: f64 },
}

impl PathStatus {
    pub fn is_completed(&self) -> bool {
        matches!(self, PathStatus::Completed)
    }

    /// Blown up or overflowed.
    pub fn halted(&self) -> bool {
        !self.is_completed()
    }

    pub fn halt_time(&self) -> Option<f64> {
        match *self {
            PathStatus::Completed => None,
            PathStatus::BlownUp { time, .. } | PathStatus::Overflow { time, .. } => Some(time),
        }
    }
}

/// Itô energy balance over one step.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct LedgerRow {
    pub time: f64,
    pub dt: f64,
    /// `½‖u_{n+1}‖²_H − ½‖u_n‖²_H`.
    pub delta_energy: f64,
    /// `𝓔(u_n) dt` with `𝓔 = ⟨u,A(u)⟩ − ½|||B(u)|||²_H`.
    pub dissipation: f64,
    /// `(B(u_n)^* u_n, dW)`.
    pub martingale: f64,
    /// `Δ + 𝓔 dt − martingale`.
    pub residual: f64,
    /// `⟨u,A(u)⟩ − (½+η)|||B(u)|||²_H` at `u_n`.
    pub coercive: f64,
}

pub fn energy_ledger_step(
    spec: &EquationSpec,
    u: &SpectralField,
    next: &SpectralField,
    t: f64,
    dw: &WienerIncrement,
    eta: f64,
) -> Result<LedgerRow, OperatorError> {
    let triple = spec.triple();
    let terms = coercivity_terms(spec, t, u)?;
    let delta_energy = 0.5 * (triple.h_norm_sq(next) - triple.h_norm_sq(u));
    let dissipation = (terms.pairing - 0.5 * terms.hs_sq) * dw.dt;
    let martingale = if spec.noise().is_silent() {
        0.0
    } else {
        crate::noise::diffusion_adjoint(spec, t, u)?.iter().zip(&dw.values).map(|(a, w)| a * w).sum()
    };
    Ok(LedgerRow {
        time: t,
        dt: dw.dt,
        delta_energy,
        dissipation,
        martingale,
        residual: delta_energy + dissipation - martingale,
        coercive: terms.functional(eta),
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct Snapshot {
    pub step: usize,
    pub time: f64,
    #[serde(skip)]
    pub field: SpectralField,
}

/// One sample path with the quantities of the blow-up criterion.
#[derive(Clone, Debug)]
pub struct Trajectory {
    pub times: Vec<f64>,
    /// `‖u(t_i)‖_H`.
    pub h_norm_series: Vec<f64>,
    /// Trapezoidal `∫_0^{t_i} ‖u‖²_V dt`.
    pub v_energy_running: Vec<f64>,
    pub snapshots: Vec<Snapshot>,
    pub ledger: Vec<LedgerRow>,
    pub status: PathStatus,
    /// Last finite state.
    pub final_state: SpectralField,
}

impl Trajectory {
    pub fn final_time(&self) -> f64 {
        *self.times.last().expect("trajectory holds the initial time")
    }

    /// `sup_i ‖u(t_i)‖²_H`.
    pub fn sup_h_sq(&self) -> f64 {
        self.h_norm_series.iter().map(|h| h * h).fold(0.0, f64::max)
    }

    pub fn v_integral(&self) -> f64 {
        *self.v_energy_running.last().expect("trajectory holds the initial time")
    }

    pub fn cumulative_residual(&self) -> f64 {
        self.ledger.iter().map(|r| r.residual).sum()
    }
}

/// Runs one path with increments drawn from `stream`.
pub fn simulate_path(
    spec: &EquationSpec,
    u0: &SpectralField,
    cfg: &SolverConfig,
    stream: &NoiseStream,
) -> Result<Trajectory, SolverError> {
    let m = spec.noise().mode_count;
    simulate_with(spec, u0, cfg, |k, dt| Ok(sample_increments(&stream.at(k as u64), dt, m)?))
}

/// Runs one path with increments supplied by `increment(step, dt)`.
///
/// A `record_stride` of 0 keeps only the first and last states.
pub fn simulate_with<F>(
    spec: &EquationSpec,
    u0: &SpectralField,
    cfg: &SolverConfig,
    mut increment: F,
) -> Result<Trajectory, SolverError>
where
    F: FnMut(usize, f64) -> Result<WienerIncrement, SolverError>,
{
    cfg.validate()?;
    if u0.grid() != spec.grid() {
        return Err(SolverError::Operator(OperatorError::Space(SpaceError::GridMismatch)));
    }
    let triple = spec.triple();
    let sizes = cfg.step_sizes();
    let mut u = u0.clone();
    let mut t = 0.0;
    let mut x_prev = triple.v_norm_sq(&u);
    let mut integral = 0.0;
    let mut traj = Trajectory {
        times: vec![0.0],
        h_norm_series: vec![triple.h_norm(&u)],
        v_energy_running: vec![0.0],
        snapshots: vec![Snapshot { step: 0, time: 0.0, field: u.clone() }],
        ledger: Vec::with_capacity(if cfg.ledger { sizes.len() } else { 0 }),
        status: PathStatus::Completed,
        final_state: u0.clone(),
    };
    for (k, &dt) in sizes.iter().enumerate() {
        let dw = increment(k, dt)?;
        let next = match step(spec, &u, t, &dw, cfg.scheme) {
            Ok(v) => v,
            Err(e) if e.is_overflow() => {
                traj.status = PathStatus::Overflow { step: k + 1, time: t + dt };
                break;
            }
            Err(e) => return Err(e),
        };
        if cfg.ledger {
            match energy_ledger_step(spec, &u, &next, t, &dw, cfg.eta) {
                Ok(row) => traj.ledger.push(row),
                Err(e) if e.is_overflow() => {
                    traj.status = PathStatus::Overflow { step: k + 1, time: t + dt };
                    break;
                }
                Err(e) => return Err(e.into()),
            }
        }
        t = if k + 1 == sizes.len() { cfg.horizon } else { t + dt };
        let h_sq = triple.h_norm_sq(&next);
        let x = triple.v_norm_sq(&next);
        integral += 0.5 * dt * (x_prev + x);
        x_prev = x;
        u = next;
        traj.times.push(t);
        traj.h_norm_series.push(h_sq.sqrt());
        traj.v_energy_running.push(integral);
        let crossed = h_sq > cfg.blowup_h_threshold || integral > cfg.blowup_v_integral_threshold;
        let last = crossed || k + 1 == sizes.len();
        if last || (cfg.record_stride > 0 && (k + 1) % cfg.record_stride == 0) {
            traj.snapshots.push(Snapshot { step: k + 1, time: t, field: u.clone() });
        }
        if crossed {
            traj.status = PathStatus::BlownUp { step: k + 1, time: t };
            break;
        }
    }
    traj.final_state = u;
    Ok(traj)
}
