use rayon::prelude::*;
use serde::Serialize;

use crate::conditions::{audit_coercivity, check_quadratic_growth, AuditConfig, AuditMode, CoercivityAudit, GrowthReport};
use crate::noise::NoiseStream;
use crate::operators::EquationSpec;
use crate::solver::{simulate_path, PathStatus, SolverConfig};
use crate::spaces::SpectralField;

use super::stats::{Estimate, Proportion};
use super::VerifyError;

/// A spec together with the coercivity audit it passed. Experiments that
/// rely on the coercivity hypothesis only accept this type.
#[derive(Clone, Debug)]
pub struct AuditedSpec {
    spec: EquationSpec,
    audit: CoercivityAudit,
    growth: Option<GrowthReport>,
}

impl AuditedSpec {
    /// Runs the audit, plus the growth check in `eta_zero` mode, and refuses
    /// the equation if either fails.
    pub fn certify(spec: &EquationSpec, eta: f64, cfg: &AuditConfig) -> Result<Self, VerifyError> {
        let audit = audit_coercivity(spec, eta, cfg)?;
        if !audit.passed {
            return Err(VerifyError::Precondition(format!(
                "{} failed the {:?} coercivity audit: {}",
                spec.variant(),
                audit.mode,
                audit.verdict
            )));
        }
        let growth = if audit.mode == AuditMode::EtaZero {
            let g = check_quadratic_growth(spec, cfg)?;
            if !g.passed {
                return Err(VerifyError::Precondition(format!("{} failed the growth check: {}", spec.variant(), g.note)));
            }
            Some(g)
        } else {
            None
        };
        Ok(Self { spec: spec.clone(), audit, growth })
    }

    pub fn growth(&self) -> Option<&GrowthReport> {
        self.growth.as_ref()
    }

    pub fn spec(&self) -> &EquationSpec {
        &self.spec
    }

    pub fn audit(&self) -> &CoercivityAudit {
        &self.audit
    }

    pub(crate) fn require(&self, modes: &[AuditMode], what: &str) -> Result<(), VerifyError> {
        if modes.contains(&self.audit.mode) {
            Ok(())
        } else {
            Err(VerifyError::Precondition(format!("{what} needs an audit in mode {modes:?}, got {:?}", self.audit.mode)))
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct EnsembleConfig {
    pub paths: usize,
    pub seed: u64,
    /// Index of the first path; path `i` uses stream `(seed, offset + i)`.
    pub path_offset: u64,
}

impl EnsembleConfig {
    pub fn new(paths: usize, seed: u64) -> Self {
        Self { paths, seed, path_offset: 0 }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct PathStats {
    pub path: u64,
    pub sup_h_sq: f64,
    pub v_integral: f64,
    pub terminal_h_sq: f64,
    #[serde(flatten)]
    pub status: PathStatus,
    pub cumulative_residual: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct EnsembleResult {
    pub path_count: usize,
    #[serde(skip)]
    pub paths: Vec<PathStats>,
    /// `E sup_t ‖u‖²_H`.
    pub sup_h_sq: Estimate,
    /// `E ∫ ‖u‖²_V dt`.
    pub v_integral: Estimate,
    /// `sup_t E ‖u(t)‖²_H`, averaging over the paths alive at each time.
    pub sup_t_mean_h_sq: f64,
    #[serde(skip)]
    pub times: Vec<f64>,
    #[serde(skip)]
    pub mean_h_sq_series: Vec<f64>,
    pub halted: usize,
    pub blowup_fraction: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct TailPoint {
    pub gamma: f64,
    #[serde(flatten)]
    pub tail: Proportion,
}

impl EnsembleResult {
    /// `P(sup_t ‖u(t)‖_H ≥ γ)` on the grid.
    pub fn tail(&self, gammas: &[f64]) -> Vec<TailPoint> {
        gammas
            .iter()
            .map(|&gamma| {
                let hits = self.paths.iter().filter(|p| p.sup_h_sq.sqrt() >= gamma).count();
                TailPoint { gamma, tail: Proportion::new(hits, self.paths.len()) }
            })
            .collect()
    }

    pub fn column(&self, f: impl Fn(&PathStats) -> f64) -> Vec<f64> {
        self.paths.iter().map(f).collect()
    }

    pub fn halt_times(&self) -> Vec<f64> {
        self.paths.iter().filter_map(|p| p.status.halt_time()).collect()
    }

    /// One row per path.
    pub fn to_csv(&self) -> String {
        let mut s = String::from("path,sup_h_sq,v_integral,terminal_h_sq,status,halt_time,cumulative_residual\n");
        for p in &self.paths {
            let (name, t) = match p.status {
                PathStatus::Completed => ("completed", String::new()),
                PathStatus::BlownUp { time, .. } => ("blown_up", format!("{time:e}")),
                PathStatus::Overflow { time, .. } => ("overflow", format!("{time:e}")),
            };
            s.push_str(&format!(
                "{},{:e},{:e},{:e},{name},{t},{:e}\n",
                p.path, p.sup_h_sq, p.v_integral, p.terminal_h_sq, p.cumulative_residual
            ));
        }
        s
    }
}

const CHUNK: usize = 32;

struct ChunkOut {
    stats: Vec<PathStats>,
    sums: Vec<f64>,
    counts: Vec<usize>,
    times: Vec<f64>,
}

/// Independent paths from a common initial state, run in parallel and
/// reduced in path order.
pub fn run_ensemble(
    spec: &EquationSpec,
    u0: &SpectralField,
    cfg: &SolverConfig,
    ens: &EnsembleConfig,
) -> Result<EnsembleResult, VerifyError> {
    run_ensemble_with(spec, |_| u0.clone(), cfg, ens)
}

/// As [`run_ensemble`] with a per-path initial state.
pub fn run_ensemble_with<F>(
    spec: &EquationSpec,
    init: F,
    cfg: &SolverConfig,
    ens: &EnsembleConfig,
) -> Result<EnsembleResult, VerifyError>
where
    F: Fn(u64) -> SpectralField + Sync,
{
    if ens.paths == 0 {
        return Err(VerifyError::Invalid("ensemble needs at least one path".into()));
    }
    cfg.validate()?;
    let n_chunks = ens.paths.div_ceil(CHUNK);
    let chunks: Vec<ChunkOut> = (0..n_chunks)
        .into_par_iter()
        .map(|c| -> Result<ChunkOut, VerifyError> {
            let mut out = ChunkOut { stats: Vec::new(), sums: Vec::new(), counts: Vec::new(), times: Vec::new() };
            for i in c * CHUNK..((c + 1) * CHUNK).min(ens.paths) {
                let path = ens.path_offset + i as u64;
                let u0 = init(path);
                let tr = simulate_path(spec, &u0, cfg, &NoiseStream::new(ens.seed, path))?;
                if tr.times.len() > out.times.len() {
                    out.times = tr.times.clone();
                    out.sums.resize(tr.times.len(), 0.0);
                    out.counts.resize(tr.times.len(), 0);
                }
                for (j, h) in tr.h_norm_series.iter().enumerate() {
                    out.sums[j] += h * h;
                    out.counts[j] += 1;
                }
                let last = *tr.h_norm_series.last().expect("nonempty");
                out.stats.push(PathStats {
                    path,
                    sup_h_sq: tr.sup_h_sq(),
                    v_integral: tr.v_integral(),
                    terminal_h_sq: last * last,
                    status: tr.status,
                    cumulative_residual: tr.cumulative_residual(),
                });
            }
            Ok(out)
        })
        .collect::<Result<_, _>>()?;

    let mut paths = Vec::with_capacity(ens.paths);
    let mut times: Vec<f64> = Vec::new();
    let mut sums: Vec<f64> = Vec::new();
    let mut counts: Vec<usize> = Vec::new();
    for c in chunks {
        if c.times.len() > times.len() {
            times = c.times.clone();
            sums.resize(times.len(), 0.0);
            counts.resize(times.len(), 0);
        }
        for (j, (s, n)) in c.sums.iter().zip(&c.counts).enumerate() {
            sums[j] += s;
            counts[j] += n;
        }
        paths.extend(c.stats);
    }
    let series: Vec<f64> = sums.iter().zip(&counts).map(|(s, &n)| s / n.max(1) as f64).collect();
    let halted = paths.iter().filter(|p| p.status.halted()).count();
    let sup: Vec<f64> = paths.iter().map(|p| p.sup_h_sq).collect();
    let vint: Vec<f64> = paths.iter().map(|p| p.v_integral).collect();
    Ok(EnsembleResult {
        path_count: paths.len(),
        sup_h_sq: Estimate::of(&sup, ens.seed ^ 0x5eed),
        v_integral: Estimate::of(&vint, ens.seed ^ 0x1e57),
        sup_t_mean_h_sq: series.iter().cloned().fold(0.0, f64::max),
        blowup_fraction: halted as f64 / paths.len() as f64,
        halted,
        times,
        mean_h_sq_series: series,
        paths,
    })
}
