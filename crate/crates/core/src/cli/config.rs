use std::path::PathBuf;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::conditions::AuditConfig;
use crate::noise::{NoiseSpec, Transport};
use crate::operators::{helmholtz_project, DeclaredPair, Diffusivity, Equation, EquationSpec, TamingFunction, Variant};
use crate::solver::SolverConfig;
use crate::spaces::{FourierTerm, Polynomial, SpectralField, WaveGrid};
use crate::verify::GronwallInstance;

use super::CliError;

/// One run: equation, grid, noise, solver, experiment and output settings.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default)]
    pub seed: u64,
    /// Output directory, relative to the working directory.
    #[serde(default)]
    pub out: Option<PathBuf>,
    pub grid: GridSection,
    pub equation: EquationSection,
    /// Declared `(ρ, β)` pairs; variant defaults when absent.
    #[serde(default)]
    pub params: Option<Vec<DeclaredPair>>,
    pub noise: NoiseSection,
    #[serde(default)]
    pub initial: InitialSection,
    #[serde(default)]
    pub solver: SolverConfig,
    #[serde(default)]
    pub conditions: ConditionsSection,
    #[serde(default)]
    pub simulate: SimulateSection,
    #[serde(default)]
    pub experiment: Option<ExperimentSection>,
    #[serde(default)]
    pub gronwall: Option<GronwallSection>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSection {
    pub dimension: usize,
    pub modes: usize,
}

fn allen_cahn_f() -> Vec<f64> {
    vec![0.0, 1.0, 0.0, -1.0]
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(tag = "variant", rename_all = "snake_case", deny_unknown_fields)]
pub enum EquationSection {
    /// `f` as polynomial coefficients, lowest degree first.
    CahnHilliard { f: Vec<f64> },
    TamedNs { taming_level: f64 },
    SecondOrder {
        /// Row-major `d × d` diffusion matrix.
        a: Vec<f64>,
        #[serde(default)]
        f: Vec<f64>,
        #[serde(default)]
        flux_direction: Option<Vec<f64>>,
        #[serde(default)]
        flux: Vec<f64>,
    },
    AllenCahn {
        #[serde(default = "allen_cahn_f")]
        f: Vec<f64>,
    },
    QuasiLinear1d {
        diffusivity: Diffusivity,
        #[serde(default)]
        f: Vec<f64>,
    },
    SwiftHohenberg { f: Vec<f64> },
}

impl EquationSection {
    pub fn variant(&self) -> Variant {
        match self {
            EquationSection::CahnHilliard { .. } => Variant::CahnHilliard,
            EquationSection::TamedNs { .. } => Variant::TamedNs,
            EquationSection::SecondOrder { .. } => Variant::SecondOrder,
            EquationSection::AllenCahn { .. } => Variant::AllenCahn,
            EquationSection::QuasiLinear1d { .. } => Variant::QuasiLinear1d,
            EquationSection::SwiftHohenberg { .. } => Variant::SwiftHohenberg,
        }
    }

    fn build(&self, d: usize) -> Result<Equation, CliError> {
        let p = |c: &Vec<f64>| Polynomial::new(c.clone());
        Ok(match self {
            EquationSection::CahnHilliard { f } => Equation::CahnHilliard { f: p(f) },
            EquationSection::TamedNs { taming_level } => Equation::TamedNs {
                taming: TamingFunction::new(*taming_level).map_err(|e| CliError::Config(format!("equation.taming_level: {e}")))?,
            },
            EquationSection::SecondOrder { a, f, flux_direction, flux } => Equation::SecondOrder {
                a: a.clone(),
                f: p(f),
                flux_direction: flux_direction.clone().unwrap_or_else(|| vec![0.0; d]),
                flux: p(flux),
            },
            EquationSection::AllenCahn { f } => Equation::AllenCahn { f: p(f) },
            EquationSection::QuasiLinear1d { diffusivity, f } => Equation::QuasiLinear1d { a: *diffusivity, f: p(f) },
            EquationSection::SwiftHohenberg { f } => Equation::SwiftHohenberg { f: p(f) },
        })
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AdditiveSection {
    pub mode: usize,
    pub terms: Vec<FourierTerm>,
}

/// Noise modes `(b_n·∇)u + γ_n p(u) + a_n`.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NoiseSection {
    pub modes: usize,
    /// Explicit weights `γ_n`.
    #[serde(default)]
    pub gamma: Option<Vec<f64>>,
    /// Harmonic weights `γ_n ∝ 1/n` with this `Σγ_n²`.
    #[serde(default)]
    pub gamma_norm_sq: Option<f64>,
    /// Multiplicative profile `p`, lowest degree first.
    #[serde(default)]
    pub profile: Vec<f64>,
    /// Constant transport vectors for the first modes.
    #[serde(default)]
    pub transport: Vec<Vec<f64>>,
    #[serde(default)]
    pub additive: Vec<AdditiveSection>,
}

impl NoiseSection {
    fn build(&self, grid: &WaveGrid) -> Result<NoiseSpec, CliError> {
        let bad = |m: String| CliError::Config(format!("noise: {m}"));
        let m = self.modes;
        if m == 0 {
            return Err(bad("modes must be at least 1".into()));
        }
        let mut spec = NoiseSpec::silent(m);
        spec.gamma = match (&self.gamma, self.gamma_norm_sq) {
            (Some(_), Some(_)) => return Err(bad("give either gamma or gamma_norm_sq, not both".into())),
            (Some(g), None) if g.len() != m => return Err(bad(format!("gamma has {} entries, modes = {m}", g.len()))),
            (Some(g), None) => g.clone(),
            (None, Some(s)) if !(s >= 0.0 && s.is_finite()) => return Err(bad(format!("gamma_norm_sq = {s} must be nonnegative"))),
            (None, Some(s)) => NoiseSpec::harmonic_gamma(m, s),
            (None, None) => vec![0.0; m],
        };
        spec.profile = Polynomial::new(self.profile.clone());
        if self.transport.len() > m {
            return Err(bad(format!("{} transport vectors for {m} modes", self.transport.len())));
        }
        for (n, b) in self.transport.iter().enumerate() {
            if b.len() != grid.dimension() {
                return Err(bad(format!("transport[{n}] has length {}, dimension is {}", b.len(), grid.dimension())));
            }
            spec.transport[n] = Transport::Constant(b.clone());
        }
        for a in &self.additive {
            if a.mode >= m {
                return Err(bad(format!("additive mode {} out of range 0..{m}", a.mode)));
            }
            let f = SpectralField::from_terms(grid, &a.terms).map_err(|e| bad(format!("additive mode {}: {e}", a.mode)))?;
            spec.additive[a.mode] = Some(f);
        }
        Ok(spec)
    }
}

#[derive(Clone, Debug, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RandomInit {
    pub seed: u64,
    pub cutoff: usize,
    #[serde(default)]
    pub decay: f64,
    /// Target `‖u₀‖_H`.
    pub amplitude: f64,
}

/// Initial state as the sum of its parts; zero when empty.
#[derive(Clone, Debug, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InitialSection {
    #[serde(default)]
    pub constant: Option<Vec<f64>>,
    #[serde(default)]
    pub terms: Vec<FourierTerm>,
    #[serde(default)]
    pub random: Option<RandomInit>,
}

impl InitialSection {
    pub fn build(&self, spec: &EquationSpec) -> Result<SpectralField, CliError> {
        let bad = |m: String| CliError::Config(format!("initial: {m}"));
        let g = spec.grid();
        let mut u = SpectralField::from_terms(g, &self.terms).map_err(|e| bad(e.to_string()))?;
        if let Some(c) = &self.constant {
            let k = SpectralField::constant(g, c).map_err(|e| bad(e.to_string()))?;
            u.axpy(1.0, &k).map_err(|e| bad(e.to_string()))?;
        }
        if let Some(r) = &self.random {
            let mut rng = ChaCha8Rng::seed_from_u64(r.seed);
            let mut f = SpectralField::random(g, &mut rng, r.cutoff, r.decay);
            if spec.variant() == Variant::TamedNs {
                f = helmholtz_project(&f).map_err(|e| bad(e.to_string()))?;
            }
            let n = spec.triple().h_norm(&f);
            if n > 0.0 {
                u.axpy(r.amplitude / n, &f).map_err(|e| bad(e.to_string()))?;
            }
        }
        if spec.variant() == Variant::TamedNs {
            u = helmholtz_project(&u).map_err(|e| bad(e.to_string()))?;
        }
        Ok(u)
    }
}

fn default_eta() -> f64 {
    1e-3
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConditionsSection {
    #[serde(default = "default_eta")]
    pub eta: f64,
    #[serde(default)]
    pub audit: AuditConfig,
}

impl Default for ConditionsSection {
    fn default() -> Self {
        Self { eta: default_eta(), audit: AuditConfig::default() }
    }
}

fn one() -> usize {
    1
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimulateSection {
    #[serde(default = "one")]
    pub paths: usize,
    /// Write the binary snapshot dump of the first path.
    #[serde(default = "yes")]
    pub snapshots: bool,
}

fn yes() -> bool {
    true
}

impl Default for SimulateSection {
    fn default() -> Self {
        Self { paths: 1, snapshots: true }
    }
}

fn default_min_exceedances() -> usize {
    10
}
fn default_min_ratio() -> f64 {
    1.5
}
fn default_floor_factor() -> f64 {
    10.0
}
fn default_refinement_tolerance() -> f64 {
    0.2
}
fn default_blowup_tolerance() -> f64 {
    0.1
}

/// Expected fate of every path in a blow-up experiment.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Expect {
    BlowUp,
    Complete,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum ExperimentSection {
    Apriori {
        scales: Vec<f64>,
        paths: usize,
    },
    Tail {
        gammas: Vec<f64>,
        paths: usize,
        #[serde(default = "default_min_exceedances")]
        min_exceedances: usize,
    },
    Continuity {
        /// `δ_n = 2^{−n}` for `n = 0..=levels` and `δ = 0`, unless `deltas` is given.
        #[serde(default)]
        levels: Option<u32>,
        #[serde(default)]
        deltas: Option<Vec<f64>>,
        paths: usize,
        /// Perturbation direction; the initial state when empty.
        #[serde(default)]
        direction: Vec<FourierTerm>,
        #[serde(default = "default_min_ratio")]
        min_ratio: f64,
        #[serde(default = "default_floor_factor")]
        floor_factor: f64,
    },
    Ledger {
        paths: usize,
    },
    Refinement {
        paths: usize,
        #[serde(default = "default_refinement_tolerance")]
        tolerance: f64,
    },
    Blowup {
        paths: usize,
        expect: Expect,
        /// Step sizes of the single-path convergence study.
        #[serde(default)]
        dts: Vec<f64>,
        /// Reference blow-up time for the convergence study.
        #[serde(default)]
        oracle: Option<f64>,
        #[serde(default = "default_blowup_tolerance")]
        tolerance: f64,
    },
}

impl ExperimentSection {
    pub fn name(&self) -> &'static str {
        match self {
            ExperimentSection::Apriori { .. } => "apriori",
            ExperimentSection::Tail { .. } => "tail",
            ExperimentSection::Continuity { .. } => "continuity",
            ExperimentSection::Ledger { .. } => "ledger",
            ExperimentSection::Refinement { .. } => "refinement",
            ExperimentSection::Blowup { .. } => "blowup",
        }
    }

    pub fn paths_mut(&mut self) -> &mut usize {
        match self {
            ExperimentSection::Apriori { paths, .. }
            | ExperimentSection::Tail { paths, .. }
            | ExperimentSection::Continuity { paths, .. }
            | ExperimentSection::Ledger { paths }
            | ExperimentSection::Refinement { paths, .. }
            | ExperimentSection::Blowup { paths, .. } => paths,
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GronwallSection {
    pub paths: usize,
    pub instance: GronwallInstance,
}

impl RunConfig {
    /// Parses and schema-checks; errors carry the line and field.
    pub fn from_toml(text: &str) -> Result<Self, CliError> {
        toml::from_str(text).map_err(|e| CliError::Config(e.to_string()))
    }

    /// Builds the validated spec and the initial state.
    pub fn build(&self) -> Result<(EquationSpec, SpectralField), CliError> {
        let variant = self.equation.variant();
        let d = self.grid.dimension;
        let scalar = WaveGrid::torus(d, self.grid.modes).map_err(|e| CliError::Config(format!("grid: {e}")))?;
        let grid = if variant == Variant::TamedNs { scalar.with_components(d) } else { scalar };
        let noise = self.noise.build(&grid)?;
        let eq = self.equation.build(d)?;
        let spec = EquationSpec::new(eq, grid, noise, self.params.clone())
            .map_err(|e| CliError::Config(format!("equation ({variant}): {e}")))?;
        let u0 = self.initial.build(&spec)?;
        self.solver.validate().map_err(|e| CliError::Config(format!("solver: {e}")))?;
        Ok((spec, u0))
    }
}
