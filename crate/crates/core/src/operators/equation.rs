use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::noise::NoiseSpec;
use crate::spaces::{GelfandTriple, PlanCache, Polynomial, WaveGrid};
use crate::Rational;

use super::{OperatorError, TamingFunction};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Variant {
    CahnHilliard,
    TamedNs,
    SecondOrder,
    AllenCahn,
    QuasiLinear1d,
    SwiftHohenberg,
}

impl Variant {
    pub fn triple(self) -> GelfandTriple {
        match self {
            Variant::SecondOrder => GelfandTriple::weak(),
            Variant::TamedNs | Variant::AllenCahn | Variant::QuasiLinear1d => GelfandTriple::strong(),
            Variant::CahnHilliard | Variant::SwiftHohenberg => GelfandTriple::fourth_order(),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Variant::CahnHilliard => "cahn_hilliard",
            Variant::TamedNs => "tamed_ns",
            Variant::SecondOrder => "second_order",
            Variant::AllenCahn => "allen_cahn",
            Variant::QuasiLinear1d => "quasi_linear_1d",
            Variant::SwiftHohenberg => "swift_hohenberg",
        }
    }
}

impl fmt::Display for Variant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Which nonlinearity a declared `(ρ, β)` pair controls.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Slot {
    /// Reaction or convection part of the drift.
    F,
    /// Divergence-form flux `div f̄(u)`.
    Fbar,
    /// Multiplicative noise.
    G,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DeclaredPair {
    pub slot: Slot,
    #[serde(with = "crate::ratio_serde")]
    pub rho: Rational,
    #[serde(with = "crate::ratio_serde")]
    pub beta: Rational,
}

impl DeclaredPair {
    pub fn new(slot: Slot, rho: Rational, beta: Rational) -> Self {
        Self { slot, rho, beta }
    }

    /// Pair with `β` on the critical line, or `3/4` when `ρ = 0`.
    pub fn critical(slot: Slot, rho: i64) -> Self {
        let r = Rational::from_integer(rho);
        let beta = if rho == 0 {
            Rational::new(3, 4)
        } else {
            (r + 2) / ((r + 1) * 2)
        };
        Self { slot, rho: r, beta }
    }
}

/// Quasi-linear diffusivity `a(y) = base + amplitude · y²/(1+y²)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Diffusivity {
    pub base: f64,
    pub amplitude: f64,
}

impl Diffusivity {
    pub fn eval(&self, y: f64) -> f64 {
        let y2 = y * y;
        self.base + self.amplitude * y2 / (1.0 + y2)
    }

    pub fn infimum(&self) -> f64 {
        self.base + self.amplitude.min(0.0)
    }

    pub fn supremum(&self) -> f64 {
        self.base + self.amplitude.max(0.0)
    }

    /// Lipschitz constant, `|amplitude| · 3√3/8`.
    pub fn lipschitz(&self) -> f64 {
        self.amplitude.abs() * 3.0 * 3f64.sqrt() / 8.0
    }
}

/// Variant-specific coefficient data.
#[derive(Clone, Debug)]
pub enum Equation {
    /// `du = [-Δ²u + Δf(u)] dt + B dW`.
    CahnHilliard { f: Polynomial },
    /// `du = [PΔu - P(u·∇)u - Pφ_N(|u|²)u] dt + B dW` on 𝕋³.
    TamedNs { taming: TamingFunction },
    /// `du = [div(a∇u) + f(u) + div(dir · q(u))] dt + B dW`, `a` row-major `d×d`.
    SecondOrder { a: Vec<f64>, f: Polynomial, flux_direction: Vec<f64>, flux: Polynomial },
    /// `du = [Δu + f(u)] dt + B dW`, usually `f(y) = y - y³`.
    AllenCahn { f: Polynomial },
    /// `du = [a(u)u'' + f(u)] dt + B dW` on 𝕋¹.
    QuasiLinear1d { a: Diffusivity, f: Polynomial },
    /// `du = [-Δ²u - 2Δu + f(u)] dt + B dW`.
    SwiftHohenberg { f: Polynomial },
}

impl Equation {
    pub fn variant(&self) -> Variant {
        match self {
            Equation::CahnHilliard { .. } => Variant::CahnHilliard,
            Equation::TamedNs { .. } => Variant::TamedNs,
            Equation::SecondOrder { .. } => Variant::SecondOrder,
            Equation::AllenCahn { .. } => Variant::AllenCahn,
            Equation::QuasiLinear1d { .. } => Variant::QuasiLinear1d,
            Equation::SwiftHohenberg { .. } => Variant::SwiftHohenberg,
        }
    }

    /// Heat equation `du = Δu dt` in `d` dimensions.
    pub fn heat(d: usize) -> Self {
        let mut a = vec![0.0; d * d];
        for i in 0..d {
            a[i * d + i] = 1.0;
        }
        Equation::SecondOrder { a, f: Polynomial::zero(), flux_direction: vec![0.0; d], flux: Polynomial::zero() }
    }

    pub fn allen_cahn() -> Self {
        Equation::AllenCahn { f: Polynomial::new(vec![0.0, 1.0, 0.0, -1.0]) }
    }

    pub fn double_well_cahn_hilliard() -> Self {
        Equation::CahnHilliard { f: Polynomial::new(vec![0.0, -1.0, 0.0, 1.0]) }
    }
}

/// One fully specified equation: coefficients, grid, noise and the declared
/// exponent pairs. Immutable once built.
#[derive(Clone, Debug)]
pub struct EquationSpec {
    equation: Equation,
    grid: WaveGrid,
    triple: GelfandTriple,
    noise: NoiseSpec,
    params: Vec<DeclaredPair>,
    plans: Arc<PlanCache>,
}

impl EquationSpec {
    /// Builds and validates a spec; `params = None` selects the default
    /// pairs of the variant.
    pub fn new(
        equation: Equation,
        grid: WaveGrid,
        noise: NoiseSpec,
        params: Option<Vec<DeclaredPair>>,
    ) -> Result<Self, OperatorError> {
        let variant = equation.variant();
        let d = grid.dimension();
        let want_components = if variant == Variant::TamedNs { d } else { 1 };
        if grid.components() != want_components {
            return Err(OperatorError::Invalid(format!(
                "{variant} needs {want_components} components, grid has {}",
                grid.components()
            )));
        }
        match &equation {
            Equation::TamedNs { .. } if d != 3 => {
                return Err(OperatorError::Invalid("tamed Navier-Stokes is posed on the 3-torus".into()))
            }
            Equation::AllenCahn { .. } if !(2..=4).contains(&d) => {
                return Err(OperatorError::Invalid(format!("Allen-Cahn needs 2 <= d <= 4, got {d}")))
            }
            Equation::QuasiLinear1d { a, .. } => {
                if d != 1 {
                    return Err(OperatorError::Invalid("quasi-linear equation is posed on the 1-torus".into()));
                }
                if !(a.base.is_finite() && a.amplitude.is_finite()) || a.infimum() <= 0.0 {
                    return Err(OperatorError::Invalid("diffusivity must be bounded below by a positive constant".into()));
                }
            }
            Equation::SecondOrder { a, flux_direction, .. } => {
                if a.len() != d * d || flux_direction.len() != d {
                    return Err(OperatorError::Invalid(format!(
                        "second-order coefficients need a {d}x{d} matrix and a length-{d} flux direction"
                    )));
                }
                for i in 0..d {
                    for j in 0..d {
                        if (a[i * d + j] - a[j * d + i]).abs() > 1e-14 * (1.0 + a[i * d + j].abs()) {
                            return Err(OperatorError::Invalid("diffusion matrix must be symmetric".into()));
                        }
                    }
                }
            }
            _ => {}
        }
        noise.validate(&grid)?;
        let params = match params {
            Some(p) => p,
            None => default_params(&equation, &noise),
        };
        let half = Rational::new(1, 2);
        let one = Rational::from_integer(1);
        for p in &params {
            if p.rho < Rational::from_integer(0) || p.beta <= half || p.beta >= one {
                return Err(OperatorError::Invalid(format!(
                    "declared pair (rho = {}, beta = {}) needs rho >= 0 and beta in (1/2, 1)",
                    p.rho, p.beta
                )));
            }
        }
        Ok(Self {
            triple: variant.triple(),
            plans: Arc::new(PlanCache::new(&grid)),
            equation,
            grid,
            noise,
            params,
        })
    }

    pub fn equation(&self) -> &Equation {
        &self.equation
    }
    pub fn variant(&self) -> Variant {
        self.equation.variant()
    }
    pub fn grid(&self) -> &WaveGrid {
        &self.grid
    }
    pub fn triple(&self) -> &GelfandTriple {
        &self.triple
    }
    pub fn noise(&self) -> &NoiseSpec {
        &self.noise
    }
    pub fn params(&self) -> &[DeclaredPair] {
        &self.params
    }
    pub fn plans(&self) -> &PlanCache {
        &self.plans
    }
    pub fn dimension(&self) -> usize {
        self.grid.dimension()
    }

    /// Every noise mode is Helmholtz-projected.
    pub fn projects_noise(&self) -> bool {
        self.variant() == Variant::TamedNs
    }

    /// Same equation with new noise data.
    pub fn with_noise(&self, noise: NoiseSpec) -> Result<Self, OperatorError> {
        Self::new(self.equation.clone(), self.grid.clone(), noise, Some(self.params.clone()))
    }

    /// Same data on another grid; noise fields must be rebuilt by the caller
    /// if they are grid-dependent.
    pub fn with_grid(&self, grid: WaveGrid, noise: NoiseSpec) -> Result<Self, OperatorError> {
        Self::new(self.equation.clone(), grid, noise, Some(self.params.clone()))
    }

    /// `B₀` does not depend on the state.
    pub fn is_semilinear(&self) -> bool {
        self.variant() != Variant::QuasiLinear1d
    }
}

fn default_params(eq: &Equation, noise: &NoiseSpec) -> Vec<DeclaredPair> {
    let g_rho = if noise.has_multiplicative() { noise.profile.growth_exponent() as i64 } else { 0 };
    let g = DeclaredPair::critical(Slot::G, g_rho);
    match eq {
        Equation::CahnHilliard { f } => vec![DeclaredPair::critical(Slot::F, f.growth_exponent() as i64), g],
        Equation::TamedNs { .. } => vec![
            DeclaredPair::new(Slot::F, Rational::from_integer(1), Rational::new(5, 8)),
            DeclaredPair::new(Slot::F, Rational::from_integer(0), Rational::new(5, 8)),
            DeclaredPair::new(Slot::G, Rational::from_integer(0), Rational::new(7, 8)),
        ],
        Equation::SecondOrder { f, flux, .. } => vec![
            DeclaredPair::critical(Slot::F, f.growth_exponent() as i64),
            DeclaredPair::critical(Slot::Fbar, flux.growth_exponent() as i64),
            g,
        ],
        Equation::AllenCahn { f } => {
            let rho = f.growth_exponent() as i64;
            let fpair = if rho == 2 {
                DeclaredPair::new(Slot::F, Rational::from_integer(2), Rational::new(2, 3))
            } else {
                DeclaredPair::critical(Slot::F, rho)
            };
            vec![fpair, g]
        }
        Equation::QuasiLinear1d { .. } => vec![DeclaredPair::critical(Slot::F, 0), DeclaredPair::critical(Slot::G, 0)],
        Equation::SwiftHohenberg { f } => vec![DeclaredPair::critical(Slot::F, f.growth_exponent() as i64), g],
    }
}
