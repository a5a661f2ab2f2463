use crate::spaces::{Polynomial, SpectralField, WaveGrid};

use super::NoiseError;

/// Transport coefficient `b_n` of one noise mode.
#[derive(Clone, Debug)]
pub enum Transport {
    None,
    /// Constant vector of length `d`.
    Constant(Vec<f64>),
    /// Coefficient field with `d` components on the scalar grid.
    Field(SpectralField),
}

impl Transport {
    pub fn is_none(&self) -> bool {
        match self {
            Transport::None => true,
            Transport::Constant(b) => b.iter().all(|&x| x == 0.0),
            Transport::Field(_) => false,
        }
    }
}

/// Diffusion data truncated to `M` modes:
/// `mode_n(u) = (b_n·∇)u + γ_n p(u) + a_n`.
#[derive(Clone, Debug)]
pub struct NoiseSpec {
    pub mode_count: usize,
    pub transport: Vec<Transport>,
    pub gamma: Vec<f64>,
    /// Multiplicative profile `p`, applied componentwise.
    pub profile: Polynomial,
    /// Additive fields `a_n`, on the state grid.
    pub additive: Vec<Option<SpectralField>>,
}

impl NoiseSpec {
    /// `M` modes carrying no noise at all.
    pub fn silent(mode_count: usize) -> Self {
        Self {
            mode_count,
            transport: vec![Transport::None; mode_count],
            gamma: vec![0.0; mode_count],
            profile: Polynomial::zero(),
            additive: vec![None; mode_count],
        }
    }

    /// Multiplicative noise `γ_n p(u)` with the given weights.
    pub fn multiplicative(gamma: Vec<f64>, profile: Polynomial) -> Self {
        let mut s = Self::silent(gamma.len());
        s.gamma = gamma;
        s.profile = profile;
        s
    }

    /// Weights `γ_n ∝ 1/n` rescaled to `Σ γ_n² = norm_sq`.
    pub fn harmonic_gamma(mode_count: usize, norm_sq: f64) -> Vec<f64> {
        let raw: Vec<f64> = (1..=mode_count).map(|n| 1.0 / n as f64).collect();
        let s: f64 = raw.iter().map(|x| x * x).sum();
        let c = (norm_sq / s).sqrt();
        raw.into_iter().map(|x| x * c).collect()
    }

    pub fn gamma_norm_sq(&self) -> f64 {
        self.gamma.iter().map(|g| g * g).sum()
    }

    pub fn has_transport(&self) -> bool {
        self.transport.iter().any(|b| !b.is_none())
    }

    pub fn has_multiplicative(&self) -> bool {
        !self.profile.is_zero() && self.gamma.iter().any(|&g| g != 0.0)
    }

    pub fn has_additive(&self) -> bool {
        self.additive.iter().any(|a| a.is_some())
    }

    pub fn is_silent(&self) -> bool {
        !self.has_transport() && !self.has_multiplicative() && !self.has_additive()
    }

    /// Whether `B(t, 0) = 0`.
    pub fn vanishes_at_zero(&self) -> bool {
        !self.has_additive() && (self.profile.constant_term() == 0.0 || self.gamma.iter().all(|&g| g == 0.0))
    }

    pub fn validate(&self, state: &WaveGrid) -> Result<(), NoiseError> {
        let m = self.mode_count;
        if m == 0 {
            return Err(NoiseError::Invalid("mode count must be at least 1".into()));
        }
        if self.transport.len() != m || self.gamma.len() != m || self.additive.len() != m {
            return Err(NoiseError::ModeMismatch {
                expected: m,
                found: self.transport.len().max(self.gamma.len()).max(self.additive.len()),
            });
        }
        let d = state.dimension();
        for b in &self.transport {
            match b {
                Transport::None => {}
                Transport::Constant(v) if v.len() != d => {
                    return Err(NoiseError::Invalid(format!("transport vector of length {} in dimension {d}", v.len())))
                }
                Transport::Constant(v) if v.iter().any(|x| !x.is_finite()) => {
                    return Err(NoiseError::Invalid("non-finite transport coefficient".into()))
                }
                Transport::Constant(_) => {}
                Transport::Field(f) => {
                    if f.grid() != &state.with_components(d) {
                        return Err(NoiseError::Invalid("transport field must have d components on the state grid".into()));
                    }
                }
            }
        }
        for a in self.additive.iter().flatten() {
            if a.grid() != state {
                return Err(NoiseError::Invalid("additive field not on the state grid".into()));
            }
        }
        if self.gamma.iter().any(|g| !g.is_finite()) {
            return Err(NoiseError::Invalid("non-finite gamma".into()));
        }
        Ok(())
    }
}
