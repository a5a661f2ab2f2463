use crate::noise::{diffusion_adjoint, hilbert_schmidt_sq_h};
use crate::spaces::{duality_pairing, SpectralField};

use super::{drift, EquationSpec, OperatorError};

/// The three ingredients of every coercivity expression at one state.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CoercivityTerms {
    /// `⟨u, A(t,u)⟩`.
    pub pairing: f64,
    /// `|||B(t,u)|||²_H`.
    pub hs_sq: f64,
    /// `‖B(t,u)^* u‖²_{ℓ²}`.
    pub adjoint_sq: f64,
    /// `‖u‖²_H`.
    pub h_sq: f64,
    /// `‖u‖²_V`.
    pub v_sq: f64,
}

impl CoercivityTerms {
    pub fn functional(&self, eta: f64) -> f64 {
        self.pairing - (0.5 + eta) * self.hs_sq
    }

    /// `⟨u,A⟩ - ½|||B|||² - η ‖B*u‖²/‖u‖²_H`, the last term taken as 0 at `u = 0`.
    pub fn weak_functional(&self, eta: f64) -> f64 {
        let extra = if self.h_sq > 0.0 { self.adjoint_sq / self.h_sq } else { 0.0 };
        self.pairing - 0.5 * self.hs_sq - eta * extra
    }
}

pub fn coercivity_terms(spec: &EquationSpec, t: f64, u: &SpectralField) -> Result<CoercivityTerms, OperatorError> {
    let triple = spec.triple();
    let a = drift(spec, t, u)?;
    let pairing = -duality_pairing(u, &a, triple)?;
    let hs_sq = hilbert_schmidt_sq_h(spec, t, u)?;
    let adjoint_sq = if spec.noise().is_silent() {
        0.0
    } else {
        diffusion_adjoint(spec, t, u)?.iter().map(|x| x * x).sum()
    };
    let out = CoercivityTerms { pairing, hs_sq, adjoint_sq, h_sq: triple.h_norm_sq(u), v_sq: triple.v_norm_sq(u) };
    if !(out.pairing.is_finite() && out.hs_sq.is_finite() && out.adjoint_sq.is_finite()) {
        return Err(OperatorError::Overflow);
    }
    Ok(out)
}

/// `⟨u, A(t,u)⟩ - (½+η) |||B(t,u)|||²_H`.
pub fn coercivity_functional(spec: &EquationSpec, t: f64, u: &SpectralField, eta: f64) -> Result<f64, OperatorError> {
    Ok(coercivity_terms(spec, t, u)?.functional(eta))
}

/// The variant with `η ‖B(t,u)^* u‖²_{ℓ²} / ‖u‖²_H` in place of `η |||B|||²`.
pub fn weak_coercivity_functional(
    spec: &EquationSpec,
    t: f64,
    u: &SpectralField,
    eta: f64,
) -> Result<f64, OperatorError> {
    Ok(coercivity_terms(spec, t, u)?.weak_functional(eta))
}
