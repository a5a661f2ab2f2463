//! Truncated cylindrical Brownian motion and the diffusion operators
//! `B(t,u)` built from transport, multiplicative and additive parts.

mod diffusion;
mod rng;
mod spec;

pub use diffusion::{
    apply_diffusion, diffusion_adjoint, diffusion_modes, hilbert_schmidt_norm_h, hilbert_schmidt_sq_h,
    operator_norm_h, transport_mass,
};
pub use rng::{sample_increments, NoiseStream, StreamKey, WienerIncrement};
pub use spec::{NoiseSpec, Transport};

use crate::spaces::SpaceError;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum NoiseError {
    #[error("time step {0} must be positive")]
    NonPositiveDt(f64),
    #[error("noise has {expected} modes, increment has {found}")]
    ModeMismatch { expected: usize, found: usize },
    #[error("state has {found} components, equation expects {expected}")]
    ComponentMismatch { expected: usize, found: usize },
    #[error("invalid noise data: {0}")]
    Invalid(String),
    #[error(transparent)]
    Space(#[from] SpaceError),
}
