//! The six model equations as drift/diffusion data on a spectral grid, with
//! the taming function and the Helmholtz projection.

mod cancellation;
mod drift;
mod equation;
mod functional;
mod helmholtz;
mod taming;

pub use cancellation::{cancellation_check, transport_divergence, CancellationResiduals};
pub use drift::{a0_apply, drift, f_apply, imex_split, leading_symbol, polynomial_apply, tamed_parts, ImexSplit};
pub use equation::{DeclaredPair, Diffusivity, Equation, EquationSpec, Slot, Variant};
pub use functional::{coercivity_functional, coercivity_terms, weak_coercivity_functional, CoercivityTerms};
pub use helmholtz::helmholtz_project;
pub use taming::TamingFunction;

use crate::noise::NoiseError;
use crate::spaces::SpaceError;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum OperatorError {
    #[error("invalid equation data: {0}")]
    Invalid(String),
    #[error("precondition violated: {0}")]
    Precondition(String),
    #[error("non-finite value in the drift")]
    Overflow,
    #[error(transparent)]
    Space(#[from] SpaceError),
    #[error(transparent)]
    Noise(#[from] NoiseError),
}

impl OperatorError {
    /// Whether the error stems from non-finite values, which the solver
    /// treats as a blow-up signal rather than a failure.
    pub fn is_overflow(&self) -> bool {
        matches!(
            self,
            OperatorError::Overflow
                | OperatorError::Space(SpaceError::Overflow)
                | OperatorError::Noise(NoiseError::Space(SpaceError::Overflow))
        )
    }
}
