//! Fourier-multiplier realization of the Gelfand triple `V ⊂ H ⊂ V*` on the
//! d-torus: grids, real spectral fields, Sobolev norms, spectral calculus and
//! dealiased pointwise maps.

mod field;
mod grid;
mod poly;
mod transform;
mod triple;

pub use field::{
    bilaplacian, differentiate, divergence, gradient, laplacian, partial, sobolev_norm, FourierTerm,
    SpectralField,
};
pub use grid::WaveGrid;
pub use poly::Polynomial;
pub use transform::{padded_points, pointwise_apply, Collocation, PlanCache, ScalarFn};
pub use triple::{duality_pairing, norm_beta, GelfandTriple};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum SpaceError {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),
    #[error("fields live on different grids")]
    GridMismatch,
    #[error("beta = {0} outside [0, 1]")]
    BetaOutOfRange(f64),
    #[error("expected {expected} components, found {found}")]
    ComponentMismatch { expected: usize, found: usize },
    #[error("coefficient array has length {found}, expected {expected}")]
    Length { expected: usize, found: usize },
    #[error("non-finite value produced by a pointwise map")]
    Overflow,
}
