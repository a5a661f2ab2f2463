use num_complex::Complex64;

use crate::noise::Transport;
use crate::spaces::{divergence, partial, Polynomial, SpectralField};

use super::OperatorError;

/// Residuals of the two transport cancellations.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CancellationResiduals {
    /// `|(f̄(u), ∇u)_{L²}|` with `f̄(y) = dir · q(y)`.
    pub flux: f64,
    /// `|Σ_n ((b_n·∇)u, g(u))_{L²}|`.
    pub transport: f64,
}

/// Largest divergence, in `L²`, among the transport fields.
pub fn transport_divergence(b: &[Transport]) -> Result<f64, OperatorError> {
    let mut worst: f64 = 0.0;
    for bn in b {
        if let Transport::Field(f) = bn {
            let dv = divergence(f)?;
            worst = worst.max(dv.inner_l2(&dv)?.sqrt());
        }
    }
    Ok(worst)
}

/// Evaluates both integrals by collocation on a grid on which the
/// integrands are resolved exactly. Requires `div b_n = 0`.
pub fn cancellation_check(
    b: &[Transport],
    flux_direction: &[f64],
    flux: &Polynomial,
    g: &Polynomial,
    u: &SpectralField,
) -> Result<CancellationResiduals, OperatorError> {
    let grid = u.grid();
    let d = grid.dimension();
    if u.components() != 1 {
        return Err(OperatorError::Invalid("cancellation identities are stated for scalar fields".into()));
    }
    if flux_direction.len() != d {
        return Err(OperatorError::Invalid(format!("flux direction must have length {d}")));
    }
    let div = transport_divergence(b)?;
    if div > 1e-12 {
        return Err(OperatorError::Precondition(format!("transport field has divergence of L2 norm {div:.3e}")));
    }
    let grads: Vec<SpectralField> = (0..d).map(|j| partial(u, j)).collect();

    let coll = crate::spaces::Collocation::for_degree(grid, flux.degree() + 1);
    let mut refs: Vec<&[Complex64]> = vec![u.coeffs()];
    refs.extend(grads.iter().map(|g| g.coeffs()));
    let vals = coll.synthesize(&refs);
    let m = coll.len() as f64;
    let mut flux_res = 0.0;
    for (j, &dj) in flux_direction.iter().enumerate() {
        if dj == 0.0 {
            continue;
        }
        let s: f64 = vals[0].iter().zip(&vals[1 + j]).map(|(&y, &z)| flux.eval(y) * z).sum();
        flux_res += dj * s / m;
    }

    let coll = crate::spaces::Collocation::for_degree(grid, g.degree() + 2);
    let mut refs: Vec<&[Complex64]> = vec![u.coeffs()];
    refs.extend(grads.iter().map(|g| g.coeffs()));
    let fields: Vec<&SpectralField> = b
        .iter()
        .filter_map(|bn| if let Transport::Field(f) = bn { Some(f) } else { None })
        .collect();
    for f in &fields {
        for j in 0..d {
            refs.push(f.component(j));
        }
    }
    let vals = coll.synthesize(&refs);
    let m = coll.len();
    let mut bconst = vec![0.0; d];
    for bn in b {
        if let Transport::Constant(v) = bn {
            for (acc, x) in bconst.iter_mut().zip(v) {
                *acc += x;
            }
        }
    }
    let mut tr = 0.0;
    for p in 0..m {
        let gu = g.eval(vals[0][p]);
        let mut adv = 0.0;
        for j in 0..d {
            let mut bj = bconst[j];
            for (q, _) in fields.iter().enumerate() {
                bj += vals[1 + d + q * d + j][p];
            }
            adv += bj * vals[1 + j][p];
        }
        tr += adv * gu;
    }
    Ok(CancellationResiduals { flux: flux_res.abs(), transport: (tr / m as f64).abs() })
}
