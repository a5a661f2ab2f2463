use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;

use crate::operators::{helmholtz_project, polynomial_apply, EquationSpec};
use crate::spaces::{partial, SpaceError, SpectralField};

use super::{NoiseError, Transport, WienerIncrement};

/// `(b·∇)u` for a constant vector plus an optional coefficient field.
fn transport_apply(
    spec: &EquationSpec,
    u: &SpectralField,
    constant: &[f64],
    field: Option<&SpectralField>,
) -> Result<SpectralField, SpaceError> {
    let g = u.grid();
    let len = g.len();
    let mut out = SpectralField::zeros(g);
    if constant.iter().any(|&b| b != 0.0) {
        for (i, z) in out.coeffs_mut().iter_mut().enumerate() {
            let k = g.wavevector(i % len);
            let bk: f64 = k.iter().zip(constant).map(|(a, b)| a * b).sum();
            let w = u.coeffs()[i];
            *z = Complex64::new(-w.im * bk, w.re * bk);
        }
    }
    if let Some(b) = field {
        let d = g.dimension();
        let comps = u.components();
        let coll = spec.plans().for_degree(2);
        let mut parts: Vec<SpectralField> = Vec::with_capacity(comps * d);
        for c in 0..comps {
            let uc = u.extract(c);
            for j in 0..d {
                parts.push(partial(&uc, j));
            }
        }
        let mut refs: Vec<&[Complex64]> = parts.iter().map(|p| p.coeffs()).collect();
        for j in 0..d {
            refs.push(b.component(j));
        }
        let vals = coll.synthesize(&refs);
        let (grads, bv) = vals.split_at(comps * d);
        let mut prod = vec![vec![0.0; coll.len()]; comps];
        for (c, p) in prod.iter_mut().enumerate() {
            for j in 0..d {
                let gj = &grads[c * d + j];
                for ((x, a), bb) in p.iter_mut().zip(gj).zip(&bv[j]) {
                    *x += a * bb;
                }
            }
        }
        let prefs: Vec<&[f64]> = prod.iter().map(|v| v.as_slice()).collect();
        let t = coll.analyze_field(g, &prefs, true)?;
        out.axpy(1.0, &t)?;
    }
    Ok(out)
}

fn profile_apply(spec: &EquationSpec, u: &SpectralField) -> Result<SpectralField, SpaceError> {
    polynomial_apply(spec.plans(), &spec.noise().profile, u)
}

fn check(spec: &EquationSpec, u: &SpectralField) -> Result<(), NoiseError> {
    if u.grid() != spec.grid() {
        if u.components() != spec.grid().components() {
            return Err(NoiseError::ComponentMismatch { expected: spec.grid().components(), found: u.components() });
        }
        return Err(NoiseError::Space(SpaceError::GridMismatch));
    }
    Ok(())
}

/// `Σ_n mode_n(u) dW_n`, assembled through the aggregated coefficients
/// `Σ_n b_n dW_n` and `Σ_n γ_n dW_n`.
pub fn apply_diffusion(
    spec: &EquationSpec,
    _t: f64,
    u: &SpectralField,
    dw: &WienerIncrement,
) -> Result<SpectralField, NoiseError> {
    check(spec, u)?;
    let noise = spec.noise();
    if dw.len() != noise.mode_count {
        return Err(NoiseError::ModeMismatch { expected: noise.mode_count, found: dw.len() });
    }
    let d = u.grid().dimension();
    let mut bconst = vec![0.0; d];
    let mut bfield: Option<SpectralField> = None;
    for (b, &w) in noise.transport.iter().zip(&dw.values) {
        match b {
            Transport::None => {}
            Transport::Constant(v) => {
                for (acc, x) in bconst.iter_mut().zip(v) {
                    *acc += w * x;
                }
            }
            Transport::Field(f) => match bfield.as_mut() {
                Some(acc) => acc.axpy(w, f)?,
                None => bfield = Some(f.scaled(w)),
            },
        }
    }
    let mut out = transport_apply(spec, u, &bconst, bfield.as_ref())?;
    let s: f64 = noise.gamma.iter().zip(&dw.values).map(|(g, w)| g * w).sum();
    if s != 0.0 && !noise.profile.is_zero() {
        out.axpy(s, &profile_apply(spec, u)?)?;
    }
    for (a, &w) in noise.additive.iter().zip(&dw.values) {
        if let Some(a) = a {
            out.axpy(w, a)?;
        }
    }
    if spec.projects_noise() {
        out = helmholtz_project(&out)?;
    }
    Ok(out)
}

/// The individual fields `mode_n(u)`, `n < M`.
pub fn diffusion_modes(spec: &EquationSpec, _t: f64, u: &SpectralField) -> Result<Vec<SpectralField>, NoiseError> {
    check(spec, u)?;
    let noise = spec.noise();
    let d = u.grid().dimension();
    let pu = if noise.has_multiplicative() { Some(profile_apply(spec, u)?) } else { None };
    let zero = vec![0.0; d];
    let mut out = Vec::with_capacity(noise.mode_count);
    for n in 0..noise.mode_count {
        let mut m = match &noise.transport[n] {
            Transport::None => SpectralField::zeros(u.grid()),
            Transport::Constant(b) => transport_apply(spec, u, b, None)?,
            Transport::Field(f) => transport_apply(spec, u, &zero, Some(f))?,
        };
        if let Some(pu) = &pu {
            if noise.gamma[n] != 0.0 {
                m.axpy(noise.gamma[n], pu)?;
            }
        }
        if let Some(a) = &noise.additive[n] {
            m.axpy(1.0, a)?;
        }
        if spec.projects_noise() {
            m = helmholtz_project(&m)?;
        }
        out.push(m);
    }
    Ok(out)
}

/// `|||B(t,u)|||_H = (Σ_n ‖mode_n(u)‖²_H)^{1/2}`.
pub fn hilbert_schmidt_norm_h(spec: &EquationSpec, t: f64, u: &SpectralField) -> Result<f64, NoiseError> {
    Ok(hilbert_schmidt_sq_h(spec, t, u)?.sqrt())
}

pub fn hilbert_schmidt_sq_h(spec: &EquationSpec, t: f64, u: &SpectralField) -> Result<f64, NoiseError> {
    if spec.noise().is_silent() {
        return Ok(0.0);
    }
    let triple = spec.triple();
    Ok(diffusion_modes(spec, t, u)?.iter().map(|m| triple.h_norm_sq(m)).sum())
}

/// `B(t,u)^* u ∈ ℓ²`, i.e. `((mode_n(u), u)_H)_n`.
pub fn diffusion_adjoint(spec: &EquationSpec, t: f64, u: &SpectralField) -> Result<Vec<f64>, NoiseError> {
    let triple = spec.triple();
    diffusion_modes(spec, t, u)?
        .iter()
        .map(|m| crate::spaces::duality_pairing(m, u, triple).map_err(NoiseError::from))
        .collect()
}

/// Operator norm `‖B(t,u)‖_{L(ℓ², H)}`, the square root of the largest
/// eigenvalue of the Gram matrix `(mode_n, mode_m)_H`.
pub fn operator_norm_h(spec: &EquationSpec, t: f64, u: &SpectralField) -> Result<f64, NoiseError> {
    let modes = diffusion_modes(spec, t, u)?;
    let m = modes.len();
    let triple = spec.triple();
    let mut gram = DMatrix::<f64>::zeros(m, m);
    for i in 0..m {
        for j in i..m {
            let v = crate::spaces::duality_pairing(&modes[i], &modes[j], triple)?;
            gram[(i, j)] = v;
            gram[(j, i)] = v;
        }
    }
    let eig = SymmetricEigen::new(gram);
    Ok(eig.eigenvalues.iter().cloned().fold(0.0, f64::max).sqrt())
}

/// `Σ_n sup_x |b_n(x)|²`, reported so truncation of the noise can be judged.
pub fn transport_mass(spec: &EquationSpec) -> f64 {
    let coll = spec.plans().padded();
    spec.noise()
        .transport
        .iter()
        .map(|b| match b {
            Transport::None => 0.0,
            Transport::Constant(v) => v.iter().map(|x| x * x).sum(),
            Transport::Field(f) => {
                let vals = coll.synthesize_field(f);
                (0..coll.len()).map(|j| vals.iter().map(|c| c[j] * c[j]).sum::<f64>()).fold(0.0, f64::max)
            }
        })
        .sum()
}
