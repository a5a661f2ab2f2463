use num_complex::Complex64;

use crate::spaces::{laplacian, partial, PlanCache, Polynomial, SpaceError, SpectralField};

use super::{helmholtz_project, Equation, EquationSpec, OperatorError};

/// `p(u)` componentwise, on the alias-free grid for `deg p`, truncated.
pub fn polynomial_apply(
    plans: &PlanCache,
    p: &Polynomial,
    u: &SpectralField,
) -> Result<SpectralField, SpaceError> {
    if p.is_zero() {
        return Ok(SpectralField::zeros(u.grid()));
    }
    if p.degree() <= 1 {
        let mut out = u.scaled(p.coeffs.get(1).copied().unwrap_or(0.0));
        let c0 = p.constant_term();
        if c0 != 0.0 {
            let len = u.grid().len();
            for c in 0..u.components() {
                out.coeffs_mut()[c * len] += c0;
            }
        }
        return Ok(out);
    }
    let coll = plans.for_degree(p.degree());
    let mut vals = coll.synthesize_field(u);
    for v in vals.iter_mut() {
        for x in v.iter_mut() {
            *x = p.eval(*x);
        }
    }
    let refs: Vec<&[f64]> = vals.iter().map(|v| v.as_slice()).collect();
    coll.analyze_field(u.grid(), &refs, true)
}

/// Stiff part `L` of an IMEX split, as a multiplier on scalar wavenumbers,
/// together with the explicit remainder `N(u)`; `drift = -L û + N(u)`.
#[derive(Clone, Debug)]
pub struct ImexSplit {
    pub symbol: Vec<f64>,
    pub remainder: SpectralField,
}

impl ImexSplit {
    /// `-L û + N`.
    pub fn assemble(&self, u: &SpectralField) -> SpectralField {
        let len = u.grid().len();
        let mut out = u.multiply(|i| -self.symbol[i % len]);
        out.axpy(1.0, &self.remainder).expect("split built on the state grid");
        out
    }
}

fn quadratic_form(a: &[f64], k: &[f64]) -> f64 {
    let d = k.len();
    let mut s = 0.0;
    for i in 0..d {
        for j in 0..d {
            s += k[i] * a[i * d + j] * k[j];
        }
    }
    s
}

/// Symbol of the constant-coefficient leading operator. For the
/// quasi-linear equation this is `ā |k|²` with `ā` the grid mean of `a(u)`.
pub fn leading_symbol(spec: &EquationSpec, u: &SpectralField) -> Vec<f64> {
    let g = spec.grid();
    let k2 = g.k2_table();
    match spec.equation() {
        Equation::CahnHilliard { .. } => k2.iter().map(|k| k * k).collect(),
        Equation::TamedNs { .. } | Equation::AllenCahn { .. } => k2.to_vec(),
        Equation::SecondOrder { a, .. } => (0..g.len()).map(|i| quadratic_form(a, g.wavevector(i))).collect(),
        Equation::QuasiLinear1d { a, .. } => {
            let coll = spec.plans().padded();
            let vals = coll.synthesize_field(u);
            let abar = vals[0].iter().map(|&y| a.eval(y)).sum::<f64>() / coll.len() as f64;
            k2.iter().map(|k| abar * k).collect()
        }
        Equation::SwiftHohenberg { .. } => k2.iter().map(|k| (k - 1.0) * (k - 1.0)).collect(),
    }
}

/// `-P[(u·∇)u]` and `-P[φ_N(|u|²) u]`, returned separately.
pub fn tamed_parts(spec: &EquationSpec, u: &SpectralField) -> Result<(SpectralField, SpectralField), OperatorError> {
    let Equation::TamedNs { taming } = spec.equation() else {
        return Err(OperatorError::Invalid("tamed_parts needs the tamed Navier-Stokes equation".into()));
    };
    let d = spec.dimension();
    let coll = spec.plans().padded();
    let grads: Vec<SpectralField> = (0..d).flat_map(|c| {
        let uc = u.extract(c);
        (0..d).map(move |j| partial(&uc, j))
    })
    .collect();
    let mut refs: Vec<&[Complex64]> = (0..d).map(|c| u.component(c)).collect();
    refs.extend(grads.iter().map(|g| g.coeffs()));
    let vals = coll.synthesize(&refs);
    let (uv, gv) = vals.split_at(d);
    let m = coll.len();
    let mut conv = vec![vec![0.0; m]; d];
    let mut tame = vec![vec![0.0; m]; d];
    for p in 0..m {
        let mut s = 0.0;
        for c in 0..d {
            s += uv[c][p] * uv[c][p];
        }
        let phi = taming.value(s);
        for i in 0..d {
            let mut acc = 0.0;
            for j in 0..d {
                acc += uv[j][p] * gv[i * d + j][p];
            }
            conv[i][p] = -acc;
            tame[i][p] = -phi * uv[i][p];
        }
    }
    let r: Vec<&[f64]> = conv.iter().map(|v| v.as_slice()).collect();
    let c = coll.analyze_field(u.grid(), &r, true)?;
    let r: Vec<&[f64]> = tame.iter().map(|v| v.as_slice()).collect();
    let t = coll.analyze_field(u.grid(), &r, false)?;
    Ok((helmholtz_project(&c)?, helmholtz_project(&t)?))
}

/// `a(u) w''` on the 3/2 grid, no truncation.
fn diffusivity_times(spec: &EquationSpec, u: &SpectralField, w: &SpectralField) -> Result<SpectralField, OperatorError> {
    let Equation::QuasiLinear1d { a, .. } = spec.equation() else { unreachable!() };
    let coll = spec.plans().padded();
    let wxx = laplacian(w);
    let vals = coll.synthesize(&[u.coeffs(), wxx.coeffs()]);
    let prod: Vec<f64> = vals[0].iter().zip(&vals[1]).map(|(&y, &z)| a.eval(y) * z).collect();
    Ok(coll.analyze_field(u.grid(), &[&prod], false)?)
}

fn check_state(spec: &EquationSpec, u: &SpectralField) -> Result<(), OperatorError> {
    if u.grid() != spec.grid() {
        return Err(OperatorError::Space(SpaceError::GridMismatch));
    }
    Ok(())
}

/// `A₀(t,u) w`, the quasi-linear leading operator applied to `w`.
pub fn a0_apply(spec: &EquationSpec, _t: f64, u: &SpectralField, w: &SpectralField) -> Result<SpectralField, OperatorError> {
    check_state(spec, u)?;
    check_state(spec, w)?;
    let g = spec.grid();
    let k2 = g.k2_table();
    let len = g.len();
    Ok(match spec.equation() {
        Equation::CahnHilliard { .. } => w.multiply(|i| k2[i % len] * k2[i % len]),
        Equation::TamedNs { .. } => helmholtz_project(&w.multiply(|i| k2[i % len]))?,
        Equation::AllenCahn { .. } => w.multiply(|i| k2[i % len]),
        Equation::SecondOrder { a, .. } => w.multiply(|i| quadratic_form(a, g.wavevector(i % len))),
        Equation::QuasiLinear1d { .. } => diffusivity_times(spec, u, w)?.scaled(-1.0),
        Equation::SwiftHohenberg { .. } => w.multiply(|i| k2[i % len] * k2[i % len] - 2.0 * k2[i % len]),
    })
}

/// Lower-order part `F(t,u)`, so that `drift = -A₀(t,u)u + F(t,u)`.
pub fn f_apply(spec: &EquationSpec, _t: f64, u: &SpectralField) -> Result<SpectralField, OperatorError> {
    check_state(spec, u)?;
    let plans = spec.plans();
    Ok(match spec.equation() {
        Equation::CahnHilliard { f } => laplacian(&polynomial_apply(plans, f, u)?),
        Equation::TamedNs { .. } => {
            let (c, t) = tamed_parts(spec, u)?;
            &c + &t
        }
        Equation::SecondOrder { f, flux_direction, flux, .. } => {
            let mut out = polynomial_apply(plans, f, u)?;
            if !flux.is_zero() && flux_direction.iter().any(|&x| x != 0.0) {
                let q = polynomial_apply(plans, flux, u)?;
                for (j, &dj) in flux_direction.iter().enumerate() {
                    if dj != 0.0 {
                        out.axpy(dj, &partial(&q, j))?;
                    }
                }
            }
            out
        }
        Equation::AllenCahn { f } | Equation::QuasiLinear1d { f, .. } | Equation::SwiftHohenberg { f } => {
            polynomial_apply(plans, f, u)?
        }
    })
}

/// Stiff symbol and explicit remainder for the IMEX step.
pub fn imex_split(spec: &EquationSpec, t: f64, u: &SpectralField) -> Result<ImexSplit, OperatorError> {
    check_state(spec, u)?;
    let symbol = leading_symbol(spec, u);
    let remainder = match spec.equation() {
        Equation::TamedNs { .. } => {
            let len = u.grid().len();
            let lin = u.multiply(|i| symbol[i % len]);
            let mut n = f_apply(spec, t, u)?;
            n.axpy(1.0, &lin)?;
            n.axpy(-1.0, &a0_apply(spec, t, u, u)?)?;
            n
        }
        Equation::QuasiLinear1d { .. } => {
            let mut n = diffusivity_times(spec, u, u)?;
            let len = u.grid().len();
            n.axpy(1.0, &u.multiply(|i| symbol[i % len]))?;
            n.axpy(1.0, &f_apply(spec, t, u)?)?;
            n
        }
        Equation::SwiftHohenberg { .. } => {
            let mut n = f_apply(spec, t, u)?;
            n.axpy(1.0, u)?;
            n
        }
        _ => f_apply(spec, t, u)?,
    };
    if !remainder.is_finite() {
        return Err(OperatorError::Overflow);
    }
    Ok(ImexSplit { symbol, remainder })
}

/// `-A(t,u) = -A₀(t,u)u + F(t,u)`.
pub fn drift(spec: &EquationSpec, t: f64, u: &SpectralField) -> Result<SpectralField, OperatorError> {
    Ok(imex_split(spec, t, u)?.assemble(u))
}
