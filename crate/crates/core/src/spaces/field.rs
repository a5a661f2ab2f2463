use std::ops::{Add, Mul, Neg, Sub};

use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use super::{SpaceError, WaveGrid};

/// One real Fourier term `cos * cos(k.x) + sin * sin(k.x)` in a single component.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FourierTerm {
    #[serde(default)]
    pub component: usize,
    pub wavevector: Vec<i64>,
    #[serde(default)]
    pub cos: f64,
    #[serde(default)]
    pub sin: f64,
}

/// Real field on the torus stored as truncated Fourier coefficients.
///
/// Coefficients are normalized so that `u(x) = Σ_k û(k) e^{ik·x}`; the
/// L² norm is the volume average, so the constant field 1 has norm 1.
#[derive(Clone, Debug)]
pub struct SpectralField {
    grid: WaveGrid,
    coeffs: Vec<Complex64>,
}

impl SpectralField {
    pub fn zeros(grid: &WaveGrid) -> Self {
        Self { grid: grid.clone(), coeffs: vec![Complex64::new(0.0, 0.0); grid.dof()] }
    }

    /// Takes a raw coefficient array; the Nyquist entries are cleared.
    pub fn from_coeffs(grid: &WaveGrid, coeffs: Vec<Complex64>) -> Result<Self, SpaceError> {
        if coeffs.len() != grid.dof() {
            return Err(SpaceError::Length { expected: grid.dof(), found: coeffs.len() });
        }
        let mut f = Self { grid: grid.clone(), coeffs };
        f.clear_unrepresented();
        Ok(f)
    }

    pub fn constant(grid: &WaveGrid, values: &[f64]) -> Result<Self, SpaceError> {
        if values.len() != grid.components() {
            return Err(SpaceError::ComponentMismatch {
                expected: grid.components(),
                found: values.len(),
            });
        }
        let mut f = Self::zeros(grid);
        for (c, &v) in values.iter().enumerate() {
            f.coeffs[c * grid.len()] = Complex64::new(v, 0.0);
        }
        Ok(f)
    }

    pub fn from_terms(grid: &WaveGrid, terms: &[FourierTerm]) -> Result<Self, SpaceError> {
        let mut f = Self::zeros(grid);
        let len = grid.len();
        for t in terms {
            if t.component >= grid.components() {
                return Err(SpaceError::ComponentMismatch {
                    expected: grid.components(),
                    found: t.component + 1,
                });
            }
            let flat = grid.flat_index(&t.wavevector).ok_or_else(|| {
                SpaceError::InvalidGrid(format!("wavevector {:?} not representable", t.wavevector))
            })?;
            let base = t.component * len;
            if flat == 0 {
                f.coeffs[base] += Complex64::new(t.cos, 0.0);
                continue;
            }
            let m = grid.mirror(flat);
            f.coeffs[base + flat] += Complex64::new(0.5 * t.cos, -0.5 * t.sin);
            f.coeffs[base + m] += Complex64::new(0.5 * t.cos, 0.5 * t.sin);
        }
        Ok(f)
    }

    /// Inverse of [`SpectralField::from_terms`]: one term per `±k` pair with
    /// a coefficient above `threshold`.
    pub fn to_terms(&self, threshold: f64) -> Vec<FourierTerm> {
        let len = self.grid.len();
        let mut out = Vec::new();
        for c in 0..self.components() {
            for flat in 0..len {
                let m = self.grid.mirror(flat);
                let z = self.coeffs[c * len + flat];
                if (flat != 0 && m < flat) || z.norm() <= threshold {
                    continue;
                }
                let (cos, sin) = if flat == 0 { (z.re, 0.0) } else { (2.0 * z.re, -2.0 * z.im) };
                out.push(FourierTerm { component: c, wavevector: self.grid.wavenumber(flat).to_vec(), cos, sin });
            }
        }
        out
    }

    /// Gaussian random field supported on `max_j |k_j| <= cutoff`, with
    /// spectral weight `(1+|k|²)^(-decay/2)`.
    pub fn random<R: Rng + ?Sized>(grid: &WaveGrid, rng: &mut R, cutoff: usize, decay: f64) -> Self {
        let mut f = Self::zeros(grid);
        let len = grid.len();
        for c in 0..grid.components() {
            for flat in 0..len {
                if !grid.represented(flat)
                    || grid.wavenumber(flat).iter().any(|k| k.unsigned_abs() as usize > cutoff)
                {
                    continue;
                }
                let w = (1.0 + grid.k2(flat)).powf(-0.5 * decay);
                let re: f64 = rng.sample(StandardNormal);
                let im: f64 = rng.sample(StandardNormal);
                f.coeffs[c * len + flat] = Complex64::new(re, im) * w;
            }
        }
        f.symmetrize();
        f
    }

    pub fn grid(&self) -> &WaveGrid {
        &self.grid
    }
    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }
    pub fn coeffs_mut(&mut self) -> &mut [Complex64] {
        &mut self.coeffs
    }
    pub fn into_coeffs(self) -> Vec<Complex64> {
        self.coeffs
    }
    pub fn components(&self) -> usize {
        self.grid.components()
    }
    pub fn component(&self, c: usize) -> &[Complex64] {
        let len = self.grid.len();
        &self.coeffs[c * len..(c + 1) * len]
    }
    pub fn component_mut(&mut self, c: usize) -> &mut [Complex64] {
        let len = self.grid.len();
        &mut self.coeffs[c * len..(c + 1) * len]
    }
    /// Spatial mean of component `c`.
    pub fn mean(&self, c: usize) -> f64 {
        self.coeffs[c * self.grid.len()].re
    }

    /// Single component as a scalar field.
    pub fn extract(&self, c: usize) -> SpectralField {
        Self { grid: self.grid.with_components(1), coeffs: self.component(c).to_vec() }
    }

    /// Stacks scalar fields into one vector field.
    pub fn stack(parts: &[SpectralField]) -> Result<Self, SpaceError> {
        let first = parts.first().ok_or(SpaceError::ComponentMismatch { expected: 1, found: 0 })?;
        let grid = first.grid.with_components(parts.iter().map(|p| p.components()).sum());
        let mut coeffs = Vec::with_capacity(grid.dof());
        for p in parts {
            if p.grid.with_components(1) != first.grid.with_components(1) {
                return Err(SpaceError::GridMismatch);
            }
            coeffs.extend_from_slice(&p.coeffs);
        }
        Ok(Self { grid, coeffs })
    }

    pub fn is_finite(&self) -> bool {
        self.coeffs.iter().all(|z| z.re.is_finite() && z.im.is_finite())
    }

    /// Projects onto real-valued fields: `û(k) <- (û(k) + conj û(-k)) / 2`.
    pub fn symmetrize(&mut self) {
        let len = self.grid.len();
        for c in 0..self.components() {
            let base = c * len;
            for flat in 0..len {
                let m = self.grid.mirror(flat);
                if m < flat {
                    continue;
                }
                let a = self.coeffs[base + flat];
                let b = self.coeffs[base + m].conj();
                let s = (a + b) * 0.5;
                self.coeffs[base + flat] = s;
                self.coeffs[base + m] = s.conj();
            }
        }
        self.clear_unrepresented();
    }

    /// Largest violation of `û(-k) = conj û(k)`.
    pub fn hermitian_defect(&self) -> f64 {
        let len = self.grid.len();
        let mut worst: f64 = 0.0;
        for c in 0..self.components() {
            let base = c * len;
            for flat in 0..len {
                let m = self.grid.mirror(flat);
                worst = worst.max((self.coeffs[base + flat] - self.coeffs[base + m].conj()).norm());
            }
        }
        worst
    }

    /// Zeroes every coefficient outside the 2/3 cutoff.
    pub fn truncate(&mut self) {
        let len = self.grid.len();
        for (i, z) in self.coeffs.iter_mut().enumerate() {
            if !self.grid.retained(i % len) {
                *z = Complex64::new(0.0, 0.0);
            }
        }
    }

    pub fn truncated(mut self) -> Self {
        self.truncate();
        self
    }

    fn clear_unrepresented(&mut self) {
        let len = self.grid.len();
        for (i, z) in self.coeffs.iter_mut().enumerate() {
            if !self.grid.represented(i % len) {
                *z = Complex64::new(0.0, 0.0);
            }
        }
    }

    pub fn scaled(&self, a: f64) -> Self {
        Self { grid: self.grid.clone(), coeffs: self.coeffs.iter().map(|z| z * a).collect() }
    }

    /// `self += a * other`.
    pub fn axpy(&mut self, a: f64, other: &SpectralField) -> Result<(), SpaceError> {
        self.check_same(other)?;
        for (x, y) in self.coeffs.iter_mut().zip(&other.coeffs) {
            *x += y * a;
        }
        Ok(())
    }

    pub fn check_same(&self, other: &SpectralField) -> Result<(), SpaceError> {
        if self.grid != other.grid {
            return Err(SpaceError::GridMismatch);
        }
        Ok(())
    }

    /// Applies a real multiplier `m(flat)` to every component.
    pub fn multiply(&self, m: impl Fn(usize) -> f64) -> Self {
        let len = self.grid.len();
        let coeffs = self.coeffs.iter().enumerate().map(|(i, z)| z * m(i % len)).collect();
        Self { grid: self.grid.clone(), coeffs }
    }

    /// Weighted sum over all components of `w(flat) * Re(û conj v̂)`.
    pub fn weighted_inner(&self, other: &SpectralField, w: impl Fn(usize) -> f64) -> Result<f64, SpaceError> {
        self.check_same(other)?;
        let len = self.grid.len();
        Ok(self
            .coeffs
            .iter()
            .zip(&other.coeffs)
            .enumerate()
            .map(|(i, (a, b))| w(i % len) * (a.re * b.re + a.im * b.im))
            .sum())
    }

    /// Volume-averaged L² inner product.
    pub fn inner_l2(&self, other: &SpectralField) -> Result<f64, SpaceError> {
        self.weighted_inner(other, |_| 1.0)
    }
}

impl Add for &SpectralField {
    type Output = SpectralField;
    fn add(self, rhs: &SpectralField) -> SpectralField {
        assert!(self.grid == rhs.grid, "grid mismatch in addition");
        SpectralField {
            grid: self.grid.clone(),
            coeffs: self.coeffs.iter().zip(&rhs.coeffs).map(|(a, b)| a + b).collect(),
        }
    }
}

impl Sub for &SpectralField {
    type Output = SpectralField;
    fn sub(self, rhs: &SpectralField) -> SpectralField {
        assert!(self.grid == rhs.grid, "grid mismatch in subtraction");
        SpectralField {
            grid: self.grid.clone(),
            coeffs: self.coeffs.iter().zip(&rhs.coeffs).map(|(a, b)| a - b).collect(),
        }
    }
}

impl Mul<&SpectralField> for f64 {
    type Output = SpectralField;
    fn mul(self, rhs: &SpectralField) -> SpectralField {
        rhs.scaled(self)
    }
}

impl Neg for &SpectralField {
    type Output = SpectralField;
    fn neg(self) -> SpectralField {
        self.scaled(-1.0)
    }
}

/// `( Σ_c Σ_k (1+|k|²)^s |û(k)|² )^{1/2}`.
pub fn sobolev_norm(u: &SpectralField, s: f64) -> f64 {
    let g = u.grid();
    let len = g.len();
    let mut acc = 0.0;
    for (i, z) in u.coeffs().iter().enumerate() {
        let sq = z.norm_sqr();
        if sq != 0.0 {
            acc += (1.0 + g.k2(i % len)).powf(s) * sq;
        }
    }
    acc.sqrt()
}

/// Applies `∏_j (i k_j)^{α_j}` to every component.
pub fn differentiate(u: &SpectralField, alpha: &[usize]) -> Result<SpectralField, SpaceError> {
    let g = u.grid();
    if alpha.len() != g.dimension() {
        return Err(SpaceError::InvalidGrid(format!(
            "multi-index of length {} on a {}-dimensional grid",
            alpha.len(),
            g.dimension()
        )));
    }
    let len = g.len();
    let order: usize = alpha.iter().sum();
    let unit = match order % 4 {
        0 => Complex64::new(1.0, 0.0),
        1 => Complex64::new(0.0, 1.0),
        2 => Complex64::new(-1.0, 0.0),
        _ => Complex64::new(0.0, -1.0),
    };
    let mut out = u.clone();
    for (i, z) in out.coeffs_mut().iter_mut().enumerate() {
        let k = g.wavevector(i % len);
        let mut m = 1.0;
        for (kj, &a) in k.iter().zip(alpha) {
            m *= kj.powi(a as i32);
        }
        *z *= unit * m;
    }
    Ok(out)
}

/// Derivative along one axis.
pub fn partial(u: &SpectralField, axis: usize) -> SpectralField {
    let g = u.grid();
    let len = g.len();
    let d = g.dimension();
    let mut out = u.clone();
    for (i, z) in out.coeffs_mut().iter_mut().enumerate() {
        let k = g.wavevector(i % len)[axis];
        *z = Complex64::new(-z.im * k, z.re * k);
    }
    debug_assert!(axis < d);
    out
}

pub fn laplacian(u: &SpectralField) -> SpectralField {
    let g = u.grid().clone();
    u.multiply(|f| -g.k2(f))
}

pub fn bilaplacian(u: &SpectralField) -> SpectralField {
    let g = u.grid().clone();
    u.multiply(|f| g.k2(f) * g.k2(f))
}

/// Gradient of a scalar field, a `d`-component field.
pub fn gradient(u: &SpectralField) -> Result<SpectralField, SpaceError> {
    if u.components() != 1 {
        return Err(SpaceError::ComponentMismatch { expected: 1, found: u.components() });
    }
    let d = u.grid().dimension();
    let parts: Vec<_> = (0..d).map(|j| partial(u, j)).collect();
    SpectralField::stack(&parts)
}

/// Divergence of a `d`-component field.
pub fn divergence(u: &SpectralField) -> Result<SpectralField, SpaceError> {
    let g = u.grid();
    let d = g.dimension();
    if u.components() != d {
        return Err(SpaceError::ComponentMismatch { expected: d, found: u.components() });
    }
    let scalar = g.with_components(1);
    let len = g.len();
    let mut out = SpectralField::zeros(&scalar);
    for j in 0..d {
        let comp = u.component(j);
        for (flat, z) in out.coeffs_mut().iter_mut().enumerate() {
            let k = g.wavevector(flat)[j];
            let a = comp[flat];
            *z += Complex64::new(-a.im * k, a.re * k);
        }
    }
    debug_assert_eq!(out.coeffs().len(), len);
    Ok(out)
}
