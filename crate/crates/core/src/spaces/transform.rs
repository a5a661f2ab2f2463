use std::fmt;
use std::sync::{Arc, Mutex};

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use super::{Polynomial, SpaceError, SpectralField, WaveGrid};

const UNMAPPED: usize = usize::MAX;

/// Physical-space grid of `m` points per axis attached to a spectral grid.
///
/// Real fields are transformed two at a time by packing them as the real
/// and imaginary parts of one complex array.
#[derive(Clone)]
pub struct Collocation {
    grid: WaveGrid,
    points: usize,
    len: usize,
    to_pad: Vec<usize>,
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
}

impl fmt::Debug for Collocation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Collocation")
            .field("modes", &self.grid.modes())
            .field("dimension", &self.grid.dimension())
            .field("points", &self.points)
            .finish()
    }
}

impl Collocation {
    pub fn new(grid: &WaveGrid, points: usize) -> Self {
        assert!(points >= grid.modes(), "collocation grid coarser than the spectral grid");
        let scalar = grid.with_components(1);
        let d = grid.dimension();
        let len = points.pow(d as u32);
        let to_pad = (0..scalar.len())
            .map(|flat| {
                if !scalar.represented(flat) {
                    return UNMAPPED;
                }
                scalar.wavenumber(flat).iter().fold(0usize, |acc, &k| {
                    acc * points + k.rem_euclid(points as i64) as usize
                })
            })
            .collect();
        let mut planner = FftPlanner::new();
        Self {
            forward: planner.plan_fft_forward(points),
            inverse: planner.plan_fft_inverse(points),
            grid: scalar,
            points,
            len,
            to_pad,
        }
    }

    /// Grid used to evaluate products of the given degree exactly on the
    /// modes kept by the 2/3 rule: `m > n (p/2 + 1/3)`, and never below `3n/2`.
    pub fn for_degree(grid: &WaveGrid, degree: usize) -> Self {
        Self::new(grid, padded_points(grid.modes(), degree))
    }

    /// The standard 3/2 zero-padded grid.
    pub fn padded(grid: &WaveGrid) -> Self {
        Self::new(grid, 3 * grid.modes() / 2)
    }

    /// No padding.
    pub fn native(grid: &WaveGrid) -> Self {
        Self::new(grid, grid.modes())
    }

    pub fn points_per_axis(&self) -> usize {
        self.points
    }

    /// Number of collocation points.
    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn grid(&self) -> &WaveGrid {
        &self.grid
    }

    /// Coordinates of collocation point `j`.
    pub fn point(&self, j: usize) -> Vec<f64> {
        let d = self.grid.dimension();
        let h = self.grid.period() / self.points as f64;
        let mut x = vec![0.0; d];
        let mut rem = j;
        for axis in (0..d).rev() {
            x[axis] = (rem % self.points) as f64 * h;
            rem /= self.points;
        }
        x
    }

    /// Point values of scalar coefficient arrays.
    pub fn synthesize(&self, parts: &[&[Complex64]]) -> Vec<Vec<f64>> {
        let mut out = Vec::with_capacity(parts.len());
        let mut buf = vec![Complex64::new(0.0, 0.0); self.len];
        let mut scratch = vec![Complex64::new(0.0, 0.0); self.inverse.get_inplace_scratch_len()];
        for pair in parts.chunks(2) {
            buf.iter_mut().for_each(|z| *z = Complex64::new(0.0, 0.0));
            let a = pair[0];
            let b = pair.get(1);
            for (flat, &p) in self.to_pad.iter().enumerate() {
                if p == UNMAPPED {
                    continue;
                }
                let mut z = a[flat];
                if let Some(b) = b {
                    let w = b[flat];
                    z += Complex64::new(-w.im, w.re);
                }
                buf[p] = z;
            }
            fft_nd(&mut buf, self.points, self.grid.dimension(), &*self.inverse, &mut scratch);
            out.push(buf.iter().map(|z| z.re).collect());
            if b.is_some() {
                out.push(buf.iter().map(|z| z.im).collect());
            }
        }
        out
    }

    /// Point values of every component of a field.
    pub fn synthesize_field(&self, u: &SpectralField) -> Vec<Vec<f64>> {
        let parts: Vec<&[Complex64]> = (0..u.components()).map(|c| u.component(c)).collect();
        self.synthesize(&parts)
    }

    /// Spectral coefficients of real point values. With `truncate` the
    /// output is restricted to the 2/3 cutoff.
    pub fn analyze(&self, values: &[&[f64]], truncate: bool) -> Result<Vec<Vec<Complex64>>, SpaceError> {
        for v in values {
            if v.iter().any(|x| !x.is_finite()) {
                return Err(SpaceError::Overflow);
            }
        }
        let n = self.grid.len();
        let norm = 1.0 / self.len as f64;
        let mut out = Vec::with_capacity(values.len());
        let mut buf = vec![Complex64::new(0.0, 0.0); self.len];
        let mut scratch = vec![Complex64::new(0.0, 0.0); self.forward.get_inplace_scratch_len()];
        for pair in values.chunks(2) {
            let a = pair[0];
            match pair.get(1) {
                Some(b) => {
                    for ((z, &x), &y) in buf.iter_mut().zip(a.iter()).zip(b.iter()) {
                        *z = Complex64::new(x, y);
                    }
                }
                None => {
                    for (z, &x) in buf.iter_mut().zip(a.iter()) {
                        *z = Complex64::new(x, 0.0);
                    }
                }
            }
            fft_nd(&mut buf, self.points, self.grid.dimension(), &*self.forward, &mut scratch);
            let mut ca = vec![Complex64::new(0.0, 0.0); n];
            let mut cb = if pair.len() == 2 { vec![Complex64::new(0.0, 0.0); n] } else { Vec::new() };
            for flat in 0..n {
                let p = self.to_pad[flat];
                if p == UNMAPPED || (truncate && !self.grid.retained(flat)) {
                    continue;
                }
                let z = buf[p] * norm;
                if pair.len() == 2 {
                    let zm = buf[self.to_pad[self.grid.mirror(flat)]].conj() * norm;
                    ca[flat] = (z + zm) * 0.5;
                    let diff = (z - zm) * 0.5;
                    cb[flat] = Complex64::new(diff.im, -diff.re);
                } else {
                    ca[flat] = z;
                }
            }
            out.push(ca);
            if pair.len() == 2 {
                out.push(cb);
            }
        }
        Ok(out)
    }

    /// Assembles point values into a field on `grid`, whose component count
    /// must match `values.len()`.
    pub fn analyze_field(&self, grid: &WaveGrid, values: &[&[f64]], truncate: bool) -> Result<SpectralField, SpaceError> {
        if grid.components() != values.len() {
            return Err(SpaceError::ComponentMismatch { expected: grid.components(), found: values.len() });
        }
        let parts = self.analyze(values, truncate)?;
        let mut coeffs = Vec::with_capacity(grid.dof());
        for p in parts {
            coeffs.extend(p);
        }
        SpectralField::from_coeffs(grid, coeffs)
    }
}

/// Per-grid store of collocation plans, shared by everything evaluating
/// nonlinearities on one spectral grid.
#[derive(Debug)]
pub struct PlanCache {
    grid: WaveGrid,
    plans: Mutex<Vec<(usize, Arc<Collocation>)>>,
}

impl PlanCache {
    pub fn new(grid: &WaveGrid) -> Self {
        Self { grid: grid.with_components(1), plans: Mutex::new(Vec::new()) }
    }

    pub fn get(&self, points: usize) -> Arc<Collocation> {
        let mut plans = self.plans.lock().expect("plan cache poisoned");
        if let Some((_, c)) = plans.iter().find(|(m, _)| *m == points) {
            return c.clone();
        }
        let c = Arc::new(Collocation::new(&self.grid, points));
        plans.push((points, c.clone()));
        c
    }

    pub fn for_degree(&self, degree: usize) -> Arc<Collocation> {
        self.get(padded_points(self.grid.modes(), degree))
    }

    pub fn padded(&self) -> Arc<Collocation> {
        self.get(3 * self.grid.modes() / 2)
    }
}

/// Smallest even `m ≥ 3n/2` with `m > n (p/2 + 1/3)`.
pub fn padded_points(modes: usize, degree: usize) -> usize {
    let base = 3 * modes / 2;
    let need = (modes * (3 * degree + 2)) / 6 + 1;
    let m = base.max(need);
    m + m % 2
}

/// In-place multidimensional FFT of an `m^d` array, axis by axis.
fn fft_nd(data: &mut [Complex64], m: usize, d: usize, fft: &dyn Fft<f64>, scratch: &mut [Complex64]) {
    let len = data.len();
    let mut line = vec![Complex64::new(0.0, 0.0); m];
    for axis in 0..d {
        let stride = m.pow((d - 1 - axis) as u32);
        if stride == 1 {
            fft.process_with_scratch(data, scratch);
            continue;
        }
        let block = stride * m;
        for outer in (0..len).step_by(block) {
            for inner in 0..stride {
                let base = outer + inner;
                for (j, z) in line.iter_mut().enumerate() {
                    *z = data[base + j * stride];
                }
                fft.process_with_scratch(&mut line, scratch);
                for (j, z) in line.iter().enumerate() {
                    data[base + j * stride] = *z;
                }
            }
        }
    }
}

/// Scalar map applied pointwise by [`pointwise_apply`].
#[derive(Clone)]
pub enum ScalarFn {
    Polynomial(Polynomial),
    Custom(Arc<dyn Fn(f64) -> f64 + Send + Sync>),
}

impl fmt::Debug for ScalarFn {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ScalarFn::Polynomial(p) => write!(f, "Polynomial({:?})", p.coeffs),
            ScalarFn::Custom(_) => write!(f, "Custom"),
        }
    }
}

impl ScalarFn {
    pub fn custom(f: impl Fn(f64) -> f64 + Send + Sync + 'static) -> Self {
        ScalarFn::Custom(Arc::new(f))
    }

    pub fn eval(&self, y: f64) -> f64 {
        match self {
            ScalarFn::Polynomial(p) => p.eval(y),
            ScalarFn::Custom(f) => f(y),
        }
    }
}

/// Evaluates `f(u)` componentwise through a collocation grid.
///
/// With `dealias` on, polynomials are evaluated on a grid large enough to
/// be alias-free on the modes kept by the 2/3 rule and the result is
/// truncated; other maps use the 3/2 grid without truncation. With
/// `dealias` off the native grid is used.
pub fn pointwise_apply(f: &ScalarFn, u: &SpectralField, dealias: bool) -> Result<SpectralField, SpaceError> {
    let (coll, truncate) = match (f, dealias) {
        (_, false) => (Collocation::native(u.grid()), false),
        (ScalarFn::Polynomial(p), true) => (Collocation::for_degree(u.grid(), p.degree()), true),
        (ScalarFn::Custom(_), true) => (Collocation::padded(u.grid()), false),
    };
    let mut values = coll.synthesize_field(u);
    for v in values.iter_mut() {
        for x in v.iter_mut() {
            *x = f.eval(*x);
        }
    }
    let refs: Vec<&[f64]> = values.iter().map(|v| v.as_slice()).collect();
    coll.analyze_field(u.grid(), &refs, truncate)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spaces::{sobolev_norm, FourierTerm};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn term(k: Vec<i64>, cos: f64, sin: f64) -> FourierTerm {
        FourierTerm { component: 0, wavevector: k, cos, sin }
    }

    #[test]
    fn identity_roundtrip_without_dealiasing() {
        let g = WaveGrid::torus(2, 8).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let u = SpectralField::random(&g, &mut rng, 3, 0.0);
        let v = pointwise_apply(&ScalarFn::custom(|y| y), &u, false).unwrap();
        assert!(sobolev_norm(&(&u - &v), 0.0) < 1e-14);
    }

    #[test]
    fn square_of_cosine() {
        let g = WaveGrid::torus(1, 8).unwrap();
        let u = SpectralField::from_terms(&g, &[term(vec![1], 1.0, 0.0)]).unwrap();
        let sq = pointwise_apply(&ScalarFn::Polynomial(Polynomial::monomial(2, 1.0)), &u, true).unwrap();
        let expect = SpectralField::from_terms(&g, &[term(vec![0], 0.5, 0.0), term(vec![2], 0.5, 0.0)]).unwrap();
        assert!(sobolev_norm(&(&sq - &expect), 0.0) < 1e-15);
    }

    #[test]
    fn point_values_of_sine() {
        let g = WaveGrid::torus(1, 8).unwrap();
        let u = SpectralField::from_terms(&g, &[term(vec![1], 0.0, 1.0)]).unwrap();
        let coll = Collocation::padded(&g);
        let vals = coll.synthesize_field(&u);
        for (j, v) in vals[0].iter().enumerate() {
            let x = coll.point(j)[0];
            assert!((v - x.sin()).abs() < 1e-14);
        }
    }

    #[test]
    fn paired_transforms_agree_with_single() {
        let g = WaveGrid::torus(2, 8).unwrap().with_components(3);
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let u = SpectralField::random(&g, &mut rng, 3, 0.0);
        let coll = Collocation::padded(&g);
        let all = coll.synthesize_field(&u);
        for c in 0..3 {
            let single = coll.synthesize(&[u.component(c)]);
            for (a, b) in all[c].iter().zip(&single[0]) {
                assert!((a - b).abs() < 1e-13);
            }
        }
        let refs: Vec<&[f64]> = all.iter().map(|v| v.as_slice()).collect();
        let back = coll.analyze_field(&g, &refs, false).unwrap();
        assert!(sobolev_norm(&(&back - &u), 0.0) < 1e-13);
    }

    #[test]
    fn overflow_is_reported() {
        let g = WaveGrid::torus(1, 8).unwrap();
        let u = SpectralField::constant(&g, &[2.0]).unwrap();
        let r = pointwise_apply(&ScalarFn::custom(|y| if y > 1.0 { f64::INFINITY } else { y }), &u, true);
        assert!(matches!(r, Err(SpaceError::Overflow)));
    }

    #[test]
    fn padding_sizes() {
        assert_eq!(padded_points(16, 2), 24);
        assert_eq!(padded_points(16, 3), 30);
        assert_eq!(padded_points(8, 1), 12);
        for n in [4usize, 8, 16, 32] {
            for p in 0..6usize {
                let m = padded_points(n, p);
                assert!(m % 2 == 0 && 2 * m >= 3 * n);
                assert!(6 * m > n * (3 * p + 2));
            }
        }
    }
}
