use std::f64::consts::PI;
use std::sync::Arc;

use super::SpaceError;

/// Truncated Fourier grid on the d-torus.
///
/// Flat indices are row-major with axis 0 slowest. Along each axis the
/// index `i` carries the integer wavenumber `i` for `i < n/2` and `i - n`
/// otherwise. The Nyquist entry `-n/2` has no conjugate partner, so it is
/// treated as unrepresented and always holds zero.
#[derive(Clone, Debug)]
pub struct WaveGrid {
    dimension: usize,
    modes: usize,
    period: f64,
    components: usize,
    tables: Arc<Tables>,
}

#[derive(Debug)]
struct Tables {
    wavenumbers: Vec<i64>,
    wavevectors: Vec<f64>,
    k2: Vec<f64>,
    represented: Vec<bool>,
    retained: Vec<bool>,
    mirror: Vec<usize>,
}

impl PartialEq for WaveGrid {
    fn eq(&self, other: &Self) -> bool {
        self.dimension == other.dimension
            && self.modes == other.modes
            && self.period == other.period
            && self.components == other.components
    }
}

impl WaveGrid {
    pub fn new(
        dimension: usize,
        modes: usize,
        period: f64,
        components: usize,
    ) -> Result<Self, SpaceError> {
        if !(1..=4).contains(&dimension) {
            return Err(SpaceError::InvalidGrid(format!(
                "dimension {dimension} not in 1..=4"
            )));
        }
        if modes < 4 || modes % 2 != 0 {
            return Err(SpaceError::InvalidGrid(format!(
                "modes per axis must be even and at least 4, got {modes}"
            )));
        }
        if !(period.is_finite() && period > 0.0) {
            return Err(SpaceError::InvalidGrid(format!("period {period} must be positive")));
        }
        if components == 0 {
            return Err(SpaceError::InvalidGrid("components must be at least 1".into()));
        }
        Ok(Self {
            dimension,
            modes,
            period,
            components,
            tables: Arc::new(Tables::build(dimension, modes, period)),
        })
    }

    /// Scalar grid on the standard torus of side 2π.
    pub fn torus(dimension: usize, modes: usize) -> Result<Self, SpaceError> {
        Self::new(dimension, modes, 2.0 * PI, 1)
    }

    /// Same wavenumber tables, different component count.
    pub fn with_components(&self, components: usize) -> Self {
        assert!(components >= 1);
        Self { components, ..self.clone() }
    }

    pub fn dimension(&self) -> usize {
        self.dimension
    }
    pub fn modes(&self) -> usize {
        self.modes
    }
    pub fn period(&self) -> f64 {
        self.period
    }
    pub fn components(&self) -> usize {
        self.components
    }
    /// Number of wavevectors per component, `n^d`.
    pub fn len(&self) -> usize {
        self.tables.k2.len()
    }
    pub fn is_empty(&self) -> bool {
        false
    }
    /// Total degrees of freedom `c * n^d`.
    pub fn dof(&self) -> usize {
        self.components * self.len()
    }
    /// Multiplier turning integer wavenumbers into physical ones.
    pub fn scale(&self) -> f64 {
        2.0 * PI / self.period
    }
    /// Largest integer wavenumber kept by the 2/3 rule.
    pub fn cutoff(&self) -> usize {
        self.modes / 3
    }
    pub fn wavenumber(&self, flat: usize) -> &[i64] {
        &self.tables.wavenumbers[flat * self.dimension..(flat + 1) * self.dimension]
    }
    pub fn wavevector(&self, flat: usize) -> &[f64] {
        &self.tables.wavevectors[flat * self.dimension..(flat + 1) * self.dimension]
    }
    /// |k|² with physical wavenumbers.
    pub fn k2(&self, flat: usize) -> f64 {
        self.tables.k2[flat]
    }
    pub fn k2_table(&self) -> &[f64] {
        &self.tables.k2
    }
    pub fn represented(&self, flat: usize) -> bool {
        self.tables.represented[flat]
    }
    /// Inside the 2/3 cutoff on every axis.
    pub fn retained(&self, flat: usize) -> bool {
        self.tables.retained[flat]
    }
    /// Flat index of `-k`.
    pub fn mirror(&self, flat: usize) -> usize {
        self.tables.mirror[flat]
    }
    /// Flat index of an integer wavenumber, if representable.
    pub fn flat_index(&self, k: &[i64]) -> Option<usize> {
        if k.len() != self.dimension {
            return None;
        }
        let half = (self.modes / 2) as i64;
        let mut flat = 0usize;
        for &kj in k {
            if kj <= -half || kj >= half {
                return None;
            }
            let i = if kj < 0 { kj + self.modes as i64 } else { kj };
            flat = flat * self.modes + i as usize;
        }
        Some(flat)
    }
}

impl Tables {
    fn build(d: usize, n: usize, period: f64) -> Self {
        let len = n.pow(d as u32);
        let scale = 2.0 * PI / period;
        let half = (n / 2) as i64;
        let cut = (n / 3) as i64;
        let mut wavenumbers = Vec::with_capacity(len * d);
        let mut wavevectors = Vec::with_capacity(len * d);
        let mut k2 = Vec::with_capacity(len);
        let mut represented = Vec::with_capacity(len);
        let mut retained = Vec::with_capacity(len);
        let mut mirror = Vec::with_capacity(len);
        let mut digits = vec![0usize; d];
        for flat in 0..len {
            let mut rem = flat;
            for axis in (0..d).rev() {
                digits[axis] = rem % n;
                rem /= n;
            }
            let mut sq = 0.0;
            let mut rep = true;
            let mut keep = true;
            let mut mirror_flat = 0usize;
            for &i in &digits {
                let k = if (i as i64) < half { i as i64 } else { i as i64 - n as i64 };
                if k == -half {
                    rep = false;
                }
                if k.abs() > cut {
                    keep = false;
                }
                wavenumbers.push(k);
                let kp = k as f64 * scale;
                wavevectors.push(kp);
                sq += kp * kp;
                mirror_flat = mirror_flat * n + (n - i) % n;
            }
            k2.push(sq);
            represented.push(rep);
            retained.push(rep && keep);
            mirror.push(mirror_flat);
        }
        Self { wavenumbers, wavevectors, k2, represented, retained, mirror }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_bad_parameters() {
        assert!(WaveGrid::torus(0, 8).is_err());
        assert!(WaveGrid::torus(5, 8).is_err());
        assert!(WaveGrid::torus(2, 7).is_err());
        assert!(WaveGrid::torus(2, 2).is_err());
        assert!(WaveGrid::new(1, 8, -1.0, 1).is_err());
    }

    #[test]
    fn wavenumber_layout() {
        let g = WaveGrid::torus(2, 8).unwrap();
        assert_eq!(g.len(), 64);
        assert_eq!(g.with_components(2).dof(), 128);
        let f = g.flat_index(&[-1, 3]).unwrap();
        assert_eq!(g.wavenumber(f), &[-1, 3]);
        assert_eq!(g.wavenumber(g.mirror(f)), &[1, -3]);
        assert!((g.k2(f) - 10.0).abs() < 1e-14);
        assert!(g.flat_index(&[4, 0]).is_none());
        let nyq = 4 * 8;
        assert!(!g.represented(nyq));
        assert!(g.retained(g.flat_index(&[2, -2]).unwrap()));
        assert!(!g.retained(g.flat_index(&[3, 0]).unwrap()));
    }

    #[test]
    fn period_scales_wavevectors() {
        let g = WaveGrid::new(1, 8, PI, 1).unwrap();
        let f = g.flat_index(&[1]).unwrap();
        assert!((g.wavevector(f)[0] - 2.0).abs() < 1e-15);
    }
}
