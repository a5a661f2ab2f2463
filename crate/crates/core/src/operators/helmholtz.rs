use num_complex::Complex64;

use crate::spaces::{SpaceError, SpectralField};

/// Orthogonal projection onto divergence-free fields:
/// `û(k) - k (k·û(k)) / |k|²` for `k ≠ 0`, the mean left unchanged.
pub fn helmholtz_project(u: &SpectralField) -> Result<SpectralField, SpaceError> {
    let g = u.grid();
    let d = g.dimension();
    if u.components() != d {
        return Err(SpaceError::ComponentMismatch { expected: d, found: u.components() });
    }
    let len = g.len();
    let mut out = u.clone();
    let c = out.coeffs_mut();
    for flat in 1..len {
        let k2 = g.k2(flat);
        if k2 == 0.0 {
            continue;
        }
        let k = g.wavevector(flat);
        let mut dot = Complex64::new(0.0, 0.0);
        for j in 0..d {
            dot += c[j * len + flat] * k[j];
        }
        let dot = dot / k2;
        for j in 0..d {
            c[j * len + flat] -= dot * k[j];
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spaces::{divergence, gradient, sobolev_norm, FourierTerm, WaveGrid};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn gradients_are_annihilated() {
        let g = WaveGrid::torus(3, 8).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let p = SpectralField::random(&g, &mut rng, 3, 0.0);
        let mut grad = gradient(&p).unwrap();
        grad.coeffs_mut()[0] = Complex64::new(0.0, 0.0);
        let out = helmholtz_project(&grad).unwrap();
        assert!(sobolev_norm(&out, 0.0) < 1e-13 * sobolev_norm(&grad, 0.0));
    }

    #[test]
    fn projection_is_idempotent_and_solenoidal() {
        let g = WaveGrid::torus(3, 8).unwrap().with_components(3);
        let mut rng = ChaCha8Rng::seed_from_u64(10);
        let u = SpectralField::random(&g, &mut rng, 3, 0.0);
        let pu = helmholtz_project(&u).unwrap();
        let ppu = helmholtz_project(&pu).unwrap();
        assert!(sobolev_norm(&(&pu - &ppu), 0.0) < 1e-13 * sobolev_norm(&pu, 0.0));
        assert!(sobolev_norm(&divergence(&pu).unwrap(), 0.0) < 1e-12);
    }

    #[test]
    fn explicit_single_modes() {
        let g = WaveGrid::torus(3, 8).unwrap().with_components(3);
        let along = SpectralField::from_terms(&g, &[FourierTerm { component: 0, wavevector: vec![1, 0, 0], cos: 1.0, sin: 0.0 }]).unwrap();
        assert!(sobolev_norm(&helmholtz_project(&along).unwrap(), 0.0) < 1e-15);
        let across = SpectralField::from_terms(&g, &[FourierTerm { component: 0, wavevector: vec![0, 1, 0], cos: 1.0, sin: 0.0 }]).unwrap();
        let out = helmholtz_project(&across).unwrap();
        assert!(sobolev_norm(&(&out - &across), 0.0) < 1e-15);
    }

    #[test]
    fn rejects_scalars() {
        let g = WaveGrid::torus(2, 8).unwrap();
        assert!(helmholtz_project(&SpectralField::zeros(&g)).is_err());
    }
}
