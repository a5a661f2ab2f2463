use serde::{Deserialize, Serialize};

use super::{sobolev_norm, SpaceError, SpectralField};

/// Sobolev exponents of the scale `V ⊂ H ⊂ V*`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GelfandTriple {
    pub s_dual: f64,
    pub s_h: f64,
    pub s_v: f64,
}

impl GelfandTriple {
    pub fn new(s_dual: f64, s_v: f64) -> Self {
        Self { s_dual, s_h: 0.5 * (s_dual + s_v), s_v }
    }

    /// `(H⁻¹, L², H¹)`.
    pub fn weak() -> Self {
        Self::new(-1.0, 1.0)
    }

    /// `(L², H¹, H²)`.
    pub fn strong() -> Self {
        Self::new(0.0, 2.0)
    }

    /// `(H⁻², L², H²)`.
    pub fn fourth_order() -> Self {
        Self::new(-2.0, 2.0)
    }

    /// Exponent of `V_β`.
    pub fn s_of(&self, beta: f64) -> f64 {
        (1.0 - beta) * self.s_dual + beta * self.s_v
    }

    pub fn h_norm(&self, u: &SpectralField) -> f64 {
        sobolev_norm(u, self.s_h)
    }

    pub fn v_norm(&self, u: &SpectralField) -> f64 {
        sobolev_norm(u, self.s_v)
    }

    pub fn dual_norm(&self, u: &SpectralField) -> f64 {
        sobolev_norm(u, self.s_dual)
    }

    /// Squared H-norm without the square root.
    pub fn h_norm_sq(&self, u: &SpectralField) -> f64 {
        weighted_sq(u, self.s_h)
    }

    pub fn v_norm_sq(&self, u: &SpectralField) -> f64 {
        weighted_sq(u, self.s_v)
    }
}

fn weighted_sq(u: &SpectralField, s: f64) -> f64 {
    let g = u.grid();
    let len = g.len();
    if s == 0.0 {
        return u.coeffs().iter().map(|z| z.norm_sqr()).sum();
    }
    u.coeffs()
        .iter()
        .enumerate()
        .map(|(i, z)| {
            let w = 1.0 + g.k2(i % len);
            let m = if s == 1.0 {
                w
            } else if s == 2.0 {
                w * w
            } else {
                w.powf(s)
            };
            m * z.norm_sqr()
        })
        .sum()
}

/// `‖u‖_{V_β}` with `s(β) = (1-β) s_dual + β s_V`.
pub fn norm_beta(u: &SpectralField, triple: &GelfandTriple, beta: f64) -> Result<f64, SpaceError> {
    if !(0.0..=1.0).contains(&beta) {
        return Err(SpaceError::BetaOutOfRange(beta));
    }
    Ok(sobolev_norm(u, triple.s_of(beta)))
}

/// Extension of the H inner product to `V × V*`.
pub fn duality_pairing(v: &SpectralField, w: &SpectralField, triple: &GelfandTriple) -> Result<f64, SpaceError> {
    let g = v.grid().clone();
    let s = triple.s_h;
    if s == 0.0 {
        v.inner_l2(w)
    } else {
        v.weighted_inner(w, |f| (1.0 + g.k2(f)).powf(s))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spaces::{laplacian, WaveGrid};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn exponent_is_linear_in_beta() {
        for t in [GelfandTriple::weak(), GelfandTriple::strong(), GelfandTriple::fourth_order()] {
            assert_eq!(t.s_of(0.5), t.s_h);
            assert_eq!(t.s_of(0.0), t.s_dual);
            assert_eq!(t.s_of(1.0), t.s_v);
        }
        assert_eq!(GelfandTriple::strong().s_of(0.75), 1.5);
    }

    #[test]
    fn beta_endpoints_and_range() {
        let g = WaveGrid::torus(2, 8).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let u = SpectralField::random(&g, &mut rng, 2, 0.0);
        let t = GelfandTriple::weak();
        assert_eq!(norm_beta(&u, &t, 0.5).unwrap(), sobolev_norm(&u, 0.0));
        assert_eq!(norm_beta(&u, &t, 1.0).unwrap(), t.v_norm(&u));
        assert!(norm_beta(&u, &t, 1.5).is_err());
        assert!(norm_beta(&u, &t, -0.1).is_err());
    }

    #[test]
    fn strong_pairing_is_l2_minus_laplacian() {
        let g = WaveGrid::torus(2, 8).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let v = SpectralField::random(&g, &mut rng, 2, 0.0);
        let w = SpectralField::random(&g, &mut rng, 2, 0.0);
        let t = GelfandTriple::strong();
        let expect = v.inner_l2(&w).unwrap() - laplacian(&v).inner_l2(&w).unwrap();
        let got = duality_pairing(&v, &w, &t).unwrap();
        assert!((got - expect).abs() <= 1e-12 * expect.abs().max(1.0));
        let self_pair = duality_pairing(&v, &v, &t).unwrap();
        assert!((self_pair - t.h_norm(&v).powi(2)).abs() <= 1e-12 * self_pair);
        assert!((t.h_norm_sq(&v) - self_pair).abs() <= 1e-12 * self_pair);
    }

    #[test]
    fn pairing_rejects_mismatched_grids() {
        let a = SpectralField::zeros(&WaveGrid::torus(1, 8).unwrap());
        let b = SpectralField::zeros(&WaveGrid::torus(1, 16).unwrap());
        assert!(duality_pairing(&a, &b, &GelfandTriple::weak()).is_err());
    }
}
