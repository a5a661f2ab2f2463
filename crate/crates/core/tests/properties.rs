use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use spdekit::noise::{NoiseSpec, NoiseStream, Transport};
use spdekit::operators::{cancellation_check, helmholtz_project, Equation, EquationSpec};
use spdekit::solver::{simulate_path, PathStatus, SolverConfig};
use spdekit::spaces::{
    differentiate, divergence, gradient, laplacian, norm_beta, sobolev_norm, Collocation, GelfandTriple, Polynomial,
    SpectralField, WaveGrid,
};

fn field(d: usize, modes: usize, comps: usize, seed: u64, cutoff: usize) -> SpectralField {
    let g = WaveGrid::torus(d, modes).unwrap().with_components(comps);
    SpectralField::random(&g, &mut ChaCha8Rng::seed_from_u64(seed), cutoff, 1.0)
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / a.abs().max(b.abs()).max(f64::MIN_POSITIVE)
}

fn l2_sq(u: &SpectralField) -> f64 {
    u.inner_l2(u).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn laplacian_norm_is_sum_of_second_derivatives(seed in any::<u64>(), d in 1usize..=3) {
        let u = field(d, 8, 1, seed, 3);
        let mut sum = 0.0;
        for j in 0..d {
            for k in 0..d {
                let mut alpha = vec![0; d];
                alpha[j] += 1;
                alpha[k] += 1;
                sum += l2_sq(&differentiate(&u, &alpha).unwrap());
            }
        }
        prop_assert!(rel(l2_sq(&laplacian(&u)), sum) < 1e-12);
    }

    #[test]
    fn helmholtz_is_an_orthogonal_projection(seed in any::<u64>(), d in 2usize..=3) {
        let u = field(d, 8, d, seed, 3);
        let v = field(d, 8, d, seed ^ 0x55, 3);
        let pu = helmholtz_project(&u).unwrap();
        let ppu = helmholtz_project(&pu).unwrap();
        let diff = { let mut x = ppu.clone(); x.axpy(-1.0, &pu).unwrap(); l2_sq(&x).sqrt() };
        prop_assert!(diff <= 1e-13 * l2_sq(&pu).sqrt().max(1.0));
        let a = pu.inner_l2(&v).unwrap();
        let b = u.inner_l2(&helmholtz_project(&v).unwrap()).unwrap();
        prop_assert!((a - b).abs() <= 1e-13 * (l2_sq(&u) * l2_sq(&v)).sqrt().max(1.0));
        prop_assert!(sobolev_norm(&divergence(&pu).unwrap(), 0.0) < 1e-12 * l2_sq(&u).sqrt().max(1.0));
    }

    #[test]
    fn div_grad_is_laplacian(seed in any::<u64>(), d in 1usize..=3) {
        let u = field(d, 8, 1, seed, 3);
        let mut x = divergence(&gradient(&u).unwrap()).unwrap();
        x.axpy(-1.0, &laplacian(&u)).unwrap();
        prop_assert!(l2_sq(&x).sqrt() < 1e-13 * l2_sq(&laplacian(&u)).sqrt().max(1.0));
    }

    #[test]
    fn parseval_against_collocation(seed in any::<u64>(), d in 1usize..=2) {
        let u = field(d, 16, 1, seed, 5);
        let coll = Collocation::native(u.grid());
        let vals = coll.synthesize_field(&u);
        let ms = vals[0].iter().map(|y| y * y).sum::<f64>() / coll.len() as f64;
        prop_assert!(rel(sobolev_norm(&u, 0.0).powi(2), ms) < 1e-12);
    }

    #[test]
    fn sobolev_norm_is_nondecreasing(seed in any::<u64>(), s in -2.0f64..3.0, ds in 0.0f64..2.0) {
        let u = field(2, 8, 1, seed, 3);
        prop_assert!(sobolev_norm(&u, s) <= sobolev_norm(&u, s + ds) * (1.0 + 1e-14));
    }

    #[test]
    fn interpolation_inequality_with_unit_constant(
        seed in any::<u64>(), beta in 0.5f64..=1.0, which in 0usize..3, decay in 0.0f64..3.0,
    ) {
        let t = [GelfandTriple::weak(), GelfandTriple::strong(), GelfandTriple::fourth_order()][which];
        let g = WaveGrid::torus(2, 8).unwrap();
        let u = SpectralField::random(&g, &mut ChaCha8Rng::seed_from_u64(seed), 3, decay);
        let lhs = norm_beta(&u, &t, beta).unwrap();
        let rhs = t.h_norm(&u).powf(2.0 - 2.0 * beta) * t.v_norm(&u).powf(2.0 * beta - 1.0);
        prop_assert!(lhs <= rhs * (1.0 + 1e-12), "{lhs} > {rhs}");
    }

    #[test]
    fn transport_and_flux_cancel(seed in any::<u64>(), b1 in -2.0f64..2.0, b2 in -2.0f64..2.0, solenoidal in any::<bool>()) {
        let u = field(2, 16, 1, seed, 5);
        let b = if solenoidal {
            let raw = field(2, 16, 2, seed ^ 0xb, 2);
            vec![Transport::Field(helmholtz_project(&raw).unwrap()), Transport::Constant(vec![b1, b2])]
        } else {
            vec![Transport::Constant(vec![b1, b2])]
        };
        let sq = Polynomial::monomial(2, 1.0);
        let r = cancellation_check(&b, &[b2, b1], &sq, &sq, &u).unwrap();
        prop_assert!(r.flux < 1e-10 && r.transport < 1e-10, "{r:?}");
    }

    #[test]
    fn leading_part_never_amplifies_modes(seed in any::<u64>(), dt_exp in -4.0f64..1.0) {
        let g = WaveGrid::torus(2, 8).unwrap();
        let u0 = SpectralField::random(&g, &mut ChaCha8Rng::seed_from_u64(seed), 3, 0.0);
        let dt = 10f64.powf(dt_exp);
        for eq in [Equation::heat(2), Equation::CahnHilliard { f: Polynomial::zero() }, Equation::AllenCahn { f: Polynomial::zero() }] {
            let spec = EquationSpec::new(eq, g.clone(), NoiseSpec::silent(1), None).unwrap();
            let cfg = SolverConfig { dt, horizon: 5.0 * dt, record_stride: 1, ..SolverConfig::default() };
            let tr = simulate_path(&spec, &u0, &cfg, &NoiseStream::new(seed, 0)).unwrap();
            let mut prev = u0.coeffs().to_vec();
            for s in &tr.snapshots[1..] {
                for (a, b) in s.field.coeffs().iter().zip(&prev) {
                    prop_assert!(a.norm() <= b.norm() * (1.0 + 1e-14) + 1e-300);
                }
                prev = s.field.coeffs().to_vec();
            }
        }
    }

    #[test]
    fn raising_thresholds_never_creates_a_blowup(
        seed in any::<u64>(), c0 in 0.5f64..2.0, h in 1.0f64..50.0, factor in 1.0f64..100.0, sign in any::<bool>(),
    ) {
        let g = WaveGrid::torus(2, 8).unwrap();
        let f = Polynomial::monomial(3, if sign { 1.0 } else { -1.0 });
        let noise = NoiseSpec::multiplicative(vec![0.5], Polynomial::monomial(1, 1.0));
        let spec = EquationSpec::new(Equation::AllenCahn { f }, g.clone(), noise, None).unwrap();
        let u0 = SpectralField::constant(&g, &[c0]).unwrap();
        let base = SolverConfig { dt: 0.01, horizon: 0.5, blowup_h_threshold: h, blowup_v_integral_threshold: h, ..SolverConfig::default() };
        let high = SolverConfig { blowup_h_threshold: h * factor, blowup_v_integral_threshold: h * factor, ..base.clone() };
        let s = NoiseStream::new(seed, 0);
        let lo = simulate_path(&spec, &u0, &base, &s).unwrap();
        let hi = simulate_path(&spec, &u0, &high, &s).unwrap();
        if lo.status == PathStatus::Completed {
            prop_assert_eq!(hi.status, PathStatus::Completed);
        }
        if let (PathStatus::BlownUp { step: a, .. }, PathStatus::BlownUp { step: b, .. }) = (lo.status, hi.status) {
            prop_assert!(b >= a);
        }
        prop_assert!(lo.v_energy_running.windows(2).all(|w| w[1] >= w[0]));
    }
}
