use super::*;
use crate::noise::{NoiseSpec, NoiseStream};
use crate::operators::Equation;
use crate::spaces::{FourierTerm, Polynomial, WaveGrid};

fn term(k: Vec<i64>, cos: f64, sin: f64) -> FourierTerm {
    FourierTerm { component: 0, wavevector: k, cos, sin }
}

fn quiet(dt: f64, horizon: f64) -> SolverConfig {
    SolverConfig { record_stride: 1, ..SolverConfig::new(dt, horizon) }
}

#[test]
fn heat_mode_decays_by_backward_euler() {
    let g = WaveGrid::torus(2, 8).unwrap();
    let spec = EquationSpec::new(Equation::heat(2), g.clone(), NoiseSpec::silent(1), None).unwrap();
    let u = SpectralField::from_terms(&g, &[term(vec![2, 1], 1.0, 0.0)]).unwrap();
    let dt = 0.1;
    let next = step(&spec, &u, 0.0, &WienerIncrement::zero(dt, 1), Scheme::ImexEuler).unwrap();
    let want = u.scaled(1.0 / (1.0 + dt * 5.0));
    assert!(next.coeffs().iter().zip(want.coeffs()).all(|(a, b)| (a - b).norm() < 1e-16));
}

#[test]
fn zero_drift_additive_noise_is_exact() {
    let g = WaveGrid::torus(1, 8).unwrap();
    let a = SpectralField::from_terms(&g, &[term(vec![1], 0.5, 0.0)]).unwrap();
    let mut noise = NoiseSpec::silent(1);
    noise.additive[0] = Some(a.clone());
    let eq = Equation::SecondOrder {
        a: vec![0.0],
        f: Polynomial::zero(),
        flux_direction: vec![0.0],
        flux: Polynomial::zero(),
    };
    let spec = EquationSpec::new(eq, g.clone(), noise, None).unwrap();
    let u = SpectralField::from_terms(&g, &[term(vec![2], 0.0, 1.0)]).unwrap();
    let dw = WienerIncrement { dt: 0.01, values: vec![0.3] };
    let next = step(&spec, &u, 0.0, &dw, Scheme::ImexEuler).unwrap();
    let mut want = u.clone();
    want.axpy(0.3, &a).unwrap();
    assert_eq!(next.coeffs(), want.coeffs());
}

/// Closed form of `c' = c − c³`.
fn logistic(c0: f64, t: f64) -> f64 {
    c0 * t.exp() / (1.0 + c0 * c0 * ((2.0 * t).exp() - 1.0)).sqrt()
}

#[test]
fn allen_cahn_constant_converges_at_first_order() {
    let g = WaveGrid::torus(2, 8).unwrap();
    let spec = EquationSpec::new(Equation::allen_cahn(), g.clone(), NoiseSpec::silent(1), None).unwrap();
    let c0 = 0.2;
    let u0 = SpectralField::constant(&g, &[c0]).unwrap();
    let stream = NoiseStream::new(0, 0);
    let errs: Vec<f64> = (6..=10)
        .map(|p| {
            let tr = simulate_path(&spec, &u0, &SolverConfig::new(2f64.powi(-p), 1.0), &stream).unwrap();
            (tr.final_state.mean(0) - logistic(c0, 1.0)).abs()
        })
        .collect();
    for w in errs.windows(2) {
        let r = w[0] / w[1];
        assert!((r - 2.0).abs() < 0.15, "{errs:?}");
    }
}

#[test]
fn zero_data_stays_zero() {
    let g = WaveGrid::torus(2, 8).unwrap();
    let noise = NoiseSpec::multiplicative(vec![0.5, 0.2], Polynomial::monomial(2, 1.0));
    let spec = EquationSpec::new(Equation::allen_cahn(), g.clone(), noise, None).unwrap();
    let tr = simulate_path(&spec, &SpectralField::zeros(&g), &quiet(0.01, 0.5), &NoiseStream::new(1, 2)).unwrap();
    assert!(tr.status.is_completed());
    assert!(tr.final_state.coeffs().iter().all(|z| z.norm() == 0.0));
    assert_eq!(tr.sup_h_sq(), 0.0);
}

#[test]
fn cubic_growth_blows_up_and_its_twin_does_not() {
    let g = WaveGrid::torus(2, 8).unwrap();
    let u0 = SpectralField::constant(&g, &[2.0]).unwrap();
    let cfg = SolverConfig::new(1e-3, 1.0);
    let stream = NoiseStream::new(0, 0);
    let bad = EquationSpec::new(
        Equation::AllenCahn { f: Polynomial::monomial(3, 1.0) },
        g.clone(),
        NoiseSpec::silent(1),
        None,
    )
    .unwrap();
    let tr = simulate_path(&bad, &u0, &cfg, &stream).unwrap();
    let t = tr.status.halt_time().expect("must blow up");
    assert!(matches!(tr.status, PathStatus::BlownUp { .. }));
    assert!((t - 0.125).abs() < 0.0125, "{t}");
    let good = EquationSpec::new(
        Equation::AllenCahn { f: Polynomial::monomial(3, -1.0) },
        g.clone(),
        NoiseSpec::silent(1),
        None,
    )
    .unwrap();
    assert!(simulate_path(&good, &u0, &cfg, &stream).unwrap().status.is_completed());
}

#[test]
fn cahn_hilliard_conserves_mass_without_noise() {
    let g = WaveGrid::torus(2, 16).unwrap();
    let spec = EquationSpec::new(Equation::double_well_cahn_hilliard(), g.clone(), NoiseSpec::silent(1), None).unwrap();
    let mut rng = <rand_chacha::ChaCha8Rng as rand::SeedableRng>::seed_from_u64(3);
    let mut u0 = SpectralField::random(&g, &mut rng, 4, 2.0).scaled(0.3);
    u0.coeffs_mut()[0] = num_complex::Complex64::new(0.1, 0.0);
    let tr = simulate_path(&spec, &u0, &quiet(1e-3, 0.2), &NoiseStream::new(0, 0)).unwrap();
    assert!(tr.status.is_completed());
    for s in &tr.snapshots {
        assert!((s.field.mean(0) - 0.1).abs() < 1e-12);
    }
}

#[test]
fn leading_part_is_unconditionally_stable() {
    let g = WaveGrid::torus(2, 16).unwrap();
    let spec = EquationSpec::new(Equation::SwiftHohenberg { f: Polynomial::new(vec![0.0, -1.0]) }, g.clone(), NoiseSpec::silent(1), None)
        .unwrap();
    let mut rng = <rand_chacha::ChaCha8Rng as rand::SeedableRng>::seed_from_u64(8);
    let u0 = SpectralField::random(&g, &mut rng, 5, 0.0);
    for dt in [1e-3, 0.1, 10.0, 1e4] {
        let mut u = u0.clone();
        for _ in 0..5 {
            let next = step(&spec, &u, 0.0, &WienerIncrement::zero(dt, 1), Scheme::ImexEuler).unwrap();
            assert!(next.coeffs().iter().zip(u.coeffs()).all(|(a, b)| a.norm() <= b.norm() * (1.0 + 1e-15)));
            u = next;
        }
    }
}

#[test]
fn explicit_and_imex_agree_at_small_dt() {
    let g = WaveGrid::torus(1, 16).unwrap();
    let spec = EquationSpec::new(
        Equation::QuasiLinear1d { a: crate::operators::Diffusivity { base: 1.0, amplitude: 0.5 }, f: Polynomial::new(vec![0.0, -1.0]) },
        g.clone(),
        NoiseSpec::silent(1),
        None,
    )
    .unwrap();
    let u0 = SpectralField::from_terms(&g, &[term(vec![1], 0.8, 0.0), term(vec![2], 0.0, 0.3)]).unwrap();
    let run = |scheme, dt| {
        let cfg = SolverConfig { scheme, ..SolverConfig::new(dt, 0.1) };
        simulate_path(&spec, &u0, &cfg, &NoiseStream::new(0, 0)).unwrap().final_state
    };
    let a = run(Scheme::ImexEuler, 1e-4);
    let b = run(Scheme::ExplicitEuler, 1e-4);
    let diff = (&a - &b).coeffs().iter().map(|z| z.norm()).fold(0.0, f64::max);
    assert!(diff < 1e-4, "{diff}");
}

#[test]
fn deterministic_ledger_defect_is_second_order() {
    let g = WaveGrid::torus(1, 8).unwrap();
    let spec = EquationSpec::new(Equation::heat(1), g.clone(), NoiseSpec::silent(1), None).unwrap();
    let u0 = SpectralField::from_terms(&g, &[term(vec![1], 1.0, 0.0)]).unwrap();
    let worst = |dt: f64| {
        let cfg = SolverConfig { ledger: true, ..SolverConfig::new(dt, 0.1) };
        let tr = simulate_path(&spec, &u0, &cfg, &NoiseStream::new(0, 0)).unwrap();
        tr.ledger.iter().map(|r| r.residual.abs()).fold(0.0, f64::max)
    };
    let r = worst(1e-2) / worst(5e-3);
    assert!((r - 4.0).abs() < 0.4, "{r}");
}

#[test]
fn snapshot_and_csv_export() {
    let g = WaveGrid::torus(2, 8).unwrap();
    let mut noise = NoiseSpec::silent(1);
    noise.additive[0] = Some(SpectralField::constant(&g, &[0.2]).unwrap());
    let spec = EquationSpec::new(Equation::allen_cahn(), g.clone(), noise, None).unwrap();
    let u0 = SpectralField::from_terms(&g, &[term(vec![1, 1], 0.5, 0.1)]).unwrap();
    let cfg = SolverConfig { ledger: true, record_stride: 3, ..SolverConfig::new(0.01, 0.1) };
    let tr = simulate_path(&spec, &u0, &cfg, &NoiseStream::new(4, 0)).unwrap();
    assert_eq!(tr.snapshots.iter().map(|s| s.step).collect::<Vec<_>>(), [0, 3, 6, 9, 10]);
    let mut buf = Vec::new();
    write_snapshots(&tr.snapshots, &mut buf).unwrap();
    let back = read_snapshots(buf.as_slice(), &g).unwrap();
    assert_eq!(back.len(), tr.snapshots.len());
    for (a, b) in back.iter().zip(&tr.snapshots) {
        assert_eq!(a.field.coeffs(), b.field.coeffs());
        assert_eq!(a.time, b.time);
    }
    let mut csv = Vec::new();
    write_norms_csv(&tr, &mut csv).unwrap();
    let text = String::from_utf8(csv).unwrap();
    assert_eq!(text.lines().count(), 12);
    assert!(text.starts_with("time,h_norm,v_integral,delta_energy"));
    assert!(tr.v_energy_running.windows(2).all(|w| w[1] >= w[0]));
}

#[test]
fn config_validation() {
    assert!(SolverConfig::new(0.0, 1.0).validate().is_err());
    assert!(SolverConfig::new(2.0, 1.0).validate().is_err());
    let c = SolverConfig { blowup_h_threshold: -1.0, ..SolverConfig::new(0.1, 1.0) };
    assert!(c.validate().is_err());
    let s = SolverConfig::new(0.3, 1.0).step_sizes();
    assert_eq!(s.len(), 4);
    assert!((s.iter().sum::<f64>() - 1.0).abs() < 1e-15);
}
