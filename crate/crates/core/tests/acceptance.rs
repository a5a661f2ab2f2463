//! End-to-end acceptance run. Prints one PASS/FAIL line per criterion and
//! exits non-zero when any criterion fails.

use std::path::PathBuf;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use spdekit::cli::{ExperimentSection, GronwallSection, RunConfig};
use spdekit::conditions::{
    admissible_rho, audit_coercivity, bisect_threshold, check_subcriticality, AuditConfig, PairStatus, RhoInterval,
};
use spdekit::noise::{NoiseSpec, NoiseStream, Transport};
use spdekit::operators::{cancellation_check, helmholtz_project, Equation, EquationSpec, Slot, Variant};
use spdekit::spaces::{differentiate, laplacian, norm_beta, GelfandTriple, Polynomial, SpectralField, WaveGrid};
use spdekit::verify::{
    apriori_experiment, blowup_ensemble, blowup_time_convergence, continuous_dependence_experiment, gronwall_harness,
    ledger_experiment, ledger_refinement, tail_experiment, AprioriConfig, AuditedSpec, ContinuityConfig,
    EnsembleConfig, TailConfig, Verdict,
};
use spdekit::Rational;

type Outcome = Result<(bool, String), Box<dyn std::error::Error>>;
/// Name, check and runtime budget in seconds.
type Criterion = (&'static str, fn() -> Outcome, f64);

fn config(name: &str) -> RunConfig {
    let p = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../configs").join(name);
    let text = std::fs::read_to_string(&p).unwrap_or_else(|e| panic!("{}: {e}", p.display()));
    RunConfig::from_toml(&text).unwrap_or_else(|e| panic!("{}: {e}", p.display()))
}

fn certify(cfg: &RunConfig, spec: &EquationSpec) -> Result<AuditedSpec, Box<dyn std::error::Error>> {
    Ok(AuditedSpec::certify(spec, cfg.conditions.eta, &cfg.conditions.audit)?)
}

fn r(p: i64, q: i64) -> Rational {
    Rational::new(p, q)
}

fn criticality_tables() -> Outcome {
    use Slot::*;
    use Variant::*;
    let zero = r(0, 1);
    let closed = |p, q| RhoInterval::closed(zero, r(p, q));
    let open = |p, q| RhoInterval::right_open(zero, r(p, q));
    let expected = [
        (CahnHilliard, 1, F, closed(4, 1)),
        (CahnHilliard, 2, F, closed(2, 1)),
        (CahnHilliard, 3, F, closed(4, 3)),
        (CahnHilliard, 4, F, closed(1, 1)),
        (SecondOrder, 1, F, closed(3, 1)),
        (SecondOrder, 2, F, open(2, 1)),
        (SecondOrder, 3, F, closed(4, 3)),
        (SecondOrder, 4, F, closed(1, 1)),
        (SecondOrder, 1, Fbar, closed(2, 1)),
        (SecondOrder, 2, Fbar, closed(1, 1)),
        (SecondOrder, 3, Fbar, closed(2, 3)),
        (SecondOrder, 1, G, closed(2, 1)),
        (SecondOrder, 2, G, closed(1, 1)),
        (SecondOrder, 3, G, closed(2, 3)),
        (SwiftHohenberg, 1, F, closed(5, 1)),
        (SwiftHohenberg, 2, F, closed(3, 1)),
        (SwiftHohenberg, 3, F, closed(7, 3)),
        (SwiftHohenberg, 4, F, open(2, 1)),
        (SwiftHohenberg, 5, F, closed(8, 5)),
    ];
    let mut bad = Vec::new();
    for (v, d, s, want) in expected {
        let got = admissible_rho(v, d, s)?;
        if got != want {
            bad.push(format!("{v} d={d} {s:?}: {got} != {want}"));
        }
    }
    let pairs = check_subcriticality(&[(r(2, 1), r(2, 3)), (r(1, 1), r(5, 8))]);
    let e = &pairs.entries;
    if e[0].status != PairStatus::Critical || e[0].slack != Some(zero) {
        bad.push(format!("(2, 2/3) classified {:?}", e[0].status));
    }
    if e[1].status != PairStatus::Subcritical || e[1].slack != Some(r(1, 4)) {
        bad.push(format!("(1, 5/8) classified {:?} slack {:?}", e[1].status, e[1].slack));
    }
    let n = expected.len() + 2;
    Ok((bad.is_empty(), if bad.is_empty() { format!("{n} exact entries") } else { bad.join("; ") }))
}

fn allen_cahn_threshold() -> Outcome {
    let grid = WaveGrid::torus(2, 16)?;
    let build = |gamma_sq: f64| {
        let noise = NoiseSpec::multiplicative(NoiseSpec::harmonic_gamma(8, gamma_sq), Polynomial::monomial(2, 1.0));
        Ok(EquationSpec::new(Equation::allen_cahn(), grid.clone(), noise, None)?)
    };
    let cfg = AuditConfig { samples: 2000, ..AuditConfig::default() };
    let eta = 1e-3;
    let below = audit_coercivity(&build(1.4)?, eta, &cfg)?.verdict;
    let (lo, hi) = bisect_threshold(build, 1.0, 2.0, 10, eta, &cfg)?;
    let ok = lo >= 1.4 && hi <= 1.6;
    Ok((ok, format!("bracket [{lo:.4}, {hi:.4}], audit at 1.4: {below}")))
}

fn spectral_identities() -> Outcome {
    let mut worst_lap = 0.0f64;
    let mut worst_proj = 0.0f64;
    for seed in 0..50u64 {
        let d = 1 + (seed as usize % 3);
        let g = WaveGrid::torus(d, 8)?;
        let u = SpectralField::random(&g, &mut ChaCha8Rng::seed_from_u64(seed), 3, 1.0);
        let mut sum = 0.0;
        for j in 0..d {
            for k in 0..d {
                let mut alpha = vec![0; d];
                alpha[j] += 1;
                alpha[k] += 1;
                let dd = differentiate(&u, &alpha)?;
                sum += dd.inner_l2(&dd)?;
            }
        }
        let lu = laplacian(&u);
        let lap = lu.inner_l2(&lu)?;
        worst_lap = worst_lap.max((lap - sum).abs() / lap.max(sum));

        let dv = 2 + (seed as usize % 2);
        let gv = WaveGrid::torus(dv, 8)?.with_components(dv);
        let v = SpectralField::random(&gv, &mut ChaCha8Rng::seed_from_u64(seed ^ 0xfe), 3, 1.0);
        let pv = helmholtz_project(&v)?;
        let mut diff = helmholtz_project(&pv)?;
        diff.axpy(-1.0, &pv)?;
        worst_proj = worst_proj.max((diff.inner_l2(&diff)? / pv.inner_l2(&pv)?).sqrt());
    }
    let ok = worst_lap <= 1e-12 && worst_proj <= 1e-12;
    Ok((ok, format!("worst relative error {worst_lap:.1e} (Laplacian), {worst_proj:.1e} (projection)")))
}

fn interpolation_inequality() -> Outcome {
    let triples = [GelfandTriple::weak(), GelfandTriple::strong(), GelfandTriple::fourth_order()];
    let g = WaveGrid::torus(2, 8)?;
    let mut rng = ChaCha8Rng::seed_from_u64(41);
    let mut violations = 0;
    let n = 10_000;
    for i in 0..n {
        let t = &triples[i % 3];
        let beta = rng.random_range(0.5..=1.0);
        let decay = rng.random_range(0.0..3.0);
        let cutoff = rng.random_range(1..=3);
        let u = SpectralField::random(&g, &mut rng, cutoff, decay);
        let lhs = norm_beta(&u, t, beta)?;
        let rhs = t.h_norm(&u).powf(2.0 - 2.0 * beta) * t.v_norm(&u).powf(2.0 * beta - 1.0);
        if lhs > rhs * (1.0 + 1e-12) {
            violations += 1;
        }
    }
    Ok((violations == 0, format!("{violations} violations in {n} samples")))
}

fn cancellation() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let sq = Polynomial::monomial(2, 1.0);
    let mut worst = 0.0f64;
    for seed in 0..100u64 {
        let d = 1 + (seed as usize % 3);
        let g = WaveGrid::torus(d, 16)?;
        let u = SpectralField::random(&g, &mut ChaCha8Rng::seed_from_u64(seed), 5, 1.0);
        let b: Vec<f64> = (0..d).map(|_| rng.random_range(-2.0..2.0)).collect();
        let dir: Vec<f64> = (0..d).map(|_| rng.random_range(-2.0..2.0)).collect();
        let res = cancellation_check(&[Transport::Constant(b)], &dir, &sq, &sq, &u)?;
        worst = worst.max(res.flux).max(res.transport);
    }
    Ok((worst <= 1e-10, format!("largest residual {worst:.2e} on 100 fields")))
}

fn ledger() -> Outcome {
    let cfg = config("ledger_additive.toml");
    let (spec, u0) = cfg.build()?;
    let (lin, _) = ledger_experiment(&spec, &u0, &cfg.solver, &EnsembleConfig::new(10_000, cfg.seed))?;

    let cfg = config("allen_cahn_refinement.toml");
    let (spec, u0) = cfg.build()?;
    let tol = match cfg.experiment {
        Some(ExperimentSection::Refinement { tolerance, .. }) => tolerance,
        _ => 0.2,
    };
    let refine = ledger_refinement(&spec, &u0, &cfg.solver, &EnsembleConfig::new(256, cfg.seed), tol)?;
    let ok = lin.passed && refine.passed && tol <= 0.2;
    Ok((
        ok,
        format!(
            "linear residual z = {:.2} at 10^4 paths; Allen-Cahn coarse/fine ratio {:.3} (band {:.2}..{:.2})",
            lin.z_score, refine.ratio, refine.band.0, refine.band.1
        ),
    ))
}

fn apriori() -> Outcome {
    let run = |name: &str| -> Result<_, Box<dyn std::error::Error>> {
        let cfg = config(name);
        let (spec, u0) = cfg.build()?;
        let (scales, paths) = match &cfg.experiment {
            Some(ExperimentSection::Apriori { scales, paths }) => (scales.clone(), *paths),
            _ => return Err(format!("{name} has no apriori section").into()),
        };
        let audited = certify(&cfg, &spec)?;
        let ac = AprioriConfig { scales, solver: cfg.solver.clone(), ensemble: EnsembleConfig::new(paths, cfg.seed) };
        Ok((spec, paths, apriori_experiment(&audited, &u0, &ac)?.0))
    };
    let (_, _, heat) = run("heat_additive.toml")?;
    let (ch_spec, ch_paths, ch) = run("cahn_hilliard.toml")?;
    let ch_halted: usize = ch.rows.iter().map(|r| r.halted).sum();
    let ch_finite = ch.fit.slope.is_finite() && ch.fit.intercept.is_finite();
    let ch_setting = ch_spec.grid().dimension() == 2 && ch_spec.grid().modes() == 16 && ch_paths == 512;
    let ok = heat.fit.r_squared > 0.99 && ch_halted == 0 && ch_finite && ch_setting;
    Ok((
        ok,
        format!(
            "heat R^2 {:.6}; Cahn-Hilliard {} blow-ups over {} paths/scale, slope {:.3e}, intercept {:.3e}",
            heat.fit.r_squared, ch_halted, ch_paths, ch.fit.slope, ch.fit.intercept
        ),
    ))
}

fn tail() -> Outcome {
    let cfg = config("allen_cahn_tail.toml");
    let (spec, u0) = cfg.build()?;
    let (gammas, min_exceedances) = match &cfg.experiment {
        Some(ExperimentSection::Tail { gammas, min_exceedances, .. }) => (gammas.clone(), *min_exceedances),
        _ => return Err("tail config has no tail section".into()),
    };
    let audited = certify(&cfg, &spec)?;
    let tc = TailConfig {
        gammas,
        solver: cfg.solver.clone(),
        ensemble: EnsembleConfig::new(10_000, cfg.seed),
        min_exceedances,
    };
    let (rep, _) = tail_experiment(&audited, &u0, &tc)?;
    let checked = rep.rows.iter().filter(|r| r.within.is_some()).count();
    let within = rep.rows.iter().filter(|r| r.within == Some(true)).count();
    Ok((
        rep.verdict == Verdict::Pass,
        format!(
            "c_hat {:.4} at gamma {:?}; {within}/{checked} resolvable points within; turned over {:?}; \
             lower-half holdout c {:.4}, upper half within {:?}; blow-up fraction {:.4}",
            rep.c_hat.unwrap_or(f64::NAN),
            rep.anchor_gamma,
            rep.turned_over,
            rep.holdout_c_hat.unwrap_or(f64::NAN),
            rep.holdout_within,
            rep.blowup_fraction
        ),
    ))
}

fn continuity() -> Outcome {
    let levels = 6;
    let cfg = config("heat_additive.toml");
    let (spec, u0) = cfg.build()?;
    let audited = certify(&cfg, &spec)?;
    let cc = ContinuityConfig::dyadic(levels, cfg.solver.clone(), EnsembleConfig::new(32, cfg.seed));
    let lin = continuous_dependence_experiment(&audited, &u0, &u0, &cc)?;
    let mut worst = 0.0f64;
    for zs in &lin.distances {
        let unit: Vec<f64> = lin.rows.iter().zip(zs).filter(|(r, _)| r.delta > 0.0).filter_map(|(r, z)| z.map(|z| z / r.delta)).collect();
        let base = unit[0];
        for u in &unit {
            worst = worst.max((u - base).abs() / base.abs());
        }
    }
    let zero_lin = lin.zero_bitwise == Some(true);

    let cfg = config("allen_cahn.toml");
    let (spec, u0) = cfg.build()?;
    let (levels, paths) = match &cfg.experiment {
        Some(ExperimentSection::Continuity { levels, paths, .. }) => (levels.unwrap_or(6), *paths),
        _ => return Err("allen_cahn config has no continuity section".into()),
    };
    let audited = certify(&cfg, &spec)?;
    let cc = ContinuityConfig::dyadic(levels, cfg.solver.clone(), EnsembleConfig::new(paths, cfg.seed));
    let nl = continuous_dependence_experiment(&audited, &u0, &u0, &cc)?;
    let ratios: Vec<String> = nl.rows.iter().filter_map(|r| r.ratio.map(|x| format!("{x:.2}"))).collect();
    let ok = zero_lin && worst <= 1e-10 && nl.zero_bitwise == Some(true) && nl.ratios_ok && nl.verdict == Verdict::Pass;
    Ok((
        ok,
        format!(
            "delta=0 bitwise zero: {}; linear Z/delta spread {worst:.1e}; Allen-Cahn ratios [{}] (floor {:.1e})",
            zero_lin && nl.zero_bitwise == Some(true),
            ratios.join(", "),
            nl.floor
        ),
    ))
}

fn blowup() -> Outcome {
    let cfg = config("blowup_probe.toml");
    let (spec, u0) = cfg.build()?;
    let (paths, dts, oracle, tolerance) = match &cfg.experiment {
        Some(ExperimentSection::Blowup { paths, dts, oracle, tolerance, .. }) => {
            (*paths, dts.clone(), oracle.ok_or("probe needs an oracle")?, *tolerance)
        }
        _ => return Err("probe config has no blowup section".into()),
    };
    let (probe, _) = blowup_ensemble(&spec, &u0, &cfg.solver, &EnsembleConfig::new(paths, cfg.seed))?;
    let conv = blowup_time_convergence(&spec, &u0, &cfg.solver, &dts, oracle, tolerance, &NoiseStream::new(cfg.seed, 0))?;

    let cfg = config("dissipative_twin.toml");
    let (spec, u0) = cfg.build()?;
    let (twin, _) = blowup_ensemble(&spec, &u0, &cfg.solver, &EnsembleConfig::new(256, cfg.seed))?;
    let ok = probe.halted == probe.paths && conv.all_blown_up && conv.passed && tolerance <= 0.1 && twin.halted == 0;
    Ok((
        ok,
        format!(
            "probe {}/{} halted, blown up at all {} dts, finest error {:.4}; twin {}/{} halted",
            probe.halted,
            probe.paths,
            dts.len(),
            conv.finest_error.unwrap_or(f64::NAN),
            twin.halted,
            twin.paths
        ),
    ))
}

fn gronwall() -> Outcome {
    let section = |name: &str| -> GronwallSection { config(name).gronwall.unwrap_or_else(|| panic!("{name}: no gronwall section")) };
    let det = section("gronwall_deterministic.toml");
    let d = gronwall_harness(&det.instance, det.paths.max(2), 1)?;
    let ln = section("gronwall_lognormal.toml");
    let l = gronwall_harness(&ln.instance, 100_000, 2)?;
    let inh = section("gronwall_inhomogeneous.toml");
    let h = gronwall_harness(&inh.instance, 100_000, 3)?;
    let slack_required = |s: &GronwallSection| s.instance.required_slack.is_some_and(|x| x >= 2.0);
    let ok = d.corollary == Some(true)
        && d.bound_passed
        && l.bound_passed
        && h.bound_passed
        && l.slack_passed
        && h.slack_passed
        && slack_required(&ln)
        && slack_required(&inh)
        && l.oracle_passed == Some(true);
    Ok((
        ok,
        format!(
            "corollary {:?}; lognormal min slack {:.1}, oracle {:?}; inhomogeneous min slack {:.1}",
            d.corollary,
            l.min_slack.unwrap_or(f64::NAN),
            l.oracle_passed,
            h.min_slack.unwrap_or(f64::NAN)
        ),
    ))
}

fn main() {
    let criteria: [Criterion; 11] = [
        ("criticality tables", criticality_tables, 1.0),
        ("Allen-Cahn noise threshold", allen_cahn_threshold, 300.0),
        ("spectral identities", spectral_identities, 1.0),
        ("interpolation inequality", interpolation_inequality, 10.0),
        ("cancellation identities", cancellation, 10.0),
        ("Ito ledger", ledger, 600.0),
        ("a priori bound", apriori, 1800.0),
        ("tail bound", tail, 1800.0),
        ("continuous dependence", continuity, 1200.0),
        ("blow-up dichotomy", blowup, 600.0),
        ("stochastic Gronwall", gronwall, 600.0),
    ];
    let mut failed = 0;
    for (i, (name, run, budget)) in criteria.iter().enumerate() {
        let t = Instant::now();
        let outcome = run();
        let secs = t.elapsed().as_secs_f64();
        let (ok, detail) = match outcome {
            Ok((ok, detail)) => (ok && secs <= *budget, detail),
            Err(e) => (false, format!("error: {e}")),
        };
        let timing = if secs > *budget { format!(", over the {budget}s budget") } else { String::new() };
        println!("{} {:>2} {name} ({secs:.2}s{timing}): {detail}", if ok { "PASS" } else { "FAIL" }, i + 1);
        if !ok {
            failed += 1;
        }
    }
    println!("{} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
