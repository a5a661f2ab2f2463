use std::collections::BTreeMap;

use crate::conditions::{audit_spec, ConditionStatus};
use crate::noise::NoiseStream;
use crate::operators::{helmholtz_project, Variant};
use crate::solver::{simulate_path, write_norms_csv, write_snapshots, PathStatus};
use crate::spaces::SpectralField;
use crate::verify::plot::{LinePlot, Series};
use crate::verify::{
    apriori_experiment, blowup_ensemble, blowup_time_convergence, continuous_dependence_experiment, gronwall_harness,
    ledger_experiment, ledger_refinement, run_ensemble, tail_experiment, AprioriConfig, AuditedSpec, ContinuityConfig,
    EnsembleConfig, TailConfig, Verdict,
};

use super::config::{Expect, ExperimentSection, RunConfig};
use super::manifest::OutputDir;
use super::{CliError, CommonArgs};

pub type Verdicts = BTreeMap<String, String>;

fn verdict_str(v: Verdict) -> String {
    match v {
        Verdict::Pass => "pass",
        Verdict::Fail => "fail",
        Verdict::Inconclusive => "inconclusive",
    }
    .to_string()
}

fn status_str(s: &PathStatus) -> &'static str {
    match s {
        PathStatus::Completed => "completed",
        PathStatus::BlownUp { .. } => "blown_up",
        PathStatus::Overflow { .. } => "overflow",
    }
}

fn json<T: serde::Serialize>(v: &T) -> Result<serde_json::Value, CliError> {
    serde_json::to_value(v).map_err(|e| CliError::Io(e.to_string()))
}

pub fn check(cfg: &RunConfig, out: &mut OutputDir) -> Result<Verdicts, CliError> {
    let (spec, _) = cfg.build()?;
    eprintln!("[check] auditing {} on {} modes, {} samples", spec.variant(), spec.grid().modes(), cfg.conditions.audit.samples);
    let report = audit_spec(&spec, cfg.conditions.eta, &cfg.conditions.audit)?;
    out.write("report.json", report.to_json() + "\n")?;
    let mut v = Verdicts::new();
    for c in &report.conditions {
        let s = match c.status {
            ConditionStatus::Pass => "pass",
            ConditionStatus::Fail => "fail",
            ConditionStatus::NotApplicable => "not_applicable",
        };
        println!("{:<16} {s}", c.id);
        v.insert(c.id.to_string(), s.to_string());
    }
    println!("{:<16} {}", "overall", if report.passed { "pass" } else { "fail" });
    v.insert("overall".into(), if report.passed { "pass" } else { "fail" }.into());
    Ok(v)
}

pub fn simulate(cfg: &RunConfig, args: &CommonArgs, out: &mut OutputDir) -> Result<Verdicts, CliError> {
    let (spec, u0) = cfg.build()?;
    let paths = args.paths.unwrap_or(cfg.simulate.paths);
    if paths == 0 {
        return Err(CliError::Config("simulate.paths must be at least 1".into()));
    }
    eprintln!("[simulate] {} path(s) of {} to T = {}", paths, spec.variant(), cfg.solver.horizon);
    let tr = simulate_path(&spec, &u0, &cfg.solver, &NoiseStream::new(cfg.seed, 0))?;
    let mut csv = Vec::new();
    write_norms_csv(&tr, &mut csv).map_err(|e| CliError::Io(e.to_string()))?;
    out.write("norms.csv", csv)?;
    if cfg.simulate.snapshots {
        let mut bin = Vec::new();
        write_snapshots(&tr.snapshots, &mut bin).map_err(|e| CliError::Io(e.to_string()))?;
        out.write("snapshots.bin", bin)?;
    }
    let mut summary = serde_json::json!({
        "variant": spec.variant().name(),
        "seed": cfg.seed,
        "paths": paths,
        "path0": {
            "status": tr.status,
            "steps": tr.times.len() - 1,
            "final_time": tr.final_time(),
            "sup_h_sq": tr.sup_h_sq(),
            "v_integral": tr.v_integral(),
        },
    });
    if paths > 1 {
        let res = run_ensemble(&spec, &u0, &cfg.solver, &EnsembleConfig::new(paths, cfg.seed))?;
        out.write("paths.csv", res.to_csv())?;
        summary["ensemble"] = json(&res)?;
    }
    out.write_json("summary.json", &summary)?;
    if args.plot {
        let pts = tr.times.iter().zip(&tr.h_norm_series).map(|(&t, &h)| (t, h)).collect();
        let p = LinePlot::new("H norm of path 0", "t", "|u|_H").log_y().with(Series::new("path 0", pts));
        out.write("norms.svg", p.to_svg())?;
    }
    println!("path 0: {} at t = {}", status_str(&tr.status), tr.final_time());
    let mut v = Verdicts::new();
    v.insert("path0".into(), status_str(&tr.status).into());
    Ok(v)
}

fn certify(cfg: &RunConfig, spec: &crate::operators::EquationSpec) -> Result<AuditedSpec, CliError> {
    eprintln!("[experiment] certifying {} ({:?} audit)", spec.variant(), cfg.conditions.audit.mode);
    Ok(AuditedSpec::certify(spec, cfg.conditions.eta, &cfg.conditions.audit)?)
}

pub fn experiment(cfg: &RunConfig, args: &CommonArgs, out: &mut OutputDir) -> Result<Verdicts, CliError> {
    let mut section = cfg.experiment.clone().ok_or_else(|| CliError::Config("missing [experiment] section".into()))?;
    if let Some(p) = args.paths {
        *section.paths_mut() = p;
    }
    let (spec, u0) = cfg.build()?;
    let name = section.name();
    let ens = |paths: usize| EnsembleConfig::new(paths, cfg.seed);
    eprintln!("[experiment] {name} on {}", spec.variant());
    let verdict = match &section {
        ExperimentSection::Apriori { scales, paths } => {
            let audited = certify(cfg, &spec)?;
            let ac = AprioriConfig { scales: scales.clone(), solver: cfg.solver.clone(), ensemble: ens(*paths) };
            let (rep, results) = apriori_experiment(&audited, &u0, &ac)?;
            for (i, r) in results.iter().enumerate() {
                out.write(&format!("paths_scale{i}.csv"), r.to_csv())?;
            }
            out.write_json("summary.json", &rep)?;
            if args.plot {
                let emp = rep.rows.iter().map(|r| (r.initial_h_sq, r.lhs.mean)).collect();
                let fit = rep.rows.iter().map(|r| (r.initial_h_sq, r.fitted)).collect();
                let p = LinePlot::new("energy against initial data", "E|u0|^2_H", "E sup|u|^2_H + E int |u|^2_V")
                    .with(Series::new("estimate", emp))
                    .with(Series::new("affine fit", fit));
                out.write("apriori.svg", p.to_svg())?;
            }
            println!(
                "slope {:.6e}, intercept {:.6e}, R^2 {:.6}, blow-ups {}",
                rep.fit.slope,
                rep.fit.intercept,
                rep.fit.r_squared,
                rep.rows.iter().map(|r| r.halted).sum::<usize>()
            );
            rep.verdict
        }
        ExperimentSection::Tail { gammas, paths, min_exceedances } => {
            let audited = certify(cfg, &spec)?;
            let tc = TailConfig {
                gammas: gammas.clone(),
                solver: cfg.solver.clone(),
                ensemble: ens(*paths),
                min_exceedances: *min_exceedances,
            };
            let (rep, res) = tail_experiment(&audited, &u0, &tc)?;
            out.write("paths.csv", res.to_csv())?;
            out.write_json("summary.json", &rep)?;
            if args.plot {
                let emp = rep.rows.iter().map(|r| (r.gamma, r.empirical.p)).collect();
                let bnd = rep.rows.iter().filter_map(|r| r.bound.map(|b| (r.gamma, b))).collect();
                let p = LinePlot::new("tail of sup |u|_H", "gamma", "P(sup |u|_H >= gamma)")
                    .log_x()
                    .log_y()
                    .with(Series::new("empirical", emp))
                    .with(Series::new("c/log gamma", bnd));
                out.write("tail.svg", p.to_svg())?;
            }
            println!("c_hat {:?}, turned over {:?}, power exponent {:?}", rep.c_hat, rep.turned_over, rep.power_exponent);
            rep.verdict
        }
        ExperimentSection::Continuity { levels, deltas, paths, direction, min_ratio, floor_factor } => {
            let audited = certify(cfg, &spec)?;
            let mut cc = ContinuityConfig::dyadic(levels.unwrap_or(6), cfg.solver.clone(), ens(*paths));
            if let Some(d) = deltas {
                cc.deltas = d.clone();
            }
            cc.min_ratio = *min_ratio;
            cc.floor_factor = *floor_factor;
            let dir = if direction.is_empty() {
                u0.clone()
            } else {
                let f = SpectralField::from_terms(spec.grid(), direction).map_err(|e| CliError::Config(format!("direction: {e}")))?;
                if spec.variant() == Variant::TamedNs {
                    helmholtz_project(&f).map_err(|e| CliError::Config(e.to_string()))?
                } else {
                    f
                }
            };
            if spec.triple().h_norm(&dir) == 0.0 {
                return Err(CliError::Config("perturbation direction is zero".into()));
            }
            let rep = continuous_dependence_experiment(&audited, &u0, &dir, &cc)?;
            let mut csv = String::from("path,delta,distance\n");
            for (i, zs) in rep.distances.iter().enumerate() {
                for (r, z) in rep.rows.iter().zip(zs) {
                    let z = z.map(|v| format!("{v:e}")).unwrap_or_default();
                    csv.push_str(&format!("{i},{:e},{z}\n", r.delta));
                }
            }
            out.write("distances.csv", csv)?;
            out.write_json("summary.json", &rep)?;
            if args.plot {
                let pos: Vec<_> = rep.rows.iter().filter(|r| r.delta > 0.0).collect();
                let p = LinePlot::new("coupled distance", "delta", "Z")
                    .log_x()
                    .log_y()
                    .with(Series::new("median", pos.iter().map(|r| (r.delta, r.median)).collect()))
                    .with(Series::new("p90", pos.iter().map(|r| (r.delta, r.p90)).collect()));
                out.write("continuity.svg", p.to_svg())?;
            }
            for r in &rep.rows {
                println!("delta {:.4e}: median {:.4e}, p90 {:.4e}, ratio {:?}", r.delta, r.median, r.p90, r.ratio);
            }
            rep.verdict
        }
        ExperimentSection::Ledger { paths } => {
            let (rep, res) = ledger_experiment(&spec, &u0, &cfg.solver, &ens(*paths))?;
            out.write("paths.csv", res.to_csv())?;
            out.write_json("summary.json", &rep)?;
            println!("cumulative residual {:.4e} +- {:.4e}", rep.cumulative_residual.mean, rep.cumulative_residual.stderr);
            rep.verdict
        }
        ExperimentSection::Refinement { paths, tolerance } => {
            let rep = ledger_refinement(&spec, &u0, &cfg.solver, &ens(*paths), *tolerance)?;
            let mut csv = String::from("path,coarse_residual,fine_residual\n");
            for (i, (c, f)) in rep.per_path.iter().enumerate() {
                let s = |x: &Option<f64>| x.map(|v| format!("{v:e}")).unwrap_or_default();
                csv.push_str(&format!("{i},{},{}\n", s(c), s(f)));
            }
            out.write("paths.csv", csv)?;
            out.write_json("summary.json", &rep)?;
            println!("coarse/fine residual ratio {:.4}", rep.ratio);
            rep.verdict
        }
        ExperimentSection::Blowup { paths, expect, dts, oracle, tolerance } => {
            let (rep, res) = blowup_ensemble(&spec, &u0, &cfg.solver, &ens(*paths))?;
            out.write("paths.csv", res.to_csv())?;
            let ensemble_ok = match expect {
                Expect::BlowUp => res.halted == res.path_count,
                Expect::Complete => res.halted == 0,
            };
            let mut verdict = Verdict::from_bool(ensemble_ok);
            let mut summary = serde_json::json!({ "expect": expect, "ensemble": json(&rep)?, "ensemble_ok": ensemble_ok });
            if !dts.is_empty() {
                let oracle = oracle.ok_or_else(|| CliError::Config("blowup: dts need an oracle time".into()))?;
                let conv = blowup_time_convergence(
                    &spec,
                    &u0,
                    &cfg.solver,
                    dts,
                    oracle,
                    *tolerance,
                    &NoiseStream::new(cfg.seed, 0),
                )?;
                verdict = verdict.and(conv.verdict);
                summary["convergence"] = json(&conv)?;
                if args.plot {
                    let pts = conv.rows.iter().filter_map(|r| r.relative_error.map(|e| (r.dt, e))).collect();
                    let p = LinePlot::new("blow-up time error", "dt", "relative error").log_x().log_y().with(Series::new("path 0", pts));
                    out.write("blowup.svg", p.to_svg())?;
                }
            }
            out.write_json("summary.json", &summary)?;
            println!("{} of {} paths halted", rep.halted, rep.paths);
            verdict
        }
    };
    println!("{name}: {}", verdict_str(verdict));
    let mut v = Verdicts::new();
    v.insert(name.into(), verdict_str(verdict));
    Ok(v)
}

pub fn gronwall(cfg: &RunConfig, args: &CommonArgs, out: &mut OutputDir) -> Result<Verdicts, CliError> {
    let section = cfg.gronwall.as_ref().ok_or_else(|| CliError::Config("missing [gronwall] section".into()))?;
    let paths = args.paths.unwrap_or(section.paths);
    eprintln!("[gronwall] {paths} paths");
    let rep = gronwall_harness(&section.instance, paths, cfg.seed)?;
    let mut csv = String::from("gamma,r,bound,bound_overflow,f_exceeds,empirical,stderr,rhs,passed,slack,oracle\n");
    for r in &rep.rows {
        let o = |x: Option<f64>| x.map(|v| format!("{v:e}")).unwrap_or_default();
        csv.push_str(&format!(
            "{:e},{:e},{:e},{},{:e},{:e},{:e},{:e},{},{},{}\n",
            r.gamma,
            r.r,
            r.bound.value,
            r.bound.overflow,
            r.f_exceeds,
            r.empirical.p,
            r.empirical.stderr,
            r.rhs,
            r.passed,
            o(r.slack),
            o(r.oracle)
        ));
    }
    out.write("rows.csv", csv)?;
    out.write_json("summary.json", &rep)?;
    if args.plot {
        let mut p = LinePlot::new("Gronwall tail bound", "gamma", "probability").log_x().log_y();
        let mut gammas: Vec<f64> = rep.rows.iter().map(|r| r.gamma).collect();
        gammas.dedup();
        p = p.with(Series::new(
            "empirical",
            gammas.iter().filter_map(|g| rep.rows.iter().find(|r| r.gamma == *g).map(|r| (*g, r.empirical.p))).collect(),
        ));
        let mut rs: Vec<f64> = rep.rows.iter().map(|r| r.r).collect();
        rs.sort_by(f64::total_cmp);
        rs.dedup();
        for r in rs {
            let pts = rep.rows.iter().filter(|x| x.r == r).map(|x| (x.gamma, x.rhs)).collect();
            p = p.with(Series::new(format!("bound R={r}"), pts));
        }
        out.write("gronwall.svg", p.to_svg())?;
    }
    println!("bound {}, min slack {:?}, oracle {:?}, corollary {:?}", rep.bound_passed, rep.min_slack, rep.oracle_passed, rep.corollary);
    let mut v = Verdicts::new();
    v.insert("gronwall".into(), verdict_str(rep.verdict));
    Ok(v)
}
