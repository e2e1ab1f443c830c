//! Pipelines behind each subcommand. Every run writes its artifacts, the
//! resolved `config.json` and a `verdict.json` into the output directory.

use std::path::{Path, PathBuf};

use anyhow::Context;
use fbp_core::acceptance::{self, Check};
use fbp_core::asymptotics::predict;
use fbp_core::beta::{beta_boundary_slope, front_prediction_beta, solve_beta, BetaConfig};
use fbp_core::brunet_derrida::{bd_check, Moment};
use fbp_core::grid::{FrontTrace, Profile};
use fbp_core::io::{fmt12, profile_file_name, write_csv, write_front_csv, write_json, write_profile_csv};
use fbp_core::quad::{integrate_to_inf, QuadOptions};
use fbp_core::solver::{solve_obstacle, solve_penalized, Solution, SolverOptions};
use fbp_core::stochastic::{killed_bm_survival, nbbm_run, KilledBmOptions};
use fbp_core::waves::{self, WaveParams};
use fbp_core::{Exec, InitialCondition};
use serde::{Deserialize, Serialize};

use crate::config::{ExperimentConfig, Pipeline, SchemeSpec};

pub const VERDICT_FILE: &str = "verdict.json";

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Verdict {
    pub subcommand: String,
    pub pass: bool,
    pub checks: Vec<Check>,
}

impl Verdict {
    fn new(p: Pipeline, checks: Vec<Check>) -> Self {
        Self { subcommand: p.name().into(), pass: checks.iter().all(|c| c.pass), checks }
    }
}

/// Validates, runs and records one experiment.
pub fn run(cfg: &ExperimentConfig) -> anyhow::Result<(Verdict, PathBuf)> {
    cfg.validate()?;
    let out = cfg.out_dir();
    std::fs::create_dir_all(&out).with_context(|| format!("creating {}", out.display()))?;
    write_json(out.join("config.json"), cfg)?;
    let checks = match cfg.subcommand {
        Pipeline::Waves => waves_pipeline(cfg, &out),
        Pipeline::Solve => solve_pipeline(cfg, &out),
        Pipeline::BetaSolve => beta_pipeline(cfg, &out),
        Pipeline::BdCheck => bd_pipeline(cfg, &out),
        Pipeline::Asymptotics => asymptotics_pipeline(cfg, &out),
        Pipeline::Nbbm => nbbm_pipeline(cfg, &out),
        Pipeline::KilledBm => killed_bm_pipeline(cfg, &out),
        Pipeline::AllAcceptance => acceptance_pipeline(cfg, &out),
    }
    .with_context(|| format!("{} failed", cfg.subcommand.name()))?;
    let verdict = Verdict::new(cfg.subcommand, checks);
    let path = out.join(VERDICT_FILE);
    write_json(&path, &verdict)?;
    Ok((verdict, path))
}

fn solver_options(cfg: &ExperimentConfig, snapshots: Vec<f64>) -> SolverOptions {
    SolverOptions { dt: cfg.dt, dt_out: cfg.dt_out, snapshots, tail_fill: cfg.tail_fill, ..Default::default() }
}

fn solve(cfg: &ExperimentConfig, ic: &InitialCondition, t_end: f64, snapshots: Vec<f64>) -> anyhow::Result<Solution> {
    let grid = cfg.grid.grid()?;
    let opts = solver_options(cfg, snapshots);
    Ok(match cfg.scheme {
        SchemeSpec::Obstacle => solve_obstacle(ic, grid, t_end, &opts)?,
        SchemeSpec::Penalized { n } => solve_penalized(ic, grid, n, t_end, &opts)?,
    })
}

fn write_profiles(out: &Path, prefix: &str, value: &str, profiles: &[&Profile]) -> anyhow::Result<()> {
    for p in profiles {
        write_profile_csv(out.join(profile_file_name(prefix, p.t)), p, value)?;
    }
    Ok(())
}

fn waves_pipeline(cfg: &ExperimentConfig, out: &Path) -> anyhow::Result<Vec<Check>> {
    const ANCHOR: &str = "travelling-wave closed form";
    let params = cfg.speeds.iter().map(|&c| WaveParams::new(c)).collect::<fbp_core::Result<Vec<_>>>()?;
    let beta = cfg.beta;
    let c_beta = waves::c_beta_min(beta)?;
    let xs: Vec<f64> = (0..=200).map(|i| 0.05 * i as f64).collect();
    let mut header = vec!["x".to_string()];
    for p in &params {
        header.push(format!("Pi_{}", fmt12(p.c)));
        header.push(format!("pi_{}", fmt12(p.c)));
    }
    header.push(format!("Pi_beta_{}", fmt12(beta)));
    let rows = xs.iter().map(|&x| {
        let mut row = vec![x];
        for p in &params {
            row.push(p.ccdf(x));
            row.push(p.density(x));
        }
        row.push(waves::beta_min_ccdf(beta, x).unwrap_or(f64::NAN));
        row
    });
    let header_refs: Vec<&str> = header.iter().map(String::as_str).collect();
    write_csv(out.join("waves.csv"), &header_refs, rows)?;

    let mut checks = Vec::new();
    let opts = QuadOptions { abs_tol: 1e-14, rel_tol: 1e-12, max_intervals: 4000 };
    for p in &params {
        let mut worst: f64 = 0.0;
        for x in [0.0, 0.5, 1.0, 2.0, 5.0] {
            let q = integrate_to_inf(|y| p.density(y), x, opts)?.value;
            worst = worst.max((q - p.ccdf(x)).abs());
        }
        checks.push(Check::le(format!("c={} Pi_c vs quadrature of pi_c", fmt12(p.c)), ANCHOR, worst, 1e-8));
    }
    let low = xs.iter().map(|&x| waves::beta_min_ccdf(beta, x).unwrap_or(f64::NAN)).fold(f64::INFINITY, f64::min);
    checks.push(Check::ge(format!("beta={} min Pi_beta (c={})", fmt12(beta), fmt12(c_beta)), ANCHOR, low, 0.0));
    Ok(checks)
}

fn profile_checks(profiles: &[&Profile], mass_anchor: &str, mono_anchor: &str, mono_tol: f64) -> Vec<Check> {
    let mass = profiles.iter().map(|p| (p.mass() - 1.0).abs()).fold(0.0, f64::max);
    let inc = profiles.iter().map(|p| p.max_increase()).fold(0.0, f64::max);
    vec![
        Check::le("max |mass - 1| over snapshots", mass_anchor, mass, 1e-4),
        Check::le("max increase along the grid", mono_anchor, inc, mono_tol),
    ]
}

fn solve_pipeline(cfg: &ExperimentConfig, out: &Path) -> anyhow::Result<Vec<Check>> {
    let sol = solve(cfg, &cfg.ic, cfg.t_end, cfg.times.clone())?;
    write_front_csv(out.join("front.csv"), &sol.front)?;
    let mut profiles: Vec<&Profile> = sol.snapshots.iter().collect();
    profiles.push(&sol.last);
    write_profiles(out, "profile", "U", &profiles)?;
    Ok(profile_checks(&profiles, "mass conservation", "monotone profile", 1e-9))
}

fn beta_pipeline(cfg: &ExperimentConfig, out: &Path) -> anyhow::Result<Vec<Check>> {
    let bc = BetaConfig { beta: cfg.beta, v0: cfg.ic.clone() };
    let grid = cfg.grid.grid()?;
    let res = solve_beta(&bc, grid, cfg.t_end, &solver_options(cfg, cfg.times.clone()))?;
    write_front_csv(out.join("front.csv"), &res.front)?;
    let mut vs: Vec<&Profile> = res.v.iter().collect();
    vs.push(&res.last_v);
    write_profiles(out, "profile_V", "V", &vs)?;
    if let Ok(pred) = front_prediction_beta(&bc, &[cfg.t_end]) {
        write_json(out.join("prediction.json"), &pred)?;
    }

    let l = res.last_v.front.context("mapped profile has no front")?;
    let slope = beta_boundary_slope(&res.last_v, l);
    let mut checks = vec![Check::le("|dV/dx(L+) + beta|", "boundary slope of V", (slope + cfg.beta).abs(), 0.05)];
    let inc = vs.iter().map(|p| p.max_increase()).fold(0.0, f64::max);
    checks.push(Check::le("max increase of V along the grid", "monotone profile", inc, 1e-3));
    if let InitialCondition::BetaWave { beta } = cfg.ic {
        if (beta - cfg.beta).abs() <= 1e-15 * beta {
            let c = waves::c_beta_min(beta)?;
            checks.push(Check::le("|L_T/T - c_min|", "travelling-wave fixed point", (l / cfg.t_end - c).abs(), 0.02));
        }
    }
    Ok(checks)
}

fn bd_pipeline(cfg: &ExperimentConfig, out: &Path) -> anyhow::Result<Vec<Check>> {
    const ANCHOR: &str = "brunet-derrida relation";
    let sol = solve(cfg, &cfg.ic, cfg.t_end, Vec::new())?;
    write_front_csv(out.join("front.csv"), &sol.front)?;
    let reports = cfg.r.iter().map(|&r| bd_check(&cfg.ic, &sol.front, r, 0.02, 0.05)).collect::<fbp_core::Result<Vec<_>>>()?;
    write_json(out.join("bd.json"), &reports)?;
    let mut checks = Vec::new();
    for rep in &reports {
        checks.push(Check::le(format!("r={} rel_err", fmt12(rep.r)), ANCHOR, rep.rel_err, 0.02));
        if let Moment::Finite(_) = rep.rhs {
            checks.push(Check::le(format!("r={} tail fraction", fmt12(rep.r)), ANCHOR, rep.tail_fraction, 0.05));
        }
    }
    Ok(checks)
}

fn asymptotics_pipeline(cfg: &ExperimentConfig, out: &Path) -> anyhow::Result<Vec<Check>> {
    const ANCHOR: &str = "front position asymptotics";
    let pred = predict(&cfg.ic, &cfg.times)?;
    write_json(out.join("prediction.json"), &pred)?;
    let rows: Vec<Vec<f64>> = cfg
        .times
        .iter()
        .map(|&t| {
            let b = pred.b_curve.as_ref().and_then(|c| c.iter().find(|(s, _)| *s == t)).map_or(f64::NAN, |(_, b)| *b);
            vec![t, pred.position(t).unwrap_or(f64::NAN), b]
        })
        .collect();
    write_csv(out.join("prediction.csv"), &["t", "position", "b"], rows)?;
    let mut checks = Vec::new();
    if let Some(curve) = &pred.b_curve {
        let drop = curve.windows(2).map(|w| w[0].1 - w[1].1).fold(0.0, f64::max);
        checks.push(Check::le("largest decrease of b(t)", ANCHOR, drop, 1e-12));
    }
    let bad = cfg.times.iter().filter(|&&t| !pred.shape(t).is_finite()).count();
    checks.push(Check::le("non-finite template values", ANCHOR, bad as f64, 0.0));
    Ok(checks)
}

fn nbbm_pipeline(cfg: &ExperimentConfig, out: &Path) -> anyhow::Result<Vec<Check>> {
    const ANCHOR: &str = "n-bbm hydrodynamic limit";
    let n = cfg.particles;
    let ens = nbbm_run(&cfg.ic, n, &cfg.times, cfg.seed)?;
    let t_last = cfg.times.last().copied().unwrap_or(0.0);
    let sol = if t_last > 0.0 { Some(solve(cfg, &cfg.ic, t_last, cfg.times.clone())?) } else { None };
    let mut checks = Vec::new();
    for e in &ens {
        let mut sorted = e.positions.clone();
        sorted.sort_by(f64::total_cmp);
        write_csv(out.join(profile_file_name("ensemble", e.t)), &["x"], sorted.into_iter().map(|x| vec![x]))?;
        checks.push(Check::le(format!("t={} |population - N|", fmt12(e.t)), "n-bbm dynamics", (e.len() as f64 - n as f64).abs(), 0.0));
        let Some(p) = sol.as_ref().and_then(|s| s.snapshots.iter().find(|p| (p.t - e.t).abs() < 1e-6)) else {
            continue;
        };
        let xs: Vec<f64> = (0..p.values.len()).map(|i| p.grid.x(i)).collect();
        let f = e.ccdf_at(&xs);
        let sup = f.iter().zip(&p.values).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        let rows = xs.iter().zip(&f).zip(&p.values).map(|((x, f), u)| vec![*x, *f, *u]);
        write_csv(out.join(profile_file_name("ccdf", e.t)), &["x", "F_N", "U"], rows)?;
        checks.push(Check::le(format!("t={} sup |F_N - U|", fmt12(e.t)), ANCHOR, sup, 0.03));
    }
    if let Some(e) = ens.last() {
        let mean = n as f64 * e.t;
        checks.push(Check::le(
            "|branch events - N T|",
            "n-bbm dynamics",
            (e.n_branch_events as f64 - mean).abs(),
            3.0 * mean.sqrt(),
        ));
    }
    Ok(checks)
}

fn killed_bm_pipeline(cfg: &ExperimentConfig, out: &Path) -> anyhow::Result<Vec<Check>> {
    const ANCHOR: &str = "killed brownian motion survival law";
    let front = match cfg.ic {
        InitialCondition::Wave { c } => FrontTrace::from_fn(cfg.t_end, cfg.dt_out, |t| c * t),
        _ => solve(cfg, &cfg.ic, cfg.t_end, Vec::new())?.front,
    };
    write_front_csv(out.join("front.csv"), &front)?;
    let opts = KilledBmOptions { n_paths: cfg.n_paths, dt_mc: cfg.dt_mc, seed: cfg.seed, bridge: cfg.bridge };
    let s = killed_bm_survival(&cfg.ic, &front, &cfg.times, &opts, Exec::Auto)?;
    let rows = s.times.iter().zip(&s.survival).zip(&s.stderr).map(|((t, p), se)| vec![*t, *p, *se, (-t).exp()]);
    write_csv(out.join("survival.csv"), &["t", "S", "stderr", "exp(-t)"], rows)?;
    Ok(s.times
        .iter()
        .zip(&s.survival)
        .zip(&s.stderr)
        .map(|((t, p), se)| Check::le(format!("t={} |S - e^-t|", fmt12(*t)), ANCHOR, (p - (-t).exp()).abs(), 3.0 * se))
        .collect())
}

fn acceptance_pipeline(cfg: &ExperimentConfig, out: &Path) -> anyhow::Result<Vec<Check>> {
    let ids = if cfg.checks.is_empty() { acceptance::IDS.to_vec() } else { cfg.checks.clone() };
    let results = acceptance::run_many(&ids, Exec::Auto);
    write_json(out.join("criteria.json"), &results)?;
    let lines: Vec<String> = results.iter().map(|c| c.line()).collect();
    std::fs::write(out.join("acceptance.txt"), lines.join("\n") + "\n")?;
    for l in &lines {
        println!("{l}");
    }
    let mut checks = Vec::new();
    for c in results {
        if let Some(e) = &c.error {
            checks.push(Check::le(format!("criterion {} ({}): {e}", c.id, c.title), &c.anchor, f64::NAN, 0.0));
        }
        for k in c.checks {
            checks.push(Check { name: format!("criterion {} ({}): {}", c.id, c.title, k.name), ..k });
        }
    }
    Ok(checks)
}
