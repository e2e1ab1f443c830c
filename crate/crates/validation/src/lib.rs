//! Worked examples that need a full solver run or a long Monte Carlo sample.
//! They are reported next to the acceptance criteria by the `acceptance`
//! test target.

use std::time::Instant;

use fbp_core::acceptance::{Check, Criterion};
use fbp_core::asymptotics::{b_of_t, fit_front, heavy_tail_prediction, predict, AsymptoticPrediction, Regime, BRAMSON_LOG_COEFF};
use fbp_core::brunet_derrida::bd_check;
use fbp_core::grid::{FrontTrace, Grid};
use fbp_core::solver::{solve_obstacle, solve_penalized, SolverOptions, TailFill};
use fbp_core::stochastic::{killed_bm_survival, KilledBmOptions};
use fbp_core::waves::{self, SQRT2};
use fbp_core::{Exec, FbpError, InitialCondition, Result};

type Example = fn(&str) -> Result<Vec<Check>>;

const EXAMPLES: [(&str, &str, Example); 8] = [
    ("penalized vs obstacle", "penalized approximation", penalized_vs_obstacle),
    ("penalized wave", "penalized approximation", penalized_wave),
    ("finite-moment b(t)", "finite-mass front asymptotics", b_settles),
    ("heavy tail nu = -2", "infinite-mass front asymptotics", heavy_tail_minus_two),
    ("fit with 1/sqrt(t) term", "finite-mass front asymptotics", synthetic_fit),
    ("heaviside trace fit", "finite-mass front asymptotics", heaviside_fit),
    ("bridge bias study", "killed brownian motion survival law", bridge_gap),
    ("heaviside identity", "brunet-derrida relation", heaviside_identity),
];

pub fn count() -> usize {
    EXAMPLES.len()
}

/// Runs every worked example, numbered from 1.
pub fn run_all() -> Vec<Criterion> {
    EXAMPLES
        .iter()
        .enumerate()
        .map(|(i, (title, anchor, f))| {
            let start = Instant::now();
            let (checks, error) = match f(anchor) {
                Ok(c) => (c, None),
                Err(e) => (Vec::new(), Some(e.to_string())),
            };
            Criterion {
                id: i as u32 + 1,
                title: (*title).into(),
                anchor: (*anchor).into(),
                checks,
                seconds: start.elapsed().as_secs_f64(),
                error,
            }
        })
        .collect()
}

fn fixed() -> SolverOptions {
    SolverOptions { recenter: false, ..Default::default() }
}

fn penalized_vs_obstacle(anchor: &str) -> Result<Vec<Check>> {
    let g = Grid::spanning(-10.0, 30.0, 0.02)?;
    let obs = solve_obstacle(&InitialCondition::Heaviside, g, 5.0, &fixed())?.last;
    let pen = solve_penalized(&InitialCondition::Heaviside, g, 128, 5.0, &fixed())?.last;
    let gap = obs.values.iter().zip(&pen.values).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
    Ok(vec![Check::le("sup |U - U_128| at t=5", anchor, gap, 5e-3)])
}

fn penalized_wave(anchor: &str) -> Result<Vec<Check>> {
    let g = Grid::spanning(-10.0, 40.0, 0.02)?;
    let t = 5.0;
    let mut out = Vec::new();
    for n in [8, 32, 128] {
        let p = solve_penalized(&InitialCondition::min_wave(), g, n, t, &SolverOptions::default())?.last;
        let l = p.front.expect("solver profiles carry their front");
        let dev = (0..=200)
            .map(|i| {
                let y = 0.05 * i as f64;
                (p.sample(l + y) - waves::ccdf(SQRT2, y).unwrap_or(f64::NAN)).abs()
            })
            .fold(0.0, f64::max);
        out.push(Check::le(format!("n={n} sup |U(t, L+y) - Pi_min(y)|"), anchor, dev, 5e-3));
    }
    Ok(out)
}

fn b_settles(anchor: &str) -> Result<Vec<Check>> {
    let ic = InitialCondition::PowerExpTail { a: 1.0, nu: -3.0, lam: SQRT2 };
    let gap = (b_of_t(&ic, 400.0)? - b_of_t(&ic, 100.0)?).abs();
    Ok(vec![Check::le("|b(400) - b(100)|", anchor, gap, 1e-3)])
}

fn heavy_tail_minus_two(anchor: &str) -> Result<Vec<Check>> {
    let t = 1e4;
    let ic = InitialCondition::PowerExpTail { a: 1.0, nu: -2.0, lam: SQRT2 };
    let missing = || FbpError::Regime("prediction has no constant".into());
    let by_b = predict(&ic, &[t])?.position(t).ok_or_else(missing)?;
    let remark = heavy_tail_prediction(1.0, -2.0)?.position(t).ok_or_else(missing)?;
    Ok(vec![Check::le("|b-route - heavy-tail route| at t=1e4", anchor, (by_b - remark).abs(), 0.02)])
}

fn bramson_template(constant: f64) -> AsymptoticPrediction {
    AsymptoticPrediction::new(Regime::FiniteMassPulled, SQRT2, BRAMSON_LOG_COEFF, 0.0, Some(constant))
}

fn synthetic_fit(anchor: &str) -> Result<Vec<Check>> {
    let amp = 3.0 * std::f64::consts::PI.sqrt() / SQRT2;
    let tr = FrontTrace::from_fn(200.0, 0.1, |t| {
        let t = t.max(1.0);
        SQRT2 * t + BRAMSON_LOG_COEFF * t.ln() + 7.0 - amp / t.sqrt()
    });
    let fit = fit_front(&tr, &bramson_template(0.0), (50.0, 200.0))?;
    Ok(vec![Check::le("|fitted constant - 7|", anchor, (fit.constant - 7.0).abs(), 0.25)])
}

fn heaviside_fit(anchor: &str) -> Result<Vec<Check>> {
    let g = Grid::spanning(-10.0, 40.0, 0.02)?;
    let opts = SolverOptions { dt_out: 0.5, ..Default::default() };
    let tr = solve_obstacle(&InitialCondition::Heaviside, g, 200.0, &opts)?.front;
    let fit = fit_front(&tr, &bramson_template(0.0), (50.0, 200.0))?;
    Ok(vec![Check::le("fit residual on [50,200]", anchor, fit.residual, 0.05)])
}

fn bridge_gap(anchor: &str) -> Result<Vec<Check>> {
    let front = FrontTrace::from_fn(1.0, 0.01, |t| SQRT2 * t);
    let ic = InitialCondition::min_wave();
    let gap = |dt_mc: f64| -> Result<f64> {
        let mut o = KilledBmOptions { n_paths: 100_000, dt_mc, seed: 1, bridge: false };
        let off = killed_bm_survival(&ic, &front, &[1.0], &o, Exec::Auto)?.survival[0];
        o.bridge = true;
        let on = killed_bm_survival(&ic, &front, &[1.0], &o, Exec::Auto)?.survival[0];
        Ok(off - on)
    };
    let (g1, g2) = (gap(1e-3)?, gap(5e-4)?);
    Ok(vec![
        Check::ge("gap without bridge at dt=1e-3", anchor, g1, 0.0),
        Check::ge("gap ratio dt=1e-3 vs 5e-4", anchor, g1 / g2, 2.0),
    ])
}

fn heaviside_identity(anchor: &str) -> Result<Vec<Check>> {
    let g = Grid::spanning(-10.0, 50.0, 0.02)?;
    let opts = SolverOptions { tail_fill: TailFill::Exponential, ..Default::default() };
    let ic = InitialCondition::Heaviside;
    let tr = solve_obstacle(&ic, g, 60.0, &opts)?.front;
    [-1.0, 0.5, 1.0]
        .into_iter()
        .map(|r| {
            let rep = bd_check(&ic, &tr, r, 0.02, 0.05)?;
            Ok(Check::le(format!("r={r} rel_err"), anchor, rep.rel_err, 0.02))
        })
        .collect()
}
