//! Free boundary problem with boundary slope `∂x V(t, L_t+) = −β`, solved
//! through the map to the base problem (`k = 2/β`):
//!
//! ```text
//! U(t, x) = k e^{−kx} ∫_{−∞}^x e^{kz} V(t, z) dz,      V = U + (1/k) ∂x U.
//! ```
//!
//! Both problems share the free boundary `L_t`.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::asymptotics::{
    b_of_t, infinite_mass_constant, m_slow_decay, AsymptoticPrediction, Regime, BRAMSON_LOG_COEFF,
};
use crate::brunet_derrida::Moment;
use crate::error::{FbpError, Result};
use crate::grid::{FrontTrace, Grid, Profile};
use crate::ic::InitialCondition;
use crate::quad::{integrate, integrate_to_inf, integrate_with_breaks, QuadOptions};
use crate::solver::{solve_obstacle, SolverOptions};
use crate::waves::{self, SQRT2};

/// Node spacing of tabulated mapped initial conditions.
pub const MAP_SPACING: f64 = 0.005;

fn is_critical(beta: f64) -> bool {
    (beta - SQRT2).abs() < waves::DEGENERATE_TOL
}

fn check_beta(beta: f64) -> Result<()> {
    if beta > 0.0 && beta.is_finite() {
        Ok(())
    } else {
        Err(FbpError::domain(format!("β = {beta} must be positive")))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BetaConfig {
    pub beta: f64,
    pub v0: InitialCondition,
}

impl BetaConfig {
    pub fn validate(&self) -> Result<()> {
        let mut errs = Vec::new();
        if !(self.beta > 0.0 && self.beta.is_finite()) {
            errs.push(format!("beta = {} must be positive", self.beta));
        }
        if let Err(FbpError::Validation(e)) = self.v0.validate() {
            errs.extend(e);
        }
        if errs.is_empty() {
            Ok(())
        } else {
            Err(FbpError::Validation(errs))
        }
    }
}

/// `k e^{−kx} ∫_{−∞}^x e^{kz} V₀(z) dz` at a single point, by quadrature.
pub fn mapped_u0(v0: &InitialCondition, beta: f64, x: f64) -> Result<f64> {
    check_beta(beta)?;
    let k = 2.0 / beta;
    let l0 = v0.l0();
    if x <= l0 {
        return Ok(1.0);
    }
    let mut pts: Vec<f64> = v0.breakpoints().into_iter().filter(|&p| p > l0 && p < x).collect();
    pts.insert(0, l0);
    pts.push(x);
    let opts = QuadOptions { abs_tol: 1e-15, rel_tol: 1e-12, max_intervals: 20_000 };
    let inner = integrate_with_breaks(|z| (-k * (x - z)).exp() * v0.eval(z), &pts, opts)?;
    Ok((-k * (x - l0)).exp() + k * inner.value)
}

/// Initial condition of the base problem. Closed forms for Heaviside and the
/// minimal β-waves; otherwise a table on `[L₀, L₀ + span]` built cell by cell.
pub fn map_v0_to_u0(v0: &InitialCondition, beta: f64) -> Result<InitialCondition> {
    check_beta(beta)?;
    v0.validate()?;
    let k = 2.0 / beta;
    match v0 {
        InitialCondition::Heaviside => {
            return Ok(InitialCondition::PowerExpTail { a: 1.0, nu: 0.0, lam: k });
        }
        InitialCondition::BetaWave { beta: b } if (b - beta).abs() <= 1e-15 * beta => {
            return Ok(InitialCondition::Wave { c: waves::c_beta_min(beta)? });
        }
        _ => {}
    }
    let l0 = v0.l0();
    let hi = v0.support_bound(1e-16).max(l0 + 1.0) + 40.0 / k;
    let n = ((hi - l0) / MAP_SPACING).ceil() as usize;
    let mut xs = Vec::with_capacity(n + 1);
    let mut us = Vec::with_capacity(n + 1);
    let mut u = 1.0;
    xs.push(l0);
    us.push(1.0);
    let opts = QuadOptions { abs_tol: 1e-16, rel_tol: 1e-12, max_intervals: 200 };
    for i in 1..=n {
        let (a, b) = (l0 + (i - 1) as f64 * MAP_SPACING, l0 + i as f64 * MAP_SPACING);
        let cell = integrate(|z| (-k * (b - z)).exp() * v0.eval(z), a, b, opts)?.value;
        u = ((-k * MAP_SPACING).exp() * u + k * cell).clamp(0.0, 1.0);
        // Monotone by construction up to rounding.
        u = u.min(*us.last().unwrap());
        xs.push(b);
        us.push(u);
    }
    Ok(InitialCondition::Tabulated { xs, us })
}

/// `U`-value used at a stencil point: the grid value right of the front, the
/// smooth continuation `1 − (x − L)²` left of it.
fn stencil_value(p: &Profile, i: isize, front: f64) -> f64 {
    let x = p.grid.x0 + (p.grid.window_shift + i as i64) as f64 * p.grid.dx;
    if x <= front || i < 0 {
        let d = x - front;
        1.0 - d * d
    } else {
        p.values[i as usize]
    }
}

/// `V = U + (β/2) ∂x U` right of the front (second-order backward
/// differences), `V = 1` on `x ≤ L_t`.
pub fn map_u_to_v(profile: &Profile, beta: f64, front: f64) -> Result<Profile> {
    check_beta(beta)?;
    let h = profile.grid.dx;
    let alpha = beta / (4.0 * h);
    let mut out = profile.clone();
    out.front = Some(front);
    for i in 0..profile.values.len() {
        if profile.grid.x(i) <= front {
            out.values[i] = 1.0;
            continue;
        }
        let ii = i as isize;
        let (u0, u1, u2) = (
            profile.values[i],
            stencil_value(profile, ii - 1, front),
            stencil_value(profile, ii - 2, front),
        );
        out.values[i] = u0 + alpha * (3.0 * u0 - 4.0 * u1 + u2);
    }
    Ok(out)
}

/// Front of a `V` profile: stored value, else the crossing of level 1 by the
/// linear continuation of the first two sub-unit samples.
fn v_front(profile: &Profile) -> f64 {
    if let Some(l) = profile.front {
        return l;
    }
    let v = &profile.values;
    let g = &profile.grid;
    let Some(j) = v.iter().position(|&x| x < 1.0) else {
        return g.right();
    };
    let j = j.max(1);
    if j + 1 < v.len() && v[j] > v[j + 1] {
        let slope = (v[j + 1] - v[j]) / g.dx;
        (g.x(j) + (1.0 - v[j]) / slope).max(g.x(j - 1))
    } else {
        g.x(j - 1)
    }
}

/// Inverse of [`map_u_to_v`]: the rightward recursion
/// `U_i = (V_i + α(4U_{i−1} − U_{i−2})) / (1 + 3α)`, `α = β/(4 dx)`,
/// discretising `U(x) = e^{−k(x−L)} + k ∫_L^x e^{−k(x−z)} V(z) dz` with `U = 1`
/// on the region `V ≡ 1` left of the front.
pub fn map_v_to_u(profile: &Profile, beta: f64) -> Result<Profile> {
    check_beta(beta)?;
    let front = v_front(profile);
    let h = profile.grid.dx;
    let alpha = beta / (4.0 * h);
    let mut out = profile.clone();
    out.front = Some(front);
    for i in 0..profile.values.len() {
        if profile.grid.x(i) <= front {
            out.values[i] = 1.0;
            continue;
        }
        let ii = i as isize;
        let u1 = stencil_value(&out, ii - 1, front);
        let u2 = stencil_value(&out, ii - 2, front);
        out.values[i] = (profile.values[i] + alpha * (4.0 * u1 - u2)) / (1.0 + 3.0 * alpha);
    }
    Ok(out)
}

/// One-sided `∂x V(t, L_t+)`: derivative at the front of the cubic through
/// four grid values starting two cells right of it, where the difference
/// stencil of [`map_u_to_v`] no longer reaches across the front.
pub fn beta_boundary_slope(profile: &Profile, front: f64) -> f64 {
    let g = &profile.grid;
    let j = (g.index_of(front).floor() + 3.0).max(0.0) as usize;
    let j = j.min(profile.values.len().saturating_sub(4));
    let xs: Vec<f64> = (j..j + 4).map(|i| g.x(i)).collect();
    let ys: Vec<f64> = (j..j + 4).map(|i| profile.values[i]).collect();
    crate::solver::newton_derivatives(&xs, &ys, front).0
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BetaSolveResult {
    pub beta: f64,
    pub v: Vec<Profile>,
    pub u: Vec<Profile>,
    pub front: FrontTrace,
    pub i_beta: Moment,
    pub last_v: Profile,
    pub last_u: Profile,
}

/// Runs the base solver on the mapped initial condition and maps every
/// snapshot back.
pub fn solve_beta(config: &BetaConfig, grid: Grid, t_end: f64, opts: &SolverOptions) -> Result<BetaSolveResult> {
    config.validate()?;
    let u0 = map_v0_to_u0(&config.v0, config.beta)?;
    let sol = solve_obstacle(&u0, grid, t_end, opts)?;
    let to_v = |p: &Profile| map_u_to_v(p, config.beta, p.front.expect("solver profiles carry their front"));
    let v = sol.snapshots.iter().map(to_v).collect::<Result<Vec<_>>>()?;
    let last_v = to_v(&sol.last)?;
    Ok(BetaSolveResult {
        beta: config.beta,
        v,
        u: sol.snapshots,
        front: sol.front,
        i_beta: i_beta(&config.v0, config.beta)?,
        last_v,
        last_u: sol.last,
    })
}

/// `∫_{−∞}^∞ e^{kx} V₀ dx` for `β ≥ √2`, `∫₀^∞ x e^{√2x} V₀ dx` for `β < √2`.
pub fn i_beta(v0: &InitialCondition, beta: f64) -> Result<Moment> {
    check_beta(beta)?;
    v0.validate()?;
    let k = 2.0 / beta;
    let tail = v0.tail();
    let l0 = v0.l0();
    let opts = QuadOptions { abs_tol: 1e-14, rel_tol: 1e-12, max_intervals: 20_000 };
    let value = if beta >= SQRT2 || is_critical(beta) {
        if !tail.moment_finite(k, 0.0) {
            return Ok(Moment::Infinite);
        }
        let f = |x: f64| v0.weighted(x, k);
        let mut pts: Vec<f64> = v0.breakpoints().into_iter().filter(|&p| p > l0).collect();
        pts.insert(0, l0);
        pts.push(pts.last().unwrap() + 20.0);
        let body = integrate_with_breaks(f, &pts, opts)?.value;
        (k * l0).exp() / k + body + integrate_to_inf(f, *pts.last().unwrap(), opts)?.value
    } else {
        if !tail.moment_finite(SQRT2, 1.0) {
            return Ok(Moment::Infinite);
        }
        let f = |x: f64| x * v0.weighted(x, SQRT2);
        let mut pts: Vec<f64> = v0.breakpoints().into_iter().filter(|&p| p > 0.0).collect();
        pts.insert(0, 0.0);
        pts.push(pts.last().unwrap() + 20.0);
        integrate_with_breaks(f, &pts, opts)?.value + integrate_to_inf(f, *pts.last().unwrap(), opts)?.value
    };
    Ok(if value.is_finite() && value <= crate::brunet_derrida::INFINITE_THRESHOLD {
        Moment::Finite(value)
    } else {
        Moment::Infinite
    })
}

/// `(β/2)(log(β² − 2) − 2 log β)`, the offset of the pushed front from its
/// slower-decay centring.
pub fn pushed_offset(beta: f64) -> f64 {
    0.5 * beta * ((beta * beta - 2.0).ln() - 2.0 * beta.ln())
}

/// Pushed-regime centring `m(t)` of the mapped initial condition plus the offset.
pub fn m_pushed(v0: &InitialCondition, beta: f64, t: f64) -> Result<f64> {
    if !(beta > SQRT2) || is_critical(beta) {
        return Err(FbpError::Regime(format!("pushed centring needs β > √2, got {beta}")));
    }
    let u0 = map_v0_to_u0(v0, beta)?;
    Ok(m_slow_decay(&u0, t)? + pushed_offset(beta))
}

/// Front template in each regime. `b(t)` is sampled at `ts` in the pulled
/// regime. Infinite `I_β` yields [`Regime::Divergent`] with the template the
/// front runs away from.
pub fn front_prediction_beta(config: &BetaConfig, ts: &[f64]) -> Result<AsymptoticPrediction> {
    config.validate()?;
    let beta = config.beta;
    let k = 2.0 / beta;
    let need = SQRT2.min(k);
    let rate = config.v0.tail().rate;
    if rate < need - 1e-12 {
        return Err(FbpError::Regime(format!(
            "V₀ decays at rate {rate}, slower than min(√2, 2/β) = {need}"
        )));
    }
    let i = i_beta(&config.v0, beta)?;
    let sqrt_pi_log = PI.sqrt().ln();
    let pred = if is_critical(beta) {
        match i {
            Moment::Finite(v) => AsymptoticPrediction::new(
                Regime::PushmiPullyu,
                SQRT2,
                -1.0 / (2.0 * SQRT2),
                0.0,
                Some(((SQRT2 * v).ln() - sqrt_pi_log) / SQRT2),
            ),
            Moment::Infinite => AsymptoticPrediction::new(Regime::Divergent, SQRT2, -1.0 / (2.0 * SQRT2), 0.0, None),
        }
    } else if beta < SQRT2 {
        let u0 = map_v0_to_u0(&config.v0, beta)?;
        let (regime, constant) = match i {
            Moment::Finite(_) => (Regime::FiniteMassPulled, None),
            Moment::Infinite => (Regime::InfiniteMassPulled, Some(infinite_mass_constant())),
        };
        let curve = ts.iter().map(|&t| b_of_t(&u0, t).map(|b| (t, b))).collect::<Result<Vec<_>>>()?;
        let mut p = AsymptoticPrediction::new(regime, SQRT2, BRAMSON_LOG_COEFF, 0.0, constant);
        p.b_curve = Some(curve);
        p
    } else {
        let c = waves::c_beta_min(beta)?;
        match i {
            Moment::Finite(v) => AsymptoticPrediction::new(
                Regime::Pushed,
                c,
                0.0,
                0.0,
                Some(0.5 * beta * (k * v).ln() + pushed_offset(beta)),
            ),
            Moment::Infinite => AsymptoticPrediction::new(Regime::Divergent, c, 0.0, 0.0, None),
        }
    };
    Ok(pred)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::waves::WaveParams;
    use proptest::prelude::*;

    fn close(a: f64, b: f64, tol: f64) {
        assert!((a - b).abs() <= tol, "{a} vs {b} (tol {tol})");
    }

    #[test]
    fn heaviside_maps_to_exponential() {
        let u0 = map_v0_to_u0(&InitialCondition::Heaviside, SQRT2).unwrap();
        for x in [-1.0, 0.0, 0.3, 2.0, 7.0] {
            let exact = if x <= 0.0 { 1.0 } else { (-SQRT2 * x).exp() };
            close(u0.eval(x), exact, 1e-15);
            close(mapped_u0(&InitialCondition::Heaviside, SQRT2, x).unwrap(), exact, 1e-12);
        }
    }

    #[test]
    fn beta_wave_maps_to_wave() {
        for beta in [1.0, SQRT2, 2.0, 3.0] {
            let v0 = InitialCondition::BetaWave { beta };
            let u0 = map_v0_to_u0(&v0, beta).unwrap();
            for x in [0.1, 1.0, 4.0] {
                close(u0.eval(x), mapped_u0(&v0, beta, x).unwrap(), 1e-9);
            }
        }
    }

    #[test]
    fn tabulated_map_matches_pointwise_quadrature() {
        let v0: InitialCondition = "powexp:2,1,1.6".parse().unwrap();
        let u0 = map_v0_to_u0(&v0, 1.0).unwrap();
        let l0 = v0.l0();
        close(u0.l0(), l0, 1e-12);
        for x in [l0 + 0.5, l0 + 2.0, l0 + 6.0] {
            close(u0.eval(x), mapped_u0(&v0, 1.0, x).unwrap(), 1e-5);
        }
        // Left of the contact point the value 1 is preserved.
        close(u0.eval(l0 - 3.0), 1.0, 0.0);
    }

    #[test]
    fn moment_identity_both_sides() {
        let v0: InitialCondition = "powexp:2,0,1.5".parse().unwrap();
        let opts = QuadOptions { abs_tol: 1e-13, rel_tol: 1e-10, max_intervals: 4000 };
        for beta in [1.0, SQRT2, 2.0] {
            let k = 2.0 / beta;
            for r in [-1.0, 0.5] {
                let lhs = integrate(|x| (r * x).exp() * mapped_u0(&v0, beta, x).unwrap(), 0.0, 60.0, opts)
                    .unwrap()
                    .value;
                let l0 = v0.l0();
                let pos = integrate_with_breaks(|x| v0.weighted(x, r), &[0.0, l0, 80.0], opts).unwrap().value;
                let rhs = 2.0 / (2.0 - r * beta) * (pos + 1.0 / k);
                close(lhs, rhs, 1e-6 * rhs.abs());
            }
        }
    }

    #[test]
    fn forward_map_reproduces_beta_waves() {
        for (beta, c) in [(1.0, SQRT2), (SQRT2, SQRT2), (2.0, 1.5), (2.0, 2.0)] {
            let mut errs = Vec::new();
            for dx in [0.02, 0.01] {
                let g = Grid::spanning(-5.0, 45.0, dx).unwrap();
                let p = WaveParams::new(c).unwrap();
                let u = Profile::from_fn(g, 0.0, |x| p.ccdf(x));
                let v = map_u_to_v(&u, beta, 0.0).unwrap();
                let err = (0..g.nx)
                    .map(|i| (v.values[i] - p.beta_ccdf(beta, g.x(i))).abs())
                    .fold(0.0, f64::max);
                errs.push(err);
            }
            assert!(errs[0] < 2e-3, "β = {beta}, c = {c}: {errs:?}");
            // Second order: halving dx cuts the error by about 4.
            assert!(errs[1] < 0.3 * errs[0], "β = {beta}, c = {c}: {errs:?}");
        }
    }

    #[test]
    fn round_trip_is_identity() {
        let g = Grid::spanning(-5.0, 45.0, 0.01).unwrap();
        let u = Profile::from_fn(g, 0.0, |x| waves::ccdf(SQRT2, x).unwrap());
        let v = map_u_to_v(&u, 1.0, 0.0).unwrap();
        let back = map_v_to_u(&v, 1.0).unwrap();
        let err = u.values.iter().zip(&back.values).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        assert!(err <= 1e-6, "{err}");
    }

    #[test]
    fn inverse_map_recovers_min_wave() {
        let g = Grid::spanning(-5.0, 45.0, 0.01).unwrap();
        let mut v = Profile::from_fn(g, 0.0, |x| if x <= 0.0 { 1.0 } else { (-SQRT2 * x).exp() });
        v.front = None;
        let u = map_v_to_u(&v, SQRT2).unwrap();
        let err = (0..g.nx)
            .map(|i| (u.values[i] - waves::ccdf(SQRT2, g.x(i)).unwrap()).abs())
            .fold(0.0, f64::max);
        assert!(err <= 1e-4, "{err}");
    }

    #[test]
    fn trivial_maps() {
        let g = Grid::spanning(-5.0, 45.0, 0.02).unwrap();
        let ones = Profile::from_fn(g, 0.0, |_| 1.0);
        let back = map_v_to_u(&ones, 1.3).unwrap();
        assert!(back.values.iter().all(|&u| u == 1.0));
        // β → 0 degenerates to the identity.
        let u = Profile::from_fn(g, 0.0, |x| waves::ccdf(1.5, x).unwrap());
        let v = map_u_to_v(&u, 1e-9, 0.0).unwrap();
        let err = u.values.iter().zip(&v.values).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        assert!(err < 1e-7, "{err}");
    }

    #[test]
    fn slope_diagnostic_on_exact_wave() {
        let g = Grid::spanning(-5.0, 45.0, 0.01).unwrap();
        for (beta, c) in [(2.0, 1.5), (1.0, SQRT2)] {
            let p = WaveParams::new(c).unwrap();
            let v = Profile::from_fn(g, 0.0, |x| p.beta_ccdf(beta, x));
            close(beta_boundary_slope(&v, 0.0), -beta, 1e-3);
        }
    }

    #[test]
    fn i_beta_examples() {
        let v0: InitialCondition = "powexp:1,0,2".parse().unwrap();
        close(i_beta(&v0, 2.0).unwrap().finite().unwrap(), 2.0, 1e-10);
        assert_eq!(i_beta(&InitialCondition::Heaviside, 1.0).unwrap(), Moment::Finite(0.0));
        let v0: InitialCondition = "powexp:1,-1,1".parse().unwrap();
        assert!(i_beta(&v0, 2.0).unwrap().is_infinite());
        // Finite-mass equivalence for β < √2 on the parametric family.
        for nu in [-3.0, -2.5, -2.0, 0.0] {
            let v0 = InitialCondition::PowerExpTail { a: 1.0, nu, lam: SQRT2 };
            let u0 = InitialCondition::PowerExpTail { a: 1.0, nu, lam: SQRT2 };
            assert_eq!(i_beta(&v0, 1.0).unwrap().is_infinite(), !u0.finite_initial_mass());
        }
    }

    #[test]
    fn predictions_by_regime() {
        let cfg = BetaConfig { beta: SQRT2, v0: InitialCondition::Heaviside };
        let p = front_prediction_beta(&cfg, &[]).unwrap();
        assert_eq!(p.regime, Regime::PushmiPullyu);
        close(p.log_coeff, -1.0 / (2.0 * SQRT2), 1e-15);
        // I = 1/√2 for the Heaviside step.
        close(p.constant.unwrap(), -PI.sqrt().ln() / SQRT2, 1e-10);
        // A step at s with e^{√2 s}/√2 = √π/√2 has I_√2 = √π/√2 and constant 0.
        let s = PI.sqrt().ln() / SQRT2;
        let v0 = InitialCondition::Tabulated { xs: vec![s, s + 1e-9], us: vec![1.0, 0.0] };
        let p = front_prediction_beta(&BetaConfig { beta: SQRT2, v0 }, &[]).unwrap();
        close(p.constant.unwrap(), 0.0, 1e-8);

        let v0: InitialCondition = "powexp:1,0,2".parse().unwrap();
        let p = front_prediction_beta(&BetaConfig { beta: 2.0, v0 }, &[]).unwrap();
        assert_eq!(p.regime, Regime::Pushed);
        close(p.linear, 1.5, 1e-15);
        close(p.constant.unwrap(), 2f64.ln() - 2f64.ln(), 1e-10);

        let v0 = InitialCondition::PowerExpTail { a: 1.0, nu: -3.0, lam: SQRT2 };
        let p = front_prediction_beta(&BetaConfig { beta: 1.0, v0 }, &[10.0, 100.0]).unwrap();
        assert_eq!(p.regime, Regime::FiniteMassPulled);
        close(p.log_coeff, BRAMSON_LOG_COEFF, 0.0);

        let v0: InitialCondition = "powexp:1,-1,1".parse().unwrap();
        let p = front_prediction_beta(&BetaConfig { beta: 2.0, v0 }, &[]).unwrap();
        assert_eq!(p.regime, Regime::Divergent);

        let v0: InitialCondition = "powexp:1,0,0.5".parse().unwrap();
        assert!(matches!(
            front_prediction_beta(&BetaConfig { beta: 2.0, v0 }, &[]),
            Err(FbpError::Regime(_))
        ));
    }

    #[test]
    fn pushed_constant_diverges_at_transition() {
        let beta = SQRT2 + 1e-3;
        let cfg = BetaConfig { beta, v0: InitialCondition::Heaviside };
        let p = front_prediction_beta(&cfg, &[]).unwrap();
        assert!(p.constant.unwrap() < -3.0, "{:?}", p.constant);
        close(waves::c_beta_min(beta).unwrap(), SQRT2, 1e-6);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(32))]

        #[test]
        fn round_trip_any_beta(beta in 0.2f64..4.0, c in 1.42f64..3.0, shift in -2.0f64..2.0) {
            let g = Grid::spanning(-5.0, 45.0, 0.02).unwrap();
            let p = WaveParams::new(c).unwrap();
            let u = Profile::from_fn(g, 0.0, |x| p.ccdf(x - shift));
            let v = map_u_to_v(&u, beta, shift).unwrap();
            let back = map_v_to_u(&v, beta).unwrap();
            let err = u.values.iter().zip(&back.values).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
            prop_assert!(err < 1e-9, "{err}");
        }
    }
}
