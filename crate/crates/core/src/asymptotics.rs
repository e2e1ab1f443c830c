//! Predicted front positions and least-squares fits of solver traces.
//!
//! Pulled fronts follow `m(t) = √2 t − (3/(2√2)) log t + b(t)` with
//!
//! ```text
//! b(t) = 2^{−1/2} log( ∫₀^∞ y e^{√2y} U₀(y) e^{−y²/(2t)} dy + 1 ),
//! ```
//!
//! slower decay follows `m(t) = sup{x : e^t E[U₀(x + √t Z)] ≥ 1}`.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{FbpError, Result};
use crate::grid::FrontTrace;
use crate::ic::InitialCondition;
use crate::quad::{integrate_to_inf, integrate_with_breaks, QuadOptions};
use crate::waves::SQRT2;

/// `−3/(2√2)`.
pub const BRAMSON_LOG_COEFF: f64 = -1.060_660_171_779_821_3;

/// `−(1/√2) log √π`, the front constant for infinite initial mass.
pub fn infinite_mass_constant() -> f64 {
    -PI.sqrt().ln() / SQRT2
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Regime {
    FiniteMassPulled,
    InfiniteMassPulled,
    SlowerDecay,
    HeavyTail,
    PushmiPullyu,
    Pushed,
    /// Front runs ahead of every template of the family (infinite `I_β`).
    Divergent,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AsymptoticPrediction {
    pub regime: Regime,
    pub linear: f64,
    pub log_coeff: f64,
    pub loglog_coeff: f64,
    /// `None` when the constant is not known in closed form.
    pub constant: Option<f64>,
    /// Sampled `(t, b(t))`, added to the template when present.
    pub b_curve: Option<Vec<(f64, f64)>>,
}

impl AsymptoticPrediction {
    pub fn new(regime: Regime, linear: f64, log_coeff: f64, loglog_coeff: f64, constant: Option<f64>) -> Self {
        Self { regime, linear, log_coeff, loglog_coeff, constant, b_curve: None }
    }

    /// Template without the constant.
    pub fn shape(&self, t: f64) -> f64 {
        let mut v = self.linear * t + self.log_coeff * t.ln();
        if self.loglog_coeff != 0.0 {
            v += self.loglog_coeff * t.ln().ln();
        }
        if let Some(curve) = &self.b_curve {
            v += interp(curve, t);
        }
        v
    }

    /// Full prediction; `None` when the constant is unknown.
    pub fn position(&self, t: f64) -> Option<f64> {
        self.constant.map(|c| self.shape(t) + c)
    }
}

fn interp(curve: &[(f64, f64)], t: f64) -> f64 {
    let n = curve.len();
    if n == 0 {
        return 0.0;
    }
    if t <= curve[0].0 {
        return curve[0].1;
    }
    if t >= curve[n - 1].0 {
        return curve[n - 1].1;
    }
    let j = curve.partition_point(|p| p.0 <= t);
    let (t0, b0) = curve[j - 1];
    let (t1, b1) = curve[j];
    b0 + (t - t0) / (t1 - t0) * (b1 - b0)
}

/// `b(t)`, truncating the integral at `y = 10√t + 50`.
pub fn b_of_t(ic: &InitialCondition, t: f64) -> Result<f64> {
    if !(t > 0.0) {
        return Err(FbpError::domain(format!("b(t) needs t > 0, got {t}")));
    }
    let upper = 10.0 * t.sqrt() + 50.0;
    let f = |y: f64| y * ic.weighted(y, SQRT2) * (-y * y / (2.0 * t)).exp();
    let mut pts = vec![0.0];
    let mut extra: Vec<f64> = ic.breakpoints().into_iter().filter(|&p| p > 0.0 && p < upper).collect();
    // Geometric breakpoints resolve both the 1/y-type bulk and the Gaussian cut-off.
    let mut p = 0.5;
    while p < upper {
        extra.push(p);
        p *= 2.0;
    }
    extra.push(t.sqrt());
    extra.sort_by(f64::total_cmp);
    extra.dedup();
    pts.extend(extra.into_iter().filter(|&p| p > 0.0 && p < upper));
    pts.push(upper);
    let opts = QuadOptions { abs_tol: 1e-12, rel_tol: 1e-11, max_intervals: 20_000 };
    let r = integrate_with_breaks(f, &pts, opts)?;
    Ok((r.value + 1.0).ln() / SQRT2)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MassCase {
    Finite,
    Infinite,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PulledFront {
    /// `√2t − (3/(2√2)) log t + b(t)`, plus the constant when known.
    pub position: f64,
    pub b: f64,
    pub constant: Option<f64>,
}

pub fn m_pulled(ic: &InitialCondition, t: f64, case: MassCase) -> Result<PulledFront> {
    if t < 1.0 {
        return Err(FbpError::domain(format!("pulled template needs t ≥ 1, got {t}")));
    }
    let b = b_of_t(ic, t)?;
    let constant = match case {
        MassCase::Finite => None,
        MassCase::Infinite => Some(infinite_mass_constant()),
    };
    let position = SQRT2 * t + BRAMSON_LOG_COEFF * t.ln() + b + constant.unwrap_or(0.0);
    Ok(PulledFront { position, b, constant })
}

/// `e^t E[U₀(x + √t Z)]`.
pub fn heat_growth(ic: &InitialCondition, t: f64, x: f64) -> Result<f64> {
    let l0 = ic.l0();
    let sd = t.sqrt();
    let left = 0.5 * libm::erfc((x - l0) / (SQRT2 * sd));
    let left = if left > 0.0 { (t + left.ln()).exp() } else { 0.0 };
    let norm = t - (2.0 * PI * t).sqrt().ln();
    let f = |y: f64| {
        let u = ic.eval(y);
        if u <= 0.0 {
            return 0.0;
        }
        let d = y - x;
        (norm + u.ln() - d * d / (2.0 * t)).exp()
    };
    let hi = x + 12.0 * sd;
    if hi <= l0 {
        return Ok(left);
    }
    let mut pts = vec![l0];
    let mut extra: Vec<f64> = ic.breakpoints();
    let rate = ic.tail().rate;
    if rate.is_finite() {
        extra.push(x - rate * t);
    }
    for k in -40..=12 {
        extra.push(x + k as f64 * sd);
    }
    extra.sort_by(f64::total_cmp);
    pts.extend(extra.into_iter().filter(|&p| p > l0 && p < hi));
    pts.push(hi);
    pts.dedup();
    let opts = QuadOptions { abs_tol: 1e-14, rel_tol: 1e-10, max_intervals: 20_000 };
    Ok(left + integrate_with_breaks(f, &pts, opts)?.value)
}

/// Slower-decay centring `sup{x : e^t E[U₀(x + √t Z)] ≥ 1}` by bisection.
pub fn m_slow_decay(ic: &InitialCondition, t: f64) -> Result<f64> {
    if !(t > 0.0) {
        return Err(FbpError::domain(format!("need t > 0, got {t}")));
    }
    let l0 = ic.l0();
    let mut lo = l0 - 10.0 * t.sqrt();
    if heat_growth(ic, t, lo)? < 1.0 {
        return Err(FbpError::window(format!("no sub-level bracket below x = {lo}")));
    }
    let mut hi = l0 + 2.0 * t + 1.0;
    while heat_growth(ic, t, hi)? >= 1.0 {
        lo = hi;
        hi = l0 + 2.0 * (hi - l0);
        if hi - l0 > 1e4 * (t + 1.0) {
            return Err(FbpError::window(format!("level set escapes beyond x = {hi}")));
        }
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if !(mid > lo && mid < hi) || hi - lo < 1e-12 * (1.0 + mid.abs()) {
            break;
        }
        if heat_growth(ic, t, mid)? >= 1.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// `∫₀^∞ y^{1+ν} e^{−y²/2} dy` by quadrature (requires `ν > −2`).
pub fn gaussian_moment(nu: f64) -> Result<f64> {
    if !(nu > -2.0) {
        return Err(FbpError::domain(format!("moment diverges for ν = {nu} ≤ −2")));
    }
    let p = 1.0 + nu;
    let opts = QuadOptions { abs_tol: 1e-14, rel_tol: 1e-12, max_intervals: 20_000 };
    // Substituting y = s^{1/(2+ν)} removes the integrable singularity at 0.
    let q = 1.0 / (2.0 + nu);
    let head = integrate_with_breaks(|s: f64| q * (-(s.powf(2.0 * q)) / 2.0).exp(), &[0.0, 0.5, 1.0], opts)?;
    let tail = integrate_to_inf(|y: f64| y.powf(p) * (-y * y / 2.0).exp(), 1.0, opts)?;
    Ok(head.value + tail.value)
}

/// Templates for `U₀(x) ∼ A x^ν e^{−√2x}`.
pub fn heavy_tail_prediction(a: f64, nu: f64) -> Result<AsymptoticPrediction> {
    if !(a > 0.0) {
        return Err(FbpError::domain(format!("amplitude A = {a} must be positive")));
    }
    let sqrt_pi = PI.sqrt();
    Ok(if nu < -2.0 {
        AsymptoticPrediction::new(Regime::HeavyTail, SQRT2, BRAMSON_LOG_COEFF, 0.0, None)
    } else if nu == -2.0 {
        AsymptoticPrediction::new(
            Regime::HeavyTail,
            SQRT2,
            BRAMSON_LOG_COEFF,
            1.0 / SQRT2,
            Some((a / (2.0 * sqrt_pi)).ln() / SQRT2),
        )
    } else {
        let m = gaussian_moment(nu)?;
        AsymptoticPrediction::new(
            Regime::HeavyTail,
            SQRT2,
            (nu - 1.0) / (2.0 * SQRT2),
            0.0,
            Some((a / sqrt_pi * m).ln() / SQRT2),
        )
    })
}

/// Template picked from the tail class of `ic`; `b(t)` sampled at `ts`.
pub fn predict(ic: &InitialCondition, ts: &[f64]) -> Result<AsymptoticPrediction> {
    let tail = ic.tail();
    if tail.rate < SQRT2 {
        let l = tail.rate;
        return Ok(AsymptoticPrediction::new(Regime::SlowerDecay, 1.0 / l + 0.5 * l, 0.0, 0.0, None));
    }
    let (regime, constant) = if ic.finite_initial_mass() {
        (Regime::FiniteMassPulled, None)
    } else {
        (Regime::InfiniteMassPulled, Some(infinite_mass_constant()))
    };
    let curve = ts.iter().map(|&t| b_of_t(ic, t).map(|b| (t, b))).collect::<Result<Vec<_>>>()?;
    let mut p = AsymptoticPrediction::new(regime, SQRT2, BRAMSON_LOG_COEFF, 0.0, constant);
    p.b_curve = Some(curve);
    Ok(p)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct FrontFit {
    pub constant: f64,
    /// Largest deviation from the fitted template over the window.
    pub residual: f64,
    pub samples: usize,
}

/// Least-squares constant of `L_t − template(t)` over `[T1, T2]`.
pub fn fit_front(trace: &FrontTrace, template: &AsymptoticPrediction, window: (f64, f64)) -> Result<FrontFit> {
    let (t1, t2) = window;
    if !(t1 >= 1.0 && t2 >= 2.0 * t1) {
        return Err(FbpError::parameter(format!("fit window [{t1}, {t2}] needs T2 ≥ 2·T1 ≥ 2")));
    }
    if trace.is_empty() || trace.times[0] > t1 || trace.t_end() < t2 {
        return Err(FbpError::parameter(format!("fit window [{t1}, {t2}] lies outside the trace")));
    }
    let devs: Vec<f64> = trace
        .times
        .iter()
        .zip(&trace.positions)
        .filter(|(t, _)| **t >= t1 && **t <= t2)
        .map(|(&t, &l)| l - template.shape(t))
        .collect();
    if devs.is_empty() {
        return Err(FbpError::parameter("no trace samples inside the fit window"));
    }
    let constant = devs.iter().sum::<f64>() / devs.len() as f64;
    let residual = devs.iter().map(|d| (d - constant).abs()).fold(0.0, f64::max);
    Ok(FrontFit { constant, residual, samples: devs.len() })
}
