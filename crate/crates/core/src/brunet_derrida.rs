//! Both sides of the Brunet–Derrida relation
//!
//! ```text
//! ∫_{L₀}^∞ U₀(x) e^{rx} dx = −e^{rL₀}/r + (1/r) ∫₀^∞ e^{r L_t − (1 + r²/2) t} dt,   r < √2, r ≠ 0,
//! ```
//!
//! and the speed law `limsup L_t / t = 1/r₀ + r₀/2`.

use serde::{Deserialize, Serialize};

use crate::error::{FbpError, Result};
use crate::grid::FrontTrace;
use crate::ic::InitialCondition;
use crate::quad::{integrate_to_inf, integrate_with_breaks, QuadOptions};
use crate::waves::SQRT2;

/// Values above this are reported as infinite.
pub const INFINITE_THRESHOLD: f64 = 1e12;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "value", rename_all = "snake_case")]
pub enum Moment {
    Finite(f64),
    Infinite,
}

impl Moment {
    pub fn finite(self) -> Option<f64> {
        match self {
            Moment::Finite(v) => Some(v),
            Moment::Infinite => None,
        }
    }

    pub fn is_infinite(self) -> bool {
        matches!(self, Moment::Infinite)
    }

    fn from_value(v: f64) -> Self {
        if v.is_finite() && v.abs() <= INFINITE_THRESHOLD {
            Moment::Finite(v)
        } else {
            Moment::Infinite
        }
    }
}

fn check_r(r: f64) -> Result<()> {
    if r == 0.0 || !r.is_finite() {
        return Err(FbpError::domain(format!("transform parameter r = {r} must be finite and non-zero")));
    }
    if r >= SQRT2 {
        return Err(FbpError::domain(format!(
            "the relation is refused for r = {r} ≥ √2, where both sides may be finite yet unequal"
        )));
    }
    Ok(())
}

/// `∫_{L₀}^∞ U₀(x) e^{rx} dx`.
pub fn bd_lhs(ic: &InitialCondition, r: f64) -> Result<Moment> {
    check_r(r)?;
    ic.validate()?;
    if !ic.exp_moment_finite(r) {
        return Ok(Moment::Infinite);
    }
    let l0 = ic.l0();
    let f = |x: f64| ic.weighted(x, r);
    let opts = QuadOptions { abs_tol: 1e-14, rel_tol: 1e-12, max_intervals: 20_000 };
    let value = match ic {
        InitialCondition::Tabulated { xs, .. } => {
            let mut pts: Vec<f64> = xs.iter().copied().filter(|&x| x > l0).collect();
            pts.insert(0, l0);
            integrate_with_breaks(f, &pts, opts)?.value
        }
        _ => {
            // Finite piece over the bulk, mapped quadrature for the tail.
            let mid = l0 + 20.0;
            let body = integrate_with_breaks(f, &[l0, l0 + 1.0, l0 + 5.0, mid], opts)?.value;
            body + integrate_to_inf(f, mid, opts)?.value
        }
    };
    Ok(Moment::from_value(value))
}

/// Right-hand side with its error budget.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BdRhs {
    pub value: Moment,
    /// Step-halving estimate `|I_h − I_2h|` of the trapezoid error, on the
    /// scale of `value`. Fronts start like `−√t`, so the rule is below
    /// second order near 0 and the usual `/3` would understate the error.
    pub quad_err: f64,
    /// Share of the time integral contributed by the extrapolated tail.
    pub tail_fraction: f64,
}

/// `−e^{rL₀}/r + (1/r) ∫₀^∞ e^{rL_t − (1 + r²/2)t} dt`, trapezoid on the trace
/// plus the tail of the front extended linearly at `tail_speed`.
pub fn bd_rhs(front: &FrontTrace, l0: f64, r: f64, tail_speed: f64) -> Result<BdRhs> {
    check_r(r)?;
    if front.len() < 3 || front.times[0] != 0.0 {
        return Err(FbpError::parameter("front trace must start at t = 0 with at least 3 samples"));
    }
    let decay = 1.0 + 0.5 * r * r;
    let g = |k: usize| (r * front.positions[k] - decay * front.times[k]).exp();
    let n = front.len();
    let trap = |stride: usize| {
        let mut sum = 0.0;
        let mut k = 0;
        while k + stride < n {
            sum += 0.5 * (g(k) + g(k + stride)) * (front.times[k + stride] - front.times[k]);
            k += stride;
        }
        // Leftover samples when the stride does not divide n − 1.
        while k + 1 < n {
            sum += 0.5 * (g(k) + g(k + 1)) * (front.times[k + 1] - front.times[k]);
            k += 1;
        }
        sum
    };
    let fine = trap(1);
    let coarse = trap(2);
    let quad_err = (fine - coarse).abs() / r.abs();

    if r * tail_speed >= decay {
        return Ok(BdRhs { value: Moment::Infinite, quad_err, tail_fraction: 1.0 });
    }
    let tail = g(n - 1) / (decay - r * tail_speed);
    let integral = fine + tail;
    let value = -(r * l0).exp() / r + integral / r;
    Ok(BdRhs {
        value: Moment::from_value(value),
        quad_err,
        tail_fraction: (tail / integral).abs(),
    })
}

/// Tail speed `(L_T − L_{T/2}) / (T/2)`.
pub fn fitted_tail_speed(front: &FrontTrace) -> f64 {
    let t = front.t_end();
    (front.at(t) - front.at(0.5 * t)) / (0.5 * t)
}

/// `r₀ = sup({0} ∪ {r ∈ (0, √2) : ∫ U₀ e^{rx} < ∞})`.
pub fn r0_of(ic: &InitialCondition) -> f64 {
    ic.tail().rate.min(SQRT2).max(0.0)
}

/// `1/r₀ + r₀/2`, infinite at `r₀ = 0`.
pub fn speed_from_r0(r0: f64) -> Result<f64> {
    if !(0.0..=SQRT2 + 1e-12).contains(&r0) {
        return Err(FbpError::domain(format!("r₀ = {r0} must lie in [0, √2]")));
    }
    Ok(if r0 == 0.0 { f64::INFINITY } else { 1.0 / r0 + 0.5 * r0 })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BdReport {
    pub r: f64,
    pub lhs: Moment,
    pub rhs: Moment,
    pub rel_err: f64,
    pub tail_fraction: f64,
    pub quad_err: f64,
    pub pass: bool,
}

/// Compares both sides: error `|lhs − rhs| / max(|lhs|, 0.1)`, or agreement
/// on infiniteness.
pub fn bd_check(
    ic: &InitialCondition,
    front: &FrontTrace,
    r: f64,
    rel_tol: f64,
    max_tail_fraction: f64,
) -> Result<BdReport> {
    let lhs = bd_lhs(ic, r)?;
    let rhs = bd_rhs(front, ic.l0(), r, fitted_tail_speed(front))?;
    let (rel_err, pass) = match (lhs, rhs.value) {
        (Moment::Finite(a), Moment::Finite(b)) => {
            let e = (a - b).abs() / a.abs().max(0.1);
            (e, e <= rel_tol && rhs.tail_fraction <= max_tail_fraction)
        }
        (Moment::Infinite, Moment::Infinite) => (0.0, true),
        _ => (f64::INFINITY, false),
    };
    Ok(BdReport {
        r,
        lhs,
        rhs: rhs.value,
        rel_err,
        tail_fraction: rhs.tail_fraction,
        quad_err: rhs.quad_err,
        pass,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: f64, b: f64, tol: f64) {
        assert!((a - b).abs() <= tol, "{a} vs {b}");
    }

    #[test]
    fn lhs_examples() {
        let exact = (2.0 * SQRT2 - 1.0) / (1.0 - SQRT2).powi(2);
        close(exact, 10.6569, 1e-4);
        close(bd_lhs(&InitialCondition::min_wave(), 1.0).unwrap().finite().unwrap(), exact, 1e-9);
        assert_eq!(bd_lhs(&InitialCondition::Heaviside, -1.0).unwrap(), Moment::Finite(0.0));
        let p: InitialCondition = "powexp:1,0,1".parse().unwrap();
        close(bd_lhs(&p, 0.5).unwrap().finite().unwrap(), 2.0, 1e-10);
        close(bd_lhs(&p, -1.0).unwrap().finite().unwrap(), 0.5, 1e-10);
        assert!(bd_lhs(&p, 1.2).unwrap().is_infinite());
    }

    #[test]
    fn lhs_refuses_invalid_r() {
        assert!(matches!(bd_lhs(&InitialCondition::Heaviside, 0.0), Err(FbpError::Domain(_))));
        assert!(matches!(bd_lhs(&InitialCondition::Heaviside, 1.5), Err(FbpError::Domain(_))));
        assert!(matches!(bd_lhs(&InitialCondition::Heaviside, SQRT2), Err(FbpError::Domain(_))));
    }

    #[test]
    fn lhs_wave_family_closed_form() {
        // ∫₀^∞ e^{rx} Π_c = (1/(a−r)) + a/((a−r)(b−r)) by the two-mode form.
        for c in [1.5, 2.0] {
            let p = crate::waves::WaveParams::new(c).unwrap();
            let r = 0.4;
            let exact = ((p.b_c) / (p.a_c - r) - p.a_c / (p.b_c - r)) / (p.b_c - p.a_c);
            let got = bd_lhs(&InitialCondition::Wave { c }, r).unwrap().finite().unwrap();
            close(got, exact, 1e-9 * exact);
        }
    }

    #[test]
    fn rhs_exact_linear_front() {
        let tr = FrontTrace::from_fn(60.0, 1e-3, |t| SQRT2 * t);
        let rhs = bd_rhs(&tr, 0.0, 1.0, SQRT2).unwrap();
        let exact = (2.0 * SQRT2 - 1.0) / (1.0 - SQRT2).powi(2);
        close(rhs.value.finite().unwrap(), exact, 1e-6);
        assert!(rhs.tail_fraction < 1e-2);
    }

    #[test]
    fn rhs_constant_front() {
        let tr = FrontTrace::from_fn(60.0, 1e-3, |_| 0.0);
        let rhs = bd_rhs(&tr, 0.0, -1.0, 0.0).unwrap();
        close(rhs.value.finite().unwrap(), 1.0 / 3.0, 1e-6);
    }

    #[test]
    fn rhs_divergent_tail() {
        let tr = FrontTrace::from_fn(10.0, 1e-2, |t| 1.5 * t);
        let rhs = bd_rhs(&tr, 0.0, 1.2, 1.5).unwrap();
        assert!(rhs.value.is_infinite());
    }

    #[test]
    fn rhs_refinement_within_error_estimate() {
        let l = |t: f64| SQRT2 * t - 1.5 * (t + 1.0).ln();
        let coarse = FrontTrace::from_fn(60.0, 0.02, l);
        let fine = FrontTrace::from_fn(60.0, 0.01, l);
        let a = bd_rhs(&coarse, 0.0, 0.5, SQRT2).unwrap();
        let b = bd_rhs(&fine, 0.0, 0.5, SQRT2).unwrap();
        let change = (a.value.finite().unwrap() - b.value.finite().unwrap()).abs();
        assert!(change <= a.quad_err, "{change} vs {}", a.quad_err);
    }

    #[test]
    fn r0_and_speed() {
        close(r0_of(&InitialCondition::Heaviside), SQRT2, 0.0);
        close(r0_of(&"powexp:1,0,1".parse().unwrap()), 1.0, 0.0);
        close(r0_of(&InitialCondition::Wave { c: 1.5 }), 1.0, 1e-15);
        close(speed_from_r0(SQRT2).unwrap(), SQRT2, 1e-15);
        close(speed_from_r0(1.0).unwrap(), 1.5, 0.0);
        assert_eq!(speed_from_r0(0.0).unwrap(), f64::INFINITY);
        assert!(speed_from_r0(-0.1).is_err());
        assert!(speed_from_r0(1.5).is_err());
    }

    #[test]
    fn moment_serde_shape() {
        let v = serde_json::to_string(&Moment::Finite(2.0)).unwrap();
        assert_eq!(v, r#"{"kind":"finite","value":2.0}"#);
        let v = serde_json::to_string(&Moment::Infinite).unwrap();
        assert_eq!(v, r#"{"kind":"infinite"}"#);
    }
}
