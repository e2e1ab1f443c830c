//! Adaptive Gauss–Kronrod quadrature (7/15 pair) with global bisection.
//!
//! Semi-infinite ranges are mapped onto `[0, 1)` through `x = a + s / (1 - s)`;
//! the Kronrod nodes never touch `s = 1`.

use crate::error::{FbpError, Result};

const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];

const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_8,
];

// Gauss weights for the nodes XGK[1], XGK[3], XGK[5], XGK[7].
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

#[derive(Clone, Copy, Debug)]
pub struct QuadOptions {
    pub abs_tol: f64,
    pub rel_tol: f64,
    pub max_intervals: usize,
}

impl Default for QuadOptions {
    fn default() -> Self {
        Self {
            abs_tol: 1e-13,
            rel_tol: 1e-11,
            max_intervals: 4000,
        }
    }
}

impl QuadOptions {
    pub fn relative(rel_tol: f64) -> Self {
        Self {
            abs_tol: 0.0,
            rel_tol,
            ..Self::default()
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct QuadResult {
    pub value: f64,
    pub abs_err: f64,
}

struct Segment {
    a: f64,
    b: f64,
    value: f64,
    err: f64,
}

fn gk15<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> (f64, f64) {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = f(center);
    let mut kronrod = fc * WGK[7];
    let mut gauss = fc * WG[3];
    for j in 0..7 {
        let dx = half * XGK[j];
        let sum = f(center - dx) + f(center + dx);
        kronrod += WGK[j] * sum;
        if j % 2 == 1 {
            gauss += WG[j / 2] * sum;
        }
    }
    (kronrod * half, ((kronrod - gauss) * half).abs())
}

/// Integrates `f` over the finite interval `[a, b]`.
pub fn integrate<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, opts: QuadOptions) -> Result<QuadResult> {
    integrate_with_breaks(f, &[a, b], opts)
}

/// Integrates over `[points[0], points[last]]`, starting the bisection from
/// the given breakpoints (kinks, jumps, peaks).
pub fn integrate_with_breaks<F: Fn(f64) -> f64>(
    f: F,
    points: &[f64],
    opts: QuadOptions,
) -> Result<QuadResult> {
    if points.len() < 2 {
        return Err(FbpError::parameter("quadrature needs at least two points"));
    }
    let mut segs: Vec<Segment> = Vec::with_capacity(points.len() + 64);
    for w in points.windows(2) {
        let (a, b) = (w[0], w[1]);
        if !(b > a) {
            if b == a {
                continue;
            }
            return Err(FbpError::parameter(format!(
                "quadrature breakpoints must be increasing ({a} then {b})"
            )));
        }
        let (value, err) = gk15(&f, a, b);
        segs.push(Segment { a, b, value, err });
    }
    if segs.is_empty() {
        return Ok(QuadResult { value: 0.0, abs_err: 0.0 });
    }

    loop {
        let total: f64 = segs.iter().map(|s| s.value).sum();
        let err: f64 = segs.iter().map(|s| s.err).sum();
        if !total.is_finite() {
            return Err(FbpError::Precision {
                message: "non-finite integrand".into(),
                estimate: total,
                error: err,
            });
        }
        let tol = opts.abs_tol.max(opts.rel_tol * total.abs());
        if err <= tol {
            return Ok(QuadResult { value: total, abs_err: err });
        }
        if segs.len() >= opts.max_intervals {
            return Err(FbpError::Precision {
                message: format!("quadrature did not converge in {} intervals", segs.len()),
                estimate: total,
                error: err,
            });
        }
        let (worst, _) = segs
            .iter()
            .enumerate()
            .max_by(|x, y| x.1.err.total_cmp(&y.1.err))
            .expect("non-empty");
        let seg = segs.swap_remove(worst);
        let mid = 0.5 * (seg.a + seg.b);
        if !(mid > seg.a && mid < seg.b) {
            // Interval below floating-point resolution; accept it as is.
            segs.push(Segment { err: 0.0, ..seg });
            continue;
        }
        let (v1, e1) = gk15(&f, seg.a, mid);
        let (v2, e2) = gk15(&f, mid, seg.b);
        segs.push(Segment { a: seg.a, b: mid, value: v1, err: e1 });
        segs.push(Segment { a: mid, b: seg.b, value: v2, err: e2 });
    }
}

/// Integrates `f` over `[a, ∞)`.
pub fn integrate_to_inf<F: Fn(f64) -> f64>(f: F, a: f64, opts: QuadOptions) -> Result<QuadResult> {
    let g = |s: f64| {
        let one_minus = 1.0 - s;
        let x = a + s / one_minus;
        let v = f(x) / (one_minus * one_minus);
        if v.is_finite() {
            v
        } else {
            0.0
        }
    };
    integrate(g, 0.0, 1.0, opts)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn polynomial_is_exact() {
        let r = integrate(|x| x.powi(5) - 3.0 * x * x, -1.0, 2.0, QuadOptions::default()).unwrap();
        let exact = (64.0 - 1.0) / 6.0 - (8.0 + 1.0);
        assert!((r.value - exact).abs() < 1e-13);
    }

    #[test]
    fn gaussian_tail_to_infinity() {
        let r = integrate_to_inf(|x| (-x * x / 2.0).exp(), 0.0, QuadOptions::default()).unwrap();
        assert!((r.value - (std::f64::consts::PI / 2.0).sqrt()).abs() < 1e-10);
    }

    #[test]
    fn kink_with_breakpoint() {
        let r = integrate_with_breaks(|x: f64| x.abs(), &[-1.0, 0.0, 3.0], QuadOptions::default()).unwrap();
        assert!((r.value - 5.0).abs() < 1e-13);
    }

    #[test]
    fn algebraic_tail() {
        // ∫_1^∞ x^{-3/2} dx = 2
        let r = integrate_to_inf(|x: f64| x.powf(-1.5), 1.0, QuadOptions::default()).unwrap();
        assert!((r.value - 2.0).abs() < 1e-6, "{}", r.value);
    }

    #[test]
    fn rejects_decreasing_breaks() {
        assert!(integrate_with_breaks(|x| x, &[1.0, 0.0], QuadOptions::default()).is_err());
    }
}
