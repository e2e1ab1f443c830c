//! Closed-form travelling waves of the free boundary problem and of its
//! boundary-slope (β) generalisation.
//!
//! For a speed `c ≥ √2` the wave density is
//! `π_c(y) = (c² − 2)^{-1/2} [e^{-a_c y} − e^{-b_c y}]` for `y > 0`, with
//! `a_c = c − √(c² − 2)` and `b_c = c + √(c² − 2)`; at `c = √2` it degenerates
//! to `2y e^{-√2 y}`. The CCDF `Π_c` is normalised so that `Π_c(0) = 1`.
//!
//! Both are evaluated through the factorisation
//! `Π_c(x) = e^{-a x} (1 + a · (1 − e^{-δx}) / δ)` with `δ = b − a`, which is
//! continuous in `c` down to `√2` and free of the cancellation that the
//! two-exponential form suffers near the minimal speed.

use serde::{Deserialize, Serialize};

use crate::error::{FbpError, Result};

pub const SQRT2: f64 = std::f64::consts::SQRT_2;

/// Speeds within this distance of `√2` use the degenerate closed form.
pub const DEGENERATE_TOL: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct WaveParams {
    pub c: f64,
    pub beta: Option<f64>,
    pub a_c: f64,
    pub b_c: f64,
    /// `1 / (2√(c² − 2))`; `None` at the minimal speed where it blows up.
    pub z_c: Option<f64>,
}

impl WaveParams {
    pub fn new(c: f64) -> Result<Self> {
        check_speed(c)?;
        if is_minimal(c) {
            return Ok(Self {
                c: SQRT2,
                beta: None,
                a_c: SQRT2,
                b_c: SQRT2,
                z_c: None,
            });
        }
        let s = (c * c - 2.0).sqrt();
        Ok(Self {
            c,
            beta: None,
            a_c: c - s,
            b_c: c + s,
            z_c: Some(0.5 / s),
        })
    }

    pub fn with_beta(c: f64, beta: f64) -> Result<Self> {
        check_beta(beta)?;
        let mut p = Self::new(c)?;
        p.beta = Some(beta);
        Ok(p)
    }

    /// `√(c² − 2)`.
    pub fn root(&self) -> f64 {
        0.5 * (self.b_c - self.a_c)
    }

    /// A β-wave below the minimal β-speed takes negative values somewhere.
    pub fn is_signed(&self) -> bool {
        match self.beta {
            Some(beta) => self.c < c_beta_min(beta).unwrap_or(f64::INFINITY) - 1e-9,
            None => false,
        }
    }

    pub fn density(&self, y: f64) -> f64 {
        if y <= 0.0 {
            return 0.0;
        }
        let delta = self.b_c - self.a_c;
        (-self.a_c * y).exp() * 2.0 * slope_ratio(delta, y)
    }

    pub fn ccdf(&self, x: f64) -> f64 {
        if x <= 0.0 {
            return 1.0;
        }
        let delta = self.b_c - self.a_c;
        (-self.a_c * x).exp() * (1.0 + self.a_c * slope_ratio(delta, x))
    }

    /// `Π_c − (β/2) π_c` for `x > 0` and 1 otherwise.
    pub fn beta_ccdf(&self, beta: f64, x: f64) -> f64 {
        self.beta_ccdf_weighted(beta, x, 0.0)
    }

    /// `e^{r x} (Π_c − (β/2) π_c)(x)`; `β = 0` gives the weighted `Π_c`.
    ///
    /// Far from the front the two-mode form
    /// `[(b − β) e^{-a x} + (β − a) e^{-b x}] / δ` is used: at the minimal
    /// β-speed the slow mode vanishes exactly and the difference form would
    /// cancel down to rounding noise.
    pub fn beta_ccdf_weighted(&self, beta: f64, x: f64, r: f64) -> f64 {
        if x <= 0.0 {
            return (r * x).exp();
        }
        let (a, b) = (self.a_c, self.b_c);
        let delta = b - a;
        if delta * x > 0.5 {
            ((b - beta) * ((r - a) * x).exp() + (beta - a) * ((r - b) * x).exp()) / delta
        } else {
            ((r - a) * x).exp() * (1.0 + (a - beta) * slope_ratio(delta, x))
        }
    }
}

/// `(1 − e^{-δx}) / δ`, continued to `x` at `δ = 0`.
fn slope_ratio(delta: f64, x: f64) -> f64 {
    if delta * x < 1e-300 {
        x
    } else {
        -(-delta * x).exp_m1() / delta
    }
}

fn is_minimal(c: f64) -> bool {
    (c - SQRT2).abs() <= DEGENERATE_TOL
}

fn check_speed(c: f64) -> Result<()> {
    if !c.is_finite() || c < SQRT2 - DEGENERATE_TOL {
        return Err(FbpError::domain(format!(
            "no real travelling wave for speed c = {c} < √2"
        )));
    }
    Ok(())
}

fn check_beta(beta: f64) -> Result<()> {
    if !(beta > 0.0) || !beta.is_finite() {
        return Err(FbpError::domain(format!("boundary slope β = {beta} must be positive")));
    }
    Ok(())
}

/// Wave density `π_c(y)`.
pub fn density(c: f64, y: f64) -> Result<f64> {
    Ok(WaveParams::new(c)?.density(y))
}

/// Wave CCDF `Π_c(x)`.
pub fn ccdf(c: f64, x: f64) -> Result<f64> {
    Ok(WaveParams::new(c)?.ccdf(x))
}

/// Minimal speed of a non-negative β-wave.
pub fn c_beta_min(beta: f64) -> Result<f64> {
    check_beta(beta)?;
    Ok(if beta <= SQRT2 {
        SQRT2
    } else {
        0.5 * beta + 1.0 / beta
    })
}

/// β-wave profile `Π^{(β)}_c(x)`. Speeds below `c_beta_min(β)` are still
/// evaluated; use [`WaveParams::is_signed`] to flag them.
pub fn beta_ccdf(beta: f64, c: f64, x: f64) -> Result<f64> {
    Ok(WaveParams::with_beta(c, beta)?.beta_ccdf(beta, x))
}

/// Minimal non-negative β-wave `Π^{(β)}_min`.
pub fn beta_min_ccdf(beta: f64, x: f64) -> Result<f64> {
    beta_ccdf(beta, c_beta_min(beta)?, x)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quad::{integrate_to_inf, QuadOptions};

    fn close(a: f64, b: f64, tol: f64) {
        assert!((a - b).abs() <= tol, "{a} vs {b} (tol {tol})");
    }

    #[test]
    fn density_examples() {
        close(density(SQRT2, 0.0).unwrap(), 0.0, 0.0);
        close(density(SQRT2, 1.0).unwrap(), 2.0 * (-SQRT2).exp(), 1e-15);
        close(density(SQRT2, 1.0).unwrap(), 0.486234, 1e-6);
        close(density(1.5, 1.0).unwrap(), 2.0 * ((-1.0f64).exp() - (-2.0f64).exp()), 1e-15);
        close(density(1.5, 1.0).unwrap(), 0.465088, 1e-6);
    }

    #[test]
    fn ccdf_examples() {
        for c in [SQRT2, 1.5, 2.0, 5.0] {
            close(ccdf(c, 0.0).unwrap(), 1.0, 0.0);
        }
        close(ccdf(SQRT2, 1.0).unwrap(), (SQRT2 + 1.0) * (-SQRT2).exp(), 1e-15);
        close(ccdf(SQRT2, 1.0).unwrap(), 0.586943, 1e-5);
        close(ccdf(1.5, 1.0).unwrap(), 2.0 * (-1.0f64).exp() - (-2.0f64).exp(), 1e-15);
        close(ccdf(1.5, 1.0).unwrap(), 0.600423, 1e-6);
    }

    #[test]
    fn sub_minimal_speed_is_rejected() {
        assert!(matches!(density(1.4, 1.0), Err(FbpError::Domain(_))));
        assert!(matches!(ccdf(1.0, 1.0), Err(FbpError::Domain(_))));
    }

    #[test]
    fn params_identities() {
        for c in [SQRT2, SQRT2 + 1e-9, 1.45, 1.5, 2.0, 3.7] {
            let p = WaveParams::new(c).unwrap();
            close(p.a_c * p.b_c, 2.0, 1e-12);
            assert!(p.a_c <= SQRT2 + 1e-15 && SQRT2 <= p.b_c + 1e-15);
            close(p.ccdf(0.0), 1.0, 0.0);
        }
        let p = WaveParams::new(1.5).unwrap();
        close(p.a_c, 1.0, 1e-15);
        close(p.b_c, 2.0, 1e-15);
        close(p.z_c.unwrap(), 1.0, 1e-15);
        assert!(WaveParams::new(SQRT2).unwrap().z_c.is_none());
    }

    #[test]
    fn near_degenerate_speeds_are_continuous() {
        // Π_c moves like √(c − √2) near the minimal speed; bound it through
        // the shift of the slow rate a_c.
        for c in [SQRT2 + 1e-13, SQRT2 + 1e-9, SQRT2 + 1e-7] {
            let da = SQRT2 - WaveParams::new(c).unwrap().a_c;
            for x in [0.01, 0.5, 1.0, 5.0, 20.0] {
                let a = ccdf(c, x).unwrap();
                let b = ccdf(SQRT2, x).unwrap();
                assert!((a - b).abs() <= 2.0 * x * da * b + 1e-15, "c={c} x={x}: {a} vs {b}");
            }
        }
    }

    #[test]
    fn c_beta_min_examples() {
        close(c_beta_min(1.0).unwrap(), SQRT2, 1e-15);
        close(c_beta_min(SQRT2).unwrap(), SQRT2, 1e-15);
        close(c_beta_min(SQRT2 + 1e-12).unwrap(), SQRT2, 1e-11);
        close(c_beta_min(2.0).unwrap(), 1.5, 1e-15);
        assert!(c_beta_min(0.0).is_err());
        assert!(c_beta_min(-1.0).is_err());
    }

    #[test]
    fn beta_wave_examples() {
        for x in [0.1, 1.0, 3.0] {
            close(beta_ccdf(SQRT2, SQRT2, x).unwrap(), (-SQRT2 * x).exp(), 1e-14);
        }
        close(beta_ccdf(2.0, 1.5, -1e-12).unwrap(), 1.0, 0.0);
        close(beta_ccdf(2.0, 1.5, 1.0).unwrap(), (-2.0f64).exp(), 1e-15);
        close(beta_ccdf(2.0, 1.5, 1.0).unwrap(), 0.135335, 1e-6);
        assert!(beta_ccdf(0.0, 1.5, 1.0).is_err());
    }

    #[test]
    fn signed_flag() {
        assert!(WaveParams::with_beta(1.45, 2.0).unwrap().is_signed());
        assert!(!WaveParams::with_beta(1.5, 2.0).unwrap().is_signed());
        assert!(!WaveParams::with_beta(SQRT2, 1.0).unwrap().is_signed());
        assert!(!WaveParams::new(SQRT2).unwrap().is_signed());
    }

    #[test]
    fn ccdf_matches_quadrature_of_density() {
        for c in [SQRT2, 1.42, 1.5, 2.0, 4.0] {
            let p = WaveParams::new(c).unwrap();
            for x in [0.0, 0.3, 1.0, 4.0, 10.0] {
                let q = integrate_to_inf(|y| p.density(y), x, QuadOptions::default()).unwrap();
                close(p.ccdf(x), q.value, 1e-8);
            }
        }
    }

    #[test]
    fn density_solves_wave_ode() {
        let h = 1e-3;
        for c in [SQRT2, 1.5, 2.5] {
            let p = WaveParams::new(c).unwrap();
            for y in [0.2, 1.0, 3.0, 8.0] {
                let (m, z, pl) = (p.density(y - h), p.density(y), p.density(y + h));
                let second = (pl - 2.0 * z + m) / (h * h);
                let first = (pl - m) / (2.0 * h);
                let residual = 0.5 * second + c * first + z;
                assert!(residual.abs() <= 1e-4, "c={c} y={y}: {residual}");
            }
        }
    }

    #[test]
    fn beta_wave_slope_at_boundary() {
        let h = 1e-6;
        for beta in [0.5, 1.0, SQRT2, 2.0, 3.0] {
            let cmin = c_beta_min(beta).unwrap();
            for c in [cmin, cmin + 0.3] {
                let p = WaveParams::with_beta(c, beta).unwrap();
                let slope = (p.beta_ccdf(beta, 2.0 * h) - p.beta_ccdf(beta, h)) / h;
                assert!((slope + beta).abs() <= 1e-4, "β={beta} c={c}: {slope}");
            }
        }
    }

    #[test]
    fn beta_min_tail_law() {
        for beta in [2.0, 3.0] {
            close(beta_min_ccdf(beta, 20.0).unwrap(), (-beta * 20.0).exp(), 1e-12 * (-beta * 20.0).exp());
            let f = |x: f64| beta_min_ccdf(beta, x).unwrap() * (beta * x).exp();
            let (r20, r25) = (f(20.0), f(25.0));
            assert!(r20 > 0.0 && ((r20 - r25) / r25).abs() < 1e-3, "β={beta}: {r20} {r25}");
        }
        for beta in [0.5, 1.0] {
            let f = |x: f64| beta_min_ccdf(beta, x).unwrap() * (SQRT2 * x).exp() / x;
            // Approach is O(1/x): the limit is √2 − β with remainder exactly 1/x.
            for x in [20.0, 25.0, 100.0] {
                close(f(x) - (SQRT2 - beta), 1.0 / x, 1e-12);
            }
        }
    }

    #[test]
    fn non_negativity_boundary_is_sharp() {
        let xs: Vec<f64> = (1..=4000).map(|i| i as f64 * 0.005).collect();
        for beta in [0.5, SQRT2, 2.0, 3.0] {
            let cmin = c_beta_min(beta).unwrap();
            for c in [cmin - 0.05, cmin - 0.01, cmin, cmin + 0.01, cmin + 0.2] {
                if c < SQRT2 {
                    continue;
                }
                let p = WaveParams::with_beta(c, beta).unwrap();
                let nonneg = xs.iter().all(|&x| p.beta_ccdf(beta, x) >= 0.0);
                assert_eq!(nonneg, c >= cmin - 1e-9, "β={beta} c={c}");
            }
        }
    }
}
