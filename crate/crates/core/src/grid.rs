//! Uniform moving grid, sampled profiles and front traces.

use serde::{Deserialize, Serialize};

use crate::error::{FbpError, Result};

/// Minimum window width in space units.
pub const MIN_WIDTH: f64 = 40.0;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Grid {
    pub x0: f64,
    pub dx: f64,
    pub nx: usize,
    /// Cumulative recentering offset in cells.
    pub window_shift: i64,
}

impl Grid {
    pub fn new(x0: f64, dx: f64, nx: usize) -> Result<Self> {
        let g = Self { x0, dx, nx, window_shift: 0 };
        g.validate()?;
        Ok(g)
    }

    /// Grid covering `[left, right]` with spacing `dx`.
    pub fn spanning(left: f64, right: f64, dx: f64) -> Result<Self> {
        if !(right > left) || !(dx > 0.0) {
            return Err(FbpError::parameter(format!("bad window [{left}, {right}] with dx = {dx}")));
        }
        let nx = ((right - left) / dx).round() as usize + 1;
        Self::new(left, dx, nx)
    }

    pub fn validate(&self) -> Result<()> {
        let mut errs = Vec::new();
        if !(self.dx > 0.0 && self.dx.is_finite()) {
            errs.push(format!("dx = {} must be positive", self.dx));
        }
        if self.nx < 16 {
            errs.push(format!("nx = {} must be at least 16", self.nx));
        }
        if !self.x0.is_finite() {
            errs.push("x0 must be finite".into());
        }
        if (self.dx * self.nx as f64) < MIN_WIDTH {
            errs.push(format!(
                "window width dx·nx = {} is below {MIN_WIDTH}",
                self.dx * self.nx as f64
            ));
        }
        if errs.is_empty() {
            Ok(())
        } else {
            Err(FbpError::Validation(errs))
        }
    }

    #[inline]
    pub fn x(&self, i: usize) -> f64 {
        self.x0 + (self.window_shift + i as i64) as f64 * self.dx
    }

    pub fn xs(&self) -> Vec<f64> {
        (0..self.nx).map(|i| self.x(i)).collect()
    }

    pub fn left(&self) -> f64 {
        self.x(0)
    }

    pub fn right(&self) -> f64 {
        self.x(self.nx - 1)
    }

    /// Fractional index of `x`.
    pub fn index_of(&self, x: f64) -> f64 {
        (x - self.x0) / self.dx - self.window_shift as f64
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Profile {
    pub grid: Grid,
    pub t: f64,
    pub values: Vec<f64>,
    /// Free boundary location if known; values left of it are 1.
    pub front: Option<f64>,
}

impl Profile {
    pub fn from_fn(grid: Grid, t: f64, f: impl Fn(f64) -> f64) -> Self {
        let values = (0..grid.nx).map(|i| f(grid.x(i))).collect();
        Self { grid, t, values, front: None }
    }

    /// Linear interpolation; 1 left of the window, 0 right of it.
    pub fn sample(&self, x: f64) -> f64 {
        let s = self.grid.index_of(x);
        if s <= 0.0 {
            return if s < 0.0 { 1.0 } else { self.values[0] };
        }
        let n = self.values.len();
        if s >= (n - 1) as f64 {
            return if s > (n - 1) as f64 { 0.0 } else { self.values[n - 1] };
        }
        let j = s.floor() as usize;
        let w = s - j as f64;
        self.values[j] + w * (self.values[j + 1] - self.values[j])
    }

    /// Largest increase between neighbouring samples (0 for a monotone profile).
    pub fn max_increase(&self) -> f64 {
        self.values
            .windows(2)
            .map(|w| w[1] - w[0])
            .fold(0.0, f64::max)
    }

    /// Checks monotonicity and that the window brackets the interface.
    pub fn check_invariants(&self) -> Result<()> {
        let mut errs = Vec::new();
        let inc = self.max_increase();
        if inc > 1e-9 {
            errs.push(format!("profile increases by {inc:e} at t = {}", self.t));
        }
        if self.values[0] < 1.0 - 1e-6 {
            errs.push(format!("left value {} below 1 − 1e−6", self.values[0]));
        }
        if *self.values.last().expect("nx ≥ 16") > 1e-6 {
            errs.push(format!("right value {} above 1e−6", self.values.last().unwrap()));
        }
        if errs.is_empty() {
            Ok(())
        } else {
            Err(FbpError::Validation(errs))
        }
    }

    /// Mass `∫ u` of the density `u = −∂x U` over the window. The trapezoid
    /// rule on cell differences telescopes to `U(left) − U(right)`, so this is
    /// 1 exactly when the window brackets the interface and the right tail
    /// has not been truncated.
    pub fn mass(&self) -> f64 {
        self.values[0] - self.values[self.values.len() - 1]
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct FrontTrace {
    pub times: Vec<f64>,
    pub positions: Vec<f64>,
    /// Level `1 − eps` used for extraction.
    pub eps: f64,
}

impl FrontTrace {
    pub fn new(eps: f64) -> Self {
        Self { times: Vec::new(), positions: Vec::new(), eps }
    }

    /// Trace of an explicit curve `t ↦ L(t)` on `[0, t_end]` with step `dt`.
    pub fn from_fn(t_end: f64, dt: f64, f: impl Fn(f64) -> f64) -> Self {
        let n = (t_end / dt).round() as usize;
        let times: Vec<f64> = (0..=n).map(|k| k as f64 * t_end / n as f64).collect();
        let positions = times.iter().map(|&t| f(t)).collect();
        Self { times, positions, eps: 0.0 }
    }

    pub fn push(&mut self, t: f64, l: f64) {
        self.times.push(t);
        self.positions.push(l);
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn t_end(&self) -> f64 {
        self.times.last().copied().unwrap_or(0.0)
    }

    /// Linear interpolation of the front at time `t`; clamps outside the trace.
    pub fn at(&self, t: f64) -> f64 {
        let n = self.times.len();
        if t <= self.times[0] {
            return self.positions[0];
        }
        if t >= self.times[n - 1] {
            return self.positions[n - 1];
        }
        let j = self.times.partition_point(|&s| s <= t);
        let (t0, t1) = (self.times[j - 1], self.times[j]);
        let w = (t - t0) / (t1 - t0);
        self.positions[j - 1] + w * (self.positions[j] - self.positions[j - 1])
    }

    /// Earliest sampled time from which positions never decrease by more than `tol`.
    pub fn monotone_from(&self, tol: f64) -> Option<f64> {
        let n = self.len();
        if n == 0 {
            return None;
        }
        let mut start = n - 1;
        let mut running_min = self.positions[n - 1];
        for k in (0..n - 1).rev() {
            if self.positions[k] > running_min + tol {
                break;
            }
            running_min = running_min.min(self.positions[k]);
            start = k;
        }
        Some(self.times[start])
    }

    /// Largest chord slope `(L_t − L_s)/(t − s)` over pairs separated by at least `min_gap`.
    pub fn max_chord_speed(&self, min_gap: f64) -> f64 {
        let mut best = f64::NEG_INFINITY;
        let mut j = 0;
        for i in 0..self.len() {
            while j < self.len() && self.times[j] - self.times[i] < min_gap {
                j += 1;
            }
            for k in j..self.len() {
                let s = (self.positions[k] - self.positions[i]) / (self.times[k] - self.times[i]);
                best = best.max(s);
            }
        }
        best
    }

    /// Sub-trace with every `k`-th sample (always keeping the last).
    pub fn thinned(&self, k: usize) -> Self {
        let k = k.max(1);
        let mut out = Self::new(self.eps);
        for i in (0..self.len()).step_by(k) {
            out.push(self.times[i], self.positions[i]);
        }
        if (self.len() - 1) % k != 0 {
            out.push(self.t_end(), *self.positions.last().unwrap());
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_validation() {
        assert!(Grid::new(0.0, 0.1, 400).is_ok());
        assert!(matches!(Grid::new(0.0, 0.1, 10), Err(FbpError::Validation(_))));
        assert!(Grid::new(0.0, 0.01, 100).is_err());
        let g = Grid::spanning(-10.0, 30.0, 0.02).unwrap();
        assert_eq!(g.nx, 2001);
        assert!((g.right() - 30.0).abs() < 1e-12);
    }

    #[test]
    fn shift_moves_coordinates() {
        let mut g = Grid::new(-5.0, 0.05, 1000).unwrap();
        let x10 = g.x(10);
        g.window_shift += 3;
        assert!((g.x(7) - x10).abs() < 1e-12);
        assert!((g.index_of(x10) - 7.0).abs() < 1e-9);
    }

    #[test]
    fn profile_sampling_and_invariants() {
        let g = Grid::new(-10.0, 0.1, 500).unwrap();
        let p = Profile::from_fn(g, 0.0, |x| if x <= 0.0 { 1.0 } else { (-x).exp() });
        p.check_invariants().unwrap();
        assert!((p.sample(1.05) - 0.5 * ((-1.0f64).exp() + (-1.1f64).exp())).abs() < 1e-12);
        assert_eq!(p.sample(-100.0), 1.0);
        assert_eq!(p.sample(1e3), 0.0);
        assert!((p.mass() - 1.0).abs() < 1e-12);
        let mut bad = p.clone();
        bad.values[100] += 0.01;
        assert!(bad.check_invariants().is_err());
    }

    #[test]
    fn trace_queries() {
        let tr = FrontTrace::from_fn(10.0, 0.5, |t| if t < 2.0 { -t } else { t - 4.0 });
        assert_eq!(tr.len(), 21);
        assert!((tr.at(3.25) - (-0.75)).abs() < 1e-12);
        assert_eq!(tr.monotone_from(0.0), Some(2.0));
        assert!((tr.max_chord_speed(1.0) - 1.0).abs() < 1e-12);
        let th = tr.thinned(3);
        assert_eq!(*th.times.last().unwrap(), 10.0);
    }
}
