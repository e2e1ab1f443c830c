//! Finite-difference solver for the integrated free boundary problem on a
//! moving window.
//!
//! Each step treats diffusion implicitly (backward Euler, one tridiagonal
//! solve with a precomputed factorisation) and the reaction explicitly:
//!
//! * obstacle scheme: `(I − dt/2 Δ) W = (1 + dt) U`, then `U ← min(W, 1)`;
//! * penalised scheme: `(I − dt/2 Δ) W = U + dt (U − Uⁿ)`, `U ← W`.
//!
//! Both are monotone (the matrix is an M-matrix and the explicit maps are
//! non-decreasing in `U` for the admissible `dt`), so ordering of initial
//! data is preserved step by step.

use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{FbpError, Result};
use crate::exec::{batch_sizes, map_indexed, Exec};
use crate::grid::{FrontTrace, Grid, Profile};
use crate::ic::InitialCondition;
use crate::mc::{stream_rng, McEstimate, Moments, BATCH};

pub const DEFAULT_EPS: f64 = 1e-6;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub enum Scheme {
    Obstacle,
    Penalized { n: u32 },
}

/// Right-edge treatment of the window.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TailFill {
    /// Dirichlet `U = 0` at the edge; cells exposed by recentering start at 0.
    #[default]
    Zero,
    /// Continue the last two values geometrically, both as the edge ghost and
    /// for exposed cells. Needed for fronts fed by a slowly decaying tail,
    /// which otherwise lose speed once the truncation is carried back to them.
    Exponential,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SolverOptions {
    /// Time step; `None` means `min(0.5 dx², 1e-3)`.
    pub dt: Option<f64>,
    /// Sampling interval of the front trace.
    pub dt_out: f64,
    /// Times at which full profiles are kept (rounded to the nearest step).
    pub snapshots: Vec<f64>,
    pub eps: f64,
    pub recenter: bool,
    /// Recentre once the front passes this fraction of the window...
    pub recenter_at: f64,
    /// ...moving it back to this fraction.
    pub recenter_to: f64,
    #[serde(default)]
    pub tail_fill: TailFill,
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self {
            dt: None,
            dt_out: 0.01,
            snapshots: Vec::new(),
            eps: DEFAULT_EPS,
            recenter: true,
            recenter_at: 2.0 / 3.0,
            recenter_to: 0.25,
            tail_fill: TailFill::Zero,
        }
    }
}

impl SolverOptions {
    pub fn default_dt(dx: f64) -> f64 {
        (0.5 * dx * dx).min(1e-3)
    }
}

#[derive(Clone, Debug)]
pub struct Solution {
    pub snapshots: Vec<Profile>,
    pub front: FrontTrace,
    pub last: Profile,
    pub dt: f64,
    pub steps: usize,
}

impl Solution {
    /// Snapshot closest to time `t`.
    pub fn snapshot_at(&self, t: f64) -> Option<&Profile> {
        self.snapshots
            .iter()
            .min_by(|a, b| (a.t - t).abs().total_cmp(&(b.t - t).abs()))
    }
}

/// Constant-coefficient tridiagonal system `−a w_{i−1} + (1 + 2a) w_i − a w_{i+1}`
/// with Dirichlet ghosts, factorised once.
#[derive(Clone, Debug)]
pub struct Tridiag {
    a: f64,
    c_prime: Vec<f64>,
    inv_denom: Vec<f64>,
}

impl Tridiag {
    pub fn new(a: f64, n: usize) -> Self {
        let b = 1.0 + 2.0 * a;
        let mut c_prime = vec![0.0; n];
        let mut inv_denom = vec![0.0; n];
        let mut prev = 0.0;
        for i in 0..n {
            let d = b + a * prev;
            inv_denom[i] = 1.0 / d;
            c_prime[i] = -a / d;
            prev = c_prime[i];
        }
        Self { a, c_prime, inv_denom }
    }

    /// Solves in place; `left` and `right` are the ghost values.
    pub fn solve(&self, rhs: &mut [f64], left: f64, right: f64) {
        let n = rhs.len();
        rhs[0] += self.a * left;
        rhs[n - 1] += self.a * right;
        let mut prev = 0.0;
        for i in 0..n {
            prev = (rhs[i] + self.a * prev) * self.inv_denom[i];
            rhs[i] = prev;
        }
        for i in (0..n - 1).rev() {
            rhs[i] -= self.c_prime[i] * rhs[i + 1];
        }
    }

    /// As [`Tridiag::solve`], but the right ghost is `q` times the last unknown.
    pub fn solve_robin(&self, rhs: &mut [f64], left: f64, q: f64) {
        let n = rhs.len();
        rhs[0] += self.a * left;
        let mut prev = 0.0;
        for i in 0..n - 1 {
            prev = (rhs[i] + self.a * prev) * self.inv_denom[i];
            rhs[i] = prev;
        }
        let c_last = if n > 1 { self.c_prime[n - 2] } else { 0.0 };
        let d = 1.0 + 2.0 * self.a - self.a * q + self.a * c_last;
        rhs[n - 1] = (rhs[n - 1] + self.a * prev) / d;
        for i in (0..n - 1).rev() {
            rhs[i] -= self.c_prime[i] * rhs[i + 1];
        }
    }
}

/// Grid values of `U₀`.
pub fn initial_profile(ic: &InitialCondition, grid: Grid) -> Profile {
    let mut p = Profile::from_fn(grid, 0.0, |x| ic.eval(x));
    p.front = Some(ic.l0());
    p
}

pub fn solve_obstacle(
    ic: &InitialCondition,
    grid: Grid,
    t_end: f64,
    opts: &SolverOptions,
) -> Result<Solution> {
    ic.validate()?;
    solve_from(initial_profile(ic, grid), ic.l0(), t_end, Scheme::Obstacle, opts)
}

pub fn solve_penalized(
    ic: &InitialCondition,
    grid: Grid,
    n: u32,
    t_end: f64,
    opts: &SolverOptions,
) -> Result<Solution> {
    ic.validate()?;
    if n < 2 {
        return Err(FbpError::parameter(format!("penalisation exponent n = {n} must be ≥ 2")));
    }
    solve_from(initial_profile(ic, grid), ic.l0(), t_end, Scheme::Penalized { n }, opts)
}

/// Evolves `initial` (whose free boundary is `l0`) up to `t_end`.
pub fn solve_from(
    initial: Profile,
    l0: f64,
    t_end: f64,
    scheme: Scheme,
    opts: &SolverOptions,
) -> Result<Solution> {
    let mut grid = initial.grid;
    grid.validate()?;
    if !(t_end >= 0.0) || !t_end.is_finite() {
        return Err(FbpError::parameter(format!("horizon T = {t_end} must be non-negative")));
    }
    if !(opts.eps > 0.0 && opts.eps < 0.5) {
        return Err(FbpError::parameter(format!("eps = {} must lie in (0, 1/2)", opts.eps)));
    }
    let dx = grid.dx;
    let dt_req = opts.dt.unwrap_or_else(|| SolverOptions::default_dt(dx));
    if !(dt_req > 0.0) {
        return Err(FbpError::parameter(format!("dt = {dt_req} must be positive")));
    }
    let steps = if t_end == 0.0 { 0 } else { (t_end / dt_req - 1e-9).ceil() as usize };
    let dt = if steps == 0 { dt_req } else { t_end / steps as f64 };
    if let Scheme::Penalized { n } = scheme {
        if dt * (n as f64 - 1.0) >= 1.0 {
            return Err(FbpError::parameter(format!(
                "dt = {dt} exceeds the monotonicity bound 1/(n − 1) for n = {n}"
            )));
        }
    }
    let every = ((opts.dt_out / dt).round() as usize).max(1);
    let snap_steps: Vec<usize> = opts
        .snapshots
        .iter()
        .map(|&t| ((t / dt).round() as usize).min(steps))
        .collect();

    let nx = grid.nx;
    let lin = Tridiag::new(0.5 * dt / (dx * dx), nx);
    let mut u = initial.values;
    let threshold = 1.0 - opts.eps;
    let mut j_front = first_below(&u, threshold, 0).unwrap_or(nx);

    let mut front = FrontTrace::new(opts.eps);
    front.push(0.0, l0);
    let mut snapshots = Vec::with_capacity(snap_steps.len());
    let snapshot = |u: &[f64], grid: Grid, t: f64, l: f64| Profile {
        grid,
        t,
        values: u.to_vec(),
        front: Some(l),
    };
    for (k, &s) in snap_steps.iter().enumerate() {
        if s == 0 {
            snapshots.push((k, snapshot(&u, grid, 0.0, l0)));
        }
    }

    let at = (opts.recenter_at * nx as f64) as usize;
    let to = (opts.recenter_to * nx as f64) as usize;
    // The right Dirichlet value distorts the last tenth of the window.
    let edge = (nx / 10).max(3);
    let mut last_l = l0;
    for step in 1..=steps {
        let q = match opts.tail_fill {
            TailFill::Zero => 0.0,
            TailFill::Exponential => tail_ratio(&u),
        };
        match scheme {
            Scheme::Obstacle => {
                let g = 1.0 + dt;
                u.iter_mut().for_each(|v| *v *= g);
                lin.solve_robin(&mut u, 1.0, q);
                u.iter_mut().for_each(|v| *v = v.min(1.0));
            }
            Scheme::Penalized { n } => {
                let n = n as i32;
                u.iter_mut().for_each(|v| *v += dt * (*v - v.powi(n)));
                lin.solve_robin(&mut u, 1.0, q);
            }
        }
        let t = step as f64 * dt;
        if let Some((index, &value)) = u
            .iter()
            .enumerate()
            .find(|(_, v)| !(**v >= -1e-6 && **v <= 1.0 + 1e-6))
        {
            return Err(FbpError::Instability { step, t, index, value });
        }

        j_front = relocate(&u, threshold, j_front);
        if j_front == 0 || j_front >= nx - edge {
            return Err(FbpError::window(format!(
                "front left the window at t = {t} (index {j_front} of {nx})"
            )));
        }
        if opts.recenter && j_front > at && j_front > to {
            let k = j_front - to;
            let q = match opts.tail_fill {
                TailFill::Zero => 0.0,
                TailFill::Exponential => tail_ratio(&u),
            };
            u.copy_within(k.., 0);
            let mut v = u[nx - k - 1];
            for c in &mut u[nx - k..] {
                v *= q;
                *c = v;
            }
            grid.window_shift += k as i64;
            j_front -= k;
        }

        let want_snap = snap_steps.contains(&step);
        if step % every == 0 || step == steps || want_snap {
            last_l = front_from_values(&grid, &u, opts.eps)?;
            if step % every == 0 || step == steps {
                front.push(t, last_l);
            }
        }
        if want_snap {
            for (k, &s) in snap_steps.iter().enumerate() {
                if s == step {
                    snapshots.push((k, snapshot(&u, grid, t, last_l)));
                }
            }
        }
    }
    snapshots.sort_by_key(|(k, _)| *k);
    let last = Profile {
        grid,
        t: steps as f64 * dt,
        values: u,
        front: Some(last_l),
    };
    Ok(Solution {
        snapshots: snapshots.into_iter().map(|(_, p)| p).collect(),
        front,
        last,
        dt,
        steps,
    })
}

/// `u[n−1]/u[n−2]`, clamped to `[0, 1)`; 0 once the tail has underflowed.
fn tail_ratio(u: &[f64]) -> f64 {
    let n = u.len();
    let (a, b) = (u[n - 2], u[n - 1]);
    if a < 1e-250 || !(b > 0.0) {
        0.0
    } else {
        (b / a).clamp(0.0, 1.0 - 1e-12)
    }
}

fn first_below(u: &[f64], threshold: f64, from: usize) -> Option<usize> {
    u[from..].iter().position(|&v| v < threshold).map(|j| j + from)
}

/// First index below `threshold`, searched outward from the previous one.
fn relocate(u: &[f64], threshold: f64, mut j: usize) -> usize {
    let n = u.len();
    j = j.min(n - 1);
    while j > 0 && u[j - 1] < threshold {
        j -= 1;
    }
    while j < n && u[j] >= threshold {
        j += 1;
    }
    j
}

/// Location of the level `1 − eps` crossing.
///
/// Near the free boundary `U ≈ 1 − (x − L)²`, so `s = √(1 − U)` is close to
/// linear on the smooth side, and the crossing of `s = √eps` is found by
/// extrapolating a quadratic in `s` back into the cell where `U` leaves the
/// level (or the one before it, since a clamped node may sit just past the
/// true contact point). The first few cells next to the contact point carry
/// the largest scheme error, so the stencil `j+2, j+4, j+6` is tried first,
/// then `j, j+1, j+2`. If neither lands there (a step profile, say) `s` is
/// interpolated linearly across the crossing cell.
pub fn extract_front(profile: &Profile, eps: f64) -> Result<f64> {
    if !(eps > 0.0 && eps < 0.5) {
        return Err(FbpError::parameter(format!("eps = {eps} must lie in (0, 1/2)")));
    }
    front_from_values(&profile.grid, &profile.values, eps)
}

fn front_from_values(grid: &Grid, u: &[f64], eps: f64) -> Result<f64> {
    let threshold = 1.0 - eps;
    let j = match first_below(u, threshold, 0) {
        Some(0) => {
            return Err(FbpError::window("level 1 − eps crossing lies left of the window"));
        }
        Some(j) => j,
        None => return Err(FbpError::window("no level 1 − eps crossing inside the window")),
    };
    let sigma = eps.sqrt();
    let s = |i: usize| (1.0 - u[i]).max(0.0).sqrt();
    let dx = grid.dx;
    let (xm, xj) = (grid.x(j - 1), grid.x(j));
    // A clamped node can sit just right of the true contact point.
    let lo = grid.x(j.saturating_sub(2));
    for (first, gap) in [(2usize, 2usize), (0, 1)] {
        if j + first + 2 * gap >= u.len() {
            continue;
        }
        let h = gap as f64 * dx;
        let x0 = grid.x(j + first);
        let (s0, s1, s2) = (s(j + first), s(j + first + gap), s(j + first + 2 * gap));
        let slope = (s1 - s0) / h;
        let c2 = (s2 - 2.0 * s1 + s0) / (2.0 * h * h);
        if !(slope > 0.0) {
            continue;
        }
        // Newton on q(y) = σ with y = x − x0, started from the secant.
        let q = |y: f64| s0 + slope * y + c2 * y * (y - h);
        let dq = |y: f64| slope + c2 * (2.0 * y - h);
        let mut y = (sigma - s0) / slope;
        for _ in 0..6 {
            let d = dq(y);
            if !(d > 0.0) {
                break;
            }
            y -= (q(y) - sigma) / d;
        }
        let cand = x0 + y;
        if cand >= lo && cand <= xj && (q(y) - sigma).abs() < 1e-9 {
            return Ok(cand);
        }
    }
    let (sm, sj) = (s(j - 1), s(j));
    let w = if sj > sm { ((sigma - sm) / (sj - sm)).clamp(0.0, 1.0) } else { 0.0 };
    Ok(xm + w * dx)
}

/// One-sided first and second derivatives of `U` at `front`, from the cubic
/// through the first four grid points right of it.
pub fn boundary_slope_diagnostics(profile: &Profile, front: f64) -> (f64, f64) {
    let g = &profile.grid;
    let i0 = (g.index_of(front).floor() + 1.0).max(0.0) as usize;
    let i0 = i0.min(profile.values.len().saturating_sub(4));
    let xs: Vec<f64> = (i0..i0 + 4).map(|i| g.x(i)).collect();
    let ys: Vec<f64> = (i0..i0 + 4).map(|i| profile.values[i]).collect();
    newton_derivatives(&xs, &ys, front)
}

/// First and second derivative at `z` of the interpolating polynomial.
pub(crate) fn newton_derivatives(xs: &[f64], ys: &[f64], z: f64) -> (f64, f64) {
    let n = xs.len();
    let mut coef = ys.to_vec();
    for k in 1..n {
        for i in (k..n).rev() {
            coef[i] = (coef[i] - coef[i - 1]) / (xs[i] - xs[i - k]);
        }
    }
    // Horner with derivatives: p, p', p''.
    let (mut p, mut d1, mut d2) = (coef[n - 1], 0.0, 0.0);
    for i in (0..n - 1).rev() {
        let h = z - xs[i];
        d2 = d2 * h + 2.0 * d1;
        d1 = d1 * h + p;
        p = p * h + coef[i];
    }
    (d1, d2)
}

/// Feynman–Kac estimate of `U(t, x)`:
/// `E_x[U₀(B_t) exp(Leb{s ≤ t : B_s ≥ L_{t−s}})]`, with Gaussian increments
/// at step `dt_mc` and the occupation time accumulated by the trapezoid rule.
pub fn feynman_kac_check(
    ic: &InitialCondition,
    front: &FrontTrace,
    t: f64,
    x: f64,
    n_paths: usize,
    dt_mc: f64,
    seed: u64,
    exec: Exec,
) -> Result<McEstimate> {
    if n_paths < 100 {
        return Err(FbpError::parameter(format!("n_paths = {n_paths} must be at least 100")));
    }
    if !(dt_mc > 0.0) {
        return Err(FbpError::parameter(format!("dt_mc = {dt_mc} must be positive")));
    }
    if t == 0.0 {
        return Ok(McEstimate::exact(ic.eval(x)));
    }
    if front.is_empty() || front.times[0] > 1e-12 || front.t_end() < t - 1e-9 {
        return Err(FbpError::parameter(format!(
            "front trace must cover [0, {t}] (covers up to {})",
            front.t_end()
        )));
    }
    let m = (t / dt_mc).ceil() as usize;
    let h = t / m as f64;
    let sq = h.sqrt();
    let boundary: Vec<f64> = (0..=m).map(|k| front.at(t - k as f64 * h)).collect();
    let batches = batch_sizes(n_paths, BATCH);
    let parts = map_indexed(exec, batches.len(), |b| {
        let mut rng = stream_rng(seed, b as u64);
        let mut acc = Moments::default();
        for _ in 0..batches[b] {
            let mut pos = x;
            let mut above_prev = (pos >= boundary[0]) as u8 as f64;
            let mut occ = 0.0;
            for bk in boundary.iter().skip(1) {
                let z: f64 = StandardNormal.sample(&mut rng);
                pos += sq * z;
                let above = (pos >= *bk) as u8 as f64;
                occ += 0.5 * (above_prev + above) * h;
                above_prev = above;
            }
            acc.push(ic.eval(pos) * occ.exp());
        }
        acc
    });
    Ok(parts
        .into_iter()
        .fold(Moments::default(), Moments::merge)
        .estimate())
}
