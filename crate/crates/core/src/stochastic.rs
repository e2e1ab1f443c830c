//! Monte Carlo validators: branching Brownian motion with selection of the
//! leftmost particle (N-BBM), and Brownian motion killed at a front.

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{FbpError, Result};
use crate::exec::{batch_sizes, map_indexed, Exec};
use crate::grid::FrontTrace;
use crate::ic::InitialCondition;
use crate::mc::{stream_rng, BATCH};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Ensemble {
    pub positions: Vec<f64>,
    pub t: f64,
    pub n_branch_events: u64,
    pub seed: u64,
    pub stream: u64,
}

impl Ensemble {
    pub fn len(&self) -> usize {
        self.positions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.positions.is_empty()
    }

    pub fn min(&self) -> f64 {
        self.positions.iter().copied().fold(f64::INFINITY, f64::min)
    }

    /// Fraction of particles at or right of `x`.
    pub fn ccdf(&self, x: f64) -> f64 {
        self.positions.iter().filter(|&&p| p >= x).count() as f64 / self.len() as f64
    }

    /// Empirical CCDF at sorted query points, in one pass.
    pub fn ccdf_at(&self, xs: &[f64]) -> Vec<f64> {
        let mut sorted = self.positions.clone();
        sorted.sort_by(f64::total_cmp);
        let n = sorted.len() as f64;
        xs.iter()
            .map(|&x| (sorted.len() - sorted.partition_point(|&p| p < x)) as f64 / n)
            .collect()
    }
}

/// Event-driven N-BBM. Every particle branches at rate 1; after each
/// branching the leftmost particle (lowest index on ties) is removed.
pub struct Nbbm {
    ens: Ensemble,
    rng: ChaCha8Rng,
    clock: Exp<f64>,
    /// Time of the next branching event.
    next_event: f64,
}

impl Nbbm {
    pub fn new(ic: &InitialCondition, n: usize, seed: u64, stream: u64) -> Result<Self> {
        if n < 2 {
            return Err(FbpError::parameter(format!("N = {n} must be at least 2")));
        }
        let sampler = ic.sampler()?;
        let mut rng = stream_rng(seed, stream);
        let positions = (0..n).map(|_| sampler.sample(&mut rng)).collect();
        let clock = Exp::new(n as f64).expect("positive rate");
        let next_event = clock.sample(&mut rng);
        Ok(Self {
            ens: Ensemble { positions, t: 0.0, n_branch_events: 0, seed, stream },
            rng,
            clock,
            next_event,
        })
    }

    pub fn ensemble(&self) -> &Ensemble {
        &self.ens
    }

    fn diffuse(&mut self, dt: f64) {
        if dt <= 0.0 {
            return;
        }
        let s = dt.sqrt();
        for p in &mut self.ens.positions {
            let z: f64 = StandardNormal.sample(&mut self.rng);
            *p += s * z;
        }
        self.ens.t += dt;
    }

    fn branch(&mut self) {
        let n = self.ens.positions.len();
        let i = self.rng.random_range(0..n);
        let mut kill = 0;
        for (j, &p) in self.ens.positions.iter().enumerate() {
            if p < self.ens.positions[kill] {
                kill = j;
            }
        }
        // The child sits on its parent; dropping the minimum is the same as
        // overwriting it with the child unless the parent is the minimum.
        if kill != i {
            self.ens.positions[kill] = self.ens.positions[i];
        }
        self.ens.n_branch_events += 1;
    }

    /// Advances to time `t`, running every branching event on the way.
    pub fn advance_to(&mut self, t: f64) {
        while self.next_event <= t {
            let dt = self.next_event - self.ens.t;
            self.diffuse(dt);
            self.ens.t = self.next_event;
            self.branch();
            self.next_event += self.clock.sample(&mut self.rng);
        }
        let dt = t - self.ens.t;
        self.diffuse(dt);
        self.ens.t = t;
    }
}

/// Snapshots of one N-BBM run at the requested (increasing) times.
pub fn nbbm_run(ic: &InitialCondition, n: usize, times: &[f64], seed: u64) -> Result<Vec<Ensemble>> {
    if times.windows(2).any(|w| w[1] < w[0]) || times.first().is_some_and(|&t| t < 0.0) {
        return Err(FbpError::parameter("snapshot times must be non-negative and increasing"));
    }
    let mut sim = Nbbm::new(ic, n, seed, 0)?;
    Ok(times
        .iter()
        .map(|&t| {
            sim.advance_to(t);
            sim.ensemble().clone()
        })
        .collect())
}

/// Averaged empirical CCDF of the ensemble centred at its minimum, recorded
/// every `thin` time units after `burn_in`. Starts from `π_min` samples.
pub fn nbbm_stationary_ccdf(
    n: usize,
    burn_in: f64,
    n_samples: usize,
    thin: f64,
    seed: u64,
    xs: &[f64],
) -> Result<Vec<f64>> {
    if burn_in < 5.0 {
        return Err(FbpError::parameter(format!("burn-in {burn_in} must be at least 5")));
    }
    if n_samples == 0 || !(thin > 0.0) {
        return Err(FbpError::parameter("need at least one sample and a positive thinning step"));
    }
    let mut sim = Nbbm::new(&InitialCondition::min_wave(), n, seed, 0)?;
    let mut acc = vec![0.0; xs.len()];
    for s in 0..n_samples {
        sim.advance_to(burn_in + s as f64 * thin);
        let ens = sim.ensemble();
        let m = ens.min();
        let shifted: Vec<f64> = xs.iter().map(|x| x + m).collect();
        for (a, f) in acc.iter_mut().zip(ens.ccdf_at(&shifted)) {
            *a += f;
        }
    }
    Ok(acc.into_iter().map(|a| a / n_samples as f64).collect())
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SurvivalCurve {
    pub times: Vec<f64>,
    pub survival: Vec<f64>,
    pub stderr: Vec<f64>,
    pub n_paths: usize,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct KilledBmOptions {
    pub n_paths: usize,
    pub dt_mc: f64,
    pub seed: u64,
    /// Brownian-bridge crossing correction between monitoring points.
    pub bridge: bool,
}

impl Default for KilledBmOptions {
    fn default() -> Self {
        Self { n_paths: 100_000, dt_mc: 1e-3, seed: 0, bridge: true }
    }
}

/// One path, returning its endpoint and the number of completed steps
/// survived. A uniform is drawn every step whether or not the bridge
/// correction is on, so bridge-on and bridge-off runs share increments.
fn killed_path(
    rng: &mut ChaCha8Rng,
    x0: f64,
    boundary: &[f64],
    h: f64,
    bridge: bool,
) -> (f64, usize) {
    let sq = h.sqrt();
    let mut x = x0;
    // Starting on the front is allowed (Heaviside data start at L₀).
    if x < boundary[0] {
        return (x, 0);
    }
    for k in 1..boundary.len() {
        let z: f64 = StandardNormal.sample(rng);
        let u: f64 = rng.random();
        let prev = x;
        x += sq * z;
        if x <= boundary[k] {
            return (x, k - 1);
        }
        if bridge {
            let d1 = prev - boundary[k - 1];
            let d2 = x - boundary[k];
            // A step that starts on the front has no bridge factor to apply.
            if d1 > 0.0 && u < (-2.0 * d1 * d2 / h).exp() {
                return (x, k - 1);
            }
        }
    }
    (x, boundary.len() - 1)
}

fn boundary_grid(front: &FrontTrace, t_end: f64, dt_mc: f64) -> Result<(Vec<f64>, f64)> {
    if !(dt_mc > 0.0) {
        return Err(FbpError::parameter(format!("dt_mc = {dt_mc} must be positive")));
    }
    if front.is_empty() || front.times[0] > 1e-12 || front.t_end() < t_end - 1e-9 {
        return Err(FbpError::parameter(format!(
            "front trace covers [0, {}] but [0, {t_end}] is needed",
            if front.is_empty() { 0.0 } else { front.t_end() }
        )));
    }
    let m = ((t_end / dt_mc).round() as usize).max(1);
    let h = t_end / m as f64;
    Ok(((0..=m).map(|k| front.at(k as f64 * h)).collect(), h))
}

/// Survival probability of Brownian motion started from `−dU₀` and killed on
/// first reaching the front, estimated at `checkpoints` (each ≤ `t_end`).
pub fn killed_bm_survival(
    ic: &InitialCondition,
    front: &FrontTrace,
    checkpoints: &[f64],
    opts: &KilledBmOptions,
    exec: Exec,
) -> Result<SurvivalCurve> {
    let t_end = checkpoints.iter().copied().fold(0.0, f64::max);
    if t_end == 0.0 {
        return Ok(SurvivalCurve {
            times: checkpoints.to_vec(),
            survival: vec![1.0; checkpoints.len()],
            stderr: vec![0.0; checkpoints.len()],
            n_paths: opts.n_paths,
        });
    }
    let (boundary, h) = boundary_grid(front, t_end, opts.dt_mc)?;
    let steps: Vec<usize> = checkpoints.iter().map(|&t| (t / h).round() as usize).collect();
    let sampler = ic.sampler()?;
    let batches = batch_sizes(opts.n_paths, BATCH);
    let counts = map_indexed(exec, batches.len(), |b| {
        let mut rng = stream_rng(opts.seed, b as u64);
        let mut alive = vec![0u64; steps.len()];
        for _ in 0..batches[b] {
            let x0 = sampler.sample(&mut rng);
            let (_, survived) = killed_path(&mut rng, x0, &boundary, h, opts.bridge);
            for (a, &s) in alive.iter_mut().zip(&steps) {
                // Time 0 counts as survived for paths started on or right of L₀.
                if survived >= s && !(s == 0 && x0 < boundary[0]) {
                    *a += 1;
                }
            }
        }
        alive
    });
    let mut alive = vec![0u64; steps.len()];
    for c in counts {
        for (a, v) in alive.iter_mut().zip(c) {
            *a += v;
        }
    }
    let n = opts.n_paths as f64;
    let survival: Vec<f64> = alive.iter().map(|&a| a as f64 / n).collect();
    let stderr = survival.iter().map(|&p| (p * (1.0 - p) / n).sqrt()).collect();
    Ok(SurvivalCurve { times: checkpoints.to_vec(), survival, stderr, n_paths: opts.n_paths })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConditionalCcdf {
    pub xs: Vec<f64>,
    pub ccdf: Vec<f64>,
    pub stderr: Vec<f64>,
    pub survivors: usize,
}

/// Law of `B_t` given survival up to `t`, as a CCDF at `xs`.
pub fn killed_bm_conditional_ccdf(
    ic: &InitialCondition,
    front: &FrontTrace,
    t: f64,
    xs: &[f64],
    opts: &KilledBmOptions,
    exec: Exec,
) -> Result<ConditionalCcdf> {
    let (boundary, h) = boundary_grid(front, t, opts.dt_mc)?;
    let sampler = ic.sampler()?;
    let batches = batch_sizes(opts.n_paths, BATCH);
    let ends = map_indexed(exec, batches.len(), |b| {
        let mut rng = stream_rng(opts.seed, b as u64);
        let mut out = Vec::new();
        for _ in 0..batches[b] {
            let x0 = sampler.sample(&mut rng);
            let (x, survived) = killed_path(&mut rng, x0, &boundary, h, opts.bridge);
            if survived == boundary.len() - 1 && x0 >= boundary[0] {
                out.push(x);
            }
        }
        out
    });
    let mut ends: Vec<f64> = ends.into_iter().flatten().collect();
    let survivors = ends.len();
    if survivors < 200 {
        return Err(FbpError::Precision {
            message: format!(
                "only {survivors} survivors at t = {t}; raise n_paths (about n_paths·e^(−t) survive)"
            ),
            estimate: survivors as f64,
            error: f64::NAN,
        });
    }
    ends.sort_by(f64::total_cmp);
    let n = survivors as f64;
    let ccdf: Vec<f64> = xs
        .iter()
        .map(|&x| (survivors - ends.partition_point(|&p| p <= x)) as f64 / n)
        .collect();
    let stderr = ccdf.iter().map(|&p| (p * (1.0 - p) / n).sqrt()).collect();
    Ok(ConditionalCcdf { xs: xs.to_vec(), ccdf, stderr, survivors })
}
