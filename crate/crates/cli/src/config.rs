//! Experiment configuration: per-command defaults, overlaid by a JSON file,
//! overlaid by command-line flags.

use std::path::{Path, PathBuf};

use anyhow::{bail, Context};
use fbp_core::grid::Grid;
use fbp_core::solver::TailFill;
use fbp_core::waves::SQRT2;
use fbp_core::InitialCondition;
use serde::{Deserialize, Serialize};

/// Environment variable naming the output root.
pub const OUT_ENV: &str = "FBPLAB_OUT";
pub const DEFAULT_OUT: &str = "fbplab-out";

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Pipeline {
    Waves,
    Solve,
    BetaSolve,
    BdCheck,
    Asymptotics,
    Nbbm,
    KilledBm,
    AllAcceptance,
}

impl Pipeline {
    pub fn name(self) -> &'static str {
        match self {
            Pipeline::Waves => "waves",
            Pipeline::Solve => "solve",
            Pipeline::BetaSolve => "beta-solve",
            Pipeline::BdCheck => "bd-check",
            Pipeline::Asymptotics => "asymptotics",
            Pipeline::Nbbm => "nbbm",
            Pipeline::KilledBm => "killed-bm",
            Pipeline::AllAcceptance => "all-acceptance",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub left: f64,
    pub right: f64,
    pub dx: f64,
}

impl GridSpec {
    pub fn grid(&self) -> fbp_core::Result<Grid> {
        Grid::spanning(self.left, self.right, self.dx)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum SchemeSpec {
    Obstacle,
    Penalized { n: u32 },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub subcommand: Pipeline,
    pub ic: InitialCondition,
    pub grid: GridSpec,
    #[serde(rename = "T")]
    pub t_end: f64,
    /// `None` picks the solver default.
    pub dt: Option<f64>,
    pub dt_out: f64,
    pub seed: u64,
    /// `None` means `$FBPLAB_OUT/<subcommand>`.
    pub out_dir: Option<PathBuf>,
    /// Acceptance criteria to run (`all-acceptance`); empty means all.
    pub checks: Vec<u32>,
    pub scheme: SchemeSpec,
    pub tail_fill: TailFill,
    /// Times for snapshots, survival checkpoints or predictions.
    pub times: Vec<f64>,
    /// Exponential weights for `bd-check`.
    pub r: Vec<f64>,
    pub beta: f64,
    /// Wave speeds tabulated by `waves`.
    pub speeds: Vec<f64>,
    pub particles: usize,
    pub n_paths: usize,
    pub dt_mc: f64,
    pub bridge: bool,
}

impl ExperimentConfig {
    pub fn defaults(p: Pipeline) -> Self {
        let mut c = Self {
            subcommand: p,
            ic: InitialCondition::Heaviside,
            grid: GridSpec { left: -10.0, right: 40.0, dx: 0.02 },
            t_end: 10.0,
            dt: None,
            dt_out: 0.01,
            seed: 1,
            out_dir: None,
            checks: Vec::new(),
            scheme: SchemeSpec::Obstacle,
            tail_fill: TailFill::Zero,
            times: Vec::new(),
            r: Vec::new(),
            beta: 2.0,
            speeds: Vec::new(),
            particles: 10_000,
            n_paths: 100_000,
            dt_mc: 1e-3,
            bridge: true,
        };
        match p {
            Pipeline::Waves => c.speeds = vec![SQRT2, 1.5, 2.0],
            Pipeline::Solve => c.times = vec![1.0, 5.0],
            Pipeline::BetaSolve => {
                c.ic = InitialCondition::BetaWave { beta: 2.0 };
                c.grid.right = 50.0;
                c.t_end = 30.0;
                c.times = vec![10.0, 20.0, 30.0];
            }
            Pipeline::BdCheck => {
                c.ic = "powexp:1,0,1".parse().expect("valid spec");
                c.grid.right = 50.0;
                c.t_end = 60.0;
                c.r = vec![-1.0, 0.5];
                c.tail_fill = TailFill::Exponential;
            }
            Pipeline::Asymptotics => c.times = vec![1e2, 1e3, 1e4],
            Pipeline::Nbbm => {
                c.ic = InitialCondition::min_wave();
                c.t_end = 2.0;
                c.times = vec![2.0];
            }
            Pipeline::KilledBm => {
                c.ic = InitialCondition::min_wave();
                c.t_end = 5.0;
                c.times = vec![1.0, 2.0, 3.0, 4.0, 5.0];
            }
            Pipeline::AllAcceptance => {}
        }
        c
    }

    /// Defaults for `p`, overlaid field by field with the keys of a JSON object.
    pub fn from_json_overlay(p: Pipeline, overlay: &serde_json::Value) -> anyhow::Result<Self> {
        let mut base = serde_json::to_value(Self::defaults(p))?;
        let obj = overlay.as_object().context("config file must hold a JSON object")?;
        let fields = base.as_object_mut().expect("struct serializes to an object");
        for (k, v) in obj {
            if k == "subcommand" {
                continue;
            }
            fields.insert(k.clone(), v.clone());
        }
        serde_json::from_value(base).context("invalid config")
    }

    pub fn from_file(p: Pipeline, path: &Path) -> anyhow::Result<Self> {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        let v: serde_json::Value =
            serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))?;
        Self::from_json_overlay(p, &v).with_context(|| format!("in {}", path.display()))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }

    pub fn out_dir(&self) -> PathBuf {
        match &self.out_dir {
            Some(d) => d.clone(),
            None => {
                let root = std::env::var_os(OUT_ENV).map(PathBuf::from).unwrap_or_else(|| DEFAULT_OUT.into());
                root.join(self.subcommand.name())
            }
        }
    }

    /// Collects every offending field.
    pub fn validate(&self) -> anyhow::Result<()> {
        let mut errs = Vec::new();
        if let Err(fbp_core::FbpError::Validation(e)) = self.ic.validate() {
            errs.extend(e.into_iter().map(|m| format!("ic: {m}")));
        }
        let needs_grid = matches!(
            self.subcommand,
            Pipeline::Solve | Pipeline::BetaSolve | Pipeline::BdCheck | Pipeline::Nbbm | Pipeline::KilledBm
        );
        if needs_grid {
            if let Err(e) = self.grid.grid() {
                errs.push(format!("grid: {e}"));
            }
        }
        if !(self.t_end > 0.0 && self.t_end.is_finite()) {
            errs.push(format!("T = {} must be positive", self.t_end));
        }
        if let Some(dt) = self.dt {
            if !(dt > 0.0) {
                errs.push(format!("dt = {dt} must be positive"));
            }
        }
        if !(self.dt_out > 0.0) {
            errs.push(format!("dt_out = {} must be positive", self.dt_out));
        }
        if let SchemeSpec::Penalized { n } = self.scheme {
            if n < 2 {
                errs.push(format!("penalization exponent n = {n} must be at least 2"));
            }
        }
        if self.times.iter().any(|t| !(t.is_finite() && *t >= 0.0)) || self.times.windows(2).any(|w| w[1] < w[0]) {
            errs.push("times must be non-negative and increasing".into());
        }
        match self.subcommand {
            Pipeline::Waves if self.speeds.iter().any(|c| !(*c >= SQRT2 - 1e-12)) => {
                errs.push("speeds must all be ≥ √2".into());
            }
            Pipeline::BetaSolve if !(self.beta > 0.0 && self.beta.is_finite()) => {
                errs.push(format!("beta = {} must be positive", self.beta));
            }
            Pipeline::BdCheck if self.r.is_empty() => errs.push("r: at least one weight is needed".into()),
            Pipeline::Asymptotics if self.times.iter().any(|t| *t < 1.0) => {
                errs.push("asymptotics times must be ≥ 1".into());
            }
            Pipeline::Nbbm if self.particles < 2 => {
                errs.push(format!("particles = {} must be at least 2", self.particles));
            }
            Pipeline::KilledBm => {
                if self.n_paths == 0 {
                    errs.push("n_paths must be positive".into());
                }
                if !(self.dt_mc > 0.0) {
                    errs.push(format!("dt_mc = {} must be positive", self.dt_mc));
                }
                if self.times.iter().any(|t| *t > self.t_end) {
                    errs.push("killed-bm checkpoints must not exceed T".into());
                }
            }
            Pipeline::AllAcceptance => {
                let bad: Vec<_> =
                    self.checks.iter().filter(|id| !fbp_core::acceptance::IDS.contains(id)).collect();
                if !bad.is_empty() {
                    errs.push(format!("checks: unknown criteria {bad:?}"));
                }
            }
            _ => {}
        }
        if errs.is_empty() {
            Ok(())
        } else {
            bail!("invalid config:\n  - {}", errs.join("\n  - "))
        }
    }
}
