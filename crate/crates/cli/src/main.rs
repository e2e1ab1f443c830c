use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser};
use fbp_cli::config::{ExperimentConfig, Pipeline, SchemeSpec};
use fbp_core::solver::TailFill;
use fbp_core::InitialCondition;

/// Free boundary front laboratory.
///
/// Each subcommand writes CSV/JSON artifacts and a verdict.json into
/// `--out`, or `$FBPLAB_OUT/<subcommand>` (default root `fbplab-out`).
/// Exit status: 0 when every check passes, 1 when a check fails, 2 on errors.
#[derive(Parser, Debug)]
#[command(name = "fbplab", version, allow_negative_numbers = true)]
struct Cli {
    #[arg(value_enum)]
    subcommand: Pipeline,
    #[command(flatten)]
    flags: Flags,
}

#[derive(Args, Debug, Default)]
struct Flags {
    /// JSON config; flags given here override its fields.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Print the resolved config as JSON and exit.
    #[arg(long)]
    emit_config: bool,
    /// heaviside | powexp:A,nu,lambda | wave:c | wave:min | betawave:beta
    #[arg(long)]
    ic: Option<InitialCondition>,
    #[arg(long)]
    left: Option<f64>,
    #[arg(long)]
    right: Option<f64>,
    #[arg(long)]
    dx: Option<f64>,
    /// Horizon.
    #[arg(long = "T")]
    t_end: Option<f64>,
    #[arg(long)]
    dt: Option<f64>,
    #[arg(long)]
    dt_out: Option<f64>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    out: Option<PathBuf>,
    /// Acceptance criteria to run, e.g. 1,3,10.
    #[arg(long, value_delimiter = ',')]
    checks: Option<Vec<u32>>,
    /// Use the penalized scheme with this exponent instead of the obstacle scheme.
    #[arg(long)]
    penalized: Option<u32>,
    /// Geometric continuation of the tail at the right edge.
    #[arg(long)]
    exp_tail: Option<bool>,
    #[arg(long, value_delimiter = ',')]
    times: Option<Vec<f64>>,
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    r: Option<Vec<f64>>,
    #[arg(long)]
    beta: Option<f64>,
    #[arg(long, value_delimiter = ',')]
    speeds: Option<Vec<f64>>,
    /// Number of N-BBM particles.
    #[arg(long, short = 'N')]
    particles: Option<usize>,
    #[arg(long)]
    n_paths: Option<usize>,
    #[arg(long)]
    dt_mc: Option<f64>,
    /// Brownian-bridge crossing correction for killed paths.
    #[arg(long)]
    bridge: Option<bool>,
}

impl Flags {
    fn apply(self, c: &mut ExperimentConfig) {
        if let Some(v) = self.ic {
            c.ic = v;
        }
        if let Some(v) = self.left {
            c.grid.left = v;
        }
        if let Some(v) = self.right {
            c.grid.right = v;
        }
        if let Some(v) = self.dx {
            c.grid.dx = v;
        }
        if let Some(v) = self.t_end {
            c.t_end = v;
        }
        if self.dt.is_some() {
            c.dt = self.dt;
        }
        if let Some(v) = self.dt_out {
            c.dt_out = v;
        }
        if let Some(v) = self.seed {
            c.seed = v;
        }
        if self.out.is_some() {
            c.out_dir = self.out;
        }
        if let Some(v) = self.checks {
            c.checks = v;
        }
        if let Some(n) = self.penalized {
            c.scheme = SchemeSpec::Penalized { n };
        }
        if let Some(on) = self.exp_tail {
            c.tail_fill = if on { TailFill::Exponential } else { TailFill::Zero };
        }
        if let Some(v) = self.times {
            c.times = v;
        }
        if let Some(v) = self.r {
            c.r = v;
        }
        if let Some(v) = self.beta {
            c.beta = v;
        }
        if let Some(v) = self.speeds {
            c.speeds = v;
        }
        if let Some(v) = self.particles {
            c.particles = v;
        }
        if let Some(v) = self.n_paths {
            c.n_paths = v;
        }
        if let Some(v) = self.dt_mc {
            c.dt_mc = v;
        }
        if let Some(v) = self.bridge {
            c.bridge = v;
        }
    }
}

fn resolve(cli: Cli) -> anyhow::Result<(ExperimentConfig, bool)> {
    let mut cfg = match &cli.flags.config {
        Some(path) => ExperimentConfig::from_file(cli.subcommand, path)?,
        None => ExperimentConfig::defaults(cli.subcommand),
    };
    let emit = cli.flags.emit_config;
    cli.flags.apply(&mut cfg);
    Ok((cfg, emit))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (cfg, emit) = match resolve(cli) {
        Ok(x) => x,
        Err(e) => {
            eprintln!("error: {e:#}");
            return ExitCode::from(2);
        }
    };
    if emit {
        println!("{}", cfg.to_json());
        return ExitCode::SUCCESS;
    }
    match fbp_cli::run(&cfg) {
        Ok((verdict, path)) => {
            for c in &verdict.checks {
                let (tag, op) = match (c.pass, c.at_least) {
                    (true, false) => ("PASS", "≤"),
                    (false, false) => ("FAIL", ">"),
                    (true, true) => ("PASS", "≥"),
                    (false, true) => ("FAIL", "<"),
                };
                println!("{tag} {}: {:.4e} {op} {:.4e}  [{}]", c.name, c.measured, c.tolerance, c.anchor);
            }
            println!("verdict: {} ({})", if verdict.pass { "pass" } else { "fail" }, path.display());
            if verdict.pass {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            }
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
