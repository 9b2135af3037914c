use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};
use escape_dim_core::torus::HyperbolicMap;
use escape_dim_core::SystemConstants;
use serde::{Deserialize, Serialize};

use crate::error::{config, CliResult};

#[derive(Debug, Parser)]
#[command(
    name = "escape-dim",
    version,
    about = "Dimension bounds for orbits escaping on average"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Certified codimension lower bound for one parameter set.
    Bound(Args),
    /// Escape-frequency threshold above which a drop is certified.
    Threshold(Args),
    /// CSV and SVG of the threshold curve.
    Curve(Args),
    /// Exhaustive and randomized lemma suites.
    Verify(Args),
    /// Empirical escape-set dimension on a model system.
    Simulate {
        #[arg(default_value = "catmap")]
        system: String,
        #[command(flatten)]
        args: Args,
    },
}

#[derive(Debug, clap::Args)]
pub struct Args {
    /// JSON file with the same keys as the flags; flags take precedence.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[command(flatten)]
    pub params: Params,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    Bound,
    Threshold,
    Curve,
    Verify,
    Simulate,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize, clap::Args)]
#[serde(rename_all = "kebab-case", deny_unknown_fields)]
pub struct Params {
    /// Measure of the target's 5r-core (bound, threshold, curve) or of the
    /// target itself (simulate).
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub mu: Option<f64>,
    /// Required average escape frequency in (0, 1].
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub delta: Option<f64>,
    /// Scale of the Bowen boxes.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub r: Option<f64>,
    /// Built-in constants: shift or catmap.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub constants: Option<String>,
    /// JSON file of system constants; overrides --constants.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub constants_file: Option<PathBuf>,
    /// Equidistribution rate for the catmap preset.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub lambda_prime: Option<f64>,
    /// combinatorics, shift, torus or all.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub suite: Option<String>,
    /// Largest N in the shift sweep.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub max_n: Option<usize>,
    /// Largest N·T in the shift sweep.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub max_nt: Option<usize>,
    /// Number of blocks.
    #[arg(long = "N")]
    #[serde(rename = "N", skip_serializing_if = "Option::is_none")]
    pub n: Option<u32>,
    /// Block length.
    #[arg(long = "T")]
    #[serde(rename = "T", skip_serializing_if = "Option::is_none")]
    pub t: Option<u32>,
    /// RNG seed for randomized suites and sampling.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    /// Run record path (SVG path for curve).
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub out: Option<PathBuf>,
    /// CSV output path.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub csv: Option<PathBuf>,
    /// Bisection tolerance for the threshold.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub tol: Option<f64>,
    /// Monte Carlo samples per time or per suite cell.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub samples: Option<u64>,
    /// Sample points per box at the finest level (at least 4).
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub grid_per_box: Option<u32>,
    /// Base point of the unstable segment.
    #[arg(long, num_args = 2, value_names = ["X", "Y"])]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub base: Option<Vec<f64>>,
}

impl Params {
    /// Fields set in `self` win over those in `file`.
    fn over(self, file: Params) -> Params {
        macro_rules! pick {
            ($($f:ident),*) => { Params { $($f: self.$f.or(file.$f)),* } };
        }
        pick!(
            mu,
            delta,
            r,
            constants,
            constants_file,
            lambda_prime,
            suite,
            max_n,
            max_nt,
            n,
            t,
            seed,
            out,
            csv,
            tol,
            samples,
            grid_per_box,
            base
        )
    }
}

/// A fully merged configuration for one run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub mode: Mode,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub system: Option<String>,
    pub params: Params,
}

pub const SUITES: [&str; 4] = ["combinatorics", "shift", "torus", "all"];
pub const SYSTEMS: [&str; 1] = ["catmap"];

fn read_params(path: &Path) -> CliResult<Params> {
    let text = std::fs::read_to_string(path)
        .or_else(|e| config(format!("cannot read {}: {e}", path.display())))?;
    serde_json::from_str(&text).or_else(|e| config(format!("{}: {e}", path.display())))
}

impl ExperimentConfig {
    pub fn from_cli(cli: Cli) -> CliResult<Self> {
        let (mode, system, args) = match cli.command {
            Command::Bound(a) => (Mode::Bound, None, a),
            Command::Threshold(a) => (Mode::Threshold, None, a),
            Command::Curve(a) => (Mode::Curve, None, a),
            Command::Verify(a) => (Mode::Verify, None, a),
            Command::Simulate { system, args } => (Mode::Simulate, Some(system), args),
        };
        let params = match &args.config {
            Some(path) => args.params.over(read_params(path)?),
            None => args.params,
        };
        let cfg = ExperimentConfig {
            mode,
            system,
            params,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    /// Checks that the fields the mode needs are present and well formed.
    pub fn validate(&self) -> CliResult<()> {
        let p = &self.params;
        let need = |name: &str, present: bool| {
            if present {
                Ok(())
            } else {
                config(format!("`{}` requires --{name}", self.mode_name()))
            }
        };
        match self.mode {
            Mode::Bound => {
                need("mu", p.mu.is_some())?;
                need("delta", p.delta.is_some())?;
                need("r", p.r.is_some())?;
            }
            Mode::Threshold | Mode::Curve => need("mu", p.mu.is_some())?,
            Mode::Verify => {
                let suite = self.suite();
                if !SUITES.contains(&suite) {
                    return config(format!(
                        "unknown suite `{suite}`; expected one of {SUITES:?}"
                    ));
                }
                if suite != "shift" {
                    need("seed", p.seed.is_some())?;
                }
            }
            Mode::Simulate => {
                let system = self.system.as_deref().unwrap_or("catmap");
                if !SYSTEMS.contains(&system) {
                    return config(format!(
                        "unknown system `{system}`; expected one of {SYSTEMS:?}"
                    ));
                }
                need("seed", p.seed.is_some())?;
                need("delta", p.delta.is_some())?;
                need("r", p.r.is_some())?;
                need("N", p.n.is_some())?;
                need("T", p.t.is_some())?;
            }
        }
        if p.constants.is_some() && p.constants_file.is_some() {
            return config("--constants and --constants-file are mutually exclusive");
        }
        if let Some(name) = &p.constants {
            if name != "shift" && name != "catmap" {
                return config(format!(
                    "unknown constants preset `{name}`; expected shift or catmap"
                ));
            }
        }
        if let Some(b) = &p.base {
            if b.len() != 2 {
                return config("--base takes exactly two coordinates");
            }
        }
        Ok(())
    }

    pub fn mode_name(&self) -> &'static str {
        match self.mode {
            Mode::Bound => "bound",
            Mode::Threshold => "threshold",
            Mode::Curve => "curve",
            Mode::Verify => "verify",
            Mode::Simulate => "simulate",
        }
    }

    pub fn suite(&self) -> &str {
        self.params.suite.as_deref().unwrap_or("all")
    }

    /// Resolves the constants, falling back to `default` when neither a
    /// preset nor a file is given.
    pub fn constants(&self, default: &str) -> CliResult<SystemConstants> {
        let p = &self.params;
        if let Some(path) = &p.constants_file {
            let text = std::fs::read_to_string(path)
                .or_else(|e| config(format!("cannot read {}: {e}", path.display())))?;
            return serde_json::from_str(&text)
                .or_else(|e| config(format!("{}: {e}", path.display())));
        }
        match p.constants.as_deref().unwrap_or(default) {
            "shift" => Ok(SystemConstants::shift()),
            _ => {
                let lp = p
                    .lambda_prime
                    .unwrap_or_else(|| HyperbolicMap::cat().ln_lambda());
                let k = SystemConstants::catmap(lp);
                k.validate()?;
                Ok(k)
            }
        }
    }
}
