//! Run configuration: TOML file merged with command-line flags.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use clap::Args;
use serde::{Deserialize, Serialize};
use sumrules::spectra::{default_method, Method};
use sumrules::{BoundaryCondition, Builtin, Density};

use crate::fail::Failure;

/// Flags shared by every subcommand. Anything left unset falls back to the
/// config file, then to the built-in default.
#[derive(Debug, Clone, Default, Args, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    /// uniform, borg, oscillating, annulus or disk
    #[arg(long)]
    pub problem: Option<String>,
    #[arg(long, allow_negative_numbers = true)]
    pub alpha: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    pub epsilon: Option<f64>,
    /// Phase offset of the oscillating density
    #[arg(long, allow_negative_numbers = true)]
    pub phase: Option<f64>,
    /// Interval length for uniform and expression densities
    #[arg(long, allow_negative_numbers = true)]
    pub length: Option<f64>,
    /// Inner radius; a comma-separated list for annulus-sweep
    #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
    pub rmin: Option<Vec<f64>>,
    /// dirichlet, neumann or periodic
    #[arg(long)]
    pub bc: Option<String>,
    /// Sum-rule order, 1 or 2
    #[arg(long)]
    pub order: Option<u8>,
    /// Number of eigenvalues
    #[arg(long)]
    pub count: Option<usize>,
    /// pruefer, monodromy, rayleigh-ritz or bessel
    #[arg(long)]
    pub method: Option<String>,
    /// Basis size for rayleigh-ritz
    #[arg(long = "rr-states")]
    pub rr_states: Option<usize>,
    /// Inverse-power terms in the 1D tail model
    #[arg(long = "tail-terms")]
    pub tail_terms: Option<usize>,
    /// Density expression in x
    #[arg(long)]
    pub density: Option<String>,
    /// Expression parameter, name=value (repeatable)
    #[arg(long = "param", value_parser = parse_param)]
    #[serde(default, deserialize_with = "params_from_table")]
    pub params: Option<Vec<(String, f64)>>,
    /// Pass threshold for validate; error-estimate ceiling for compute
    #[arg(long, allow_negative_numbers = true)]
    pub tol: Option<f64>,
    /// Add the numeric column to annulus-sweep
    #[arg(long)]
    #[serde(default)]
    pub numeric: bool,
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// TOML file with the same keys (underscores for dashes)
    #[arg(long)]
    #[serde(skip)]
    pub config: Option<PathBuf>,
}

fn parse_param(s: &str) -> Result<(String, f64), String> {
    let (k, v) = s.split_once('=').ok_or_else(|| format!("expected name=value, got '{s}'"))?;
    let v: f64 = v.trim().parse().map_err(|_| format!("'{v}' is not a number"))?;
    Ok((k.trim().to_string(), v))
}

fn params_from_table<'de, D>(de: D) -> Result<Option<Vec<(String, f64)>>, D::Error>
where
    D: serde::Deserializer<'de>,
{
    let t: Option<BTreeMap<String, f64>> = Option::deserialize(de)?;
    Ok(t.map(|m| m.into_iter().collect()))
}

impl RunConfig {
    /// Reads `--config` if given and lets the flags win.
    pub fn merged(self) -> Result<RunConfig, Failure> {
        let Some(path) = self.config.clone() else {
            return Ok(self);
        };
        let file = read_file(&path)?;
        Ok(RunConfig {
            problem: self.problem.or(file.problem),
            alpha: self.alpha.or(file.alpha),
            epsilon: self.epsilon.or(file.epsilon),
            phase: self.phase.or(file.phase),
            length: self.length.or(file.length),
            rmin: self.rmin.or(file.rmin),
            bc: self.bc.or(file.bc),
            order: self.order.or(file.order),
            count: self.count.or(file.count),
            method: self.method.or(file.method),
            rr_states: self.rr_states.or(file.rr_states),
            tail_terms: self.tail_terms.or(file.tail_terms),
            density: self.density.or(file.density),
            params: self.params.or(file.params),
            tol: self.tol.or(file.tol),
            numeric: self.numeric || file.numeric,
            out: self.out.or(file.out),
            config: Some(path),
        })
    }
}

fn read_file(path: &Path) -> Result<RunConfig, Failure> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Failure::config(format!("cannot read {}: {e}", path.display())))?;
    toml::from_str(&text).map_err(|e| Failure::config(format!("{}: {e}", path.display())))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Problem {
    Uniform,
    Borg,
    Oscillating,
    Annulus,
    Disk,
    Expression,
}

/// Fully resolved settings; echoed into every output.
#[derive(Debug, Clone, Serialize)]
pub struct Resolved {
    pub command: &'static str,
    pub problem: Problem,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub alpha: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub epsilon: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub phase: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub length: Option<f64>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub rmin: Vec<f64>,
    pub bc: BoundaryCondition,
    pub order: u8,
    pub count: usize,
    pub method: Method,
    pub rr_states: usize,
    pub tail_terms: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub density: Option<String>,
    #[serde(skip_serializing_if = "BTreeMap::is_empty")]
    pub params: BTreeMap<String, f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub tol: Option<f64>,
    pub numeric: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub out: Option<PathBuf>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub config: Option<PathBuf>,
}

pub const DEFAULT_COUNT: usize = 2000;
pub const DEFAULT_RR_STATES: usize = 100;
pub const DEFAULT_TAIL_TERMS: usize = 2;

pub const SWEEP_GRID: [f64; 13] = [
    0.001, 0.002, 0.005, 0.01, 0.02, 0.05, 0.1, 0.2, 0.3, 0.5, 0.7, 0.8, 0.9,
];

impl Resolved {
    pub fn from_config(command: &'static str, c: RunConfig) -> Result<Resolved, Failure> {
        let problem = match (c.problem.as_deref(), &c.density) {
            (Some(_), Some(_)) => {
                return Err(Failure::config("give either --problem or --density, not both"))
            }
            (None, Some(_)) => Problem::Expression,
            (None, None) if command == "annulus-sweep" => Problem::Annulus,
            (None, None) => return Err(Failure::config("no --problem or --density given")),
            (Some(p), None) => match p.to_ascii_lowercase().as_str() {
                "uniform" => Problem::Uniform,
                "borg" => Problem::Borg,
                "oscillating" => Problem::Oscillating,
                "annulus" => Problem::Annulus,
                "disk" => Problem::Disk,
                other => return Err(Failure::config(format!("unknown problem '{other}'"))),
            },
        };
        let two_d = matches!(problem, Problem::Annulus | Problem::Disk);
        let bc: BoundaryCondition = match &c.bc {
            Some(s) => s.parse().map_err(Failure::from)?,
            None => BoundaryCondition::Neumann,
        };
        if two_d && bc != BoundaryCondition::Neumann {
            return Err(Failure::config("disk and annulus problems are Neumann only"));
        }
        let order = c.order.unwrap_or(if two_d { 2 } else { 1 });
        if !(1..=2).contains(&order) {
            return Err(Failure::config(format!("order must be 1 or 2, got {order}")));
        }
        let method = match &c.method {
            Some(s) => s.parse().map_err(Failure::from)?,
            None if two_d => Method::Bessel,
            None => default_method(bc),
        };
        match (two_d, method) {
            (true, Method::Bessel) => {}
            (true, m) => return Err(Failure::config(format!("method {m} does not apply to 2D problems"))),
            (false, Method::Bessel) => return Err(Failure::config("bessel applies to disk and annulus only")),
            _ => {}
        }
        let rmin = match problem {
            Problem::Annulus => c.rmin.clone().unwrap_or_else(|| {
                if command == "annulus-sweep" {
                    SWEEP_GRID.to_vec()
                } else {
                    Vec::new()
                }
            }),
            _ if c.rmin.is_some() => {
                return Err(Failure::config("--rmin applies to the annulus only"))
            }
            _ => Vec::new(),
        };
        if problem == Problem::Annulus && rmin.is_empty() {
            return Err(Failure::config("annulus needs --rmin"));
        }
        if command != "annulus-sweep" && rmin.len() > 1 {
            return Err(Failure::config("give a single --rmin outside annulus-sweep"));
        }
        if command == "annulus-sweep" && problem != Problem::Annulus {
            return Err(Failure::config("annulus-sweep runs on the annulus problem"));
        }
        let pick = |v: Option<f64>, used: bool, name: &str| -> Result<Option<f64>, Failure> {
            match (v, used) {
                (Some(_), false) => Err(Failure::config(format!("--{name} does not apply to this problem"))),
                (v, _) => Ok(v),
            }
        };
        let alpha = pick(c.alpha, problem == Problem::Borg, "alpha")?;
        let epsilon = pick(c.epsilon, problem == Problem::Oscillating, "epsilon")?;
        let phase = pick(c.phase, problem == Problem::Oscillating, "phase")?;
        let length = pick(
            c.length,
            matches!(problem, Problem::Uniform | Problem::Expression),
            "length",
        )?;
        let count = c.count.unwrap_or(DEFAULT_COUNT);
        if count == 0 {
            return Err(Failure::config("count must be at least 1"));
        }
        if let Some(t) = c.tol {
            if !(t > 0.0) {
                return Err(Failure::config(format!("tol must be positive, got {t}")));
            }
        }
        let params: BTreeMap<String, f64> = c.params.clone().unwrap_or_default().into_iter().collect();
        if !params.is_empty() && problem != Problem::Expression {
            return Err(Failure::config("--param applies to --density expressions only"));
        }
        Ok(Resolved {
            command,
            problem,
            alpha: match problem {
                Problem::Borg => Some(alpha.unwrap_or(1.0)),
                _ => None,
            },
            epsilon: match problem {
                Problem::Oscillating => Some(epsilon.unwrap_or(1.0)),
                _ => None,
            },
            phase: match problem {
                Problem::Oscillating => Some(phase.unwrap_or(0.0)),
                _ => None,
            },
            length: match problem {
                Problem::Uniform | Problem::Expression => Some(length.unwrap_or(1.0)),
                _ => None,
            },
            rmin,
            bc,
            order,
            count,
            method,
            rr_states: c.rr_states.unwrap_or(DEFAULT_RR_STATES),
            tail_terms: c.tail_terms.unwrap_or(DEFAULT_TAIL_TERMS),
            density: c.density,
            params,
            tol: c.tol,
            numeric: c.numeric,
            out: c.out,
            config: c.config,
        })
    }

    /// Builtin parameters for 1D problems and a single-radius annulus.
    pub fn builtin(&self) -> Option<Builtin> {
        match self.problem {
            Problem::Uniform => Some(Builtin::Uniform { length: self.length? }),
            Problem::Borg => Some(Builtin::Borg { alpha: self.alpha? }),
            Problem::Oscillating => Some(Builtin::Oscillating {
                epsilon: self.epsilon?,
                phase: self.phase?,
            }),
            Problem::Annulus => Some(Builtin::Annulus { r_min: *self.rmin.first()? }),
            Problem::Disk | Problem::Expression => None,
        }
    }

    pub fn density(&self) -> Result<Density, Failure> {
        match self.problem {
            Problem::Expression => {
                let text = self.density.as_deref().unwrap_or_default();
                Ok(Density::expression(text, &self.params, self.length.unwrap_or(1.0))?)
            }
            Problem::Disk => Err(Failure::config("the disk has no density profile")),
            _ => Ok(Density::builtin(self.builtin().expect("builtin problem"))?),
        }
    }

    pub fn is_two_d(&self) -> bool {
        matches!(self.problem, Problem::Annulus | Problem::Disk)
    }
}
