use std::f64::consts::PI;
use std::path::{Path, PathBuf};

use clap::{Args, ValueEnum};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
}

/// Flags shared by every subcommand. Each one may also come from the
/// config file; flags win.
#[derive(Debug, Clone, Default, Args, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Overrides {
    /// Angle between the incoming guide and the intermediate segment (radians)
    #[arg(long, global = true)]
    pub alpha: Option<f64>,
    /// Turn angle (radians)
    #[arg(long, global = true)]
    pub beta: Option<f64>,
    /// Smoothening width of the turn
    #[arg(long, global = true)]
    pub b: Option<f64>,
    #[arg(long, global = true)]
    pub emin: Option<f64>,
    #[arg(long, global = true)]
    pub emax: Option<f64>,
    /// Number of energies (or ν values for one-turn)
    #[arg(long, global = true)]
    pub grid: Option<usize>,
    /// Launch phases per oracle evaluation
    #[arg(long, global = true)]
    pub phases: Option<usize>,
    /// Oracle resolution in N, relative to E
    #[arg(long, global = true)]
    pub tol: Option<f64>,
    /// Escape parameter of the reflected sphaleron trajectory
    #[arg(long, global = true, allow_hyphen_values = true)]
    pub s1: Option<f64>,
    /// Seed for the random phase mode of the oracle
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Worker threads
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    /// Physical distance between the turns
    #[arg(long = "L", global = true)]
    #[serde(rename = "L")]
    pub length: Option<f64>,
    #[arg(long, global = true)]
    pub format: Option<Format>,
    /// Directory for output files; stdout when absent
    #[arg(long, global = true, env = "SHARPTURN_OUT_DIR")]
    pub out_dir: Option<PathBuf>,
}

impl Overrides {
    fn or(self, file: Overrides) -> Overrides {
        Overrides {
            alpha: self.alpha.or(file.alpha),
            beta: self.beta.or(file.beta),
            b: self.b.or(file.b),
            emin: self.emin.or(file.emin),
            emax: self.emax.or(file.emax),
            grid: self.grid.or(file.grid),
            phases: self.phases.or(file.phases),
            tol: self.tol.or(file.tol),
            s1: self.s1.or(file.s1),
            seed: self.seed.or(file.seed),
            threads: self.threads.or(file.threads),
            length: self.length.or(file.length),
            format: self.format.or(file.format),
            out_dir: self.out_dir.or(file.out_dir),
        }
    }
}

/// Fully resolved configuration of one invocation. Serialized into the
/// comment line of every output file.
#[derive(Debug, Clone, Serialize)]
pub struct RunConfig {
    pub command: &'static str,
    pub alpha: f64,
    pub beta: f64,
    pub b: f64,
    pub emin: f64,
    pub emax: f64,
    pub grid: usize,
    pub phases: usize,
    pub tol: f64,
    pub s1: f64,
    pub seed: Option<u64>,
    pub threads: usize,
    #[serde(rename = "L")]
    pub length: Option<f64>,
    pub exact: bool,
    pub physical_units: bool,
    pub format: Format,
    #[serde(skip)]
    pub out_dir: Option<PathBuf>,
}

struct Defaults {
    emin: f64,
    emax: f64,
    grid: usize,
}

fn defaults(command: &str) -> Defaults {
    match command {
        "one-turn" => Defaults {
            emin: 1.0,
            emax: 1.0,
            grid: 101,
        },
        "oracle" => Defaults {
            emin: 5e-4,
            emax: 0.1,
            grid: 20,
        },
        "boundary" => Defaults {
            emin: 1e-4,
            emax: 0.1,
            grid: 400,
        },
        _ => Defaults {
            emin: 1e-4,
            emax: 5e-2,
            grid: 2000,
        },
    }
}

pub fn load_file(path: &Path) -> Result<Overrides, String> {
    let text = std::fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))?;
    toml::from_str(&text).map_err(|e| format!("{}: {e}", path.display()))
}

impl RunConfig {
    pub fn resolve(
        command: &'static str,
        flags: Overrides,
        file: Option<Overrides>,
        exact: bool,
        physical_units: bool,
    ) -> Result<Self, String> {
        let o = match file {
            Some(f) => flags.or(f),
            None => flags,
        };
        let d = defaults(command);
        let cfg = RunConfig {
            command,
            // single-turn commands have no intermediate segment
            alpha: if matches!(command, "one-turn" | "sphaleron") {
                0.0
            } else {
                o.alpha.unwrap_or(PI / 30.0)
            },
            beta: o.beta.unwrap_or(PI / 3.0),
            b: o.b.unwrap_or(1e-3),
            emin: o.emin.unwrap_or(d.emin),
            emax: o.emax.unwrap_or(d.emax),
            grid: o.grid.unwrap_or(d.grid),
            phases: o.phases.unwrap_or(4000),
            tol: o.tol.unwrap_or(2.5e-4),
            s1: o.s1.unwrap_or(-0.5),
            seed: o.seed,
            threads: o
                .threads
                .unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get())),
            length: o.length,
            exact,
            physical_units,
            format: o.format.unwrap_or(Format::Csv),
            out_dir: o.out_dir,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    fn validate(&self) -> Result<(), String> {
        if !(self.beta > 0.0 && self.beta < PI / 2.0) {
            return Err(format!("beta must lie in (0, π/2), got {}", self.beta));
        }
        if !(self.alpha >= 0.0 && self.alpha < self.beta) {
            return Err(format!("alpha must lie in [0, beta), got {}", self.alpha));
        }
        if !(self.emin > 0.0 && self.emin <= self.emax && self.emax.is_finite()) {
            return Err(format!("need 0 < emin <= emax, got {} and {}", self.emin, self.emax));
        }
        if self.grid < 2 {
            return Err(format!("grid needs at least 2 points, got {}", self.grid));
        }
        if self.threads < 1 {
            return Err("threads must be at least 1".into());
        }
        if !(self.b > 0.0) {
            return Err(format!("b must be positive, got {}", self.b));
        }
        if !(self.tol > 0.0) || self.phases < 10 {
            return Err("oracle needs tol > 0 and at least 10 phases".into());
        }
        match self.length {
            Some(l) if !(l > 0.0) => return Err(format!("L must be positive, got {l}")),
            None if self.physical_units => return Err("--physical-units needs --L".into()),
            _ => {}
        }
        Ok(())
    }

    /// Energy and exponent conversion factor L².
    pub fn energy_scale(&self) -> f64 {
        match self.length {
            Some(l) if self.physical_units => l * l,
            _ => 1.0,
        }
    }
}
