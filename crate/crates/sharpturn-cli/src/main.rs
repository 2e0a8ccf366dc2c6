mod commands;
mod config;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use serde_json::json;

use config::{load_file, Overrides, RunConfig};

#[derive(Parser)]
#[command(
    name = "sharpturn",
    version,
    about = "Reflection from sharp turns in waveguides: data for every curve"
)]
struct Cli {
    /// TOML file with default values for any of the flags
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[command(flatten)]
    overrides: Overrides,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Suppression exponent of the single turn on a ν grid
    OneTurn,
    /// Classically allowed boundary N_cr(E) and its optima
    Boundary {
        #[arg(long)]
        physical_units: bool,
    },
    /// Brute-force boundary from classical trajectories
    Oracle,
    /// Complex-trajectory branches and the glued exponent
    Tunnel {
        /// Refine every point through the full matching system
        #[arg(long)]
        exact: bool,
        #[arg(long)]
        physical_units: bool,
    },
    /// Smoothened-turn report
    Sphaleron,
    /// Run the acceptance suite
    Validate {
        /// Comma-separated criterion ids
        #[arg(long, value_delimiter = ',')]
        only: Vec<u8>,
    },
}

fn fail(code: u8, kind: &str, message: String) -> ExitCode {
    eprintln!("{}", json!({ "error": kind, "message": message }));
    ExitCode::from(code)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let file = match cli.config.as_deref().map(load_file).transpose() {
        Ok(f) => f,
        Err(msg) => return fail(2, "ConfigError", msg),
    };
    let (name, exact, physical) = match &cli.command {
        Command::OneTurn => ("one-turn", false, false),
        Command::Boundary { physical_units } => ("boundary", false, *physical_units),
        Command::Oracle => ("oracle", false, false),
        Command::Tunnel { exact, physical_units } => ("tunnel", *exact, *physical_units),
        Command::Sphaleron => ("sphaleron", false, false),
        Command::Validate { .. } => ("validate", false, false),
    };
    let cfg = match RunConfig::resolve(name, cli.overrides, file, exact, physical) {
        Ok(c) => c,
        Err(msg) => return fail(2, "ConfigError", msg),
    };
    let pool = match rayon::ThreadPoolBuilder::new().num_threads(cfg.threads).build() {
        Ok(p) => p,
        Err(e) => return fail(1, "ThreadPool", e.to_string()),
    };

    pool.install(|| {
        let written = match &cli.command {
            Command::Validate { only } => {
                let (passed, doc) = commands::validate(only);
                let res = output::emit_json(&cfg, "validate", &doc).map(|p| p.into_iter().collect());
                if res.is_ok() && !passed {
                    return fail(1, "AcceptanceFailed", "at least one acceptance criterion failed".into());
                }
                res
            }
            Command::Sphaleron => match commands::sphaleron(&cfg) {
                Ok(doc) => output::emit_json(&cfg, "sphaleron", &doc).map(|p| p.into_iter().collect()),
                Err(e) => return fail(1, e.kind(), e.to_string()),
            },
            cmd => {
                let tables = match cmd {
                    Command::OneTurn => commands::one_turn(&cfg),
                    Command::Boundary { .. } => commands::boundary(&cfg),
                    Command::Oracle => commands::oracle(&cfg),
                    _ => commands::tunnel(&cfg),
                };
                match tables {
                    Ok(t) => output::emit(&cfg, &t),
                    Err(e) => return fail(1, e.kind(), e.to_string()),
                }
            }
        };
        match written {
            Ok(paths) => {
                for p in paths {
                    eprintln!("wrote {}", p.display());
                }
                ExitCode::SUCCESS
            }
            Err(e) => fail(1, "Io", e.to_string()),
        }
    })
}
