//! `nbubble`: command-line front end for the two-bubble Neumann numerics.
//!
//! Exit codes: 0 when every check of the command passed, 1 when a computation
//! failed or a verdict is negative, 2 for bad input (flags or config file).

mod cache;
mod commands;
mod config;
mod manifest;
mod output;
mod svg;

use std::fmt;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use serde_json::json;

use crate::config::{Config, DomainChoice};
use crate::manifest::RunManifest;
use crate::output::{json_string, Outputs};

#[derive(Debug)]
pub enum CliError {
    /// Bad flags, config file or parameter combination.
    Usage(String),
    Numeric(nbubble_core::Error),
    Failed(String),
    Io(String),
    Internal(String),
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Numeric(nbubble_core::Error::InvalidInput(_) | nbubble_core::Error::UnsupportedDimension(_)) => 2,
            _ => 1,
        }
    }

    fn kind(&self) -> &'static str {
        match self {
            CliError::Usage(_) => "usage",
            CliError::Numeric(_) => "numeric",
            CliError::Failed(_) => "failed",
            CliError::Io(_) => "io",
            CliError::Internal(_) => "internal",
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Usage(m) | CliError::Failed(m) | CliError::Io(m) | CliError::Internal(m) => f.write_str(m),
            CliError::Numeric(e) => write!(f, "{e}"),
        }
    }
}

#[derive(Parser, Debug)]
#[command(name = "nbubble", version, about = "Sign-changing two-bubble solutions of the Neumann problem in the ball")]
struct Cli {
    /// TOML run file; flags override its values.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Directory for the report files.
    #[arg(long, global = true)]
    out_dir: Option<PathBuf>,
    /// Space dimension.
    #[arg(short = 'n', long, global = true, value_parser = clap::value_parser!(u32).range(4..=6))]
    dim: Option<u32>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Reduced constants, their cross-checks and the critical point d*.
    Constants {
        #[arg(long)]
        tol: Option<f64>,
        /// Write the JSON here instead of the output directory.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Tabulate the half-space corrector (cached).
    CorrectorTable {
        #[arg(long)]
        r_max: Option<f64>,
        #[arg(long)]
        steps: Option<usize>,
        #[arg(long)]
        tol: Option<f64>,
    },
    /// Project the antipodal pair onto the Neumann space at one δ.
    Project {
        #[arg(long)]
        delta: Option<f64>,
        #[arg(long)]
        per_delta: Option<f64>,
    },
    /// Newton solve of the full problem.
    Solve {
        #[arg(long, value_enum)]
        domain: Option<DomainChoice>,
        #[arg(long, allow_hyphen_values = true)]
        eps: Option<f64>,
        #[arg(long)]
        inner_radius: Option<f64>,
        #[arg(long)]
        outer_radius: Option<f64>,
        #[arg(long)]
        bubble_radius: Option<f64>,
        #[arg(long)]
        delta_init: Option<f64>,
        #[arg(long)]
        per_delta: Option<f64>,
        #[arg(long)]
        max_iterations: Option<usize>,
        /// Skip the φ-norm minimization after convergence.
        #[arg(long)]
        no_diagnostics: bool,
        /// Print the grid that would be used and exit.
        #[arg(long)]
        dry_run: bool,
    },
    /// Run one expansion experiment (SELF, CROSS, GRAD, NLT, PHI-BUBBLE, REM, PZNORM) or `all`.
    Verify { id: String },
    /// Ball solves over a list of ε.
    Sweep {
        #[arg(long, value_delimiter = ',')]
        eps: Option<Vec<f64>>,
    },
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Command::Constants { .. } => "constants",
            Command::CorrectorTable { .. } => "corrector-table",
            Command::Project { .. } => "project",
            Command::Solve { .. } => "solve",
            Command::Verify { .. } => "verify",
            Command::Sweep { .. } => "sweep",
        }
    }
}

fn resolve(cli: &Cli) -> Result<Config, CliError> {
    let mut c = Config::load(cli.config.as_deref())?;
    if let Some(n) = cli.dim {
        c.dim = n;
    }
    if let Some(d) = &cli.out_dir {
        c.output_dir = d.clone();
    }
    match &cli.command {
        Command::Constants { tol, .. } => {
            if let Some(t) = tol {
                c.constants.tol = *t;
            }
        }
        Command::CorrectorTable { r_max, steps, tol } => {
            if let Some(v) = r_max {
                c.corrector.r_max = *v;
            }
            if let Some(v) = steps {
                c.corrector.steps = *v;
            }
            if let Some(v) = tol {
                c.corrector.tol = *v;
            }
        }
        Command::Project { delta, per_delta } => {
            if let Some(v) = delta {
                c.project.delta = *v;
            }
            if let Some(v) = per_delta {
                c.project.per_delta = *v;
            }
        }
        Command::Solve {
            domain,
            eps,
            inner_radius,
            outer_radius,
            bubble_radius,
            delta_init,
            per_delta,
            max_iterations,
            no_diagnostics,
            ..
        } => {
            let s = &mut c.solve;
            if let Some(v) = domain {
                s.domain = *v;
            }
            if let Some(v) = eps {
                s.eps = *v;
            }
            if let Some(v) = inner_radius {
                s.inner_radius = *v;
            }
            if let Some(v) = outer_radius {
                s.outer_radius = *v;
            }
            if bubble_radius.is_some() {
                s.bubble_radius = *bubble_radius;
            }
            if delta_init.is_some() {
                s.delta_init = *delta_init;
            }
            if let Some(v) = per_delta {
                s.per_delta = *v;
            }
            if let Some(v) = max_iterations {
                s.max_iterations = *v;
            }
            if *no_diagnostics {
                s.diagnostics = false;
            }
        }
        Command::Verify { .. } => {}
        Command::Sweep { eps } => {
            if let Some(v) = eps {
                c.sweep.eps = v.clone();
            }
        }
    }
    c.validate()?;
    Ok(c)
}

fn run(cli: &Cli) -> Result<u8, CliError> {
    let config = resolve(cli)?;
    let name = cli.command.name();
    let outcome = match &cli.command {
        Command::Constants { out, .. } => commands::constants(&config, out.clone())?,
        Command::CorrectorTable { .. } => commands::corrector_table(&config)?,
        Command::Project { .. } => commands::project(&config)?,
        Command::Solve { dry_run: true, .. } => {
            print!("{}", json_string(&commands::dry_run(&config)?));
            return Ok(0);
        }
        Command::Solve { .. } => commands::solve(&config)?,
        Command::Verify { id } => commands::verify(&config, id)?,
        Command::Sweep { .. } => commands::sweep(&config)?,
    };
    let code = if outcome.pass { 0 } else { 1 };
    let mut manifest = RunManifest::new(name, &config);
    manifest.outputs = outcome.outputs.paths();
    manifest.extra = outcome.details;
    let manifest_json = manifest.to_json(i32::from(code));
    let mut record = Outputs::new(&config.output_dir);
    record.json(&format!("manifest-{name}.json"), &manifest_json, &RunManifest::schema())?;
    for path in outcome.outputs.write()? {
        log::info!("wrote {}", path.display());
    }
    record.write()?;
    Ok(code)
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(&cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            let record = json!({"command": cli.command.name(), "error": e.kind(), "message": e.to_string()});
            eprint!("{}", json_string(&record));
            ExitCode::from(e.exit_code())
        }
    }
}
