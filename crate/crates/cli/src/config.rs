//! The declarative run file (TOML). Every table and key is optional; missing
//! values take the defaults below, and command-line flags override the file.

use std::path::{Path, PathBuf};

use nbubble_core::experiments::ExperimentConfig;
use nbubble_core::solver::SolveConfig;
use nbubble_core::{Dimension, DomainSpec};
use serde::{Deserialize, Serialize};

use crate::CliError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Config {
    pub dim: u32,
    pub output_dir: PathBuf,
    pub constants: ConstantsSection,
    pub corrector: CorrectorSection,
    pub project: ProjectSection,
    pub experiments: ExperimentsSection,
    pub solve: SolveSection,
    pub sweep: SweepSection,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ConstantsSection {
    pub tol: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CorrectorSection {
    pub r_max: f64,
    pub steps: usize,
    pub tol: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ProjectSection {
    pub delta: f64,
    pub per_delta: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentsSection {
    pub per_delta: f64,
    pub quad_tol: f64,
    /// Replaces every experiment's default sweep when present.
    pub deltas: Option<Vec<f64>>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum DomainChoice {
    Ball,
    Annulus,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SolveSection {
    pub domain: DomainChoice,
    pub eps: f64,
    pub inner_radius: f64,
    pub outer_radius: f64,
    /// Defaults to the outer radius for ε > 0 and the inner one for ε < 0.
    pub bubble_radius: Option<f64>,
    pub delta_init: Option<f64>,
    pub per_delta: f64,
    pub tol: f64,
    pub max_iterations: usize,
    pub diagnostics: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SweepSection {
    pub eps: Vec<f64>,
}

impl Default for Config {
    fn default() -> Self {
        Config {
            dim: 4,
            output_dir: PathBuf::from("nbubble-out"),
            constants: ConstantsSection { tol: 1e-10 },
            corrector: CorrectorSection { r_max: 8.0, steps: 64, tol: 1e-10 },
            project: ProjectSection { delta: 0.05, per_delta: 10.0 },
            experiments: ExperimentsSection { per_delta: 10.0, quad_tol: 1e-9, deltas: None },
            solve: SolveSection {
                domain: DomainChoice::Ball,
                eps: 0.05,
                inner_radius: 0.5,
                outer_radius: 1.0,
                bubble_radius: None,
                delta_init: None,
                per_delta: 12.0,
                tol: 1e-10,
                max_iterations: 40,
                diagnostics: true,
            },
            sweep: SweepSection { eps: vec![0.1, 0.07, 0.05, 0.035, 0.025] },
        }
    }
}

impl Default for ConstantsSection {
    fn default() -> Self {
        Config::default().constants
    }
}
impl Default for CorrectorSection {
    fn default() -> Self {
        Config::default().corrector
    }
}
impl Default for ProjectSection {
    fn default() -> Self {
        Config::default().project
    }
}
impl Default for ExperimentsSection {
    fn default() -> Self {
        Config::default().experiments
    }
}
impl Default for SolveSection {
    fn default() -> Self {
        Config::default().solve
    }
}
impl Default for SweepSection {
    fn default() -> Self {
        Config::default().sweep
    }
}

impl Config {
    pub fn load(path: Option<&Path>) -> Result<Self, CliError> {
        let Some(path) = path else {
            return Ok(Config::default());
        };
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Usage(format!("cannot read config {}: {e}", path.display())))?;
        toml::from_str(&text).map_err(|e| CliError::Usage(format!("config {}: {e}", path.display())))
    }

    pub fn dimension(&self) -> Result<Dimension, CliError> {
        Dimension::new(self.dim).map_err(|e| CliError::Usage(e.to_string()))
    }

    /// Checks everything that does not need a computation, so that a bad file
    /// fails before any output is written.
    pub fn validate(&self) -> Result<(), CliError> {
        self.dimension()?;
        let positive = |name: &str, v: f64| {
            if v > 0.0 && v.is_finite() {
                Ok(())
            } else {
                Err(CliError::Usage(format!("{name} must be a positive number")))
            }
        };
        positive("constants.tol", self.constants.tol)?;
        positive("corrector.r_max", self.corrector.r_max)?;
        positive("corrector.tol", self.corrector.tol)?;
        if self.corrector.steps < 2 {
            return Err(CliError::Usage("corrector.steps must be at least 2".into()));
        }
        positive("project.delta", self.project.delta)?;
        positive("project.per_delta", self.project.per_delta)?;
        positive("experiments.quad_tol", self.experiments.quad_tol)?;
        positive("solve.tol", self.solve.tol)?;
        if self.sweep.eps.is_empty() || self.sweep.eps.iter().any(|e| !(*e > 0.0 && *e < 1.0)) {
            return Err(CliError::Usage("sweep.eps must be a non-empty list in (0, 1)".into()));
        }
        Ok(())
    }

    pub fn experiment_config(&self, id: nbubble_core::experiments::ExperimentId) -> Result<ExperimentConfig, CliError> {
        let mut cfg = ExperimentConfig::new(id, self.dimension()?);
        cfg.per_delta = self.experiments.per_delta;
        cfg.quad_tol = self.experiments.quad_tol;
        if let Some(d) = &self.experiments.deltas {
            cfg.deltas = d.clone();
        }
        cfg.validate().map_err(|e| CliError::Usage(format!("experiments: {e}")))?;
        Ok(cfg)
    }

    pub fn solve_config(&self) -> Result<SolveConfig, CliError> {
        let dim = self.dimension()?;
        let s = &self.solve;
        let usage = |e: nbubble_core::Error| CliError::Usage(format!("solve: {e}"));
        let domain = match s.domain {
            DomainChoice::Ball => DomainSpec::ball(dim),
            DomainChoice::Annulus => {
                let radius = s.bubble_radius.unwrap_or(if s.eps < 0.0 { s.inner_radius } else { s.outer_radius });
                DomainSpec::annulus(dim, s.inner_radius, s.outer_radius, radius).map_err(usage)?
            }
        };
        let mut cfg = SolveConfig::new(domain, s.eps);
        cfg.delta_init = s.delta_init;
        cfg.per_delta = s.per_delta;
        cfg.newton.tol = s.tol;
        cfg.newton.max_iterations = s.max_iterations;
        cfg.validate().map_err(usage)?;
        Ok(cfg)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_file_is_the_default() {
        let c: Config = toml::from_str("").unwrap();
        assert_eq!(c, Config::default());
        c.validate().unwrap();
    }

    #[test]
    fn partial_tables_keep_other_defaults() {
        let c: Config = toml::from_str("dim = 5\n[solve]\neps = 0.1\n").unwrap();
        assert_eq!(c.dim, 5);
        assert_eq!(c.solve.eps, 0.1);
        assert_eq!(c.solve.per_delta, 12.0);
    }

    #[test]
    fn unknown_keys_are_rejected() {
        assert!(toml::from_str::<Config>("[solve]\nepsilon = 0.1\n").is_err());
    }

    #[test]
    fn sign_pairing_guard() {
        let mut c = Config::default();
        c.solve.domain = DomainChoice::Annulus;
        c.solve.bubble_radius = Some(0.5);
        assert!(matches!(c.solve_config(), Err(CliError::Usage(_))));
        c.solve.eps = -0.05;
        assert!(c.solve_config().is_ok());
    }
}
