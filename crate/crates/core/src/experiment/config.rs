//! TOML experiment configuration.
//!
//! ```toml
//! horizon = 20000
//! q = 0.2
//! seeds = [1, 2, 3, 4, 5]
//! output = "out/pd-compare"
//! mode = "undirected"          # needed by graph generators
//!
//! [instance]
//! case = "cases/ieee39_undirected.case"
//!
//! [graph]
//! kind = "case"                # case | file | ieee39 | ring | random
//!
//! [[algorithm]]
//! id = "pd1"
//! step = 0.01
//! xi = 0.05
//! n_hat = 39
//!
//! [[algorithm]]
//! id = "pd2"
//! step = { a = 1.0, b = 100.0 }
//! xi = 0.05
//! ```
//!
//! Relative paths are resolved against the directory of the config file.

use std::collections::HashSet;
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::generate::InstanceSpec;
use crate::algorithms::AlgorithmId;
use crate::error::{Error, Result};
use crate::network::Mode;
use crate::oracle::DEFAULT_BALANCE_TOL;
use crate::problem::{AlgorithmParams, StepSize};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub horizon: usize,
    #[serde(default)]
    pub q: f64,
    pub seeds: Vec<u64>,
    pub output: PathBuf,
    #[serde(default)]
    pub mode: Option<Mode>,
    /// Power-balance tolerance of the reference solver.
    #[serde(default = "default_tol")]
    pub oracle_tol: f64,
    pub instance: InstanceSource,
    pub graph: GraphSource,
    #[serde(rename = "algorithm")]
    pub algorithms: Vec<AlgorithmConfig>,
}

fn default_tol() -> f64 {
    DEFAULT_BALANCE_TOL
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InstanceSource {
    /// Case file holding the instance (and possibly the graph).
    #[serde(default)]
    pub case: Option<PathBuf>,
    /// Random instance recipe, drawn once per run seed unless `seed` is set.
    #[serde(default)]
    pub random: Option<InstanceSpec>,
    #[serde(default)]
    pub seed: Option<u64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
pub enum GraphSource {
    /// The graph section of the instance case file.
    Case,
    File {
        path: PathBuf,
    },
    /// The 39-bus transmission topology (oriented when `mode` is directed).
    Ieee39,
    Ring,
    Random {
        #[serde(default)]
        extra: usize,
        #[serde(default)]
        seed: u64,
    },
}

/// Stepsize as written in the config: a number or `{ a, b }`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum StepConfig {
    Constant(f64),
    Diminishing { a: f64, b: f64 },
}

impl Default for StepConfig {
    fn default() -> Self {
        StepConfig::Diminishing { a: 1.0, b: 100.0 }
    }
}

impl From<StepConfig> for StepSize<f64> {
    fn from(s: StepConfig) -> Self {
        match s {
            StepConfig::Constant(s) => StepSize::Constant(s),
            StepConfig::Diminishing { a, b } => StepSize::Diminishing { a, b },
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AlgorithmConfig {
    pub id: AlgorithmId,
    /// Output subdirectory; defaults to the algorithm id.
    #[serde(default)]
    pub label: Option<String>,
    /// Defaults to `a / (k + b)` with `a = 1`, `b = 100`.
    #[serde(default)]
    pub step: StepConfig,
    pub xi: f64,
    /// Defaults to the number of agents.
    #[serde(default)]
    pub n_hat: Option<f64>,
    #[serde(default = "default_gamma")]
    pub gamma: f64,
}

fn default_gamma() -> f64 {
    0.9
}

impl AlgorithmConfig {
    pub fn label(&self) -> String {
        self.label.clone().unwrap_or_else(|| self.id.to_string())
    }

    pub fn params(&self, n: usize, horizon: usize) -> AlgorithmParams<f64> {
        AlgorithmParams {
            step: self.step.into(),
            xi: self.xi,
            n_hat: self.n_hat.unwrap_or(n as f64),
            gamma: self.gamma,
            horizon,
        }
    }
}

impl ExperimentConfig {
    pub fn parse(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }

    /// Reads a config and resolves its relative paths against the file's
    /// directory.
    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        let mut cfg = Self::parse(&text)?;
        let base = path.parent().unwrap_or(Path::new(""));
        cfg.rebase(base);
        Ok(cfg)
    }

    pub fn rebase(&mut self, base: &Path) {
        let fix = |p: &mut PathBuf| {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        };
        fix(&mut self.output);
        if let Some(case) = self.instance.case.as_mut() {
            fix(case);
        }
        if let GraphSource::File { path } = &mut self.graph {
            fix(path);
        }
    }

    /// Structural checks that do not need to touch the filesystem.
    pub fn validate(&self) -> Result<()> {
        if self.seeds.is_empty() {
            return Err(Error::Config("seed list is empty".into()));
        }
        if !(0.0..1.0).contains(&self.q) {
            return Err(Error::Config(format!("q = {} must lie in [0, 1)", self.q)));
        }
        if !(self.oracle_tol > 0.0) {
            return Err(Error::Config(format!(
                "oracle_tol = {} must be positive",
                self.oracle_tol
            )));
        }
        match (&self.instance.case, &self.instance.random) {
            (Some(_), None) => {}
            (None, Some(spec)) => spec.validate()?,
            _ => {
                return Err(Error::Config(
                    "[instance] needs exactly one of `case` or `random`".into(),
                ))
            }
        }
        if self.graph == GraphSource::Case && self.instance.case.is_none() {
            return Err(Error::Config("graph kind \"case\" needs an instance case file".into()));
        }
        let generated = matches!(
            self.graph,
            GraphSource::Ieee39 | GraphSource::Ring | GraphSource::Random { .. }
        );
        if generated && self.mode.is_none() {
            return Err(Error::Config("generated graphs need a top-level `mode`".into()));
        }
        if self.algorithms.is_empty() {
            return Err(Error::Config("no [[algorithm]] entries".into()));
        }
        let mut labels = HashSet::new();
        for alg in &self.algorithms {
            let label = alg.label();
            if label.is_empty() || label.contains(['/', '\\']) || label == "." || label == ".." {
                return Err(Error::Config(format!("label '{label}' is not a valid directory name")));
            }
            if !labels.insert(label.clone()) {
                return Err(Error::Config(format!("duplicate algorithm label '{label}'")));
            }
            alg.params(1, self.horizon)
                .validate()
                .map_err(|e| Error::Config(format!("algorithm '{label}': {e}")))?;
            if let (Some(mode), Some(needed)) = (self.mode, alg.id.mode()) {
                if mode != needed {
                    return Err(Error::Config(format!(
                        "algorithm '{label}' ({}) needs a {needed} graph but mode is {mode}",
                        alg.id
                    )));
                }
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = r#"
        horizon = 10
        seeds = [1, 2]
        output = "out"
        mode = "undirected"
        [instance.random]
        n = 4
        [graph]
        kind = "ring"
        [[algorithm]]
        id = "pd1"
        step = 0.01
        xi = 0.05
        [[algorithm]]
        id = "pd2"
        label = "slow"
        xi = 0.05
    "#;

    #[test]
    fn parses_and_validates() {
        let cfg = ExperimentConfig::parse(MINIMAL).unwrap();
        cfg.validate().unwrap();
        assert_eq!(cfg.algorithms[0].step, StepConfig::Constant(0.01));
        assert_eq!(cfg.algorithms[1].step, StepConfig::Diminishing { a: 1.0, b: 100.0 });
        assert_eq!(cfg.algorithms[1].label(), "slow");
        assert_eq!(cfg.algorithms[0].params(4, 10).n_hat, 4.0);
        assert_eq!(cfg.instance.random.as_ref().unwrap().n, 4);
        assert_eq!(cfg.instance.random.as_ref().unwrap().a, [0.1, 1.0]);
    }

    #[test]
    fn empty_seeds_rejected() {
        let cfg = ExperimentConfig::parse(&MINIMAL.replace("[1, 2]", "[]")).unwrap();
        assert!(matches!(cfg.validate(), Err(Error::Config(msg)) if msg.contains("seed")));
    }

    #[test]
    fn mode_mismatch_rejected() {
        let cfg = ExperimentConfig::parse(&MINIMAL.replace("id = \"pd1\"", "id = \"robust\"")).unwrap();
        assert!(cfg.validate().is_err());
    }

    #[test]
    fn unknown_keys_rejected() {
        assert!(ExperimentConfig::parse(&format!("{MINIMAL}\nbogus = 1\n")).is_err());
    }

    #[test]
    fn relative_paths_follow_config_dir() {
        let mut cfg = ExperimentConfig::parse(MINIMAL).unwrap();
        cfg.rebase(Path::new("/etc/exp"));
        assert_eq!(cfg.output, PathBuf::from("/etc/exp/out"));
    }
}
