//! Run configuration, graph ingestion and the adversary mini-language.

use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use coopbandit::sim::{AdversaryError, LossOracle, Setting};
use coopbandit::{Graph, GraphError};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read {path}: {source}")]
    Read {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("{path}: {source}")]
    Graph { path: PathBuf, source: GraphError },
    #[error("invalid adversary spec {spec:?}: {reason}")]
    AdversarySpec { spec: String, reason: String },
    #[error("{path}: {reason}")]
    MatrixFile { path: PathBuf, reason: String },
    #[error(transparent)]
    Adversary(#[from] AdversaryError),
    #[error("at least 2 arms are required, got {0}")]
    ArmsTooFew(usize),
    #[error("horizon must be at least 1")]
    ZeroHorizon,
    #[error("--seeds must be at least 1")]
    NoSeeds,
    #[error("the uninformed setting needs --nbar")]
    MissingNBar,
    #[error("n_bar = {n_bar} is smaller than the graph's {nodes} nodes")]
    NBarTooSmall { n_bar: usize, nodes: usize },
    #[error("adversary defines {adversary} arms but --arms is {arms}")]
    ArmsMismatch { adversary: usize, arms: usize },
}

pub fn load_graph(path: &Path) -> Result<Graph, ConfigError> {
    let text = fs::read_to_string(path).map_err(|source| ConfigError::Read {
        path: path.to_owned(),
        source,
    })?;
    text.parse().map_err(|source| ConfigError::Graph {
        path: path.to_owned(),
        source,
    })
}

/// Parsed `--adversary` value.
#[derive(Debug, Clone, PartialEq)]
pub enum AdversarySpec {
    /// `bernoulli:0.4,0.5,0.5`
    Bernoulli(Vec<f64>),
    /// `matrix:path.csv`, one row of `K` losses per step.
    Matrix(PathBuf),
    /// `switch:arm0@0,arm3@50000`
    Switch(Vec<(u64, usize)>),
}

impl FromStr for AdversarySpec {
    type Err = ConfigError;

    fn from_str(spec: &str) -> Result<Self, Self::Err> {
        let bad = |reason: String| ConfigError::AdversarySpec {
            spec: spec.to_owned(),
            reason,
        };
        let (kind, body) = spec
            .split_once(':')
            .ok_or_else(|| bad("expected `kind:parameters`".into()))?;
        match kind {
            "bernoulli" => body
                .split(',')
                .map(|m| {
                    m.trim()
                        .parse::<f64>()
                        .map_err(|e| bad(format!("mean {m:?}: {e}")))
                })
                .collect::<Result<Vec<_>, _>>()
                .map(AdversarySpec::Bernoulli),
            "matrix" if !body.is_empty() => Ok(AdversarySpec::Matrix(PathBuf::from(body))),
            "matrix" => Err(bad("missing CSV path".into())),
            "switch" => body
                .split(',')
                .map(|piece| {
                    let (arm, start) = piece
                        .trim()
                        .split_once('@')
                        .ok_or_else(|| bad(format!("{piece:?} is not `armI@STEP`")))?;
                    let arm = arm
                        .strip_prefix("arm")
                        .and_then(|a| a.parse::<usize>().ok())
                        .ok_or_else(|| bad(format!("{arm:?} is not `armI`")))?;
                    let start = start
                        .parse::<u64>()
                        .map_err(|e| bad(format!("step {start:?}: {e}")))?;
                    Ok((start, arm))
                })
                .collect::<Result<Vec<_>, _>>()
                .map(AdversarySpec::Switch),
            other => Err(bad(format!(
                "unknown kind {other:?}; use bernoulli, matrix or switch"
            ))),
        }
    }
}

impl fmt::Display for AdversarySpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            AdversarySpec::Bernoulli(means) => {
                let means: Vec<String> = means.iter().map(f64::to_string).collect();
                write!(f, "bernoulli:{}", means.join(","))
            }
            AdversarySpec::Matrix(path) => write!(f, "matrix:{}", path.display()),
            AdversarySpec::Switch(schedule) => {
                let parts: Vec<String> = schedule
                    .iter()
                    .map(|(start, arm)| format!("arm{arm}@{start}"))
                    .collect();
                write!(f, "switch:{}", parts.join(","))
            }
        }
    }
}

fn read_matrix(path: &Path) -> Result<Vec<Vec<f64>>, ConfigError> {
    let text = fs::read_to_string(path).map_err(|source| ConfigError::Read {
        path: path.to_owned(),
        source,
    })?;
    text.lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty() && !l.trim_start().starts_with('#'))
        .map(|(i, line)| {
            line.split(',')
                .map(|x| {
                    x.trim().parse::<f64>().map_err(|e| ConfigError::MatrixFile {
                        path: path.to_owned(),
                        reason: format!("line {}: {x:?}: {e}", i + 1),
                    })
                })
                .collect()
        })
        .collect()
}

impl AdversarySpec {
    /// Builds the oracle for one run; only Bernoulli losses use `seed`.
    pub fn build(&self, arms: usize, seed: u64) -> Result<LossOracle, ConfigError> {
        let oracle = match self {
            AdversarySpec::Bernoulli(means) => LossOracle::bernoulli(means.clone(), seed)?,
            AdversarySpec::Matrix(path) => LossOracle::matrix(read_matrix(path)?)?,
            AdversarySpec::Switch(schedule) => LossOracle::switching(arms, schedule.clone())?,
        };
        if oracle.arms() != arms {
            return Err(ConfigError::ArmsMismatch {
                adversary: oracle.arms(),
                arms,
            });
        }
        Ok(oracle)
    }
}

/// Everything a `simulate` sweep needs, validated against the loaded graph.
#[derive(Debug, Clone)]
pub struct RunConfig {
    pub graph_path: PathBuf,
    pub arms: usize,
    pub horizon: u64,
    pub setting: Setting,
    pub adversary: AdversarySpec,
    pub seeds: usize,
    pub adversary_seed: u64,
    pub policy_seed: u64,
    pub out: Option<PathBuf>,
    pub log: Option<PathBuf>,
    pub debug_invariants: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum SettingName {
    Informed,
    Uninformed,
}

/// Combines `--setting` with the optional `--nbar`.
pub fn setting_from_flags(name: SettingName, n_bar: Option<usize>) -> Result<Setting, ConfigError> {
    match (name, n_bar) {
        (SettingName::Uninformed, Some(n_bar)) => Ok(Setting::Uninformed { n_bar }),
        (SettingName::Uninformed, None) => Err(ConfigError::MissingNBar),
        (SettingName::Informed, _) => Ok(Setting::Informed),
    }
}

pub fn check_run_shape(
    g: &Graph,
    arms: usize,
    horizon: u64,
    setting: Setting,
) -> Result<(), ConfigError> {
    if arms < 2 {
        return Err(ConfigError::ArmsTooFew(arms));
    }
    if horizon == 0 {
        return Err(ConfigError::ZeroHorizon);
    }
    if let Setting::Uninformed { n_bar } = setting {
        if n_bar < g.node_count() {
            return Err(ConfigError::NBarTooSmall {
                n_bar,
                nodes: g.node_count(),
            });
        }
    }
    Ok(())
}

impl RunConfig {
    pub fn validate(&self, g: &Graph) -> Result<(), ConfigError> {
        check_run_shape(g, self.arms, self.horizon, self.setting)?;
        if self.seeds == 0 {
            return Err(ConfigError::NoSeeds);
        }
        Ok(())
    }

    /// Adversary seed of sweep index `i`.
    pub fn adversary_seed_at(&self, i: usize) -> u64 {
        self.adversary_seed.wrapping_add(i as u64)
    }

    /// Policy seed of sweep index `i`.
    pub fn policy_seed_at(&self, i: usize) -> u64 {
        self.policy_seed.wrapping_add(i as u64)
    }
}
