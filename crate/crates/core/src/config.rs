//! Experiment configuration files.
//!
//! Configs are TOML. Unknown keys are rejected. A minimal file:
//!
//! ```toml
//! algorithm = "mucb"          # mucb | mdsee | agnostic_ucb
//! variant = "A"               # A | B_prime | B
//! arm_counts = [2, 2, 2]
//! horizon = 100000
//! runs = 10
//! seed = 2021
//!
//! [environment]
//! kind = "random"             # random | explicit | counterexample
//! mean_range = [0.1, 0.9]
//! std_range = [0.0, 0.03]
//! ```
//!
//! Optional keys: `reward_model` (`"iid"` or `"markov"`), `k_schedule`
//! (`"identity"`, `"ceil_log2"` or `{ custom = [..] }`), `checkpoint_grid`
//! (`"default"` or an explicit list of rounds), `allow_negative_result`,
//! `output_path`.

use std::path::PathBuf;

use serde::{Deserialize, Serialize};

use crate::arm_space::{ArmSpace, ArmTuple, KSchedule};
use crate::environment::{
    build_counterexample, ChainSpec, Environment, IidEnv, MarkovEnv, RewardDist,
};
use crate::error::{Error, Result};
use crate::rng;
use crate::scalar::Scalar;
use crate::simulator::{check_compatibility, default_grid, Algorithm, ProblemVariant, RewardModel};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub algorithm: Algorithm,
    pub variant: ProblemVariant,
    #[serde(default)]
    pub reward_model: RewardModel,
    pub arm_counts: Vec<usize>,
    pub horizon: u64,
    pub runs: u64,
    pub seed: u64,
    pub environment: EnvironmentSpec,
    #[serde(default = "default_k_schedule")]
    pub k_schedule: KSchedule,
    #[serde(default)]
    pub checkpoint_grid: GridSpec,
    #[serde(default)]
    pub allow_negative_result: bool,
    #[serde(default = "default_output_path")]
    pub output_path: PathBuf,
}

fn default_k_schedule() -> KSchedule {
    KSchedule::Identity
}

fn default_output_path() -> PathBuf {
    PathBuf::from("results.csv")
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum EnvironmentSpec {
    /// Gaussian arms with random means and standard deviations, drawn once
    /// per experiment from `seed` (the experiment seed when absent).
    Random {
        mean_range: [f64; 2],
        std_range: [f64; 2],
        #[serde(default, skip_serializing_if = "Option::is_none")]
        seed: Option<u64>,
    },
    /// One entry per tuple.
    Explicit { arms: Vec<ArmEntry> },
    /// The fixed two-player lock-in environment.
    Counterexample,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum ArmEntry {
    Gaussian {
        tuple: ArmTuple,
        mean: f64,
        std: f64,
    },
    Uniform {
        tuple: ArmTuple,
        center: f64,
        half_width: f64,
    },
    Markov {
        tuple: ArmTuple,
        rewards: Vec<f64>,
        transition: Vec<Vec<f64>>,
        #[serde(default)]
        initial_state: usize,
    },
}

impl ArmEntry {
    pub fn tuple(&self) -> &ArmTuple {
        match self {
            ArmEntry::Gaussian { tuple, .. }
            | ArmEntry::Uniform { tuple, .. }
            | ArmEntry::Markov { tuple, .. } => tuple,
        }
    }

    fn is_markov(&self) -> bool {
        matches!(self, ArmEntry::Markov { .. })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GridName {
    Default,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum GridSpec {
    Named(GridName),
    Explicit(Vec<u64>),
}

impl Default for GridSpec {
    fn default() -> Self {
        GridSpec::Named(GridName::Default)
    }
}

fn invalid(key: &str, constraint: impl std::fmt::Display) -> Error {
    Error::Config(format!("`{key}`: {constraint}"))
}

/// Parses and validates a config file.
pub fn parse_config(bytes: &[u8]) -> Result<ExperimentConfig> {
    let text = std::str::from_utf8(bytes)
        .map_err(|e| Error::Config(format!("config is not valid UTF-8: {e}")))?;
    let config: ExperimentConfig =
        toml::from_str(text).map_err(|e| Error::Config(e.to_string().trim_end().to_string()))?;
    config.validate()?;
    Ok(config)
}

impl ExperimentConfig {
    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    pub fn space(&self) -> Result<ArmSpace> {
        ArmSpace::new(self.arm_counts.clone()).map_err(|e| invalid("arm_counts", e))
    }

    pub fn validate(&self) -> Result<()> {
        if self.runs == 0 {
            return Err(invalid("runs", "runs must be ≥ 1"));
        }
        if self.horizon == 0 {
            return Err(invalid("horizon", "horizon must be ≥ 1"));
        }
        let space = self.space()?;
        check_compatibility(
            self.algorithm,
            self.variant,
            self.reward_model,
            self.allow_negative_result,
        )?;
        self.k_schedule
            .validate()
            .map_err(|e| invalid("k_schedule", e))?;

        if let GridSpec::Explicit(points) = &self.checkpoint_grid {
            if points.is_empty() {
                return Err(invalid(
                    "checkpoint_grid",
                    "explicit grid must not be empty",
                ));
            }
            if points.windows(2).any(|w| w[0] >= w[1]) {
                return Err(invalid(
                    "checkpoint_grid",
                    "rounds must be strictly increasing",
                ));
            }
            if points[0] == 0 || *points.last().unwrap() > self.horizon {
                return Err(invalid(
                    "checkpoint_grid",
                    format!("rounds must lie in 1..={}", self.horizon),
                ));
            }
        }

        match &self.environment {
            EnvironmentSpec::Counterexample => {
                if self.arm_counts != [2, 2] {
                    return Err(invalid(
                        "arm_counts",
                        "the counterexample environment requires arm_counts = [2, 2]",
                    ));
                }
                if self.variant != ProblemVariant::BPrime {
                    return Err(invalid(
                        "variant",
                        "the counterexample environment requires variant = \"B_prime\"",
                    ));
                }
                if self.reward_model != RewardModel::Iid {
                    return Err(invalid(
                        "reward_model",
                        "the counterexample environment is iid",
                    ));
                }
            }
            EnvironmentSpec::Random {
                mean_range,
                std_range,
                ..
            } => {
                if self.reward_model == RewardModel::Markov {
                    return Err(invalid(
                        "environment.kind",
                        "markov rewards need an explicit list of chains",
                    ));
                }
                if !(mean_range[0] <= mean_range[1]) {
                    return Err(invalid("environment.mean_range", "low must be <= high"));
                }
                if !(0.0 <= std_range[0] && std_range[0] <= std_range[1]) {
                    return Err(invalid("environment.std_range", "need 0 <= low <= high"));
                }
            }
            EnvironmentSpec::Explicit { arms } => {
                let markov = self.reward_model == RewardModel::Markov;
                if let Some(bad) = arms.iter().find(|a| a.is_markov() != markov) {
                    return Err(invalid(
                        "environment.arms",
                        format!(
                            "tuple {} does not match reward_model = {:?}",
                            bad.tuple(),
                            self.reward_model
                        ),
                    ));
                }
                for a in arms {
                    space
                        .rank_of(a.tuple().components())
                        .map_err(|e| invalid("environment.arms", e))?;
                }
            }
        }
        // builds and validates distributions and chains
        self.build_environment::<f64>()?;
        Ok(())
    }

    /// Checkpoint rounds for this experiment.
    pub fn grid(&self) -> Vec<u64> {
        match &self.checkpoint_grid {
            GridSpec::Named(GridName::Default) => default_grid(self.horizon),
            GridSpec::Explicit(points) => points.clone(),
        }
    }

    /// The single environment realization all runs share.
    pub fn build_environment<F: Scalar>(&self) -> Result<Environment<F>> {
        let space = self.space()?;
        let f = F::from_f64_lossy;
        let env = match &self.environment {
            EnvironmentSpec::Counterexample => build_counterexample::<F>().into(),
            EnvironmentSpec::Random {
                mean_range,
                std_range,
                seed,
            } => {
                let mut stream =
                    rng::substream(seed.unwrap_or(self.seed), &[rng::kind::ENVIRONMENT]);
                IidEnv::random_gaussian(
                    space,
                    (f(mean_range[0]), f(mean_range[1])),
                    (f(std_range[0]), f(std_range[1])),
                    &mut stream,
                )
                .map_err(|e| invalid("environment", e))?
                .into()
            }
            EnvironmentSpec::Explicit { arms } if self.reward_model == RewardModel::Markov => {
                let entries = arms
                    .iter()
                    .map(|a| match a {
                        ArmEntry::Markov {
                            tuple,
                            rewards,
                            transition,
                            initial_state,
                        } => Ok((
                            tuple.clone(),
                            ChainSpec {
                                rewards: rewards.iter().map(|&r| f(r)).collect(),
                                transition: transition
                                    .iter()
                                    .map(|row| row.iter().map(|&p| f(p)).collect())
                                    .collect(),
                                initial_state: *initial_state,
                            },
                        )),
                        other => Err(invalid(
                            "environment.arms",
                            format!("tuple {} is not a markov entry", other.tuple()),
                        )),
                    })
                    .collect::<Result<Vec<_>>>()?;
                MarkovEnv::new(space, entries)
                    .map_err(|e| invalid("environment.arms", e))?
                    .into()
            }
            EnvironmentSpec::Explicit { arms } => {
                let entries = arms
                    .iter()
                    .map(|a| match *a {
                        ArmEntry::Gaussian {
                            ref tuple,
                            mean,
                            std,
                        } => Ok((tuple.clone(), RewardDist::gaussian(f(mean), f(std)))),
                        ArmEntry::Uniform {
                            ref tuple,
                            center,
                            half_width,
                        } => Ok((tuple.clone(), RewardDist::uniform(f(center), f(half_width)))),
                        ArmEntry::Markov { ref tuple, .. } => Err(invalid(
                            "environment.arms",
                            format!("tuple {tuple} is a markov entry under iid rewards"),
                        )),
                    })
                    .collect::<Result<Vec<_>>>()?;
                IidEnv::new(space, entries)
                    .map_err(|e| invalid("environment.arms", e))?
                    .into()
            }
        };
        Ok(env)
    }
}
