//! Experiment configuration and its flat TOML file form.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::corruption::RandomizedResponseScheme;
use crate::environment::CorruptBanditModel;
use crate::error::{Error, Result};
use crate::policies::PolicyKind;

use super::presets::preset;

pub const DEFAULT_REPLICATIONS: u64 = 100;
pub const DEFAULT_SEED: u64 = 42;
pub const DEFAULT_CHECKPOINT_COUNT: usize = 50;

/// The privacy levels of the epsilon sweep.
pub const DEFAULT_EPSILONS: [f64; 7] = [0.125, 0.25, 0.5, 1.0, 2.0, 4.0, 8.0];

/// Reward means and per-arm corruption.
#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub name: String,
    pub reward_means: Vec<f64>,
    pub schemes: Vec<RandomizedResponseScheme>,
}

impl Scenario {
    pub fn model(&self) -> Result<CorruptBanditModel> {
        CorruptBanditModel::new(self.reward_means.clone(), self.schemes.clone())
    }

    /// Same reward means with one scheme on every arm.
    pub fn with_uniform_scheme(&self, scheme: RandomizedResponseScheme) -> Scenario {
        Scenario {
            name: self.name.clone(),
            reward_means: self.reward_means.clone(),
            schemes: vec![scheme; self.reward_means.len()],
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub scenario: Scenario,
    pub policies: Vec<PolicyKind>,
    pub horizon: u64,
    pub replications: u64,
    pub master_seed: u64,
    pub checkpoints: Vec<u64>,
    pub epsilon_sweep: Option<Vec<f64>>,
}

impl ExperimentConfig {
    /// A config with default replications, seed and checkpoints.
    pub fn new(scenario: Scenario, policies: Vec<PolicyKind>, horizon: u64) -> Result<Self> {
        let config = Self {
            scenario,
            policies,
            horizon,
            replications: DEFAULT_REPLICATIONS,
            master_seed: DEFAULT_SEED,
            checkpoints: default_checkpoints(horizon),
            epsilon_sweep: None,
        };
        config.validate()?;
        Ok(config)
    }

    pub fn validate(&self) -> Result<()> {
        self.scenario.model()?;
        if self.policies.is_empty() {
            return Err(Error::Config("no policies given".into()));
        }
        if self.horizon == 0 {
            return Err(Error::Config("horizon must be positive".into()));
        }
        if self.replications == 0 {
            return Err(Error::Config("replications must be positive".into()));
        }
        if self.checkpoints.is_empty() {
            return Err(Error::Config("checkpoint list is empty".into()));
        }
        if self.checkpoints[0] == 0 || self.checkpoints.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::Config(
                "checkpoints must be positive and strictly increasing".into(),
            ));
        }
        if *self.checkpoints.last().unwrap() > self.horizon {
            return Err(Error::Config("last checkpoint exceeds the horizon".into()));
        }
        if let Some(eps) = &self.epsilon_sweep {
            if eps.is_empty() {
                return Err(Error::Config("epsilon sweep is empty".into()));
            }
            if let Some(&bad) = eps.iter().find(|e| !e.is_finite() || **e <= 0.0) {
                return Err(Error::domain("epsilon", bad));
            }
        }
        Ok(())
    }
}

/// 50 logarithmically spaced checkpoints `round(T^(i/50))`, deduplicated,
/// always ending at `T`.
pub fn default_checkpoints(horizon: u64) -> Vec<u64> {
    if horizon == 0 {
        return Vec::new();
    }
    let log_t = (horizon as f64).ln();
    let n = DEFAULT_CHECKPOINT_COUNT;
    let mut points: Vec<u64> = (1..=n)
        .map(|i| ((log_t * i as f64 / n as f64).exp().round() as u64).clamp(1, horizon))
        .collect();
    points.push(horizon);
    points.dedup();
    points
}

/// Keys of the config file. Every key is optional; command-line flags take
/// precedence over file values.
///
/// ```toml
/// preset = "main"                     # or `means` (+ optional `schemes`)
/// means = [0.9, 0.8]
/// schemes = [[0.6, 0.6], [0.9, 0.9]]  # [p00, p11] per arm; identity if absent
/// policies = ["klucb-cf", "ts-cf"]
/// horizon = 100000
/// reps = 100
/// seed = 42
/// checkpoints = [10, 100, 1000]       # default: 50 log-spaced points + horizon
/// eps = [0.125, 0.25, 0.5, 1, 2, 4, 8]
/// out = "results.csv"
/// ```
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigFile {
    pub preset: Option<String>,
    pub means: Option<Vec<f64>>,
    pub schemes: Option<Vec<[f64; 2]>>,
    pub policies: Option<Vec<String>>,
    pub horizon: Option<u64>,
    pub reps: Option<u64>,
    pub seed: Option<u64>,
    pub checkpoints: Option<Vec<u64>>,
    pub eps: Option<Vec<f64>>,
    pub out: Option<PathBuf>,
}

impl ConfigFile {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|source| Error::Io {
            path: path.to_path_buf(),
            source,
        })?;
        Self::parse(&text).map_err(|e| match e {
            Error::Config(msg) => Error::Config(format!("{}: {msg}", path.display())),
            other => other,
        })
    }

    pub fn parse(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }

    /// Fields set in `overrides` replace those in `self`. Overriding the
    /// scenario in either form (preset or means) drops the other form.
    pub fn overridden_by(self, overrides: ConfigFile) -> ConfigFile {
        let scenario_overridden = overrides.preset.is_some() || overrides.means.is_some();
        let (preset, means, schemes) = if scenario_overridden {
            (overrides.preset, overrides.means, overrides.schemes)
        } else {
            (self.preset, self.means, overrides.schemes.or(self.schemes))
        };
        ConfigFile {
            preset,
            means,
            schemes,
            policies: overrides.policies.or(self.policies),
            horizon: overrides.horizon.or(self.horizon),
            reps: overrides.reps.or(self.reps),
            seed: overrides.seed.or(self.seed),
            checkpoints: overrides.checkpoints.or(self.checkpoints),
            eps: overrides.eps.or(self.eps),
            out: overrides.out.or(self.out),
        }
    }

    pub fn scenario(&self) -> Result<Scenario> {
        match (&self.preset, &self.means) {
            (Some(_), Some(_)) => Err(Error::Config("give either `preset` or `means`, not both".into())),
            (Some(_), None) if self.schemes.is_some() => Err(Error::Config(
                "`schemes` requires `means`; presets carry their own".into(),
            )),
            (Some(name), None) => Ok(preset(name)?.scenario),
            (None, Some(means)) => {
                let schemes = match &self.schemes {
                    Some(pairs) => pairs
                        .iter()
                        .map(|&[p00, p11]| RandomizedResponseScheme::new(p00, p11))
                        .collect::<Result<Vec<_>>>()?,
                    None => vec![RandomizedResponseScheme::identity(); means.len()],
                };
                Ok(Scenario {
                    name: "custom".into(),
                    reward_means: means.clone(),
                    schemes,
                })
            }
            (None, None) => Err(Error::Config("no scenario: set `preset` or `means`".into())),
        }
    }

    pub fn experiment(&self) -> Result<ExperimentConfig> {
        let scenario = self.scenario()?;
        let base = self.preset.as_deref().map(preset).transpose()?;
        let policies = match &self.policies {
            Some(tags) => tags.iter().map(|t| t.parse()).collect::<Result<Vec<PolicyKind>>>()?,
            None => base.as_ref().map(|p| p.policies.clone()).unwrap_or_default(),
        };
        let horizon = self
            .horizon
            .or(base.as_ref().map(|p| p.horizon))
            .ok_or_else(|| Error::Config("no horizon given".into()))?;
        let config = ExperimentConfig {
            scenario,
            policies,
            horizon,
            replications: self.reps.unwrap_or(DEFAULT_REPLICATIONS),
            master_seed: self.seed.unwrap_or(DEFAULT_SEED),
            checkpoints: self.checkpoints.clone().unwrap_or_else(|| default_checkpoints(horizon)),
            epsilon_sweep: self.eps.clone(),
        };
        config.validate()?;
        Ok(config)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_checkpoint_shape() {
        let c = default_checkpoints(100_000);
        assert_eq!(*c.last().unwrap(), 100_000);
        assert!(c.len() <= 51 && c.len() > 30);
        assert!(c.windows(2).all(|w| w[0] < w[1]));
        assert_eq!(default_checkpoints(1), vec![1]);
        assert_eq!(*default_checkpoints(7).last().unwrap(), 7);
    }

    #[test]
    fn parse_full_file() {
        let text = r#"
            preset = "scenario1"
            policies = ["klucb-cf", "wrapper:ts"]
            horizon = 1000
            reps = 3
            seed = 7
            checkpoints = [10, 100, 1000]
        "#;
        let c = ConfigFile::parse(text).unwrap().experiment().unwrap();
        assert_eq!(c.scenario.reward_means, vec![0.9, 0.6]);
        assert_eq!(c.policies.len(), 2);
        assert_eq!((c.horizon, c.replications, c.master_seed), (1000, 3, 7));
        assert_eq!(c.checkpoints, vec![10, 100, 1000]);
    }

    #[test]
    fn explicit_means_and_schemes() {
        let text = "means = [0.4, 0.6]\nschemes = [[0.9, 0.8], [0.7, 0.7]]\npolicies = [\"ts\"]\nhorizon = 50\n";
        let c = ConfigFile::parse(text).unwrap().experiment().unwrap();
        assert_eq!(c.scenario.schemes[0].p11(), 0.8);
        assert_eq!(c.checkpoints.last(), Some(&50));
    }

    #[test]
    fn rejects_bad_files() {
        assert!(ConfigFile::parse("horizon = \"many\"").is_err());
        assert!(ConfigFile::parse("colour = 3").is_err());
        let no_scenario = ConfigFile::parse("horizon = 10\npolicies = [\"ts\"]").unwrap();
        assert!(no_scenario.experiment().is_err());
        let bad_policy = ConfigFile::parse("preset = \"main\"\npolicies = [\"greedy\"]").unwrap();
        assert!(matches!(bad_policy.experiment(), Err(Error::UnknownPolicy(_))));
        let bad_ckpt = ConfigFile::parse("preset = \"main\"\nhorizon = 100\ncheckpoints = [10, 5]").unwrap();
        assert!(bad_ckpt.experiment().is_err());
        let past_end = ConfigFile::parse("preset = \"main\"\nhorizon = 100\ncheckpoints = [200]").unwrap();
        assert!(past_end.experiment().is_err());
        let no_reps = ConfigFile::parse("preset = \"main\"\nreps = 0").unwrap();
        assert!(no_reps.experiment().is_err());
        let mismatch =
            ConfigFile::parse("means = [0.5, 0.4]\nschemes = [[0.9, 0.9]]\npolicies = [\"ts\"]\nhorizon = 5").unwrap();
        assert!(mismatch.experiment().is_err());
    }

    #[test]
    fn overrides_win() {
        let file = ConfigFile::parse("preset = \"main\"\nhorizon = 100\nseed = 1").unwrap();
        let cli = ConfigFile {
            seed: Some(9),
            ..Default::default()
        };
        let c = file.overridden_by(cli).experiment().unwrap();
        assert_eq!((c.horizon, c.master_seed), (100, 9));

        let file = ConfigFile::parse("means = [0.5, 0.6]\npolicies = [\"ts\"]\nhorizon = 10").unwrap();
        let cli = ConfigFile {
            preset: Some("scenario2".into()),
            ..Default::default()
        };
        let c = file.overridden_by(cli).experiment().unwrap();
        assert_eq!(c.scenario.reward_means, vec![0.9, 0.8]);
        assert!(ConfigFile::parse("preset = \"main\"\nmeans = [0.1, 0.2]")
            .unwrap()
            .scenario()
            .is_err());
    }

    #[test]
    fn validation_of_epsilons() {
        let mut c = ConfigFile::parse("preset = \"main\"").unwrap().experiment().unwrap();
        c.epsilon_sweep = Some(vec![1.0, 0.0]);
        assert!(c.validate().is_err());
        c.epsilon_sweep = Some(vec![]);
        assert!(c.validate().is_err());
        c.epsilon_sweep = Some(DEFAULT_EPSILONS.to_vec());
        assert!(c.validate().is_ok());
    }
}
