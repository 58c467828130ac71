use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::adversaries::Marginals;
use crate::learners::{ProbeMode, RegEpsilon, DEFAULT_META_CAP};
use crate::mechanisms::NoiseMode;
use crate::{Error, Result};

/// Environment variable naming the root for relative output directories.
pub const OUTPUT_ROOT_ENV: &str = "PRIVTRACK_OUTPUT_ROOT";

const DEFAULT_OUTPUT_DIR: &str = "privtrack-out";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum LearnerId {
    /// Lazy report-noisy-argmin on doubling windows.
    LazyRnm,
    /// Lazy learner restarted by a sparse-vector shift detector.
    SvtRestart,
    /// Noisy multiplicative weights on the clipped simplex.
    NoisyMwa,
    /// Non-private exponential weights.
    Mwa,
    /// Noisy multiplicative weights over enumerated meta-experts.
    MetaReduction,
}

impl LearnerId {
    pub const ALL: [LearnerId; 5] = [
        LearnerId::LazyRnm,
        LearnerId::SvtRestart,
        LearnerId::NoisyMwa,
        LearnerId::Mwa,
        LearnerId::MetaReduction,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            LearnerId::LazyRnm => "lazy-rnm",
            LearnerId::SvtRestart => "svt-restart",
            LearnerId::NoisyMwa => "noisy-mwa",
            LearnerId::Mwa => "mwa",
            LearnerId::MetaReduction => "meta-reduction",
        }
    }
}

impl fmt::Display for LearnerId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for LearnerId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        LearnerId::ALL
            .into_iter()
            .find(|id| id.as_str() == s)
            .ok_or_else(|| {
                let known: Vec<_> = LearnerId::ALL.iter().map(|id| id.as_str()).collect();
                Error::Config(format!(
                    "unknown learner `{s}` (expected one of {})",
                    known.join(", ")
                ))
            })
    }
}

/// The `[adversary]` table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum AdversaryConfig {
    /// Bernoulli losses whose best expert rotates over `segments` equal
    /// blocks (default `S + 1`).
    ShiftingBernoulli {
        gap: f64,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        low: Option<f64>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        segments: Option<usize>,
    },
    /// Explicit per-segment marginals.
    Stochastic {
        segments: Vec<Marginals>,
        change_points: Vec<usize>,
    },
    /// Deterministic best-expert rotation over `phases` blocks (default `S`).
    Rotation {
        gap: f64,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        low: Option<f64>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        phases: Option<usize>,
    },
    /// A stored loss matrix; relative paths resolve against the config file.
    Replay { losses: PathBuf },
    /// Punishes the most played expert of the last `window` rounds.
    WindowPunisher { window: usize },
}

impl AdversaryConfig {
    pub fn kind(&self) -> &'static str {
        match self {
            AdversaryConfig::ShiftingBernoulli { .. } => "shifting-bernoulli",
            AdversaryConfig::Stochastic { .. } => "stochastic",
            AdversaryConfig::Rotation { .. } => "rotation",
            AdversaryConfig::Replay { .. } => "replay",
            AdversaryConfig::WindowPunisher { .. } => "window-punisher",
        }
    }
}

fn default_epsilon() -> f64 {
    1.0
}

fn default_trials() -> usize {
    1
}

fn default_meta_cap() -> u64 {
    DEFAULT_META_CAP as u64
}

/// One experiment: a learner, an adversary and the trial schedule.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub horizon: usize,
    pub experts: usize,
    #[serde(default)]
    pub switches: usize,
    #[serde(default = "default_epsilon")]
    pub epsilon: f64,
    #[serde(default)]
    pub delta: f64,
    /// Failure probability; `min(1 / T, 1 / 2)` when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub beta: Option<f64>,
    pub learner: LearnerId,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub eta: Option<f64>,
    #[serde(default)]
    pub probe: ProbeMode,
    #[serde(default)]
    pub reg_epsilon: RegEpsilon,
    #[serde(default = "default_meta_cap")]
    pub meta_cap: u64,
    #[serde(default = "default_trials")]
    pub trials: usize,
    #[serde(default)]
    pub seed: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output_dir: Option<PathBuf>,
    #[serde(default)]
    pub per_round_oracle: bool,
    pub adversary: AdversaryConfig,
    /// Test hook; not part of the file format.
    #[serde(skip)]
    pub noise: NoiseMode,
}

impl RunConfig {
    pub fn new(
        horizon: usize,
        experts: usize,
        switches: usize,
        learner: LearnerId,
        adversary: AdversaryConfig,
    ) -> Self {
        Self {
            horizon,
            experts,
            switches,
            epsilon: 1.0,
            delta: 0.0,
            beta: None,
            learner,
            eta: None,
            probe: ProbeMode::default(),
            reg_epsilon: RegEpsilon::default(),
            meta_cap: default_meta_cap(),
            trials: 1,
            seed: 0,
            output_dir: None,
            per_round_oracle: false,
            adversary,
            noise: NoiseMode::Laplace,
        }
    }

    pub fn from_toml_str(s: &str) -> Result<Self> {
        let config: RunConfig = toml::from_str(s).map_err(|e| Error::Config(e.to_string()))?;
        config.validate()?;
        Ok(config)
    }

    /// Reads a TOML config; a relative replay path is resolved against the
    /// file's directory.
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
        let mut config = Self::from_toml_str(&text)?;
        if let AdversaryConfig::Replay { losses } = &mut config.adversary {
            if losses.is_relative() {
                if let Some(dir) = path.parent() {
                    *losses = dir.join(&*losses);
                }
            }
        }
        Ok(config)
    }

    pub fn to_toml_string(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn beta(&self) -> f64 {
        self.beta.unwrap_or((1.0 / self.horizon as f64).min(0.5))
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::Config(msg));
        if self.horizon == 0 {
            return bad("horizon must be at least 1".into());
        }
        if self.experts == 0 {
            return bad("experts must be at least 1".into());
        }
        if !(self.epsilon > 0.0 && self.epsilon.is_finite()) {
            return bad(format!("epsilon must be positive, got {}", self.epsilon));
        }
        if !(0.0..1.0).contains(&self.delta) {
            return bad(format!("delta must lie in [0, 1), got {}", self.delta));
        }
        let beta = self.beta();
        if !(beta > 0.0 && beta < 1.0) {
            return bad(format!("beta must lie in (0, 1), got {beta}"));
        }
        if let Some(eta) = self.eta {
            if !(eta >= 0.0 && eta.is_finite()) {
                return bad(format!("eta must be finite and nonnegative, got {eta}"));
            }
        }
        if self.trials == 0 {
            return bad("trials must be at least 1".into());
        }
        if self.switches > self.horizon {
            return bad(format!(
                "switches ({}) cannot exceed the horizon ({})",
                self.switches, self.horizon
            ));
        }
        match &self.adversary {
            AdversaryConfig::ShiftingBernoulli { gap, low, .. }
            | AdversaryConfig::Rotation { gap, low, .. } => {
                let low = low.unwrap_or(0.5 - gap / 2.0);
                if !(*gap >= 0.0 && low >= 0.0 && low + gap <= 1.0) {
                    return bad(format!("gap {gap} with low {low} leaves [0, 1]"));
                }
            }
            AdversaryConfig::WindowPunisher { window } if *window == 0 => {
                return bad("window must be at least 1".into());
            }
            _ => {}
        }
        Ok(())
    }

    /// Hex SHA-256 of the canonical JSON form of the config.
    pub fn hash(&self) -> String {
        let json = serde_json::to_vec(self).expect("config serializes");
        Sha256::digest(&json)
            .iter()
            .map(|b| format!("{b:02x}"))
            .collect()
    }

    /// Output directory: absolute paths as given, relative ones under
    /// `$PRIVTRACK_OUTPUT_ROOT` (or the working directory).
    pub fn resolved_output_dir(&self) -> PathBuf {
        let dir = self
            .output_dir
            .clone()
            .unwrap_or_else(|| PathBuf::from(DEFAULT_OUTPUT_DIR));
        if dir.is_absolute() {
            return dir;
        }
        match std::env::var_os(OUTPUT_ROOT_ENV) {
            Some(root) => PathBuf::from(root).join(dir),
            None => dir,
        }
    }
}
