use serde::{Deserialize, Serialize};

use crate::adversaries::{check_round, Adversary};
use crate::experts::LossVector;
use crate::{Error, Result};

/// Policies whose losses depend on the learner's past plays.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "policy", rename_all = "kebab-case")]
pub enum AdaptiveSpec {
    WindowPunisher {
        horizon: usize,
        experts: usize,
        window: usize,
    },
}

/// Gives loss 1 to the expert played most often in the last `window` rounds
/// (ties to the lowest index, expert 0 before any play) and 0 elsewhere.
#[derive(Debug, Clone)]
pub struct WindowPunisher {
    horizon: usize,
    experts: usize,
    window: usize,
    counts: Vec<usize>,
}

impl WindowPunisher {
    pub fn new(horizon: usize, experts: usize, window: usize) -> Result<Self> {
        if horizon == 0 || experts == 0 || window == 0 {
            return Err(Error::arg("window punisher needs T, N and W at least 1"));
        }
        Ok(Self {
            horizon,
            experts,
            window,
            counts: vec![0; experts],
        })
    }

    pub fn from_spec(spec: AdaptiveSpec) -> Result<Self> {
        match spec {
            AdaptiveSpec::WindowPunisher {
                horizon,
                experts,
                window,
            } => Self::new(horizon, experts, window),
        }
    }

    /// Expert punished given the full play history.
    pub fn target(&self, history: &[usize]) -> Result<usize> {
        let mut counts = vec![0usize; self.experts];
        let start = history.len().saturating_sub(self.window);
        for &j in &history[start..] {
            *counts
                .get_mut(j)
                .ok_or_else(|| Error::arg(format!("history contains unknown expert {j}")))? += 1;
        }
        let mut best = 0;
        for (j, c) in counts.iter().enumerate() {
            if *c > counts[best] {
                best = j;
            }
        }
        Ok(best)
    }
}

impl Adversary for WindowPunisher {
    fn horizon(&self) -> usize {
        self.horizon
    }

    fn num_experts(&self) -> usize {
        self.experts
    }

    fn next_loss(&mut self, t: usize, history: &[usize]) -> Result<LossVector> {
        check_round(t, self.horizon)?;
        if history.len() != t - 1 {
            return Err(Error::arg(format!(
                "round {t} needs {} past plays, got {}",
                t - 1,
                history.len()
            )));
        }
        let target = self.target(history)?;
        self.counts[target] += 1;
        let mut values = vec![0.0; self.experts];
        values[target] = 1.0;
        LossVector::new(values)
    }
}
