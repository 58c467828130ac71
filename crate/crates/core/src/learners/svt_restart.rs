use serde::{Deserialize, Serialize};

use crate::experts::LossVector;
use crate::learners::{check_loss_len, LazyRnm, Learner, Observation, RoundClock};
use crate::mechanisms::{AboveThreshold, BudgetLedger, Noise, NoiseMode};
use crate::rng::{purpose, SeedStream};
use crate::{Error, Result};

/// Which window lengths are probed each round.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ProbeMode {
    /// Every `w` in `0 ..= t - t_i`. Quadratic in the segment length.
    #[default]
    Exact,
    /// `w` in `{1, 2, 4, ...}` up to `t - t_i`.
    Geometric,
}

/// Privacy parameter used inside the `Reg_w` threshold term.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum RegEpsilon {
    /// The learner's full `epsilon`.
    #[default]
    Full,
    /// `epsilon / 2`, the budget the inner learner actually runs at.
    Half,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SvtRestartConfig {
    pub experts: usize,
    pub horizon: usize,
    pub epsilon: f64,
    pub beta: f64,
    pub probe: ProbeMode,
    pub reg_epsilon: RegEpsilon,
    pub noise: NoiseMode,
}

impl SvtRestartConfig {
    pub fn new(experts: usize, horizon: usize, epsilon: f64, beta: f64) -> Self {
        Self {
            experts,
            horizon,
            epsilon,
            beta,
            probe: ProbeMode::Exact,
            reg_epsilon: RegEpsilon::Full,
            noise: NoiseMode::Laplace,
        }
    }

    fn validate(&self) -> Result<()> {
        if self.experts == 0 || self.horizon == 0 {
            return Err(Error::arg("SVT restart learner needs N >= 1 and T >= 1"));
        }
        if !(self.epsilon > 0.0 && self.epsilon.is_finite()) {
            return Err(Error::arg(format!(
                "epsilon must be positive, got {}",
                self.epsilon
            )));
        }
        if !(self.beta > 0.0 && self.beta < 1.0) {
            return Err(Error::arg(format!(
                "beta must lie in (0, 1), got {}",
                self.beta
            )));
        }
        Ok(())
    }

    /// `16 (2 ln T + ln(2/beta)) / epsilon`.
    pub fn alpha(&self) -> f64 {
        let t = self.horizon as f64;
        16.0 * (2.0 * t.ln() + (2.0 / self.beta).ln()) / self.epsilon
    }

    /// `16 ln(N T / beta) / epsilon' + 9 sqrt(w ln(T N / beta))`.
    pub fn reg(&self, w: usize) -> f64 {
        let log_term = self.log_ntb();
        self.reg_constant(log_term) + 9.0 * (w as f64 * log_term).sqrt()
    }

    fn log_ntb(&self) -> f64 {
        (self.experts as f64 * self.horizon as f64 / self.beta).ln()
    }

    fn reg_constant(&self, log_term: f64) -> f64 {
        let eps = match self.reg_epsilon {
            RegEpsilon::Full => self.epsilon,
            RegEpsilon::Half => self.epsilon / 2.0,
        };
        16.0 * log_term / eps
    }
}

/// Lazy learner restarted whenever AboveThreshold flags excess regret.
///
/// Within a segment starting at round `t_i`, the inner [`LazyRnm`] runs at
/// `epsilon / 2`. After observing round `t`, the learner probes
///
/// `q_w = sum_{i=t-w}^{t} l_i(j_i) - min_j sum_{i=t-w}^{t} l_i(j) - Reg_w - alpha - 1`
///
/// for `w <= t - t_i` in increasing order against an AboveThreshold instance
/// with `(epsilon / 2, beta / T)`. On the first `true` both the inner learner
/// and the SVT instance are rebuilt and the new segment begins at `t + 1`, so
/// no round belongs to two segments.
#[derive(Debug, Clone)]
pub struct SvtRestart {
    config: SvtRestartConfig,
    streams: SeedStream,
    segment: usize,
    segment_start: usize,
    inner: LazyRnm,
    svt: AboveThreshold,
    alpha: f64,
    reg_constant: f64,
    reg_slope: Vec<f64>,
    log_ntb: f64,
    expert_prefix: Vec<f64>,
    played_prefix: Vec<f64>,
    last_play: usize,
    restarts: Vec<usize>,
    clock: RoundClock,
    ledger: BudgetLedger,
}

impl SvtRestart {
    pub fn new(config: SvtRestartConfig, seed: u64) -> Result<Self> {
        config.validate()?;
        let streams = SeedStream::new(seed);
        let (inner, svt) = Self::segment_parts(&config, &streams, 0, 1)?;
        let log_ntb = config.log_ntb();
        Ok(Self {
            alpha: config.alpha(),
            reg_constant: config.reg_constant(log_ntb),
            reg_slope: Vec::new(),
            log_ntb,
            config,
            streams,
            segment: 0,
            segment_start: 1,
            inner,
            svt,
            expert_prefix: vec![0.0; config.experts],
            played_prefix: vec![0.0],
            last_play: 0,
            restarts: Vec::new(),
            clock: RoundClock::default(),
            ledger: BudgetLedger::default(),
        })
    }

    fn segment_parts(
        config: &SvtRestartConfig,
        streams: &SeedStream,
        segment: usize,
        start: usize,
    ) -> Result<(LazyRnm, AboveThreshold)> {
        let base = 3 * segment as u64;
        let noise = |i: u64| Noise::new(streams.rng(purpose::SEGMENT, base + i), config.noise);
        let inner = LazyRnm::new(
            config.experts,
            config.epsilon / 2.0,
            streams.rng(purpose::SEGMENT, base),
            noise(1),
        )?
        .with_ledger_offset(start - 1, format!("rnm{segment}."));
        let svt = AboveThreshold::new(
            config.epsilon / 2.0,
            config.beta / config.horizon as f64,
            config.horizon,
            noise(2),
        )?;
        Ok((inner, svt))
    }

    pub fn config(&self) -> &SvtRestartConfig {
        &self.config
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    /// The `alpha` of the current AboveThreshold instance.
    pub fn svt_alpha(&self) -> f64 {
        self.svt.alpha()
    }

    pub fn reg(&self, w: usize) -> f64 {
        self.config.reg(w)
    }

    /// Rounds at which a restart was triggered.
    pub fn restarts(&self) -> &[usize] {
        &self.restarts
    }

    pub fn segment_start(&self) -> usize {
        self.segment_start
    }

    fn reg_at(&mut self, w: usize) -> f64 {
        while self.reg_slope.len() <= w {
            let k = self.reg_slope.len() as f64;
            self.reg_slope.push(9.0 * (k * self.log_ntb).sqrt());
        }
        self.reg_constant + self.reg_slope[w]
    }

    /// Regret of the plays over the last `w + 1` rounds of the segment.
    fn window_regret(&self, w: usize) -> f64 {
        let n = self.config.experts;
        let k = self.played_prefix.len() - 1;
        let lo = k - w - 1;
        let played = self.played_prefix[k] - self.played_prefix[lo];
        let now = &self.expert_prefix[k * n..(k + 1) * n];
        let then = &self.expert_prefix[lo * n..(lo + 1) * n];
        let best = now
            .iter()
            .zip(then)
            .map(|(a, b)| a - b)
            .fold(f64::INFINITY, f64::min);
        played - best
    }

    fn probe(&mut self) -> Result<bool> {
        let max_w = self.played_prefix.len() - 2;
        let mut w = match self.config.probe {
            ProbeMode::Exact => 0,
            ProbeMode::Geometric => 1,
        };
        while w <= max_w {
            let q = self.window_regret(w) - self.reg_at(w) - self.alpha - 1.0;
            if self.svt.test(q)? {
                return Ok(true);
            }
            w = match self.config.probe {
                ProbeMode::Exact => w + 1,
                ProbeMode::Geometric => w * 2,
            };
        }
        Ok(false)
    }

    fn restart(&mut self, t: usize) -> Result<()> {
        self.restarts.push(t);
        self.segment += 1;
        self.segment_start = t + 1;
        let (inner, svt) = Self::segment_parts(
            &self.config,
            &self.streams,
            self.segment,
            self.segment_start,
        )?;
        self.inner = inner;
        self.svt = svt;
        self.expert_prefix.truncate(self.config.experts);
        self.played_prefix.truncate(1);
        Ok(())
    }
}

impl Learner for SvtRestart {
    fn num_experts(&self) -> usize {
        self.config.experts
    }

    fn select(&mut self) -> Result<usize> {
        self.clock.begin()?;
        self.last_play = self.inner.select()?;
        Ok(self.last_play)
    }

    fn observe(&mut self, loss: &LossVector) -> Result<Observation> {
        check_loss_len(loss, self.config.experts)?;
        let t = self.clock.end()?;
        self.inner.observe(loss)?;
        self.ledger.append(&mut self.inner.take_ledger());

        let n = self.config.experts;
        let k = self.played_prefix.len() - 1;
        let played = self.played_prefix[k] + loss[self.last_play];
        self.played_prefix.push(played);
        for j in 0..n {
            let next = self.expert_prefix[k * n + j] + loss[j];
            self.expert_prefix.push(next);
        }
        self.ledger
            .charge(t, format!("svt{}", self.segment), self.config.epsilon / 2.0);

        let restarted = self.probe()?;
        if restarted {
            self.restart(t)?;
        }
        Ok(Observation { restarted })
    }

    fn ledger(&self) -> &BudgetLedger {
        &self.ledger
    }

    fn rounds(&self) -> usize {
        self.clock.completed()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn run(learner: &mut SvtRestart, rows: &[Vec<f64>]) -> Vec<(usize, bool)> {
        rows.iter()
            .map(|r| {
                let j = learner.select().unwrap();
                let obs = learner
                    .observe(&LossVector::new(r.clone()).unwrap())
                    .unwrap();
                (j, obs.restarted)
            })
            .collect()
    }

    #[test]
    fn constants() {
        let cfg = SvtRestartConfig::new(10, 1000, 1.0, 0.01);
        let log = (10.0f64 * 1000.0 / 0.01).ln();
        assert!((cfg.reg(0) - 16.0 * log).abs() < 1e-9);
        assert!((cfg.reg(9) - (16.0 * log + 27.0 * log.sqrt())).abs() < 1e-9);
        let alpha = 16.0 * (2.0 * 1000f64.ln() + 200f64.ln());
        assert!((cfg.alpha() - alpha).abs() < 1e-9);

        // The inner AboveThreshold at (eps/2, beta/T) has the same alpha.
        let learner = SvtRestart::new(cfg, 0).unwrap();
        assert!((learner.svt_alpha() - learner.alpha()).abs() < 1e-9);

        let half = SvtRestartConfig {
            reg_epsilon: RegEpsilon::Half,
            ..cfg
        };
        assert!((half.reg(0) - 32.0 * log).abs() < 1e-9);
    }

    #[test]
    fn rejects_bad_config() {
        assert!(SvtRestart::new(SvtRestartConfig::new(0, 10, 1.0, 0.1), 0).is_err());
        assert!(SvtRestart::new(SvtRestartConfig::new(2, 10, 0.0, 0.1), 0).is_err());
        assert!(SvtRestart::new(SvtRestartConfig::new(2, 10, 1.0, 1.0), 0).is_err());
    }

    #[test]
    fn identical_losses_never_restart_without_noise() {
        let cfg = SvtRestartConfig {
            noise: NoiseMode::Zero,
            ..SvtRestartConfig::new(3, 200, 1.0, 0.1)
        };
        let mut learner = SvtRestart::new(cfg, 1).unwrap();
        let rows = vec![vec![0.5; 3]; 200];
        assert!(run(&mut learner, &rows).iter().all(|(_, r)| !r));
    }

    #[test]
    fn noiseless_restart_on_large_regret() {
        // Huge epsilon shrinks every threshold term to about 9 sqrt(w log) + 1,
        // so sustained unit regret eventually crosses it.
        let cfg = SvtRestartConfig {
            noise: NoiseMode::Zero,
            ..SvtRestartConfig::new(2, 2000, 1e9, 0.5)
        };
        let mut learner = SvtRestart::new(cfg, 3).unwrap();
        // Expert 0 is perfect until round 1023, then expert 1 is. The lazy
        // learner commits to expert 0 at t = 1024 and pays 1 per round.
        let mut rows = vec![vec![0.0, 1.0]; 1023];
        rows.extend(vec![vec![1.0, 0.0]; 977]);
        let out = run(&mut learner, &rows);
        let restarts = learner.restarts().to_vec();
        assert!(!restarts.is_empty());
        assert!(
            restarts[0] > 1024 + 700 && restarts[0] < 2000,
            "{restarts:?}"
        );
        // The fresh segment moves to expert 1 within two rounds.
        assert_eq!(out[restarts[0] + 1].0, 1);
        // A restart opens a fresh segment in the following round.
        let r = restarts[0];
        assert!(out[r - 1].1);
        for (i, &t) in restarts.iter().enumerate() {
            if i + 1 < restarts.len() {
                assert!(restarts[i + 1] > t);
            }
        }
    }

    #[test]
    fn ledger_pattern() {
        let cfg = SvtRestartConfig {
            noise: NoiseMode::Zero,
            ..SvtRestartConfig::new(2, 2000, 1e9, 0.5)
        };
        let mut learner = SvtRestart::new(cfg, 3).unwrap();
        let mut rows = vec![vec![0.0, 1.0]; 1023];
        rows.extend(vec![vec![1.0, 0.0]; 977]);
        run(&mut learner, &rows);
        assert!(!learner.restarts().is_empty());
        for (round, charges) in learner.ledger().by_round() {
            let rnm = charges
                .iter()
                .filter(|c| c.mechanism.starts_with("rnm"))
                .count();
            let svt = charges
                .iter()
                .filter(|c| c.mechanism.starts_with("svt"))
                .count();
            assert!(rnm <= 1, "round {round}");
            assert_eq!(svt, 1, "round {round}");
            assert!(charges.iter().all(|c| c.epsilon == 0.5e9));
        }
    }

    #[test]
    fn geometric_probes_fewer_windows() {
        let cfg = SvtRestartConfig {
            probe: ProbeMode::Geometric,
            ..SvtRestartConfig::new(3, 500, 1.0, 0.1)
        };
        let mut geo = SvtRestart::new(cfg, 9).unwrap();
        let rows = vec![vec![0.2, 0.5, 0.9]; 500];
        run(&mut geo, &rows);
        // No query sees more than the rounds since the segment start.
        assert!(geo.svt.queries() <= 500 * 10);
    }
}
