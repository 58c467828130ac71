use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Beta, Distribution};
use serde::{Deserialize, Serialize};

use crate::adversaries::{check_round, Adversary};
use crate::experts::LossVector;
use crate::{Error, Result};

/// Per-expert marginals of one segment. Coordinates are independent.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Marginals {
    /// Loss of expert `j` is 1 with probability `means[j]`, else 0.
    Bernoulli(Vec<f64>),
    /// Loss of expert `j` is `Beta(a_j, b_j)`.
    Beta(Vec<(f64, f64)>),
}

impl Marginals {
    pub fn len(&self) -> usize {
        match self {
            Marginals::Bernoulli(m) => m.len(),
            Marginals::Beta(p) => p.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn means(&self) -> Vec<f64> {
        match self {
            Marginals::Bernoulli(m) => m.clone(),
            Marginals::Beta(p) => p.iter().map(|(a, b)| a / (a + b)).collect(),
        }
    }

    fn validate(&self) -> Result<()> {
        match self {
            Marginals::Bernoulli(m) => {
                if m.iter().any(|p| !(0.0..=1.0).contains(p)) {
                    return Err(Error::arg("Bernoulli means must lie in [0, 1]"));
                }
            }
            Marginals::Beta(p) => {
                if p.iter().any(|(a, b)| !(*a > 0.0 && *b > 0.0)) {
                    return Err(Error::arg("Beta parameters must be positive"));
                }
            }
        }
        Ok(())
    }
}

/// `S` segment distributions separated by change points.
///
/// `change_points[s]` is the first round of segment `s + 1`, so segment `s`
/// governs rounds `[t_s, t_{s+1})`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ShiftingStochasticSpec {
    pub horizon: usize,
    pub segments: Vec<Marginals>,
    pub change_points: Vec<usize>,
}

impl ShiftingStochasticSpec {
    pub fn new(
        horizon: usize,
        segments: Vec<Marginals>,
        change_points: Vec<usize>,
    ) -> Result<Self> {
        let spec = Self {
            horizon,
            segments,
            change_points,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        if self.horizon == 0 {
            return Err(Error::arg("horizon must be at least 1"));
        }
        let Some(first) = self.segments.first() else {
            return Err(Error::arg("at least one segment distribution is required"));
        };
        if first.is_empty() {
            return Err(Error::arg("segments must cover at least one expert"));
        }
        for seg in &self.segments {
            if seg.len() != first.len() {
                return Err(Error::arg("all segments must cover the same experts"));
            }
            seg.validate()?;
        }
        if self.change_points.len() + 1 != self.segments.len() {
            return Err(Error::arg(format!(
                "{} segments need {} change points, got {}",
                self.segments.len(),
                self.segments.len() - 1,
                self.change_points.len()
            )));
        }
        let mut last = 1;
        for &cp in &self.change_points {
            if cp <= last || cp > self.horizon {
                return Err(Error::arg(format!(
                    "change points must be strictly increasing within 2..={}",
                    self.horizon
                )));
            }
            last = cp;
        }
        Ok(())
    }

    /// Bernoulli segments with equally spaced change points. In segment `s`
    /// expert `s mod N` has mean `low` and every other expert `low + gap`.
    pub fn rotating_bernoulli(
        horizon: usize,
        experts: usize,
        segments: usize,
        gap: f64,
        low: f64,
    ) -> Result<Self> {
        if segments == 0 || segments > horizon {
            return Err(Error::arg("need between 1 and T segments"));
        }
        if experts < 2 && segments > 1 {
            return Err(Error::arg("rotation needs at least two experts"));
        }
        let dists = (0..segments)
            .map(|s| {
                Marginals::Bernoulli(
                    (0..experts)
                        .map(|j| if j == s % experts { low } else { low + gap })
                        .collect(),
                )
            })
            .collect();
        let cps = (1..segments).map(|s| s * horizon / segments + 1).collect();
        Self::new(horizon, dists, cps)
    }

    pub fn num_experts(&self) -> usize {
        self.segments[0].len()
    }

    /// Zero-based segment index governing round `t`.
    pub fn segment_at(&self, t: usize) -> usize {
        self.change_points.partition_point(|&cp| cp <= t)
    }
}

/// Sampler for a [`ShiftingStochasticSpec`].
#[derive(Debug, Clone)]
pub struct ShiftingStochastic {
    spec: ShiftingStochasticSpec,
    betas: Vec<Option<Vec<Beta<f64>>>>,
    rng: ChaCha8Rng,
}

impl ShiftingStochastic {
    pub fn new(spec: ShiftingStochasticSpec, rng: ChaCha8Rng) -> Result<Self> {
        spec.validate()?;
        let betas = spec
            .segments
            .iter()
            .map(|seg| match seg {
                Marginals::Beta(p) => p
                    .iter()
                    .map(|(a, b)| Beta::new(*a, *b).map_err(|e| Error::arg(e.to_string())))
                    .collect::<Result<Vec<_>>>()
                    .map(Some),
                Marginals::Bernoulli(_) => Ok(None),
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self { spec, betas, rng })
    }

    pub fn spec(&self) -> &ShiftingStochasticSpec {
        &self.spec
    }

    /// Draws the loss of round `t` from the active segment.
    pub fn sample(&mut self, t: usize) -> Result<LossVector> {
        check_round(t, self.spec.horizon)?;
        let s = self.spec.segment_at(t);
        let values = match (&self.spec.segments[s], &self.betas[s]) {
            (_, Some(betas)) => betas.iter().map(|b| b.sample(&mut self.rng)).collect(),
            (Marginals::Bernoulli(means), None) => means
                .iter()
                .map(|p| if self.rng.gen::<f64>() < *p { 1.0 } else { 0.0 })
                .collect(),
            (Marginals::Beta(_), None) => unreachable!("beta samplers built in new"),
        };
        LossVector::new(values)
    }
}

impl Adversary for ShiftingStochastic {
    fn horizon(&self) -> usize {
        self.spec.horizon
    }

    fn num_experts(&self) -> usize {
        self.spec.num_experts()
    }

    fn next_loss(&mut self, t: usize, _history: &[usize]) -> Result<LossVector> {
        self.sample(t)
    }

    fn is_shift(&self, t: usize) -> bool {
        self.spec.change_points.binary_search(&t).is_ok()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;

    #[test]
    fn zero_means_give_zero_losses() {
        let spec =
            ShiftingStochasticSpec::new(10, vec![Marginals::Bernoulli(vec![0.0; 3])], vec![])
                .unwrap();
        let mut adv = ShiftingStochastic::new(spec, ChaCha8Rng::seed_from_u64(0)).unwrap();
        for t in 1..=10 {
            assert_eq!(adv.next_loss(t, &[]).unwrap(), LossVector::zeros(3));
        }
        assert!(adv.next_loss(11, &[]).is_err());
        assert!(adv.next_loss(0, &[]).is_err());
    }

    #[test]
    fn segment_bookkeeping() {
        let spec = ShiftingStochasticSpec::rotating_bernoulli(100, 3, 4, 0.2, 0.1).unwrap();
        assert_eq!(spec.change_points, vec![26, 51, 76]);
        assert_eq!(spec.segment_at(25), 0);
        assert_eq!(spec.segment_at(26), 1);
        assert_eq!(spec.segment_at(100), 3);
        let adv = ShiftingStochastic::new(spec, ChaCha8Rng::seed_from_u64(0)).unwrap();
        assert!(adv.is_shift(26));
        assert!(!adv.is_shift(27));
    }

    #[test]
    fn validation() {
        let b = |v: Vec<f64>| Marginals::Bernoulli(v);
        assert!(ShiftingStochasticSpec::new(10, vec![b(vec![0.5]), b(vec![0.5])], vec![]).is_err());
        assert!(
            ShiftingStochasticSpec::new(10, vec![b(vec![0.5]), b(vec![0.5])], vec![11]).is_err()
        );
        assert!(
            ShiftingStochasticSpec::new(10, vec![b(vec![0.5]), b(vec![0.5])], vec![1]).is_err()
        );
        assert!(ShiftingStochasticSpec::new(10, vec![b(vec![1.5])], vec![]).is_err());
        assert!(ShiftingStochasticSpec::new(
            10,
            vec![b(vec![0.5]), b(vec![0.5]), b(vec![0.5])],
            vec![5, 5]
        )
        .is_err());
        assert!(
            ShiftingStochasticSpec::new(10, vec![Marginals::Beta(vec![(0.0, 1.0)])], vec![])
                .is_err()
        );
    }

    #[test]
    fn per_segment_means() {
        let horizon = 10_000;
        let spec = ShiftingStochasticSpec::new(
            horizon,
            vec![
                Marginals::Bernoulli(vec![0.1, 0.5]),
                Marginals::Bernoulli(vec![0.5, 0.1]),
            ],
            vec![horizon / 2 + 1],
        )
        .unwrap();
        let mut adv = ShiftingStochastic::new(spec, ChaCha8Rng::seed_from_u64(3)).unwrap();
        let mut sums = [[0.0; 2]; 2];
        for t in 1..=horizon {
            let l = adv.next_loss(t, &[]).unwrap();
            let s = usize::from(t > horizon / 2);
            sums[s][0] += l[0];
            sums[s][1] += l[1];
        }
        let half = (horizon / 2) as f64;
        assert!((sums[0][0] / half - 0.1).abs() < 0.02);
        assert!((sums[0][1] / half - 0.5).abs() < 0.02);
        assert!((sums[1][0] / half - 0.5).abs() < 0.02);
        assert!((sums[1][1] / half - 0.1).abs() < 0.02);
    }

    #[test]
    fn beta_losses_are_continuous() {
        let spec = ShiftingStochasticSpec::new(
            2000,
            vec![Marginals::Beta(vec![(2.0, 8.0), (8.0, 2.0)])],
            vec![],
        )
        .unwrap();
        let mut adv = ShiftingStochastic::new(spec, ChaCha8Rng::seed_from_u64(4)).unwrap();
        let mut sum = [0.0; 2];
        for t in 1..=2000 {
            let l = adv.next_loss(t, &[]).unwrap();
            sum[0] += l[0];
            sum[1] += l[1];
        }
        assert!((sum[0] / 2000.0 - 0.2).abs() < 0.02);
        assert!((sum[1] / 2000.0 - 0.8).abs() < 0.02);
    }
}
