use rand_chacha::ChaCha8Rng;

use crate::experts::distribution::sample_index;
use crate::experts::{ExpertDistribution, LossVector};
use crate::learners::{check_loss_len, Learner, Observation, RoundClock};
use crate::mechanisms::BudgetLedger;
use crate::{Error, Result};

/// Unnormalised exponential-weights step `w_j exp(-eta (g_j - min g))`.
///
/// Shifting by the minimum keeps every factor in `(0, 1]`, so the entry
/// attaining the minimum keeps its weight and nothing overflows.
pub fn exponential_weights(weights: &[f64], gradient: &[f64], eta: f64) -> Vec<f64> {
    let min = gradient.iter().cloned().fold(f64::INFINITY, f64::min);
    weights
        .iter()
        .zip(gradient)
        .map(|(w, g)| w * (-eta * (g - min)).exp())
        .collect()
}

/// Non-private multiplicative weights, `w_{t+1}(j) ∝ w_t(j) exp(-eta l_t(j))`.
#[derive(Debug, Clone)]
pub struct Mwa {
    weights: Vec<f64>,
    eta: f64,
    rng: ChaCha8Rng,
    clock: RoundClock,
    ledger: BudgetLedger,
}

impl Mwa {
    pub fn new(n: usize, eta: f64, rng: ChaCha8Rng) -> Result<Self> {
        if !(eta >= 0.0 && eta.is_finite()) {
            return Err(Error::arg(format!(
                "eta must be finite and nonnegative, got {eta}"
            )));
        }
        let weights = ExpertDistribution::uniform(n)?.weights().to_vec();
        Ok(Self {
            weights,
            eta,
            rng,
            clock: RoundClock::default(),
            ledger: BudgetLedger::default(),
        })
    }

    /// `sqrt(8 ln N / T)`, the usual fixed-horizon tuning.
    pub fn default_eta(n: usize, horizon: usize) -> f64 {
        (8.0 * (n.max(2) as f64).ln() / horizon.max(1) as f64).sqrt()
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }
}

impl Learner for Mwa {
    fn num_experts(&self) -> usize {
        self.weights.len()
    }

    fn select(&mut self) -> Result<usize> {
        self.clock.begin()?;
        Ok(sample_index(&self.weights, &mut self.rng))
    }

    fn observe(&mut self, loss: &LossVector) -> Result<Observation> {
        check_loss_len(loss, self.weights.len())?;
        self.clock.end()?;
        let v = exponential_weights(&self.weights, loss.values(), self.eta);
        let scale = 1.0 / v.iter().sum::<f64>();
        self.weights = v.into_iter().map(|x| x * scale).collect();
        Ok(Observation::default())
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
    use rand::SeedableRng;

    fn mwa(n: usize, eta: f64) -> Mwa {
        Mwa::new(n, eta, ChaCha8Rng::seed_from_u64(0)).unwrap()
    }

    #[test]
    fn starts_uniform() {
        assert_eq!(mwa(4, 0.1).weights(), &[0.25; 4]);
        assert!(Mwa::new(0, 0.1, ChaCha8Rng::seed_from_u64(0)).is_err());
        assert!(Mwa::new(2, -0.1, ChaCha8Rng::seed_from_u64(0)).is_err());
    }

    #[test]
    fn zero_losses_keep_uniform() {
        let mut m = mwa(3, 0.5);
        for _ in 0..50 {
            m.select().unwrap();
            m.observe(&LossVector::zeros(3)).unwrap();
        }
        for w in m.weights() {
            assert!((w - 1.0 / 3.0).abs() < 1e-15);
        }
    }

    #[test]
    fn dominant_expert_grows_monotonically() {
        let mut m = mwa(3, 0.2);
        let loss = LossVector::new(vec![1.0, 0.0, 1.0]).unwrap();
        let mut last = m.weights()[1];
        for _ in 0..200 {
            m.select().unwrap();
            m.observe(&loss).unwrap();
            assert!(m.weights()[1] >= last);
            last = m.weights()[1];
        }
        assert!(last > 0.999);
    }
}
