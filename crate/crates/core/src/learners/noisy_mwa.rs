use rand_chacha::ChaCha8Rng;

use crate::experts::{ClippedDistribution, LossVector};
use crate::learners::{check_loss_len, exponential_weights, kl_project_clipped};
use crate::learners::{Learner, Observation, RoundClock};
use crate::mechanisms::{BudgetLedger, Noise};
use crate::{Error, Result};

/// Entropic mirror descent on the clipped simplex with Laplace-perturbed losses.
///
/// Each round plays `J_t ~ w_t`, perturbs every coordinate of the observed
/// loss with `Laplace(1/epsilon)` and sets
/// `w_{t+1} = argmin_{w in clipped simplex} <w, eta l~_t> + KL(w || w_t)`,
/// which is the KL projection of `w_t exp(-eta l~_t)`.
#[derive(Debug, Clone)]
pub struct NoisyMwa {
    epsilon: f64,
    eta: f64,
    weights: ClippedDistribution,
    select_rng: ChaCha8Rng,
    noise: Noise,
    clock: RoundClock,
    ledger: BudgetLedger,
}

impl NoisyMwa {
    /// Learner for horizon `T` and switch budget `S`.
    ///
    /// The floor is `S / (N T)`, or `1 / (N T^2)` when `S = 0`. Without an
    /// explicit `eta` the step is `epsilon sqrt(S / (T ln(N T)))`, with `S`
    /// raised to 1 when it is 0.
    pub fn new(
        n: usize,
        horizon: usize,
        switches: usize,
        epsilon: f64,
        eta: Option<f64>,
        select_rng: ChaCha8Rng,
        noise: Noise,
    ) -> Result<Self> {
        let floor = Self::default_floor(n, horizon, switches)?;
        let eta = match eta {
            Some(eta) => eta,
            None => Self::default_eta(n, horizon, switches, epsilon)?,
        };
        Self::with_floor(n, floor, epsilon, eta, select_rng, noise)
    }

    pub fn with_floor(
        n: usize,
        floor: f64,
        epsilon: f64,
        eta: f64,
        select_rng: ChaCha8Rng,
        noise: Noise,
    ) -> Result<Self> {
        if !(epsilon > 0.0 && epsilon.is_finite()) {
            return Err(Error::arg(format!(
                "epsilon must be positive, got {epsilon}"
            )));
        }
        if !(eta >= 0.0 && eta.is_finite()) {
            return Err(Error::arg(format!(
                "eta must be finite and nonnegative, got {eta}"
            )));
        }
        Ok(Self {
            epsilon,
            eta,
            weights: ClippedDistribution::uniform(n, floor)?,
            select_rng,
            noise,
            clock: RoundClock::default(),
            ledger: BudgetLedger::default(),
        })
    }

    pub fn default_floor(n: usize, horizon: usize, switches: usize) -> Result<f64> {
        if switches == 0 {
            if n == 0 || horizon == 0 {
                return Err(Error::arg("clipped simplex needs N >= 1 and T >= 1"));
            }
            let t = horizon as f64;
            return Ok(1.0 / (n as f64 * t * t));
        }
        ClippedDistribution::switching_floor(n, horizon, switches)
    }

    pub fn default_eta(n: usize, horizon: usize, switches: usize, epsilon: f64) -> Result<f64> {
        let log_nt = (n as f64 * horizon as f64).ln();
        if !(log_nt > 0.0) {
            return Err(Error::arg("default eta needs N T > 1"));
        }
        let s = switches.max(1) as f64;
        Ok(epsilon * (s / (horizon as f64 * log_nt)).sqrt())
    }

    pub fn distribution(&self) -> &ClippedDistribution {
        &self.weights
    }

    pub fn eta(&self) -> f64 {
        self.eta
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    /// The entropic step on an already perturbed loss vector.
    pub fn update_with(&mut self, noisy_loss: &[f64]) -> Result<()> {
        let v = exponential_weights(self.weights.weights(), noisy_loss, self.eta);
        self.weights = kl_project_clipped(&v, self.weights.floor())?;
        Ok(())
    }
}

impl Learner for NoisyMwa {
    fn num_experts(&self) -> usize {
        self.weights.len()
    }

    fn select(&mut self) -> Result<usize> {
        self.clock.begin()?;
        Ok(self.weights.sample(&mut self.select_rng))
    }

    fn observe(&mut self, loss: &LossVector) -> Result<Observation> {
        check_loss_len(loss, self.weights.len())?;
        let t = self.clock.end()?;
        let scale = 1.0 / self.epsilon;
        let noisy = loss
            .values()
            .iter()
            .map(|l| Ok(l + self.noise.sample(scale)?))
            .collect::<Result<Vec<_>>>()?;
        self.ledger.charge(t, "laplace-vector", self.epsilon);
        self.update_with(&noisy)?;
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
    use crate::learners::Mwa;
    use rand::SeedableRng;

    fn zero_noise(n: usize, floor: f64, eta: f64) -> NoisyMwa {
        NoisyMwa::with_floor(
            n,
            floor,
            1.0,
            eta,
            ChaCha8Rng::seed_from_u64(0),
            Noise::zero(),
        )
        .unwrap()
    }

    #[test]
    fn zero_loss_is_a_fixed_point() {
        let mut l = zero_noise(3, 0.01, 0.5);
        let before = l.distribution().clone();
        l.select().unwrap();
        l.observe(&LossVector::zeros(3)).unwrap();
        assert_eq!(l.distribution(), &before);
    }

    #[test]
    fn unclipped_step_is_exponential_weights() {
        let eta = 0.1;
        let mut l = zero_noise(2, 1e-6, eta);
        l.select().unwrap();
        l.observe(&LossVector::new(vec![1.0, 0.0]).unwrap())
            .unwrap();
        let a = (-eta).exp();
        let w = l.distribution().weights();
        assert!((w[0] - a / (1.0 + a)).abs() < 1e-15);
        assert!((w[1] - 1.0 / (1.0 + a)).abs() < 1e-15);
    }

    #[test]
    fn clipped_step_example() {
        // N=3, S=1, T=10: floor 1/30, eta 1, perturbed loss (10, 0, 0).
        let floor = ClippedDistribution::switching_floor(3, 10, 1).unwrap();
        let mut l = zero_noise(3, floor, 1.0);
        l.update_with(&[10.0, 0.0, 0.0]).unwrap();
        let w = l.distribution().weights();
        assert!((w[0] - 1.0 / 30.0).abs() < 1e-15);
        assert!((w[1] - (1.0 - 1.0 / 30.0) / 2.0).abs() < 1e-15);
        assert_eq!(w[1], w[2]);
    }

    #[test]
    fn defaults() {
        let eta = NoisyMwa::default_eta(10, 100_000, 4, 1.0).unwrap();
        assert!((eta - (4.0 / (1e5 * (1e6f64).ln())).sqrt()).abs() < 1e-15);
        assert_eq!(NoisyMwa::default_floor(10, 100, 4).unwrap(), 0.004);
        assert_eq!(NoisyMwa::default_floor(10, 100, 0).unwrap(), 1e-5);
        assert!(NoisyMwa::default_floor(10, 100, 101).is_err());
    }

    #[test]
    fn noiseless_tiny_floor_reproduces_mwa() {
        let eta = 0.3;
        let mut noisy = NoisyMwa::with_floor(
            4,
            1e-300,
            1.0,
            eta,
            ChaCha8Rng::seed_from_u64(42),
            Noise::zero(),
        )
        .unwrap();
        let mut plain = Mwa::new(4, eta, ChaCha8Rng::seed_from_u64(42)).unwrap();
        let mut gen = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..500 {
            use rand::Rng;
            let loss = LossVector::new((0..4).map(|_| gen.gen::<f64>()).collect()).unwrap();
            assert_eq!(noisy.select().unwrap(), plain.select().unwrap());
            noisy.observe(&loss).unwrap();
            plain.observe(&loss).unwrap();
            assert_eq!(noisy.distribution().weights(), plain.weights());
        }
    }

    #[test]
    fn one_charge_per_round() {
        let mut l = NoisyMwa::new(
            5,
            50,
            2,
            0.7,
            None,
            ChaCha8Rng::seed_from_u64(1),
            Noise::laplace(ChaCha8Rng::seed_from_u64(2)),
        )
        .unwrap();
        for _ in 0..50 {
            l.select().unwrap();
            l.observe(&LossVector::zeros(5)).unwrap();
            let w = l.distribution().weights();
            assert!(w.iter().all(|x| *x >= l.distribution().floor()));
            assert!((w.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        }
        let rounds = l.ledger().by_round();
        assert_eq!(rounds.len(), 50);
        assert!(rounds.values().all(|c| c.len() == 1 && c[0].epsilon == 0.7));
    }
}
