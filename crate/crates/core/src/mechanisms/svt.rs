use crate::mechanisms::Noise;
use crate::{Error, Result};

/// AboveThreshold with threshold 0.
///
/// The threshold is perturbed once at construction with `Laplace(2/epsilon)`
/// and every query with a fresh `Laplace(4/epsilon)`. The instance halts on
/// the first above-threshold answer; later queries are a state error.
///
/// With probability at least `1 - beta`, every `false` answer was for a query
/// with value at most `alpha` and the `true` answer (if any) was for a query
/// with value at least `-alpha`, where
/// `alpha = 8 (ln horizon + ln(2/beta)) / epsilon`.
#[derive(Debug, Clone)]
pub struct AboveThreshold {
    epsilon: f64,
    beta: f64,
    horizon: usize,
    noisy_threshold: f64,
    alpha: f64,
    halted: bool,
    queries: usize,
    noise: Noise,
}

impl AboveThreshold {
    pub fn new(epsilon: f64, beta: f64, horizon: usize, mut noise: Noise) -> Result<Self> {
        if !(epsilon > 0.0 && epsilon.is_finite()) {
            return Err(Error::arg(format!(
                "SVT epsilon must be positive, got {epsilon}"
            )));
        }
        if !(beta > 0.0 && beta < 1.0) {
            return Err(Error::arg(format!(
                "SVT beta must lie in (0, 1), got {beta}"
            )));
        }
        if horizon == 0 {
            return Err(Error::arg("SVT horizon must be at least 1"));
        }
        let noisy_threshold = noise.sample(2.0 / epsilon)?;
        Ok(Self {
            epsilon,
            beta,
            horizon,
            noisy_threshold,
            alpha: Self::accuracy(epsilon, beta, horizon),
            halted: false,
            queries: 0,
            noise,
        })
    }

    /// `8 (ln horizon + ln(2/beta)) / epsilon`.
    pub fn accuracy(epsilon: f64, beta: f64, horizon: usize) -> f64 {
        8.0 * ((horizon as f64).ln() + (2.0 / beta).ln()) / epsilon
    }

    /// Tests whether a 1-sensitive query is above threshold. Halts on `true`.
    pub fn test(&mut self, query: f64) -> Result<bool> {
        if self.halted {
            return Err(Error::state("AboveThreshold already halted"));
        }
        self.queries += 1;
        let nu = self.noise.sample(4.0 / self.epsilon)?;
        let above = query + nu >= self.noisy_threshold;
        if above {
            self.halted = true;
        }
        Ok(above)
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn horizon(&self) -> usize {
        self.horizon
    }

    pub fn is_halted(&self) -> bool {
        self.halted
    }

    pub fn queries(&self) -> usize {
        self.queries
    }

    pub fn noisy_threshold(&self) -> f64 {
        self.noisy_threshold
    }
}
