use crate::mechanisms::Noise;
use crate::{Error, Result};

/// Binary-tree counter releasing private prefix sums of a stream in `[0, 1]`.
///
/// Node `(level, k)` covers rounds `k 2^level + 1 ..= (k + 1) 2^level`. Every
/// node gets one `Laplace(levels / epsilon)` draw at construction, where
/// `levels = ceil(log2 horizon) + 1`, so each element touches exactly one
/// node per level. The release at `t` adds the noise of the dyadic nodes
/// whose union is `1..=t`.
#[derive(Debug, Clone)]
pub struct TreeCounter {
    horizon: usize,
    epsilon: f64,
    levels: usize,
    node_noise: Vec<Vec<f64>>,
    prefix: Vec<f64>,
}

impl TreeCounter {
    pub fn new(horizon: usize, epsilon: f64, mut noise: Noise) -> Result<Self> {
        if horizon == 0 {
            return Err(Error::arg("tree counter horizon must be at least 1"));
        }
        if !(epsilon > 0.0 && epsilon.is_finite()) {
            return Err(Error::arg(format!(
                "epsilon must be positive, got {epsilon}"
            )));
        }
        let levels = Self::levels_for(horizon);
        let scale = levels as f64 / epsilon;
        let node_noise = (0..levels)
            .map(|level| {
                let width = 1usize << level;
                let nodes = horizon.div_ceil(width);
                (0..nodes)
                    .map(|_| noise.sample(scale))
                    .collect::<Result<Vec<_>>>()
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            horizon,
            epsilon,
            levels,
            node_noise,
            prefix: vec![0.0],
        })
    }

    /// `ceil(log2 horizon) + 1`.
    pub fn levels_for(horizon: usize) -> usize {
        let mut levels = 1;
        while (1usize << (levels - 1)) < horizon {
            levels += 1;
        }
        levels
    }

    /// Feeds `a_t` and returns the private prefix sum `c_t`.
    pub fn add(&mut self, value: f64) -> Result<f64> {
        if !(0.0..=1.0).contains(&value) {
            return Err(Error::arg(format!(
                "stream values must lie in [0, 1], got {value}"
            )));
        }
        if self.len() >= self.horizon {
            return Err(Error::state(format!(
                "tree counter overflow: horizon {} already consumed",
                self.horizon
            )));
        }
        let last = *self.prefix.last().expect("prefix starts with 0");
        self.prefix.push(last + value);
        self.release(self.len())
    }

    /// Replays the release for an already consumed round `t`.
    pub fn release(&self, t: usize) -> Result<f64> {
        if t == 0 || t > self.len() {
            return Err(Error::state(format!(
                "round {t} not released yet (consumed {})",
                self.len()
            )));
        }
        Ok(self.prefix[t] + self.noise_at(t))
    }

    /// Total node noise covering `1..=t`.
    pub fn noise_at(&self, t: usize) -> f64 {
        self.covering_nodes(t)
            .map(|(level, k)| self.node_noise[level][k])
            .sum()
    }

    /// Dyadic nodes `(level, index)` whose union is `1..=t`, highest level first.
    pub fn covering_nodes(&self, t: usize) -> impl Iterator<Item = (usize, usize)> {
        (0..self.levels)
            .rev()
            .filter(move |&level| (t >> level) & 1 == 1)
            .map(move |level| (level, (t >> level) - 1))
    }

    pub fn len(&self) -> usize {
        self.prefix.len() - 1
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn horizon(&self) -> usize {
        self.horizon
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    pub fn levels(&self) -> usize {
        self.levels
    }

    /// Exact (non-private) prefix sum, for evaluation.
    pub fn true_sum(&self, t: usize) -> f64 {
        self.prefix[t]
    }
}
