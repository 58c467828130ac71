use rand::Rng;

use crate::{Error, Result};

const SUM_TOLERANCE: f64 = 1e-12;

fn check_simplex(weights: &[f64]) -> Result<()> {
    if weights.is_empty() {
        return Err(Error::arg("distribution over zero experts"));
    }
    if weights.iter().any(|w| !(*w >= 0.0) || !w.is_finite()) {
        return Err(Error::arg(
            "distribution weights must be finite and nonnegative",
        ));
    }
    let sum: f64 = weights.iter().sum();
    if (sum - 1.0).abs() > SUM_TOLERANCE {
        return Err(Error::arg(format!("distribution sums to {sum}, not 1")));
    }
    Ok(())
}

/// Draws an index from `weights` by inversion. Weights need not be normalised.
pub(crate) fn sample_index<R: Rng + ?Sized>(weights: &[f64], rng: &mut R) -> usize {
    let total: f64 = weights.iter().sum();
    let u: f64 = rng.gen::<f64>() * total;
    let mut acc = 0.0;
    for (i, w) in weights.iter().enumerate() {
        acc += w;
        if u < acc {
            return i;
        }
    }
    weights
        .iter()
        .rposition(|w| *w > 0.0)
        .unwrap_or(weights.len() - 1)
}

/// A probability vector over experts.
#[derive(Debug, Clone, PartialEq)]
pub struct ExpertDistribution {
    weights: Vec<f64>,
}

impl ExpertDistribution {
    pub fn new(weights: Vec<f64>) -> Result<Self> {
        check_simplex(&weights)?;
        Ok(Self { weights })
    }

    pub fn uniform(n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::arg("distribution over zero experts"));
        }
        Ok(Self {
            weights: vec![1.0 / n as f64; n],
        })
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> usize {
        sample_index(&self.weights, rng)
    }

    pub(crate) fn from_normalized_unchecked(weights: Vec<f64>) -> Self {
        Self { weights }
    }
}

/// A probability vector with every coordinate at least `floor`.
#[derive(Debug, Clone, PartialEq)]
pub struct ClippedDistribution {
    weights: Vec<f64>,
    floor: f64,
}

impl ClippedDistribution {
    pub fn new(weights: Vec<f64>, floor: f64) -> Result<Self> {
        Self::check_floor(weights.len(), floor)?;
        check_simplex(&weights)?;
        if let Some(w) = weights.iter().find(|w| **w < floor) {
            return Err(Error::arg(format!("weight {w} below floor {floor}")));
        }
        Ok(Self { weights, floor })
    }

    pub fn uniform(n: usize, floor: f64) -> Result<Self> {
        Self::check_floor(n, floor)?;
        Ok(Self {
            weights: vec![1.0 / n as f64; n],
            floor,
        })
    }

    /// The floor `S / (N T)` of the clipped simplex. Needs `1 <= S <= T`.
    pub fn switching_floor(n: usize, horizon: usize, switches: usize) -> Result<f64> {
        if n == 0 || horizon == 0 {
            return Err(Error::arg("clipped simplex needs N >= 1 and T >= 1"));
        }
        if switches == 0 {
            return Err(Error::arg("floor S/(NT) is zero for S = 0"));
        }
        if switches > horizon {
            return Err(Error::arg(format!(
                "S = {switches} exceeds T = {horizon}: floor S/(NT) would not fit on the simplex"
            )));
        }
        Ok(switches as f64 / (n as f64 * horizon as f64))
    }

    fn check_floor(n: usize, floor: f64) -> Result<()> {
        if n == 0 {
            return Err(Error::arg("distribution over zero experts"));
        }
        if !(floor > 0.0 && floor.is_finite()) {
            return Err(Error::arg(format!(
                "clip floor must be positive, got {floor}"
            )));
        }
        if n as f64 * floor > 1.0 + SUM_TOLERANCE {
            return Err(Error::arg(format!(
                "N * floor = {} exceeds 1",
                n as f64 * floor
            )));
        }
        Ok(())
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn floor(&self) -> f64 {
        self.floor
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> usize {
        sample_index(&self.weights, rng)
    }

    pub fn as_distribution(&self) -> ExpertDistribution {
        ExpertDistribution::from_normalized_unchecked(self.weights.clone())
    }

    pub(crate) fn from_parts_unchecked(weights: Vec<f64>, floor: f64) -> Self {
        Self { weights, floor }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn simplex_checks() {
        assert!(ExpertDistribution::new(vec![0.5, 0.5]).is_ok());
        assert!(ExpertDistribution::new(vec![0.5, 0.6]).is_err());
        assert!(ExpertDistribution::new(vec![1.5, -0.5]).is_err());
        assert!(ClippedDistribution::new(vec![0.9, 0.1], 0.1).is_ok());
        assert!(ClippedDistribution::new(vec![0.95, 0.05], 0.1).is_err());
        assert!(ClippedDistribution::uniform(4, 0.3).is_err());
    }

    #[test]
    fn switching_floor_rejects_s_above_t() {
        assert_eq!(
            ClippedDistribution::switching_floor(10, 100, 4).unwrap(),
            0.004
        );
        assert!(ClippedDistribution::switching_floor(10, 100, 101).is_err());
        assert!(ClippedDistribution::switching_floor(10, 100, 100).is_ok());
        assert!(ClippedDistribution::switching_floor(10, 100, 0).is_err());
    }

    #[test]
    fn sampling_frequencies() {
        let d = ExpertDistribution::new(vec![0.2, 0.0, 0.8]).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let mut hits = [0usize; 3];
        for _ in 0..100_000 {
            hits[d.sample(&mut rng)] += 1;
        }
        assert_eq!(hits[1], 0);
        assert!((hits[0] as f64 / 100_000.0 - 0.2).abs() < 0.01);
    }
}
