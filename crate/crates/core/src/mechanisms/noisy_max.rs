use crate::mechanisms::Noise;
use crate::{Error, Result};

/// Report-noisy-min: `argmin_i counts[i] + Z_i` with `Z_i ~ Laplace(2/epsilon)`.
///
/// Each count must be 1-sensitive. Ties after noise go to the lowest index.
pub fn report_noisy_argmin(counts: &[f64], epsilon: f64, noise: &mut Noise) -> Result<usize> {
    if counts.is_empty() {
        return Err(Error::arg("report_noisy_argmin needs at least one count"));
    }
    if !(epsilon > 0.0) {
        return Err(Error::arg(format!(
            "epsilon must be positive, got {epsilon}"
        )));
    }
    let scale = 2.0 / epsilon;
    let mut best = 0;
    let mut best_value = f64::INFINITY;
    for (i, &c) in counts.iter().enumerate() {
        let v = c + noise.sample(scale)?;
        if v < best_value {
            best = i;
            best_value = v;
        }
    }
    Ok(best)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn noiseless_is_argmin() {
        let mut zero = Noise::zero();
        assert_eq!(
            report_noisy_argmin(&[0.0, 100.0], 1.0, &mut zero).unwrap(),
            0
        );
        assert_eq!(
            report_noisy_argmin(&[3.0, 1.0, 1.0], 1.0, &mut zero).unwrap(),
            1
        );
    }

    #[test]
    fn empty_counts_rejected() {
        assert!(report_noisy_argmin(&[], 1.0, &mut Noise::zero()).is_err());
        assert!(report_noisy_argmin(&[1.0], 0.0, &mut Noise::zero()).is_err());
    }

    #[test]
    fn symmetric_counts_are_uniform() {
        let mut noise = Noise::laplace(ChaCha8Rng::seed_from_u64(5));
        let n = 300_000;
        let mut hits = [0usize; 3];
        for _ in 0..n {
            hits[report_noisy_argmin(&[0.0, 0.0, 0.0], 1.0, &mut noise).unwrap()] += 1;
        }
        for h in hits {
            assert!((h as f64 / n as f64 - 1.0 / 3.0).abs() < 0.01);
        }
    }
}
