use rand::Rng;
use rand_chacha::ChaCha8Rng;

use crate::mechanisms::BudgetLedger;
use crate::{Error, Result};

/// Draws from `Laplace(scale)`, density `exp(-|x|/scale) / (2 scale)`.
pub fn laplace_sample<R: Rng + ?Sized>(scale: f64, rng: &mut R) -> Result<f64> {
    if !(scale > 0.0 && scale.is_finite()) {
        return Err(Error::arg(format!(
            "Laplace scale must be positive, got {scale}"
        )));
    }
    // u is uniform on the open interval (0, 1).
    let u = loop {
        let u: f64 = rng.gen();
        if u > 0.0 {
            break u;
        }
    };
    Ok(if u < 0.5 {
        scale * (2.0 * u).ln()
    } else {
        -scale * (2.0 * (1.0 - u)).ln()
    })
}

/// Whether a mechanism draws real noise or runs its noiseless functional.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum NoiseMode {
    #[default]
    Laplace,
    /// Replaces every draw with 0. For deterministic tests only; the
    /// experiment config has no way to select it.
    Zero,
}

/// A Laplace noise stream owned by one mechanism instance.
#[derive(Debug, Clone)]
pub struct Noise {
    rng: ChaCha8Rng,
    mode: NoiseMode,
}

impl Noise {
    pub fn new(rng: ChaCha8Rng, mode: NoiseMode) -> Self {
        Self { rng, mode }
    }

    pub fn laplace(rng: ChaCha8Rng) -> Self {
        Self::new(rng, NoiseMode::Laplace)
    }

    pub fn zero() -> Self {
        use rand::SeedableRng;
        Self::new(ChaCha8Rng::seed_from_u64(0), NoiseMode::Zero)
    }

    pub fn mode(&self) -> NoiseMode {
        self.mode
    }

    pub fn sample(&mut self, scale: f64) -> Result<f64> {
        match self.mode {
            NoiseMode::Laplace => laplace_sample(scale, &mut self.rng),
            NoiseMode::Zero => {
                if !(scale > 0.0) {
                    return Err(Error::arg(format!(
                        "Laplace scale must be positive, got {scale}"
                    )));
                }
                Ok(0.0)
            }
        }
    }
}

/// Releases `value + Laplace(sensitivity / epsilon)`.
///
/// When a ledger is attached the release is charged `(epsilon, 0)` against
/// `round` under `mechanism`.
pub fn laplace_mechanism(
    value: f64,
    sensitivity: f64,
    epsilon: f64,
    noise: &mut Noise,
    ledger: Option<(&mut BudgetLedger, usize, &str)>,
) -> Result<f64> {
    if !(sensitivity > 0.0) {
        return Err(Error::arg(format!(
            "sensitivity must be positive, got {sensitivity}"
        )));
    }
    if !(epsilon > 0.0) {
        return Err(Error::arg(format!(
            "epsilon must be positive, got {epsilon}"
        )));
    }
    let z = noise.sample(sensitivity / epsilon)?;
    if let Some((ledger, round, mechanism)) = ledger {
        ledger.charge(round, mechanism, epsilon);
    }
    Ok(value + z)
}
