use crate::adversaries::{check_round, Adversary};
use crate::experts::{LossMatrix, LossVector};
use crate::{Error, Result};

/// Loss sequences fixed before play.
#[derive(Debug, Clone, PartialEq)]
pub enum ObliviousSpec {
    /// Replay of a stored `T x N` matrix.
    Matrix(LossMatrix),
    /// `phases` equal blocks; in block `s` expert `s mod N` has loss `low`
    /// and every other expert `low + gap`.
    Rotation {
        horizon: usize,
        experts: usize,
        phases: usize,
        gap: f64,
        low: f64,
    },
}

impl ObliviousSpec {
    pub fn rotation(horizon: usize, experts: usize, phases: usize, gap: f64) -> Result<Self> {
        let spec = ObliviousSpec::Rotation {
            horizon,
            experts,
            phases,
            gap,
            low: 0.5 - gap / 2.0,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        if let ObliviousSpec::Rotation {
            horizon,
            experts,
            phases,
            gap,
            low,
        } = *self
        {
            if horizon == 0 || experts == 0 {
                return Err(Error::arg("rotation needs T >= 1 and N >= 1"));
            }
            if phases == 0 || phases > horizon {
                return Err(Error::arg("rotation needs between 1 and T phases"));
            }
            if experts < 2 && phases > 1 {
                return Err(Error::arg("rotation needs at least two experts"));
            }
            if !(0.0..=1.0).contains(&low) || !(0.0..=1.0).contains(&(low + gap)) || gap < 0.0 {
                return Err(Error::arg(
                    "rotation losses must lie in [0, 1] with gap >= 0",
                ));
            }
        }
        Ok(())
    }

    pub fn horizon(&self) -> usize {
        match self {
            ObliviousSpec::Matrix(m) => m.rounds(),
            ObliviousSpec::Rotation { horizon, .. } => *horizon,
        }
    }

    pub fn num_experts(&self) -> usize {
        match self {
            ObliviousSpec::Matrix(m) => m.experts(),
            ObliviousSpec::Rotation { experts, .. } => *experts,
        }
    }

    /// Zero-based phase of round `t` for the rotation generator.
    pub fn phase_at(&self, t: usize) -> usize {
        match *self {
            ObliviousSpec::Matrix(_) => 0,
            ObliviousSpec::Rotation {
                horizon, phases, ..
            } => ((t - 1) * phases) / horizon,
        }
    }

    /// Loss of round `t`, independent of any play.
    pub fn loss(&self, t: usize) -> Result<LossVector> {
        check_round(t, self.horizon())?;
        match *self {
            ObliviousSpec::Matrix(ref m) => Ok(m.loss_vector(t - 1)),
            ObliviousSpec::Rotation {
                experts, gap, low, ..
            } => {
                let best = self.phase_at(t) % experts;
                LossVector::new(
                    (0..experts)
                        .map(|j| if j == best { low } else { low + gap })
                        .collect(),
                )
            }
        }
    }

    /// Materialises the whole sequence.
    pub fn to_matrix(&self) -> Result<LossMatrix> {
        match self {
            ObliviousSpec::Matrix(m) => Ok(m.clone()),
            ObliviousSpec::Rotation { .. } => LossMatrix::from_rows(
                (1..=self.horizon())
                    .map(|t| self.loss(t))
                    .collect::<Result<_>>()?,
            ),
        }
    }
}

#[derive(Debug, Clone)]
pub struct ObliviousAdversary {
    spec: ObliviousSpec,
}

impl ObliviousAdversary {
    pub fn new(spec: ObliviousSpec) -> Result<Self> {
        spec.validate()?;
        Ok(Self { spec })
    }

    pub fn spec(&self) -> &ObliviousSpec {
        &self.spec
    }
}

impl Adversary for ObliviousAdversary {
    fn horizon(&self) -> usize {
        self.spec.horizon()
    }

    fn num_experts(&self) -> usize {
        self.spec.num_experts()
    }

    fn next_loss(&mut self, t: usize, _history: &[usize]) -> Result<LossVector> {
        self.spec.loss(t)
    }

    fn is_shift(&self, t: usize) -> bool {
        matches!(self.spec, ObliviousSpec::Rotation { .. })
            && t > 1
            && self.spec.phase_at(t) != self.spec.phase_at(t - 1)
    }
}
