//! Loss generators for stochastic, oblivious and adaptive adversaries.
//!
//! An adversary sees only the learner's realised plays `J_1, ..., J_{t-1}`;
//! the learner's distribution is never part of its input.

mod adaptive;
mod oblivious;
mod stochastic;

pub use adaptive::{AdaptiveSpec, WindowPunisher};
pub use oblivious::{ObliviousAdversary, ObliviousSpec};
pub use stochastic::{Marginals, ShiftingStochastic, ShiftingStochasticSpec};

use crate::experts::LossVector;
use crate::{Error, Result};

pub trait Adversary: Send {
    fn horizon(&self) -> usize;

    fn num_experts(&self) -> usize;

    /// Loss vector of round `t` (one-based) given the plays of rounds `1..t`.
    fn next_loss(&mut self, t: usize, history: &[usize]) -> Result<LossVector>;

    /// Whether the loss-generating process changes at round `t`.
    fn is_shift(&self, _t: usize) -> bool {
        false
    }
}

pub(crate) fn check_round(t: usize, horizon: usize) -> Result<()> {
    if t == 0 || t > horizon {
        return Err(Error::arg(format!(
            "round {t} outside horizon 1..={horizon}"
        )));
    }
    Ok(())
}
