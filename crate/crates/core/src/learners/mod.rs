//! Online learners over `N` experts with full-information feedback.
//!
//! Every learner alternates [`Learner::select`] (play round `t`) and
//! [`Learner::observe`] (receive the loss vector of round `t`). Calling them
//! out of order is a state error.

mod lazy_rnm;
mod meta;
mod mwa;
mod noisy_mwa;
mod projection;
mod svt_restart;

pub use lazy_rnm::LazyRnm;
pub use meta::{
    enumerate_meta_experts, meta_expert_count, FollowTheLeader, HindsightLeader, MetaExpert,
    MetaReduction, DEFAULT_META_CAP,
};
pub use mwa::{exponential_weights, Mwa};
pub use noisy_mwa::NoisyMwa;
pub use projection::kl_project_clipped;
pub use svt_restart::{ProbeMode, RegEpsilon, SvtRestart, SvtRestartConfig};

use crate::experts::LossVector;
use crate::mechanisms::BudgetLedger;
use crate::{Error, Result};

/// What happened while observing one round.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct Observation {
    /// The learner discarded its state and starts a fresh segment next round.
    pub restarted: bool,
}

pub trait Learner: Send {
    fn num_experts(&self) -> usize;

    /// Expert to play in the next round.
    fn select(&mut self) -> Result<usize>;

    /// Loss vector of the round just played.
    fn observe(&mut self, loss: &LossVector) -> Result<Observation>;

    /// Privacy charges so far, keyed by the round whose loss was read.
    fn ledger(&self) -> &BudgetLedger;

    /// Number of completed rounds.
    fn rounds(&self) -> usize;
}

impl<L: Learner + ?Sized> Learner for Box<L> {
    fn num_experts(&self) -> usize {
        (**self).num_experts()
    }

    fn select(&mut self) -> Result<usize> {
        (**self).select()
    }

    fn observe(&mut self, loss: &LossVector) -> Result<Observation> {
        (**self).observe(loss)
    }

    fn ledger(&self) -> &BudgetLedger {
        (**self).ledger()
    }

    fn rounds(&self) -> usize {
        (**self).rounds()
    }
}

/// Tracks the select/observe alternation shared by all learners.
#[derive(Debug, Clone, Copy, Default)]
pub(crate) struct RoundClock {
    completed: usize,
    selected: bool,
}

impl RoundClock {
    /// Starts the next round and returns its one-based index.
    pub(crate) fn begin(&mut self) -> Result<usize> {
        if self.selected {
            return Err(Error::state(format!(
                "round {} already selected; observe its loss first",
                self.completed + 1
            )));
        }
        self.selected = true;
        Ok(self.completed + 1)
    }

    /// Closes the current round and returns its index.
    pub(crate) fn end(&mut self) -> Result<usize> {
        if !self.selected {
            return Err(Error::state(format!(
                "no expert selected for round {}",
                self.completed + 1
            )));
        }
        self.selected = false;
        self.completed += 1;
        Ok(self.completed)
    }

    pub(crate) fn completed(&self) -> usize {
        self.completed
    }
}

pub(crate) fn check_loss_len(loss: &LossVector, n: usize) -> Result<()> {
    if loss.len() != n {
        return Err(Error::arg(format!(
            "loss vector has {} entries, learner has {n} experts",
            loss.len()
        )));
    }
    Ok(())
}
