//! Differentially private prediction with expert advice, measured by dynamic
//! regret against comparators that may switch experts up to `S` times.
//!
//! The crate is organised bottom-up:
//!
//! * [`mechanisms`]: Laplace noise, report-noisy-argmin, AboveThreshold and the
//!   binary-tree counter, plus the per-round [`BudgetLedger`](mechanisms::BudgetLedger).
//! * [`experts`]: loss vectors and matrices, distributions over experts, the
//!   exact switching comparator and regret traces.
//! * [`learners`]: the lazy report-noisy-argmin learner, its SVT restart
//!   wrapper, noisy mirror descent on the clipped simplex, the meta-expert
//!   reduction and a non-private multiplicative-weights baseline.
//! * [`adversaries`]: shifting stochastic, oblivious and adaptive loss
//!   generators.
//! * [`harness`]: seeded trials, batches, reports and the budget audit used by
//!   the `privtrack` binary.

// `!(x > 0.0)` guards deliberately reject NaN as well.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod adversaries;
pub mod error;
pub mod experts;
pub mod harness;
pub mod learners;
pub mod mechanisms;
pub mod rng;

pub use error::{Error, Result};
