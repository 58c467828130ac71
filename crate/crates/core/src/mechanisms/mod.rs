//! Differentially private primitives shared by the learners.

mod ledger;
mod noise;
mod noisy_max;
mod svt;
mod tree;

pub use ledger::{BudgetLedger, Charge, PrivacyBudget};
pub use noise::{laplace_mechanism, laplace_sample, Noise, NoiseMode};
pub use noisy_max::report_noisy_argmin;
pub use svt::AboveThreshold;
pub use tree::TreeCounter;
