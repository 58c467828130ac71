//! Batch experiments: config parsing, seeded trials, aggregation and the
//! privacy-budget audit.

mod audit;
mod config;
mod run;

pub use audit::{audit_budget, audit_dir, AuditFinding, AuditReport, DirectoryAudit};
pub use config::{AdversaryConfig, LearnerId, RunConfig, OUTPUT_ROOT_ENV};
pub use run::{
    aggregate, build_adversary, build_learner, curve_file, ledger_file, play, run_batch, run_trial,
    run_trials, trace_file, write_outputs, AggregateReport, BoundReference, TrialOutput,
    TrialSummary, CODE_VERSION, CONFIG_FILE, REPORT_FILE,
};
