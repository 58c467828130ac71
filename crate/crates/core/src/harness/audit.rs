use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::harness::config::{LearnerId, RunConfig};
use crate::harness::run::{ledger_file, CONFIG_FILE};
use crate::mechanisms::{BudgetLedger, Charge};
use crate::{Error, Result};

// Charges are compared with a relative slack to absorb `eps / 2` rounding.
const SLACK: f64 = 1e-12;

/// Findings beyond this many are counted but not listed.
const MAX_LISTED: usize = 100;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AuditFinding {
    pub round: usize,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AuditReport {
    pub learner: LearnerId,
    pub epsilon: f64,
    pub horizon: usize,
    pub charges: usize,
    pub max_round_epsilon: f64,
    pub passed: bool,
    pub violations: usize,
    pub findings: Vec<AuditFinding>,
}

fn approx(a: f64, b: f64) -> bool {
    (a - b).abs() <= SLACK * b.abs().max(1.0)
}

fn family(c: &Charge) -> &str {
    let end = c
        .mechanism
        .find(|ch: char| ch.is_ascii_digit())
        .unwrap_or(c.mechanism.len());
    &c.mechanism[..end]
}

/// Checks the per-round charge pattern each learner is allowed:
///
/// * `lazy-rnm`: at most one `rnm` charge of `eps`;
/// * `svt-restart`: at most one `rnm` and one `svt` charge, each `eps / 2`;
/// * `noisy-mwa`, `meta-reduction`: exactly one `laplace-vector` charge of
///   `eps`, every round;
/// * `mwa`: nothing.
///
/// In every case the per-round total must not exceed `eps` and charged rounds
/// must lie in `1..=T`.
pub fn audit_budget(ledger: &BudgetLedger, config: &RunConfig) -> AuditReport {
    let eps = config.epsilon;
    let mut findings = Vec::new();
    let mut flag = |round: usize, message: String| findings.push(AuditFinding { round, message });
    let by_round = ledger.by_round();
    let mut max_round_epsilon: f64 = 0.0;

    for (&round, charges) in &by_round {
        if round == 0 || round > config.horizon {
            flag(round, format!("round outside 1..={}", config.horizon));
        }
        let total: f64 = charges.iter().map(|c| c.epsilon).sum();
        max_round_epsilon = max_round_epsilon.max(total);
        if total > eps * (1.0 + SLACK) {
            flag(round, format!("total charge {total} exceeds epsilon {eps}"));
        }
        let mut counts: BTreeMap<&str, usize> = BTreeMap::new();
        for c in charges {
            *counts.entry(family(c)).or_default() += 1;
        }
        let allowed: &[(&str, f64)] = match config.learner {
            LearnerId::LazyRnm => &[("rnm", eps)],
            LearnerId::SvtRestart => &[("rnm", eps / 2.0), ("svt", eps / 2.0)],
            LearnerId::NoisyMwa | LearnerId::MetaReduction => &[("laplace-vector", eps)],
            LearnerId::Mwa => &[],
        };
        for (name, count) in &counts {
            match allowed.iter().find(|(a, _)| a == name) {
                None => flag(round, format!("unexpected mechanism `{name}`")),
                Some(_) if *count > 1 => flag(round, format!("{count} `{name}` charges")),
                Some(_) => {}
            }
        }
        for c in charges.iter() {
            if let Some((_, expected)) = allowed.iter().find(|(a, _)| *a == family(c)) {
                if !approx(c.epsilon, *expected) {
                    flag(
                        round,
                        format!(
                            "`{}` charged {} instead of {expected}",
                            c.mechanism, c.epsilon
                        ),
                    );
                }
            }
        }
    }

    if matches!(
        config.learner,
        LearnerId::NoisyMwa | LearnerId::MetaReduction
    ) {
        for round in 1..=config.horizon {
            if !by_round.contains_key(&round) {
                flag(round, "no laplace-vector charge".into());
            }
        }
    }

    findings.sort_by_key(|f| f.round);
    let violations = findings.len();
    findings.truncate(MAX_LISTED);
    AuditReport {
        learner: config.learner,
        epsilon: eps,
        horizon: config.horizon,
        charges: ledger.len(),
        max_round_epsilon,
        passed: violations == 0,
        violations,
        findings,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DirectoryAudit {
    pub config_hash: String,
    pub passed: bool,
    /// `(ledger file, report)` per trial.
    pub trials: Vec<(String, AuditReport)>,
}

/// Audits every `ledger_k.json` of a run directory against its `config.toml`.
pub fn audit_dir(dir: &Path) -> Result<DirectoryAudit> {
    let config = RunConfig::load(&dir.join(CONFIG_FILE))?;
    let mut trials = Vec::new();
    for k in 0.. {
        let name = ledger_file(k);
        let path = dir.join(&name);
        if !path.exists() {
            break;
        }
        let ledger = BudgetLedger::from_json(&std::fs::read_to_string(&path)?)?;
        trials.push((name, audit_budget(&ledger, &config)));
    }
    if trials.is_empty() {
        return Err(Error::Config(format!(
            "no ledger files in {}",
            dir.display()
        )));
    }
    Ok(DirectoryAudit {
        config_hash: config.hash(),
        passed: trials.iter().all(|(_, r)| r.passed),
        trials,
    })
}
