use std::fs::File;
use std::io::BufWriter;
use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::adversaries::{
    Adversary, ObliviousAdversary, ObliviousSpec, ShiftingStochastic, ShiftingStochasticSpec,
    WindowPunisher,
};
use crate::experts::{regret_finalize, LossMatrix, RegretTrace};
use crate::harness::config::{AdversaryConfig, LearnerId, RunConfig};
use crate::learners::{
    enumerate_meta_experts, LazyRnm, Learner, MetaReduction, Mwa, NoisyMwa, SvtRestart,
    SvtRestartConfig,
};
use crate::mechanisms::{BudgetLedger, Noise};
use crate::rng::{purpose, SeedStream};
use crate::{Error, Result};

/// Identifies the code that produced a report.
pub const CODE_VERSION: &str = concat!(env!("CARGO_PKG_NAME"), "-", env!("CARGO_PKG_VERSION"));

/// One finished trial.
#[derive(Debug, Clone)]
pub struct TrialOutput {
    pub seed: u64,
    pub trace: RegretTrace,
    pub ledger: BudgetLedger,
}

impl TrialOutput {
    pub fn dynamic_regret(&self) -> f64 {
        self.trace.dynamic_regret().expect("finalized trace")
    }

    /// Regret of the first `floor(T / 2)` rounds against the best comparator
    /// on that prefix, when the per-round oracle was on.
    pub fn regret_at_half(&self) -> Option<f64> {
        let curve = self.trace.regret_curve()?;
        let half = curve.len() / 2;
        (half >= 1).then(|| curve[half - 1])
    }
}

pub fn build_learner(config: &RunConfig, seed: u64) -> Result<Box<dyn Learner>> {
    config.validate()?;
    let streams = SeedStream::new(seed);
    let select = streams.rng(purpose::SELECTION, 0);
    let noise = Noise::new(streams.rng(purpose::NOISE, 0), config.noise);
    let (n, horizon) = (config.experts, config.horizon);
    Ok(match config.learner {
        LearnerId::LazyRnm => Box::new(LazyRnm::new(n, config.epsilon, select, noise)?),
        LearnerId::SvtRestart => {
            let mut c = SvtRestartConfig::new(n, horizon, config.epsilon, config.beta());
            c.probe = config.probe;
            c.reg_epsilon = config.reg_epsilon;
            c.noise = config.noise;
            Box::new(SvtRestart::new(c, streams.child(purpose::SVT, 0).seed())?)
        }
        LearnerId::NoisyMwa => Box::new(NoisyMwa::new(
            n,
            horizon,
            config.switches,
            config.epsilon,
            config.eta,
            select,
            noise,
        )?),
        LearnerId::Mwa => Box::new(Mwa::new(
            n,
            config.eta.unwrap_or_else(|| Mwa::default_eta(n, horizon)),
            select,
        )?),
        LearnerId::MetaReduction => {
            let metas =
                enumerate_meta_experts(horizon, n, config.switches, config.meta_cap as u128)?;
            // The meta-experts already absorb the switches; the base competes
            // with a fixed meta-expert.
            let base = NoisyMwa::new(
                metas.len(),
                horizon,
                1,
                config.epsilon,
                config.eta,
                select,
                noise,
            )?;
            Box::new(MetaReduction::new(n, metas, base)?)
        }
    })
}

pub fn build_adversary(config: &RunConfig, seed: u64) -> Result<Box<dyn Adversary>> {
    config.validate()?;
    let rng = SeedStream::new(seed).rng(purpose::ADVERSARY, 0);
    let (n, horizon, s) = (config.experts, config.horizon, config.switches);
    let adversary: Box<dyn Adversary> = match &config.adversary {
        AdversaryConfig::ShiftingBernoulli { gap, low, segments } => {
            let spec = ShiftingStochasticSpec::rotating_bernoulli(
                horizon,
                n,
                segments.unwrap_or(s + 1),
                *gap,
                low.unwrap_or(0.5 - gap / 2.0),
            )?;
            Box::new(ShiftingStochastic::new(spec, rng)?)
        }
        AdversaryConfig::Stochastic {
            segments,
            change_points,
        } => {
            let spec =
                ShiftingStochasticSpec::new(horizon, segments.clone(), change_points.clone())?;
            Box::new(ShiftingStochastic::new(spec, rng)?)
        }
        AdversaryConfig::Rotation { gap, low, phases } => {
            let spec = ObliviousSpec::Rotation {
                horizon,
                experts: n,
                phases: phases.unwrap_or(s.max(1)),
                gap: *gap,
                low: low.unwrap_or(0.5 - gap / 2.0),
            };
            Box::new(ObliviousAdversary::new(spec)?)
        }
        AdversaryConfig::Replay { losses } => {
            let m = LossMatrix::load_csv(losses)
                .map_err(|e| Error::Config(format!("{}: {e}", losses.display())))?;
            Box::new(ObliviousAdversary::new(ObliviousSpec::Matrix(m))?)
        }
        AdversaryConfig::WindowPunisher { window } => {
            Box::new(WindowPunisher::new(horizon, n, *window)?)
        }
    };
    if adversary.horizon() != horizon || adversary.num_experts() != n {
        return Err(Error::Config(format!(
            "adversary is {} rounds x {} experts but the config says {horizon} x {n}",
            adversary.horizon(),
            adversary.num_experts()
        )));
    }
    Ok(adversary)
}

/// Plays `learner` against `adversary` for the full horizon and finalizes
/// the dynamic regret over `switches`.
pub fn play(
    learner: &mut dyn Learner,
    adversary: &mut dyn Adversary,
    switches: usize,
    per_round: bool,
) -> Result<RegretTrace> {
    let horizon = adversary.horizon();
    let mut history = Vec::with_capacity(horizon);
    let mut rows = Vec::with_capacity(horizon);
    let mut trace = RegretTrace::new();
    for t in 1..=horizon {
        let j = learner.select()?;
        let loss = adversary.next_loss(t, &history)?;
        let obs = learner.observe(&loss)?;
        trace.push(j, loss[j], obs.restarted, adversary.is_shift(t));
        history.push(j);
        rows.push(loss);
    }
    regret_finalize(trace, &LossMatrix::from_rows(rows)?, switches, per_round)
}

pub fn run_trial(config: &RunConfig, seed: u64) -> Result<TrialOutput> {
    let mut learner = build_learner(config, seed)?;
    let mut adversary = build_adversary(config, seed)?;
    let trace = play(
        learner.as_mut(),
        adversary.as_mut(),
        config.switches,
        config.per_round_oracle,
    )?;
    Ok(TrialOutput {
        seed,
        trace,
        ledger: learner.ledger().clone(),
    })
}

/// Runs trials with seeds `seed, seed + 1, ...` concurrently, in seed order.
pub fn run_trials(config: &RunConfig) -> Result<Vec<TrialOutput>> {
    config.validate()?;
    (0..config.trials as u64)
        .into_par_iter()
        .map(|k| run_trial(config, config.seed.wrapping_add(k)))
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialSummary {
    pub seed: u64,
    pub dynamic_regret: f64,
    pub cumulative_loss: f64,
    pub comparator_loss: f64,
    pub restarts: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub regret_at_half: Option<f64>,
}

/// Reference values of the regret bounds at the configured `(T, N, S, eps)`,
/// without their constants.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundReference {
    /// `sqrt(S T ln(NT)) + S ln(NT) / eps`.
    pub stochastic: f64,
    /// `sqrt(S T) ln^1.5(NT) / eps + S ln(NT) / eps`.
    pub adaptive: f64,
}

impl BoundReference {
    pub fn new(horizon: usize, experts: usize, switches: usize, epsilon: f64) -> Self {
        let (t, s) = (horizon as f64, switches as f64);
        let log = (experts as f64 * t).ln();
        Self {
            stochastic: (s * t * log).sqrt() + s * log / epsilon,
            adaptive: (s * t).sqrt() * log.powf(1.5) / epsilon + s * log / epsilon,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AggregateReport {
    pub code_version: String,
    pub config_hash: String,
    pub config: RunConfig,
    pub trials: Vec<TrialSummary>,
    pub mean_regret: f64,
    pub std_error: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mean_regret_at_half: Option<f64>,
    pub mean_restarts: f64,
    pub bounds: BoundReference,
}

fn mean_and_se(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    if xs.len() < 2 {
        return (mean, 0.0);
    }
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, (var / n).sqrt())
}

pub fn aggregate(config: &RunConfig, outputs: &[TrialOutput]) -> AggregateReport {
    let trials: Vec<TrialSummary> = outputs
        .iter()
        .map(|o| TrialSummary {
            seed: o.seed,
            dynamic_regret: o.dynamic_regret(),
            cumulative_loss: o.trace.cumulative_loss(),
            comparator_loss: o.trace.comparator_loss().expect("finalized trace"),
            restarts: o.trace.restarts(),
            regret_at_half: o.regret_at_half(),
        })
        .collect();
    let regrets: Vec<f64> = trials.iter().map(|t| t.dynamic_regret).collect();
    let (mean_regret, std_error) = mean_and_se(&regrets);
    let halves: Option<Vec<f64>> = trials.iter().map(|t| t.regret_at_half).collect();
    let restarts: Vec<f64> = trials.iter().map(|t| t.restarts as f64).collect();
    AggregateReport {
        code_version: CODE_VERSION.to_string(),
        config_hash: config.hash(),
        config: config.clone(),
        mean_regret,
        std_error,
        mean_regret_at_half: halves.filter(|h| !h.is_empty()).map(|h| mean_and_se(&h).0),
        mean_restarts: mean_and_se(&restarts).0,
        bounds: BoundReference::new(
            config.horizon,
            config.experts,
            config.switches,
            config.epsilon,
        ),
        trials,
    }
}

pub const CONFIG_FILE: &str = "config.toml";
pub const REPORT_FILE: &str = "report.json";

pub fn trace_file(k: usize) -> String {
    format!("trial_{k}.csv")
}

pub fn ledger_file(k: usize) -> String {
    format!("ledger_{k}.json")
}

pub fn curve_file(k: usize) -> String {
    format!("regret_curve_{k}.csv")
}

/// Writes per-trial traces, ledgers and curves plus the config and report.
pub fn write_outputs(
    dir: &Path,
    config: &RunConfig,
    outputs: &[TrialOutput],
    report: &AggregateReport,
) -> Result<()> {
    std::fs::create_dir_all(dir)?;
    std::fs::write(dir.join(CONFIG_FILE), config.to_toml_string()?)?;
    for (k, o) in outputs.iter().enumerate() {
        o.trace
            .write_csv(BufWriter::new(File::create(dir.join(trace_file(k)))?))?;
        std::fs::write(dir.join(ledger_file(k)), o.ledger.to_json()?)?;
        if o.trace.regret_curve().is_some() {
            o.trace
                .write_regret_curve_csv(BufWriter::new(File::create(dir.join(curve_file(k)))?))?;
        }
    }
    let report_json = serde_json::to_string_pretty(report)?;
    std::fs::write(dir.join(REPORT_FILE), report_json)?;
    Ok(())
}

/// Runs every trial, writes the outputs under the resolved output directory
/// and returns the aggregate.
pub fn run_batch(config: &RunConfig) -> Result<AggregateReport> {
    let outputs = run_trials(config)?;
    let report = aggregate(config, &outputs);
    write_outputs(&config.resolved_output_dir(), config, &outputs, &report)?;
    Ok(report)
}
