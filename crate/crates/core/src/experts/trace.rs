use std::io::{Read, Write};

use serde::{Deserialize, Serialize};

use crate::experts::{dynamic_comparator, dynamic_comparator_prefix, LossMatrix};
use crate::{Error, Result};

/// One round of play. `expert` is zero-based; `t` is one-based.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceRow {
    pub t: usize,
    pub expert: usize,
    pub loss: f64,
    pub cum_loss: f64,
    pub restart: bool,
    pub shift: bool,
}

/// Per-round record of a run plus its comparator and dynamic regret.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct RegretTrace {
    rows: Vec<TraceRow>,
    switches: Option<usize>,
    comparator_loss: Option<f64>,
    dynamic_regret: Option<f64>,
    regret_curve: Option<Vec<f64>>,
}

impl RegretTrace {
    pub fn new() -> Self {
        Self::default()
    }

    /// Appends round `rows.len() + 1`; the cumulative loss is maintained here.
    pub fn push(&mut self, expert: usize, loss: f64, restart: bool, shift: bool) {
        let cum_loss = self.cumulative_loss() + loss;
        self.rows.push(TraceRow {
            t: self.rows.len() + 1,
            expert,
            loss,
            cum_loss,
            restart,
            shift,
        });
    }

    pub fn rows(&self) -> &[TraceRow] {
        &self.rows
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn cumulative_loss(&self) -> f64 {
        self.rows.last().map_or(0.0, |r| r.cum_loss)
    }

    pub fn restarts(&self) -> usize {
        self.rows.iter().filter(|r| r.restart).count()
    }

    pub fn plays(&self) -> Vec<usize> {
        self.rows.iter().map(|r| r.expert).collect()
    }

    pub fn switches(&self) -> Option<usize> {
        self.switches
    }

    pub fn comparator_loss(&self) -> Option<f64> {
        self.comparator_loss
    }

    pub fn dynamic_regret(&self) -> Option<f64> {
        self.dynamic_regret
    }

    /// Regret of every prefix, present when finalised with the per-round oracle.
    pub fn regret_curve(&self) -> Option<&[f64]> {
        self.regret_curve.as_deref()
    }

    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        w.write_record(["t", "J_t", "loss", "cum_loss", "restart", "shift"])?;
        for r in &self.rows {
            w.write_record([
                r.t.to_string(),
                r.expert.to_string(),
                r.loss.to_string(),
                r.cum_loss.to_string(),
                u8::from(r.restart).to_string(),
                u8::from(r.shift).to_string(),
            ])?;
        }
        w.flush()?;
        Ok(())
    }

    /// Reads the rows written by [`RegretTrace::write_csv`]. Regret fields stay empty.
    pub fn read_csv<R: Read>(reader: R) -> Result<Self> {
        let mut rdr = csv::Reader::from_reader(reader);
        let mut trace = RegretTrace::new();
        for record in rdr.records() {
            let record = record?;
            let field = |i: usize| -> Result<&str> {
                record
                    .get(i)
                    .ok_or_else(|| Error::arg(format!("trace row missing column {i}")))
            };
            let parse_flag = |s: &str| s == "1" || s.eq_ignore_ascii_case("true");
            let t: usize = field(0)?.parse().map_err(|_| Error::arg("bad t"))?;
            if t != trace.len() + 1 {
                return Err(Error::arg(format!("trace rows out of order at t={t}")));
            }
            trace.rows.push(TraceRow {
                t,
                expert: field(1)?.parse().map_err(|_| Error::arg("bad J_t"))?,
                loss: field(2)?.parse().map_err(|_| Error::arg("bad loss"))?,
                cum_loss: field(3)?.parse().map_err(|_| Error::arg("bad cum_loss"))?,
                restart: parse_flag(field(4)?),
                shift: parse_flag(field(5)?),
            });
        }
        Ok(trace)
    }

    /// Writes `t, comparator_loss, regret` for each prefix, if computed.
    pub fn write_regret_curve_csv<W: Write>(&self, writer: W) -> Result<()> {
        let curve = self
            .regret_curve
            .as_ref()
            .ok_or_else(|| Error::state("regret curve not computed"))?;
        let mut w = csv::Writer::from_writer(writer);
        w.write_record(["t", "comparator_loss", "regret"])?;
        for (row, regret) in self.rows.iter().zip(curve) {
            w.write_record([
                row.t.to_string(),
                (row.cum_loss - regret).to_string(),
                regret.to_string(),
            ])?;
        }
        w.flush()?;
        Ok(())
    }
}

/// Fills in the comparator loss over `C(T, switches)` and the dynamic regret.
///
/// With `per_round` set, also records the regret of every prefix against the
/// best comparator on that prefix.
pub fn regret_finalize(
    mut trace: RegretTrace,
    losses: &LossMatrix,
    switches: usize,
    per_round: bool,
) -> Result<RegretTrace> {
    if trace.len() != losses.rounds() {
        return Err(Error::arg(format!(
            "trace has {} rounds but the loss matrix has {}",
            trace.len(),
            losses.rounds()
        )));
    }
    let (comparator, _) = dynamic_comparator(losses, switches as i64)?;
    trace.switches = Some(switches);
    trace.comparator_loss = Some(comparator);
    trace.dynamic_regret = Some(trace.cumulative_loss() - comparator);
    trace.regret_curve = if per_round {
        let prefix = dynamic_comparator_prefix(losses, switches as i64)?;
        Some(
            trace
                .rows
                .iter()
                .zip(prefix)
                .map(|(r, c)| r.cum_loss - c)
                .collect(),
        )
    } else {
        None
    };
    Ok(trace)
}
