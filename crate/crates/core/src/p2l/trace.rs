use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use super::IndexVector;
use crate::bounds::{BoundKind, Certificate};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Checkpoint {
    pub iteration: usize,
    pub compression: IndexVector,
    /// Points added at this iteration.
    pub added: IndexVector,
    /// Mean of the training loss (bounded cross-entropy or absolute error)
    /// over the complement.
    pub complement_loss_mean: f64,
    pub complement_rms: f64,
    /// Complement zero-one error rate; classification only.
    pub complement_zero_one: Option<f64>,
    pub validation_loss: Option<f64>,
    pub certificates: Vec<Certificate>,
    /// Bounds that do not apply here, with the reason.
    pub omitted: Vec<String>,
}

impl Checkpoint {
    pub fn m(&self) -> usize {
        self.compression.len()
    }

    /// The loss the certificates are computed on: zero-one error for
    /// classification, mean absolute error for regression.
    pub fn certified_loss(&self) -> f64 {
        self.complement_zero_one.unwrap_or(self.complement_loss_mean)
    }

    pub fn bound(&self, kind: BoundKind) -> Option<f64> {
        self.certificates
            .iter()
            .find(|c| c.bound_kind == kind)
            .map(|c| c.bound_value)
    }

    pub fn kl_bound(&self) -> Option<f64> {
        self.bound(BoundKind::KlBound)
    }

    pub fn row(&self) -> TraceRow {
        TraceRow {
            iteration: self.iteration,
            m: self.m(),
            complement_loss: self.certified_loss(),
            kl_bound: self.kl_bound(),
            binom_bound: self.bound(BoundKind::BinomialApprox),
            p2l_bound: self.bound(BoundKind::P2LBound),
            val_loss: self.validation_loss,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TraceStatus {
    /// Every complement point is below the stopping threshold.
    Converged,
    /// Hit the iteration cap first.
    Unconverged,
    /// The compression set swallowed the whole training set.
    Exhausted,
    /// Regression stopped after `patience` iterations without improvement.
    Patience,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CompressionTrace {
    pub n: usize,
    pub status: TraceStatus,
    pub checkpoints: Vec<Checkpoint>,
    /// Checkpoint whose model was returned.
    pub returned: usize,
}

impl CompressionTrace {
    pub fn last(&self) -> &Checkpoint {
        self.checkpoints.last().expect("trace has the iteration-0 checkpoint")
    }

    pub fn rows(&self) -> Vec<TraceRow> {
        self.checkpoints.iter().map(Checkpoint::row).collect()
    }
}

pub const TRACE_HEADER: &str = "iteration,m,complement_loss,kl_bound,binom_bound,p2l_bound,val_loss";

/// One line of the trace CSV. Missing bounds are empty fields.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TraceRow {
    pub iteration: usize,
    pub m: usize,
    pub complement_loss: f64,
    pub kl_bound: Option<f64>,
    pub binom_bound: Option<f64>,
    pub p2l_bound: Option<f64>,
    pub val_loss: Option<f64>,
}

fn opt(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

/// Floats are written in shortest round-trip form, so parsing the CSV back
/// recovers every value bit for bit.
pub fn trace_to_csv(rows: &[TraceRow]) -> String {
    let mut out = String::from(TRACE_HEADER);
    out.push('\n');
    for r in rows {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{}",
            r.iteration,
            r.m,
            r.complement_loss,
            opt(r.kl_bound),
            opt(r.binom_bound),
            opt(r.p2l_bound),
            opt(r.val_loss)
        );
    }
    out
}

pub fn parse_trace_csv(text: &str) -> Result<Vec<TraceRow>, String> {
    let mut reader = csv::ReaderBuilder::new().has_headers(true).from_reader(text.as_bytes());
    let header = reader.headers().map_err(|e| e.to_string())?;
    let got: Vec<&str> = header.iter().collect();
    if got.join(",") != TRACE_HEADER {
        return Err(format!("expected header {TRACE_HEADER:?}, got {:?}", got.join(",")));
    }
    let mut rows = Vec::new();
    for (line, rec) in reader.records().enumerate() {
        let rec = rec.map_err(|e| e.to_string())?;
        let at = |what: &str| format!("row {}: bad {what}", line + 1);
        let num = |i: usize| -> Result<Option<f64>, String> {
            let f = rec.get(i).ok_or_else(|| at("field count"))?.trim();
            if f.is_empty() {
                Ok(None)
            } else {
                f.parse().map(Some).map_err(|_| at(TRACE_HEADER.split(',').nth(i).unwrap()))
            }
        };
        let count = |i: usize| -> Result<usize, String> {
            rec.get(i)
                .and_then(|f| f.trim().parse().ok())
                .ok_or_else(|| at(TRACE_HEADER.split(',').nth(i).unwrap()))
        };
        if rec.len() != 7 {
            return Err(at("field count"));
        }
        rows.push(TraceRow {
            iteration: count(0)?,
            m: count(1)?,
            complement_loss: num(2)?.ok_or_else(|| at("complement_loss"))?,
            kl_bound: num(3)?,
            binom_bound: num(4)?,
            p2l_bound: num(5)?,
            val_loss: num(6)?,
        });
    }
    if rows.is_empty() {
        return Err("trace has no rows".into());
    }
    Ok(rows)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SelectionCriterion {
    /// The last checkpoint (consistent on the complement for a converged
    /// classification trace).
    FinalConsistent,
    MinKlBound,
    MinValidationLoss,
}

impl SelectionCriterion {
    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "final" => Some(Self::FinalConsistent),
            "min-kl" => Some(Self::MinKlBound),
            "min-val" => Some(Self::MinValidationLoss),
            _ => None,
        }
    }
}

/// Earliest position minimizing `key`; the last position if no key is set.
fn earliest_min(keys: impl Iterator<Item = Option<f64>>, len: usize) -> usize {
    let mut best: Option<(usize, f64)> = None;
    for (i, k) in keys.enumerate() {
        if let Some(v) = k {
            if best.is_none_or(|(_, b)| v < b) {
                best = Some((i, v));
            }
        }
    }
    best.map_or(len - 1, |(i, _)| i)
}

/// Position of the selected row; ties go to the earliest.
pub fn select_row(rows: &[TraceRow], criterion: SelectionCriterion) -> Option<usize> {
    if rows.is_empty() {
        return None;
    }
    Some(match criterion {
        SelectionCriterion::FinalConsistent => rows.len() - 1,
        SelectionCriterion::MinKlBound => earliest_min(rows.iter().map(|r| r.kl_bound), rows.len()),
        SelectionCriterion::MinValidationLoss => earliest_min(rows.iter().map(|r| r.val_loss), rows.len()),
    })
}

pub fn select_checkpoint(trace: &CompressionTrace, criterion: SelectionCriterion) -> &Checkpoint {
    let rows = trace.rows();
    &trace.checkpoints[select_row(&rows, criterion).expect("trace is non-empty")]
}
