//! Solver output shared by every method.

use std::cell::Cell;
use std::time::Instant;

use serde::Serialize;

use crate::problem::Vector;
use crate::tally::OracleTally;

thread_local! {
    static TIMING: Cell<bool> = const { Cell::new(true) };
}

/// Turns wall-clock recording on or off for the current thread. With timing
/// off every recorded duration is 0, so reruns produce identical histories.
pub fn set_timing(enabled: bool) {
    TIMING.with(|t| t.set(enabled));
}

pub fn timing_enabled() -> bool {
    TIMING.with(|t| t.get())
}

/// Stopwatch that honours `set_timing`.
#[derive(Debug, Clone, Copy)]
pub struct Clock {
    start: Option<Instant>,
}

impl Clock {
    pub fn start() -> Self {
        Clock {
            start: timing_enabled().then(Instant::now),
        }
    }

    pub fn elapsed_ms(&self) -> f64 {
        self.start
            .map(|s| s.elapsed().as_secs_f64() * 1e3)
            .unwrap_or(0.0)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HistoryRow {
    pub iter: usize,
    /// Objective gap or residual; NaN when nothing was measured.
    pub gap: f64,
    pub tally: OracleTally,
    pub wall_ms: f64,
}

impl HistoryRow {
    /// Bitwise comparison, treating NaN gaps as equal to themselves.
    pub fn same_bits(&self, other: &HistoryRow) -> bool {
        self.iter == other.iter
            && self.gap.to_bits() == other.gap.to_bits()
            && self.tally == other.tally
            && self.wall_ms.to_bits() == other.wall_ms.to_bits()
    }
}

/// Restricted primal-dual gap of a candidate pair.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GapCertificate {
    /// Lower estimate of max over Q_y (within the 2 r_y ball when used) of S(x, .).
    pub primal_value: f64,
    /// Upper estimate of min over Q_x (within the 2 r_x ball when used) of S(., y).
    pub dual_value: f64,
    pub gap: f64,
    pub r_x: f64,
    pub r_y: f64,
    pub inner_accuracy: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct SolveReport {
    pub x_final: Vector,
    pub y_final: Option<Vector>,
    /// Certified accuracy of the output: objective gap for minimizers, squared
    /// distance bound for Mirror Prox, primal-dual gap for saddle solves.
    pub certified_gap: f64,
    pub history: Vec<HistoryRow>,
    pub tally: OracleTally,
    pub converged: bool,
    pub iterations: usize,
    /// Calls of the smooth-part oracle (or operator evaluations for VI solvers).
    pub smooth_queries: u64,
    /// Calls of the composite-part prox step.
    pub composite_queries: u64,
    pub wall_ms: f64,
    pub certificate: Option<GapCertificate>,
    pub notes: Vec<String>,
}

impl SolveReport {
    pub fn new(x_final: Vector) -> Self {
        SolveReport {
            x_final,
            y_final: None,
            certified_gap: f64::INFINITY,
            history: Vec::new(),
            tally: OracleTally::new(),
            converged: false,
            iterations: 0,
            smooth_queries: 0,
            composite_queries: 0,
            wall_ms: 0.0,
            certificate: None,
            notes: Vec::new(),
        }
    }

    /// Appends a row, shifting its index past the last one so indices stay
    /// strictly increasing when reports are chained.
    pub fn push_row(&mut self, mut row: HistoryRow) {
        if let Some(last) = self.history.last() {
            if row.iter <= last.iter {
                row.iter = last.iter + 1;
            }
        }
        self.history.push(row);
    }

    /// Appends another report's history after this one, offsetting its
    /// iteration indices, tally snapshots and times.
    pub fn append_history(&mut self, other: &SolveReport, tally_offset: OracleTally, ms_offset: f64) {
        let base = self.history.last().map(|r| r.iter + 1).unwrap_or(0);
        for r in &other.history {
            self.history.push(HistoryRow {
                iter: base + r.iter,
                gap: r.gap,
                tally: r.tally + tally_offset,
                wall_ms: r.wall_ms + ms_offset,
            });
        }
    }

    pub fn same_history(&self, other: &SolveReport) -> bool {
        self.history.len() == other.history.len()
            && self
                .history
                .iter()
                .zip(&other.history)
                .all(|(a, b)| a.same_bits(b))
    }
}
