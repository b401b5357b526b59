use serde::{Deserialize, Serialize};

use crate::data::{segment_at, Label, Task, TaskSegment};
use crate::error::{Error, Result};

/// One plotted tick: truth and prediction as +1 (stress) / -1 (neutral).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TraceRow {
    pub t_s: f64,
    pub truth: i8,
    pub predicted: i8,
    pub task: Option<Task>,
}

/// Maximal run of consecutive wrong predictions.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WrongRun {
    pub start_s: f64,
    pub end_s: f64,
    pub ticks: usize,
    /// `ticks / rate`.
    pub duration_s: f64,
    /// Truth label during the first tick of the run.
    pub truth: Label,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PredictionTrace {
    pub rate: f64,
    pub rows: Vec<TraceRow>,
    pub wrong_runs: Vec<WrongRun>,
}

impl PredictionTrace {
    /// Time spent predicting stress during neutral ticks.
    pub fn false_alarm_s(&self) -> f64 {
        let n = self.rows.iter().filter(|r| r.truth < 0 && r.predicted > 0).count();
        n as f64 / self.rate
    }

    pub fn wrong_s(&self) -> f64 {
        self.wrong_runs.iter().map(|r| r.duration_s).sum()
    }
}

fn sign(l: Label) -> i8 {
    if l == Label::Stress {
        1
    } else {
        -1
    }
}

pub fn prediction_trace(
    timestamps: &[f64],
    truth: &[Label],
    predicted: &[Label],
    segments: &[TaskSegment],
    rate: f64,
) -> Result<PredictionTrace> {
    if timestamps.len() != truth.len() || truth.len() != predicted.len() {
        return Err(Error::Schema(format!(
            "trace inputs differ in length: {} timestamps, {} truth, {} predicted",
            timestamps.len(),
            truth.len(),
            predicted.len()
        )));
    }
    if !(rate > 0.0) {
        return Err(Error::Config(format!("trace rate must be positive, got {rate}")));
    }
    let rows: Vec<TraceRow> = (0..timestamps.len())
        .map(|i| TraceRow {
            t_s: timestamps[i],
            truth: sign(truth[i]),
            predicted: sign(predicted[i]),
            task: segment_at(segments, timestamps[i]).map(|k| segments[k].task),
        })
        .collect();

    let mut wrong_runs = Vec::new();
    let mut i = 0;
    while i < rows.len() {
        if rows[i].truth == rows[i].predicted {
            i += 1;
            continue;
        }
        let start = i;
        while i < rows.len() && rows[i].truth != rows[i].predicted {
            i += 1;
        }
        let ticks = i - start;
        wrong_runs.push(WrongRun {
            start_s: rows[start].t_s,
            end_s: rows[i - 1].t_s,
            ticks,
            duration_s: ticks as f64 / rate,
            truth: truth[start],
        });
    }
    Ok(PredictionTrace { rate, rows, wrong_runs })
}
