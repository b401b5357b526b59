//! Pulse peak detection on band-passed PPG.

use std::collections::VecDeque;

use crate::data::TimeSeries;

/// Normal-to-normal interval range in seconds, `[min, max)`.
pub const NN_MIN_S: f64 = 0.3;
pub const NN_MAX_S: f64 = 2.0;

/// Minimum spacing between two accepted beats.
pub const REFRACTORY_S: f64 = 0.3;

/// Candidate peaks must reach this fraction of the local maximum.
const RELATIVE_HEIGHT: f64 = 0.5;
/// Half-width of the local-maximum window used for the height gate.
const ENVELOPE_HALF_WIDTH_S: f64 = 1.0;

#[derive(Debug, Clone, PartialEq)]
pub struct BeatSequence {
    /// Strictly increasing beat times in seconds.
    pub beat_times: Vec<f64>,
    pub source_rate: f64,
}

/// One normal-to-normal interval, stamped with the time of its closing beat.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NnInterval {
    pub end: f64,
    pub interval: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct NnIntervals {
    pub intervals: Vec<NnInterval>,
    /// Intervals dropped for falling outside `[NN_MIN_S, NN_MAX_S)`.
    pub discarded: usize,
}

impl BeatSequence {
    pub fn empty(source_rate: f64) -> Self {
        BeatSequence {
            beat_times: Vec::new(),
            source_rate,
        }
    }

    pub fn len(&self) -> usize {
        self.beat_times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.beat_times.is_empty()
    }

    /// Whether an interval is physiologically plausible. Intervals are
    /// compared at the resolution of the source sampling grid.
    pub fn is_normal(&self, interval: f64) -> bool {
        let samples = (interval * self.source_rate).round();
        let lo = (NN_MIN_S * self.source_rate).round();
        let hi = (NN_MAX_S * self.source_rate).round();
        samples >= lo && samples < hi
    }

    pub fn nn_intervals(&self) -> NnIntervals {
        let mut intervals = Vec::with_capacity(self.beat_times.len().saturating_sub(1));
        let mut discarded = 0;
        for w in self.beat_times.windows(2) {
            let interval = w[1] - w[0];
            if self.is_normal(interval) {
                intervals.push(NnInterval { end: w[1], interval });
            } else {
                discarded += 1;
            }
        }
        NnIntervals {
            intervals,
            discarded,
        }
    }
}

/// Sliding-window maximum over `[i - half, i + half]`.
fn moving_max(x: &[f64], half: usize) -> Vec<f64> {
    let n = x.len();
    let mut out = vec![0.0; n];
    let mut dq: VecDeque<usize> = VecDeque::new();
    let mut next = 0;
    for (i, slot) in out.iter_mut().enumerate() {
        let hi = (i + half).min(n - 1);
        while next <= hi {
            while dq.back().is_some_and(|&j| x[j] <= x[next]) {
                dq.pop_back();
            }
            dq.push_back(next);
            next += 1;
        }
        while dq.front().is_some_and(|&j| j + half < i) {
            dq.pop_front();
        }
        *slot = x[*dq.front().expect("window is never empty")];
    }
    out
}

/// Detects one beat per dominant pulse peak.
///
/// Peaks are positive local maxima that reach half the surrounding
/// two-second maximum; within the refractory period only the tallest peak
/// survives. Beat times are refined with a parabola through the peak sample
/// and its two neighbors.
pub fn detect_beats(filtered_ppg: &TimeSeries) -> BeatSequence {
    let x = &filtered_ppg.values;
    let rate = filtered_ppg.rate;
    let n = x.len();
    if n < 3 {
        return BeatSequence::empty(rate);
    }
    let envelope = moving_max(x, (ENVELOPE_HALF_WIDTH_S * rate).round() as usize);
    let refractory = REFRACTORY_S * rate;

    let mut peaks: Vec<usize> = Vec::new();
    for i in 1..n - 1 {
        let v = x[i];
        if !(v > 0.0 && v > x[i - 1] && v >= x[i + 1] && v >= RELATIVE_HEIGHT * envelope[i]) {
            continue;
        }
        match peaks.last_mut() {
            Some(last) if ((i - *last) as f64) < refractory => {
                if v > x[*last] {
                    *last = i;
                }
            }
            _ => peaks.push(i),
        }
    }

    let beat_times = peaks
        .into_iter()
        .map(|i| {
            let (ym, y0, yp) = (x[i - 1], x[i], x[i + 1]);
            let denom = ym - 2.0 * y0 + yp;
            let delta = if denom.abs() > 0.0 {
                (0.5 * (ym - yp) / denom).clamp(-0.5, 0.5)
            } else {
                0.0
            };
            filtered_ppg.start + (i as f64 + delta) / rate
        })
        .collect();
    BeatSequence {
        beat_times,
        source_rate: rate,
    }
}
