use crate::data::{TickGrid, TimeSeries};
use crate::dsp::beats::BeatSequence;

pub const DEFAULT_WINDOW_S: f64 = 30.0;

/// Population standard deviation.
pub fn population_std(values: &[f64]) -> f64 {
    if values.is_empty() {
        return 0.0;
    }
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n;
    var.sqrt()
}

/// Running SDNN in seconds on `grid`.
///
/// Each tick uses the normal-to-normal intervals whose closing beat lies in
/// the trailing window `(t - window, t]`. With fewer than two intervals the
/// previous value is held (zero before the first valid value).
pub fn compute_hrv(beats: &BeatSequence, window_s: f64, grid: TickGrid) -> TimeSeries {
    let nn = beats.nn_intervals().intervals;
    let mut values = Vec::with_capacity(grid.len);
    let mut last = 0.0;
    let (mut lo, mut hi) = (0usize, 0usize);
    let mut buf = Vec::new();
    for t in grid.ticks() {
        while hi < nn.len() && nn[hi].end <= t {
            hi += 1;
        }
        while lo < hi && nn[lo].end <= t - window_s {
            lo += 1;
        }
        if hi - lo >= 2 {
            buf.clear();
            buf.extend(nn[lo..hi].iter().map(|iv| iv.interval));
            last = population_std(&buf);
        }
        values.push(last);
    }
    grid.series("hrv", values)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn beats_from_intervals(first: f64, intervals: impl Iterator<Item = f64>) -> BeatSequence {
        let mut t = first;
        let mut beat_times = vec![t];
        for iv in intervals {
            t += iv;
            beat_times.push(t);
        }
        BeatSequence {
            beat_times,
            source_rate: 1000.0,
        }
    }

    fn grid(secs: usize) -> TickGrid {
        TickGrid {
            start: 0.0,
            rate: 10.0,
            len: secs * 10,
        }
    }

    #[test]
    fn regular_rhythm_has_zero_sdnn() {
        let beats = beats_from_intervals(0.05, std::iter::repeat_n(1.0, 200));
        let hrv = compute_hrv(&beats, DEFAULT_WINDOW_S, grid(200));
        assert!(hrv.values.iter().all(|v| v.abs() < 1e-9));
    }

    #[test]
    fn alternating_intervals_give_closed_form_sdnn() {
        // Two-point distribution {0.9, 1.1} with equal mass: std = 0.1.
        let beats = beats_from_intervals(0.05, (0..200).map(|i| if i % 2 == 0 { 0.9 } else { 1.1 }));
        let hrv = compute_hrv(&beats, DEFAULT_WINDOW_S, grid(200));
        for (i, v) in hrv.values.iter().enumerate().skip(310).take(1500) {
            assert!((v - 0.1).abs() < 1e-6, "tick {i}: {v}");
        }
    }

    #[test]
    fn empty_beats_give_zeros() {
        let hrv = compute_hrv(&BeatSequence::empty(1000.0), DEFAULT_WINDOW_S, grid(20));
        assert_eq!(hrv.len(), 200);
        assert!(hrv.values.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn holds_last_value_across_gaps() {
        // Beats stop after 40 s; the last SDNN is held afterwards.
        let beats = beats_from_intervals(0.05, (0..40).map(|i| if i % 2 == 0 { 0.9 } else { 1.1 }));
        let hrv = compute_hrv(&beats, 10.0, grid(120));
        let held = hrv.values[1199];
        assert!(held > 0.0);
        assert_eq!(hrv.values[800], held);
    }

    #[test]
    fn sdnn_scales_with_intervals() {
        let ivs: Vec<f64> = (0..100).map(|i| 0.8 + 0.3 * ((i * 7 % 11) as f64 / 11.0)).collect();
        let a = compute_hrv(&beats_from_intervals(0.05, ivs.iter().copied()), 30.0, grid(90));
        let b = compute_hrv(&beats_from_intervals(0.075, ivs.iter().map(|v| v * 1.5)), 45.0, TickGrid { start: 0.0, rate: 10.0 / 1.5, len: 900 });
        for (x, y) in a.values.iter().zip(&b.values).skip(50) {
            assert!(*x >= 0.0);
            assert!((y - 1.5 * x).abs() < 1e-9, "{x} {y}");
        }
    }
}
