//! PPG template tracking: beat-aligned pulse segments are compared against
//! a running average of the preceding pulses by normalized correlation.

use crate::data::{TickGrid, TimeSeries};
use crate::dsp::beats::BeatSequence;

pub const SEGMENT_POINTS: usize = 64;
pub const TEMPLATE_BEATS: usize = 8;

/// Zero-mean normalized cross-correlation at lag zero; 0 when either input
/// has no variance.
pub fn normalized_correlation(a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    let n = a.len() as f64;
    let ma = a.iter().sum::<f64>() / n;
    let mb = b.iter().sum::<f64>() / n;
    let (mut sab, mut saa, mut sbb) = (0.0, 0.0, 0.0);
    for (x, y) in a.iter().zip(b) {
        let (dx, dy) = (x - ma, y - mb);
        sab += dx * dy;
        saa += dx * dx;
        sbb += dy * dy;
    }
    let denom = (saa * sbb).sqrt();
    if denom <= f64::MIN_POSITIVE {
        0.0
    } else {
        (sab / denom).clamp(-1.0, 1.0)
    }
}

/// Linear interpolation of the channel at time `t` (clamped to its span).
fn sample_at(series: &TimeSeries, t: f64) -> f64 {
    let pos = ((t - series.start) * series.rate).clamp(0.0, (series.len() - 1) as f64);
    let i = pos.floor() as usize;
    let frac = pos - i as f64;
    if i + 1 < series.len() {
        series.values[i] * (1.0 - frac) + series.values[i + 1] * frac
    } else {
        series.values[i]
    }
}

/// Pulse between two beats resampled to [`SEGMENT_POINTS`] points.
pub fn resample_segment(series: &TimeSeries, from: f64, to: f64) -> Vec<f64> {
    let step = (to - from) / (SEGMENT_POINTS - 1) as f64;
    (0..SEGMENT_POINTS)
        .map(|j| sample_at(series, from + j as f64 * step))
        .collect()
}

/// Similarity of every normal pulse segment to the mean of the up to
/// [`TEMPLATE_BEATS`] segments before it, stamped with the closing beat time.
/// The first segment has no template and is skipped.
pub fn segment_similarities(filtered_ppg: &TimeSeries, beats: &BeatSequence) -> Vec<(f64, f64)> {
    if filtered_ppg.is_empty() {
        return Vec::new();
    }
    let mut history: Vec<Vec<f64>> = Vec::new();
    let mut out = Vec::new();
    for w in beats.beat_times.windows(2) {
        if !beats.is_normal(w[1] - w[0]) {
            continue;
        }
        let seg = resample_segment(filtered_ppg, w[0], w[1]);
        if !history.is_empty() {
            let start = history.len().saturating_sub(TEMPLATE_BEATS);
            let recent = &history[start..];
            let mut template = vec![0.0; SEGMENT_POINTS];
            for s in recent {
                for (acc, v) in template.iter_mut().zip(s) {
                    *acc += v;
                }
            }
            let k = recent.len() as f64;
            template.iter_mut().for_each(|v| *v /= k);
            out.push((w[1], normalized_correlation(&seg, &template)));
        }
        history.push(seg);
    }
    out
}

/// `ppg_t` on `grid`: the similarity of the most recent completed pulse,
/// 0 before the first comparison is available.
pub fn ppg_template_similarity(filtered_ppg: &TimeSeries, beats: &BeatSequence, grid: TickGrid) -> TimeSeries {
    let sims = segment_similarities(filtered_ppg, beats);
    let mut values = Vec::with_capacity(grid.len);
    let mut k = 0;
    let mut current = 0.0;
    for t in grid.ticks() {
        while k < sims.len() && sims[k].0 <= t {
            current = sims[k].1;
            k += 1;
        }
        values.push(current);
    }
    grid.series("ppg_t", values)
}
