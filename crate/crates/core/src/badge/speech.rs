use crate::badge::AudioFrame;
use crate::data::{TickGrid, TimeSeries};
use crate::error::{Error, Result};

/// Adaptive voicing detector settings.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VoicingParams {
    /// Volume must exceed `factor` times the noise floor.
    pub threshold_factor: f64,
    /// Trailing window for the noise floor, seconds (current frame included).
    pub noise_window_s: f64,
    /// Percentile of trailing volumes used as the noise floor, in [0, 1].
    pub noise_percentile: f64,
}

impl Default for VoicingParams {
    fn default() -> Self {
        VoicingParams {
            threshold_factor: 3.0,
            noise_window_s: 5.0,
            noise_percentile: 0.1,
        }
    }
}

/// Speech activity channels for one front/back frame pair sequence.
#[derive(Debug, Clone, PartialEq)]
pub struct SpeechActivity {
    pub voiced: TimeSeries,
    pub unvoiced: TimeSeries,
    pub vol_f: TimeSeries,
    pub vol_b: TimeSeries,
    pub volc_f: TimeSeries,
    pub volc_b: TimeSeries,
}

/// Mean absolute amplitude of a frame.
pub fn frame_volume(frame: &AudioFrame) -> f64 {
    if frame.samples.is_empty() {
        return 0.0;
    }
    frame.samples.iter().map(|s| s.abs()).sum::<f64>() / frame.samples.len() as f64
}

fn volume_change(vol: &[f64]) -> Vec<f64> {
    (0..vol.len())
        .map(|t| if t == 0 { 0.0 } else { (vol[t] - vol[t - 1]).abs() })
        .collect()
}

/// Nearest-rank percentile of an unsorted slice.
fn percentile(values: &[f64], q: f64) -> f64 {
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    let idx = (q * (sorted.len() - 1) as f64).floor() as usize;
    sorted[idx]
}

/// Voicing decision per frame from front-mic volumes.
pub fn voicing(vol_front: &[f64], frame_rate: f64, params: &VoicingParams) -> Vec<bool> {
    let window = ((params.noise_window_s * frame_rate).round() as usize).max(1);
    (0..vol_front.len())
        .map(|t| {
            let lo = (t + 1).saturating_sub(window);
            let floor = percentile(&vol_front[lo..=t], params.noise_percentile);
            vol_front[t] > params.threshold_factor * floor
        })
        .collect()
}

fn check_grids(front: &[AudioFrame], back: &[AudioFrame]) -> Result<()> {
    if front.len() != back.len() {
        return Err(Error::Alignment(format!(
            "front mic has {} frames, back mic has {}",
            front.len(),
            back.len()
        )));
    }
    for (i, (f, b)) in front.iter().zip(back).enumerate() {
        if (f.frame_start - b.frame_start).abs() > 1e-9 || f.samples.len() != b.samples.len() || f.rate != b.rate {
            return Err(Error::Alignment(format!(
                "frame {i}: front ({} s, {} samples) and back ({} s, {} samples) grids differ",
                f.frame_start,
                f.samples.len(),
                b.frame_start,
                b.samples.len()
            )));
        }
    }
    Ok(())
}

/// Volume, volume change and voicing channels on the frame grid.
pub fn speech_activity(front: &[AudioFrame], back: &[AudioFrame], params: &VoicingParams) -> Result<SpeechActivity> {
    check_grids(front, back)?;
    let (start, frame_rate) = match front.first() {
        Some(f) => (f.frame_start, f.rate / f.samples.len().max(1) as f64),
        None => (0.0, 10.0),
    };
    let grid = TickGrid {
        start,
        rate: frame_rate,
        len: front.len(),
    };
    let vol_f: Vec<f64> = front.iter().map(frame_volume).collect();
    let vol_b: Vec<f64> = back.iter().map(frame_volume).collect();
    let voiced: Vec<f64> = voicing(&vol_f, frame_rate, params)
        .into_iter()
        .map(|v| if v { 1.0 } else { 0.0 })
        .collect();
    let unvoiced = voiced.iter().map(|v| 1.0 - v).collect();
    Ok(SpeechActivity {
        voiced: grid.series("voiced", voiced),
        unvoiced: grid.series("unvoiced", unvoiced),
        volc_f: grid.series("volc_f", volume_change(&vol_f)),
        volc_b: grid.series("volc_b", volume_change(&vol_b)),
        vol_f: grid.series("vol_f", vol_f),
        vol_b: grid.series("vol_b", vol_b),
    })
}
