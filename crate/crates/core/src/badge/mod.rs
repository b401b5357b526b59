//! Sociometric badge features from the raw accelerometer and the two
//! microphones: movement, posture, speech activity and per-frame spectra.

pub mod movement;
pub mod posture;
pub mod spectral;
pub mod speech;

use std::fmt;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

pub use movement::movement_features;
pub use posture::posture_features;
pub use spectral::{spectral_features, PitchRange, SpectralAnalyzer, SpectralFeatures};
pub use speech::{speech_activity, SpeechActivity, VoicingParams};

use crate::data::{badge_feature_names, TickGrid, TimeSeries};
use crate::dsp::FilterSpec;
use crate::error::{Error, Result};

/// Three-axis acceleration in g.
#[derive(Debug, Clone, PartialEq)]
pub struct AccelStream {
    pub start: f64,
    pub rate: f64,
    pub ax: Vec<f64>,
    pub ay: Vec<f64>,
    pub az: Vec<f64>,
}

impl AccelStream {
    pub fn new(start: f64, rate: f64, ax: Vec<f64>, ay: Vec<f64>, az: Vec<f64>) -> Result<Self> {
        if ax.len() != ay.len() || ax.len() != az.len() {
            return Err(Error::Schema(format!(
                "accelerometer axes differ in length ({}, {}, {})",
                ax.len(),
                ay.len(),
                az.len()
            )));
        }
        if !(rate > 0.0) {
            return Err(Error::Config(format!("accelerometer rate must be positive, got {rate}")));
        }
        if ax.iter().chain(&ay).chain(&az).any(|v| !v.is_finite()) {
            return Err(Error::Schema("accelerometer contains non-finite samples".into()));
        }
        Ok(AccelStream { start, rate, ax, ay, az })
    }

    pub fn len(&self) -> usize {
        self.ax.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ax.is_empty()
    }

    fn out_grid(&self, out_rate: f64, len: usize) -> TickGrid {
        TickGrid {
            start: self.start,
            rate: out_rate,
            len,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mic {
    Front,
    Back,
}

impl Mic {
    pub fn suffix(self) -> &'static str {
        match self {
            Mic::Front => "f",
            Mic::Back => "b",
        }
    }
}

impl fmt::Display for Mic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Mic::Front => "front",
            Mic::Back => "back",
        })
    }
}

/// One analysis frame of microphone samples.
#[derive(Debug, Clone, PartialEq)]
pub struct AudioFrame {
    pub mic: Mic,
    pub samples: Vec<f64>,
    pub rate: f64,
    pub frame_start: f64,
}

/// A continuous microphone recording.
#[derive(Debug, Clone, PartialEq)]
pub struct AudioStream {
    pub mic: Mic,
    pub start: f64,
    pub rate: f64,
    pub samples: Vec<f64>,
}

impl AudioStream {
    /// Splits the recording into consecutive frames of `duration` seconds;
    /// a trailing partial frame is dropped.
    pub fn frames(&self, duration: f64) -> Result<Vec<AudioFrame>> {
        let len = duration * self.rate;
        if (len - len.round()).abs() > 1e-9 || len.round() < 1.0 {
            return Err(Error::Config(format!(
                "frame duration {duration} s is not a whole number of samples at {} Hz",
                self.rate
            )));
        }
        let len = len.round() as usize;
        Ok(self
            .samples
            .chunks_exact(len)
            .enumerate()
            .map(|(i, chunk)| AudioFrame {
                mic: self.mic,
                samples: chunk.to_vec(),
                rate: self.rate,
                frame_start: self.start + (i * len) as f64 / self.rate,
            })
            .collect())
    }
}

/// Badge extraction settings. Every constant of the reconstruction is a
/// field here so experiments can vary it.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BadgeConfig {
    pub out_rate: f64,
    pub frame_duration_s: f64,
    pub voicing: VoicingParams,
    pub pitch: PitchRange,
    pub posture_smoothing: FilterSpec,
}

impl Default for BadgeConfig {
    fn default() -> Self {
        BadgeConfig {
            out_rate: 10.0,
            frame_duration_s: 0.1,
            voicing: VoicingParams::default(),
            pitch: PitchRange::default(),
            posture_smoothing: FilterSpec::low_pass(0.5, 2),
        }
    }
}

fn spectral_channels(frames: &[AudioFrame], pitch: PitchRange) -> Result<Vec<SpectralFeatures>> {
    let Some(first) = frames.first() else {
        return Ok(Vec::new());
    };
    let analyzer = SpectralAnalyzer::new(first.samples.len(), pitch)?;
    frames
        .par_iter()
        .map(|f| analyzer.analyze(&f.samples, f.rate))
        .collect()
}

/// All 31 badge channels, in canonical feature order, on one grid.
pub fn extract_badge(
    accel: &AccelStream,
    front: &AudioStream,
    back: &AudioStream,
    config: &BadgeConfig,
) -> Result<Vec<TimeSeries>> {
    if (config.frame_duration_s * config.out_rate - 1.0).abs() > 1e-9 {
        return Err(Error::Config(format!(
            "frame duration {} s does not match the {} Hz feature grid",
            config.frame_duration_s, config.out_rate
        )));
    }
    if (accel.start - front.start).abs() > 1e-9 || (front.start - back.start).abs() > 1e-9 {
        return Err(Error::Alignment(format!(
            "badge streams start at different times ({}, {}, {})",
            accel.start, front.start, back.start
        )));
    }
    let front_frames = front.frames(config.frame_duration_s)?;
    let back_frames = back.frames(config.frame_duration_s)?;

    let [bm, bm_act, bm_r] = movement_features(accel, config.out_rate)?;
    let [pos_act, pos_r, pos_lr, pos_fb] = posture_features(accel, config.out_rate, &config.posture_smoothing)?;
    let speech = speech_activity(&front_frames, &back_frames, &config.voicing)?;
    let spec_f = spectral_channels(&front_frames, config.pitch)?;
    let spec_b = spectral_channels(&back_frames, config.pitch)?;

    let n = bm.len().min(front_frames.len());
    let grid = TickGrid {
        start: accel.start,
        rate: config.out_rate,
        len: n,
    };
    let take = |ts: &TimeSeries| grid.series(ts.name.clone(), ts.values[..n].to_vec());

    let mut channels = vec![
        take(&bm),
        take(&bm_act),
        take(&bm_r),
        take(&pos_act),
        take(&pos_r),
        take(&pos_lr),
        take(&pos_fb),
        take(&speech.voiced),
        take(&speech.unvoiced),
        take(&speech.vol_f),
        take(&speech.vol_b),
        take(&speech.volc_f),
        take(&speech.volc_b),
    ];
    let voiced = &speech.voiced.values;
    for (mic, spec) in [(Mic::Front, &spec_f), (Mic::Back, &spec_b)] {
        for p in 0..spectral::PEAKS {
            let hz = spec[..n].iter().map(|s| s.peaks[p].0).collect();
            let amp = spec[..n].iter().map(|s| s.peaks[p].1).collect();
            channels.push(grid.series(format!("hz{p}_{}", mic.suffix()), hz));
            channels.push(grid.series(format!("amp{p}_{}", mic.suffix()), amp));
        }
    }
    for (mic, spec) in [(Mic::Front, &spec_f), (Mic::Back, &spec_b)] {
        let pitch = spec[..n]
            .iter()
            .zip(voiced)
            .map(|(s, &v)| if v > 0.0 { s.pitch } else { 0.0 })
            .collect();
        channels.push(grid.series(format!("pitch_{}", mic.suffix()), pitch));
    }
    debug_assert!(channels.iter().map(|c| c.name.as_str()).eq(badge_feature_names().iter().copied()));
    Ok(channels)
}
