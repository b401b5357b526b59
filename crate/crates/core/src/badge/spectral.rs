//! Per-frame spectral peaks and autocorrelation pitch.

use std::f64::consts::PI;
use std::sync::Arc;

use rustfft::num_complex::Complex;
use rustfft::{Fft, FftPlanner};

use crate::badge::AudioFrame;
use crate::error::{Error, Result};

pub const MIN_FRAME_LEN: usize = 64;
pub const PEAKS: usize = 4;

/// Fraction of the zero-lag autocorrelation a pitch peak must reach.
const VOICING_RATIO: f64 = 0.3;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PitchRange {
    pub min_hz: f64,
    pub max_hz: f64,
}

impl Default for PitchRange {
    fn default() -> Self {
        PitchRange {
            min_hz: 50.0,
            max_hz: 400.0,
        }
    }
}

/// Strongest spectral peaks `(frequency Hz, amplitude)` in descending
/// amplitude, zero-padded, plus the pitch estimate (0 when aperiodic).
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct SpectralFeatures {
    pub peaks: [(f64, f64); PEAKS],
    pub pitch: f64,
}

/// Reusable analyzer for frames of one fixed length.
pub struct SpectralAnalyzer {
    len: usize,
    fft: Arc<dyn Fft<f64>>,
    window: Vec<f64>,
    window_sum: f64,
    pitch: PitchRange,
}

impl SpectralAnalyzer {
    pub fn new(len: usize, pitch: PitchRange) -> Result<Self> {
        if len < MIN_FRAME_LEN {
            return Err(Error::Config(format!(
                "spectral frame has {len} samples, need at least {MIN_FRAME_LEN}"
            )));
        }
        // Periodic Hann window.
        let window: Vec<f64> = (0..len)
            .map(|i| 0.5 - 0.5 * (2.0 * PI * i as f64 / len as f64).cos())
            .collect();
        let window_sum = window.iter().sum();
        Ok(SpectralAnalyzer {
            len,
            fft: FftPlanner::new().plan_fft_forward(len),
            window,
            window_sum,
            pitch,
        })
    }

    pub fn analyze(&self, samples: &[f64], rate: f64) -> Result<SpectralFeatures> {
        if samples.len() != self.len {
            return Err(Error::Config(format!(
                "analyzer built for {} samples, got {}",
                self.len,
                samples.len()
            )));
        }
        Ok(SpectralFeatures {
            peaks: self.peaks(samples, rate),
            pitch: self.pitch(samples, rate),
        })
    }

    fn peaks(&self, samples: &[f64], rate: f64) -> [(f64, f64); PEAKS] {
        let mut buf: Vec<Complex<f64>> = samples
            .iter()
            .zip(&self.window)
            .map(|(s, w)| Complex::new(s * w, 0.0))
            .collect();
        self.fft.process(&mut buf);
        let half = self.len / 2;
        // Single-sided amplitude: a sinusoid of amplitude A on a bin reads A.
        let mag: Vec<f64> = buf[..=half]
            .iter()
            .map(|c| 2.0 * c.norm() / self.window_sum)
            .collect();
        let mut found: Vec<(usize, f64)> = (1..half)
            .filter(|&k| mag[k] > mag[k - 1] && mag[k] >= mag[k + 1])
            .map(|k| (k, mag[k]))
            .collect();
        found.sort_by(|a, b| b.1.total_cmp(&a.1).then(a.0.cmp(&b.0)));
        let mut out = [(0.0, 0.0); PEAKS];
        for (slot, (k, amp)) in out.iter_mut().zip(found) {
            *slot = (k as f64 * rate / self.len as f64, amp);
        }
        out
    }

    fn pitch(&self, samples: &[f64], rate: f64) -> f64 {
        let n = samples.len();
        let mean = samples.iter().sum::<f64>() / n as f64;
        let x: Vec<f64> = samples.iter().map(|s| s - mean).collect();
        let acf = |lag: usize| -> f64 { x[..n - lag].iter().zip(&x[lag..]).map(|(a, b)| a * b).sum() };
        let r0 = acf(0);
        if r0 <= 0.0 {
            return 0.0;
        }
        let lo = ((rate / self.pitch.max_hz).ceil() as usize).max(1);
        let hi = ((rate / self.pitch.min_hz).floor() as usize).min(n - 2);
        if lo > hi {
            return 0.0;
        }
        let r: Vec<f64> = (lo - 1..=hi + 1).map(acf).collect();
        let at = |lag: usize| r[lag + 1 - lo];
        let mut best: Option<(usize, f64)> = None;
        for lag in lo..=hi {
            let v = at(lag);
            if v > at(lag - 1) && v >= at(lag + 1) && best.is_none_or(|(_, b)| v > b) {
                best = Some((lag, v));
            }
        }
        let Some((lag, peak)) = best else { return 0.0 };
        if peak < VOICING_RATIO * r0 {
            return 0.0;
        }
        let (ym, y0, yp) = (at(lag - 1), peak, at(lag + 1));
        let denom = ym - 2.0 * y0 + yp;
        let delta = if denom.abs() > 0.0 { (0.5 * (ym - yp) / denom).clamp(-0.5, 0.5) } else { 0.0 };
        (rate / (lag as f64 + delta)).clamp(self.pitch.min_hz, self.pitch.max_hz)
    }
}

/// Spectral peaks and pitch of a single frame with default pitch range.
pub fn spectral_features(frame: &AudioFrame) -> Result<SpectralFeatures> {
    SpectralAnalyzer::new(frame.samples.len(), PitchRange::default())?.analyze(&frame.samples, frame.rate)
}
