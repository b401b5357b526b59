//! Butterworth IIR filters realized as cascaded second-order sections.
//!
//! Designs come from the analog prototype through the bilinear transform
//! with frequency prewarping, so the digital magnitude response is
//! `1 / sqrt(1 + (tan(pi f / fs) / tan(pi fc / fs))^(2n))` for a low-pass of
//! order `n`. Zero-phase application runs the cascade forward and then
//! backward, squaring the magnitude response.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::data::TimeSeries;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FilterKind {
    LowPass,
    HighPass,
    BandPass,
}

/// Declarative filter description. `low_cut` is only used by band-pass
/// filters; `high_cut` is the cutoff of low-pass and high-pass designs.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FilterSpec {
    pub kind: FilterKind,
    pub low_cut: f64,
    pub high_cut: f64,
    pub order: usize,
    pub zero_phase: bool,
}

impl FilterSpec {
    pub fn low_pass(cutoff: f64, order: usize) -> Self {
        FilterSpec {
            kind: FilterKind::LowPass,
            low_cut: 0.0,
            high_cut: cutoff,
            order,
            zero_phase: true,
        }
    }

    pub fn high_pass(cutoff: f64, order: usize) -> Self {
        FilterSpec {
            kind: FilterKind::HighPass,
            low_cut: 0.0,
            high_cut: cutoff,
            order,
            zero_phase: true,
        }
    }

    pub fn band_pass(low_cut: f64, high_cut: f64, order: usize) -> Self {
        FilterSpec {
            kind: FilterKind::BandPass,
            low_cut,
            high_cut,
            order,
            zero_phase: true,
        }
    }

    /// Default EDA conditioning: 0.5 Hz low-pass.
    pub fn eda_default() -> Self {
        Self::low_pass(0.5, 2)
    }

    /// Default PPG conditioning: 0.5-35 Hz band-pass.
    pub fn ppg_default() -> Self {
        Self::band_pass(0.5, 35.0, 2)
    }

    pub fn validate(&self, rate: f64) -> Result<()> {
        let nyquist = rate / 2.0;
        if self.order == 0 {
            return Err(Error::Config("filter order must be positive".into()));
        }
        let check = |f: f64, what: &str| {
            if !(f > 0.0 && f < nyquist) {
                Err(Error::Config(format!(
                    "{what} {f} Hz must lie in (0, {nyquist}) Hz at sampling rate {rate} Hz"
                )))
            } else {
                Ok(())
            }
        };
        check(self.high_cut, "cutoff")?;
        if self.kind == FilterKind::BandPass {
            check(self.low_cut, "low cutoff")?;
            if self.low_cut >= self.high_cut {
                return Err(Error::Config(format!(
                    "band-pass low cutoff {} must be below high cutoff {}",
                    self.low_cut, self.high_cut
                )));
            }
        }
        Ok(())
    }

    pub fn design(&self, rate: f64) -> Result<SosFilter> {
        self.validate(rate)?;
        let sections = match self.kind {
            FilterKind::LowPass => butterworth(self.order, self.high_cut, rate, false),
            FilterKind::HighPass => butterworth(self.order, self.high_cut, rate, true),
            FilterKind::BandPass => {
                let mut s = butterworth(self.order, self.low_cut, rate, true);
                s.extend(butterworth(self.order, self.high_cut, rate, false));
                s
            }
        };
        Ok(SosFilter { sections })
    }

    /// Applies the filter to a whole channel, forward-backward when
    /// `zero_phase` is set.
    pub fn apply(&self, input: &TimeSeries) -> Result<TimeSeries> {
        let filter = self.design(input.rate)?;
        let values = if self.zero_phase {
            filter.filtfilt(&input.values)
        } else {
            filter.filter(&input.values)
        };
        Ok(TimeSeries {
            name: input.name.clone(),
            start: input.start,
            rate: input.rate,
            values,
        })
    }
}

/// Biquad coefficients, `a0` normalized to one.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Biquad {
    pub b: [f64; 3],
    pub a: [f64; 2],
}

impl Biquad {
    fn dc_gain(&self) -> f64 {
        (self.b[0] + self.b[1] + self.b[2]) / (1.0 + self.a[0] + self.a[1])
    }

    /// Transposed direct-form II state for a constant input `x0` at steady state.
    fn steady_state(&self, x0: f64) -> [f64; 2] {
        let denom = 1.0 + self.a[0] + self.a[1];
        let y0 = if denom.abs() < 1e-300 { 0.0 } else { self.dc_gain() * x0 };
        let z2 = self.b[2] * x0 - self.a[1] * y0;
        let z1 = self.b[1] * x0 - self.a[0] * y0 + z2;
        [z1, z2]
    }

    fn run(&self, data: &mut [f64], state: [f64; 2]) {
        let [b0, b1, b2] = self.b;
        let [a1, a2] = self.a;
        let [mut z1, mut z2] = state;
        for x in data.iter_mut() {
            let xin = *x;
            let y = b0 * xin + z1;
            z1 = b1 * xin - a1 * y + z2;
            z2 = b2 * xin - a2 * y;
            *x = y;
        }
    }

    /// Complex frequency response at normalized angular frequency `w`.
    fn response(&self, w: f64) -> (f64, f64) {
        // H = (b0 + b1 z^-1 + b2 z^-2) / (1 + a1 z^-1 + a2 z^-2), z = e^{jw}
        let (c1, s1) = (w.cos(), -w.sin());
        let (c2, s2) = ((2.0 * w).cos(), -(2.0 * w).sin());
        let nr = self.b[0] + self.b[1] * c1 + self.b[2] * c2;
        let ni = self.b[1] * s1 + self.b[2] * s2;
        let dr = 1.0 + self.a[0] * c1 + self.a[1] * c2;
        let di = self.a[0] * s1 + self.a[1] * s2;
        let d = dr * dr + di * di;
        ((nr * dr + ni * di) / d, (ni * dr - nr * di) / d)
    }
}

/// Cascade of second-order sections.
#[derive(Debug, Clone, PartialEq)]
pub struct SosFilter {
    pub sections: Vec<Biquad>,
}

impl SosFilter {
    /// Single causal pass, initialized at steady state for the first sample.
    pub fn filter(&self, input: &[f64]) -> Vec<f64> {
        let mut data = input.to_vec();
        if data.is_empty() {
            return data;
        }
        for s in &self.sections {
            let state = s.steady_state(data[0]);
            s.run(&mut data, state);
        }
        data
    }

    /// Forward-backward pass: zero phase, squared magnitude.
    pub fn filtfilt(&self, input: &[f64]) -> Vec<f64> {
        let mut data = self.filter(input);
        data.reverse();
        let mut data = self.filter(&data);
        data.reverse();
        data
    }

    /// Magnitude of one causal pass at frequency `f` for sampling rate `rate`.
    pub fn magnitude(&self, f: f64, rate: f64) -> f64 {
        let w = 2.0 * PI * f / rate;
        self.sections
            .iter()
            .map(|s| {
                let (re, im) = s.response(w);
                (re * re + im * im).sqrt()
            })
            .product()
    }
}

/// Butterworth design of order `n` as second-order sections (plus one
/// first-order section, stored as a biquad, for odd orders).
fn butterworth(order: usize, cutoff: f64, rate: f64, high_pass: bool) -> Vec<Biquad> {
    let k = (PI * cutoff / rate).tan();
    let k2 = k * k;
    let mut sections = Vec::with_capacity(order.div_ceil(2));
    for i in 0..order / 2 {
        let theta = PI * (2 * i + 1) as f64 / (2 * order) as f64;
        let q = 1.0 / (2.0 * theta.sin());
        let norm = 1.0 / (1.0 + k / q + k2);
        let a = [2.0 * (k2 - 1.0) * norm, (1.0 - k / q + k2) * norm];
        let b = if high_pass {
            [norm, -2.0 * norm, norm]
        } else {
            [k2 * norm, 2.0 * k2 * norm, k2 * norm]
        };
        sections.push(Biquad { b, a });
    }
    if order % 2 == 1 {
        let norm = 1.0 / (1.0 + k);
        let b = if high_pass {
            [norm, -norm, 0.0]
        } else {
            [k * norm, k * norm, 0.0]
        };
        sections.push(Biquad {
            b,
            a: [(k - 1.0) * norm, 0.0],
        });
    }
    sections
}

/// Analytic magnitude of a single causal pass of the Butterworth design.
pub fn butterworth_magnitude(spec: &FilterSpec, f: f64, rate: f64) -> f64 {
    let warp = |x: f64| (PI * x / rate).tan();
    let n = 2 * spec.order as i32;
    let lp = |fc: f64| 1.0 / (1.0 + (warp(f) / warp(fc)).powi(n)).sqrt();
    let hp = |fc: f64| {
        let r = (warp(f) / warp(fc)).powi(n);
        (r / (1.0 + r)).sqrt()
    };
    match spec.kind {
        FilterKind::LowPass => lp(spec.high_cut),
        FilterKind::HighPass => hp(spec.high_cut),
        FilterKind::BandPass => hp(spec.low_cut) * lp(spec.high_cut),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn designed_response_matches_closed_form() {
        let rate = 1000.0;
        for spec in [
            FilterSpec::eda_default(),
            FilterSpec::ppg_default(),
            FilterSpec::low_pass(5.0, 3),
            FilterSpec::band_pass(1.0, 20.0, 4),
        ] {
            let f = spec.design(rate).unwrap();
            for freq in [0.01, 0.05, 0.5, 1.2, 5.0, 35.0, 100.0, 400.0] {
                let got = f.magnitude(freq, rate);
                let want = butterworth_magnitude(&spec, freq, rate);
                assert!((got - want).abs() < 1e-9, "{spec:?} at {freq}: {got} vs {want}");
            }
        }
    }

    #[test]
    fn cutoff_at_or_above_nyquist_rejected() {
        assert!(FilterSpec::low_pass(500.0, 2).design(1000.0).is_err());
        assert!(FilterSpec::ppg_default().design(60.0).is_err());
        assert!(FilterSpec::band_pass(10.0, 5.0, 2).design(1000.0).is_err());
        assert!(FilterSpec::low_pass(1.0, 0).design(1000.0).is_err());
    }

    #[test]
    fn constant_passes_low_pass_exactly() {
        let f = FilterSpec::eda_default().design(1000.0).unwrap();
        let out = f.filtfilt(&vec![3.0; 5000]);
        assert!(out.iter().all(|v| (v - 3.0).abs() < 1e-9));
    }

    #[test]
    fn empty_input_is_fine() {
        let f = FilterSpec::eda_default().design(1000.0).unwrap();
        assert!(f.filtfilt(&[]).is_empty());
    }
}
