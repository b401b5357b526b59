//! Physiological signal processing: filtering, block downsampling, pulse
//! detection, HRV and PPG template similarity.
//!
//! Everything is derived at the native acquisition rate and only then
//! brought onto the feature grid, so the 35 Hz PPG band never meets the
//! 10 Hz output rate directly.

pub mod beats;
pub mod filter;
pub mod hrv;
pub mod resample;
pub mod template;

use serde::{Deserialize, Serialize};

pub use beats::{detect_beats, BeatSequence};
pub use filter::{FilterKind, FilterSpec};
pub use hrv::compute_hrv;
pub use resample::downsample;
pub use template::ppg_template_similarity;

use crate::data::{TickGrid, TimeSeries};
use crate::error::{Error, Result};

/// Physiological extraction settings.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhysioConfig {
    pub eda_filter: FilterSpec,
    pub ppg_filter: FilterSpec,
    pub hrv_window_s: f64,
    pub out_rate: f64,
}

impl Default for PhysioConfig {
    fn default() -> Self {
        PhysioConfig {
            eda_filter: FilterSpec::eda_default(),
            ppg_filter: FilterSpec::ppg_default(),
            hrv_window_s: hrv::DEFAULT_WINDOW_S,
            out_rate: 10.0,
        }
    }
}

/// EDA low-pass at the channel's own rate.
pub fn low_pass_eda(raw: &TimeSeries, spec: &FilterSpec) -> Result<TimeSeries> {
    spec.apply(raw)
}

/// PPG band-pass at the channel's own rate.
pub fn band_pass_ppg(raw: &TimeSeries, spec: &FilterSpec) -> Result<TimeSeries> {
    spec.apply(raw)
}

/// The five physiological channels (`eda`, `eda_f`, `ppg`, `ppg_t`, `hrv`)
/// on a common grid at `config.out_rate`.
pub fn extract_physio(raw_eda: &TimeSeries, raw_ppg: &TimeSeries, config: &PhysioConfig) -> Result<Vec<TimeSeries>> {
    if raw_eda.rate != raw_ppg.rate || raw_eda.start != raw_ppg.start {
        return Err(Error::Alignment(format!(
            "EDA ({} Hz from {} s) and PPG ({} Hz from {} s) must share one sampling grid",
            raw_eda.rate, raw_eda.start, raw_ppg.rate, raw_ppg.start
        )));
    }
    let eda_f = low_pass_eda(raw_eda, &config.eda_filter)?;
    let ppg_f = band_pass_ppg(raw_ppg, &config.ppg_filter)?;
    let beats = detect_beats(&ppg_f);

    let mut eda = downsample(raw_eda, config.out_rate)?;
    let mut eda_f = downsample(&eda_f, config.out_rate)?;
    let mut ppg = downsample(raw_ppg, config.out_rate)?;
    let n = eda.len().min(ppg.len());
    eda.values.truncate(n);
    eda_f.values.truncate(n);
    ppg.values.truncate(n);
    eda.name = "eda".into();
    eda_f.name = "eda_f".into();
    ppg.name = "ppg".into();

    let grid = TickGrid {
        start: raw_eda.start,
        rate: config.out_rate,
        len: n,
    };
    let ppg_t = ppg_template_similarity(&ppg_f, &beats, grid);
    let hrv = compute_hrv(&beats, config.hrv_window_s, grid);
    Ok(vec![eda, eda_f, ppg, ppg_t, hrv])
}
