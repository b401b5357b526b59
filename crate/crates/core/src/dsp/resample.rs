use crate::data::TimeSeries;
use crate::error::{Error, Result};

/// Integer ratio between two rates, or a configuration error.
pub fn integer_ratio(rate: f64, out_rate: f64) -> Result<usize> {
    if !(out_rate > 0.0) || !(rate > 0.0) {
        return Err(Error::Config(format!("rates must be positive ({rate} -> {out_rate})")));
    }
    let ratio = rate / out_rate;
    let m = ratio.round();
    if m < 1.0 || (ratio - m).abs() > 1e-9 * ratio.max(1.0) {
        return Err(Error::Config(format!(
            "rate {rate} Hz is not an integer multiple of {out_rate} Hz"
        )));
    }
    Ok(m as usize)
}

/// Block-average downsampling: output `i` is the mean of input samples
/// `[i*m, (i+1)*m)`; a trailing partial block is dropped.
pub fn downsample(series: &TimeSeries, out_rate: f64) -> Result<TimeSeries> {
    let m = integer_ratio(series.rate, out_rate)?;
    let values = block_means(&series.values, m);
    Ok(TimeSeries {
        name: series.name.clone(),
        start: series.start,
        rate: out_rate,
        values,
    })
}

pub(crate) fn block_means(values: &[f64], m: usize) -> Vec<f64> {
    values
        .chunks_exact(m)
        .map(|block| block.iter().sum::<f64>() / m as f64)
        .collect()
}
