use crate::badge::AccelStream;
use crate::data::TimeSeries;
use crate::dsp::resample::integer_ratio;
use crate::error::Result;

/// Standard gravity in the accelerometer's units.
pub const GRAVITY_G: f64 = 1.0;

/// Mean squared acceleration magnitude per output tick.
pub fn tick_energy(accel: &AccelStream, out_rate: f64) -> Result<Vec<f64>> {
    let m = integer_ratio(accel.rate, out_rate)?;
    let n = accel.len() / m;
    Ok((0..n)
        .map(|k| {
            let r = k * m..(k + 1) * m;
            let sum: f64 = r
                .map(|i| accel.ax[i].powi(2) + accel.ay[i].powi(2) + accel.az[i].powi(2))
                .sum();
            sum / m as f64
        })
        .collect())
}

/// `(bm, bm_act, bm_r)`: normalized magnitude, absolute first derivative
/// of energy and second derivative of energy, on the output grid. Ticks
/// where a derivative is undefined carry 0.
pub fn movement_features(accel: &AccelStream, out_rate: f64) -> Result<[TimeSeries; 3]> {
    let energy = tick_energy(accel, out_rate)?;
    let bm: Vec<f64> = energy.iter().map(|e| e.sqrt() / GRAVITY_G).collect();
    let bm_act: Vec<f64> = (0..energy.len())
        .map(|t| if t >= 1 { (energy[t] - energy[t - 1]).abs() * out_rate } else { 0.0 })
        .collect();
    let bm_r: Vec<f64> = (0..energy.len())
        .map(|t| {
            if t >= 2 {
                (energy[t] - 2.0 * energy[t - 1] + energy[t - 2]) * out_rate * out_rate
            } else {
                0.0
            }
        })
        .collect();
    let grid = accel.out_grid(out_rate, energy.len());
    Ok([
        grid.series("bm", bm),
        grid.series("bm_act", bm_act),
        grid.series("bm_r", bm_r),
    ])
}
