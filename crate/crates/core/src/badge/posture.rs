use crate::badge::AccelStream;
use crate::data::TimeSeries;
use crate::dsp::resample::{block_means, integer_ratio};
use crate::dsp::FilterSpec;
use crate::error::Result;

/// `(pos_act, pos_r, pos_lr, pos_fb)` on the output grid.
///
/// Per-sample angles are smoothed with `smoothing` at the accelerometer
/// rate and averaged per tick. `pos_lr = atan2(ax, az)` and
/// `pos_fb = atan2(ay, az)` in degrees; `pos_act` and `pos_r` are the
/// absolute first and the second finite difference of the total tilt
/// (angle between the acceleration vector and the badge z axis).
pub fn posture_features(accel: &AccelStream, out_rate: f64, smoothing: &FilterSpec) -> Result<[TimeSeries; 4]> {
    let m = integer_ratio(accel.rate, out_rate)?;
    let n = accel.len();
    let mut lr = Vec::with_capacity(n);
    let mut fb = Vec::with_capacity(n);
    let mut tilt = Vec::with_capacity(n);
    for i in 0..n {
        let (x, y, z) = (accel.ax[i], accel.ay[i], accel.az[i]);
        lr.push(x.atan2(z).to_degrees());
        fb.push(y.atan2(z).to_degrees());
        let norm = (x * x + y * y + z * z).sqrt();
        tilt.push(if norm > 0.0 { (z / norm).clamp(-1.0, 1.0).acos().to_degrees() } else { 0.0 });
    }
    let filter = smoothing.design(accel.rate)?;
    let smooth = |v: Vec<f64>| block_means(&filter.filtfilt(&v), m);
    let (lr, fb, tilt) = (smooth(lr), smooth(fb), smooth(tilt));

    let ticks = tilt.len();
    let act = (0..ticks)
        .map(|t| if t >= 1 { (tilt[t] - tilt[t - 1]).abs() * out_rate } else { 0.0 })
        .collect();
    let rate = (0..ticks)
        .map(|t| {
            if t >= 2 {
                (tilt[t] - 2.0 * tilt[t - 1] + tilt[t - 2]) * out_rate * out_rate
            } else {
                0.0
            }
        })
        .collect();
    let grid = accel.out_grid(out_rate, ticks);
    Ok([
        grid.series("pos_act", act),
        grid.series("pos_r", rate),
        grid.series("pos_lr", lr),
        grid.series("pos_fb", fb),
    ])
}

#[cfg(test)]
mod tests {
    use super::*;

    fn smoothing() -> FilterSpec {
        FilterSpec::low_pass(0.5, 2)
    }

    #[test]
    fn flat_badge_has_zero_angles() {
        let n = 500;
        let s = AccelStream::new(0.0, 50.0, vec![0.0; n], vec![0.0; n], vec![1.0; n]).unwrap();
        let [act, r, lr, fb] = posture_features(&s, 10.0, &smoothing()).unwrap();
        for c in [&act, &r, &lr, &fb] {
            assert!(c.values.iter().all(|v| v.abs() < 1e-9), "{}", c.name);
        }
    }

    #[test]
    fn static_tilt_is_recovered() {
        let n = 1000;
        let (s30, c30) = (30f64.to_radians().sin(), 30f64.to_radians().cos());
        let s = AccelStream::new(0.0, 50.0, vec![s30; n], vec![0.0; n], vec![c30; n]).unwrap();
        let [_, _, lr, fb] = posture_features(&s, 10.0, &smoothing()).unwrap();
        assert!(lr.values.iter().all(|v| (v - 30.0).abs() < 0.5));
        assert!(fb.values.iter().all(|v| v.abs() < 1e-9));
    }

    #[test]
    fn constant_rotation_rate() {
        // 10 deg/s in the left-right plane for 15 s.
        let rate = 50.0;
        let n = 750;
        let angle = |i: usize| (10.0 * i as f64 / rate).to_radians();
        let ax = (0..n).map(|i| angle(i).sin()).collect();
        let az = (0..n).map(|i| angle(i).cos()).collect();
        let s = AccelStream::new(0.0, rate, ax, vec![0.0; n], az).unwrap();
        let [act, r, _, _] = posture_features(&s, 10.0, &smoothing()).unwrap();
        // Skip forward-backward edge transients at both ends.
        for t in 30..act.len() - 30 {
            assert!((act.values[t] - 10.0).abs() < 0.5, "tick {t}: {}", act.values[t]);
            assert!(r.values[t].abs() < 1.0, "tick {t}: {}", r.values[t]);
        }
    }
}
