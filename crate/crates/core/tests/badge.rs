use std::f64::consts::PI;

use proptest::prelude::*;

use stress_core::badge::{movement_features, speech_activity, AccelStream, AudioFrame, AudioStream, Mic, PitchRange, SpectralAnalyzer, VoicingParams};

const AUDIO_RATE: f64 = 2000.0;
const FRAME: usize = 200;

fn frame(samples: Vec<f64>) -> AudioFrame {
    AudioFrame {
        mic: Mic::Front,
        samples,
        rate: AUDIO_RATE,
        frame_start: 0.0,
    }
}

/// Harmonic tone with decaying partial amplitudes plus a deterministic
/// pseudo-noise term.
fn tone(f0: f64, amps: &[f64], noise: f64, phase: f64) -> Vec<f64> {
    (0..FRAME)
        .map(|i| {
            let t = i as f64 / AUDIO_RATE;
            let h: f64 = amps.iter().enumerate().map(|(k, a)| a * (2.0 * PI * f0 * (k + 1) as f64 * t + phase * k as f64).sin()).sum();
            h + noise * ((i as f64 * 12.9898).sin() * 43758.5453).fract()
        })
        .collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn spectral_invariants(
        f0 in 80.0..350.0f64,
        amps in prop::collection::vec(0.05..1.0f64, 1..5),
        noise in 0.0..0.3f64,
        phase in 0.0..6.0f64,
        k in 0.01..100.0f64,
    ) {
        let analyzer = SpectralAnalyzer::new(FRAME, PitchRange::default()).unwrap();
        let x = tone(f0, &amps, noise, phase);
        let base = analyzer.analyze(&x, AUDIO_RATE).unwrap();
        for w in base.peaks.windows(2) {
            prop_assert!(w[0].1 >= w[1].1, "amplitudes out of order: {:?}", base.peaks);
        }
        for (hz, amp) in base.peaks {
            prop_assert!(hz >= 0.0 && amp >= 0.0);
        }
        prop_assert!(base.pitch == 0.0 || (50.0..=400.0).contains(&base.pitch), "pitch {}", base.pitch);

        let scaled: Vec<f64> = x.iter().map(|v| v * k).collect();
        let s = analyzer.analyze(&scaled, AUDIO_RATE).unwrap();
        // Slots past the real peaks hold rounding-level maxima; skip them.
        let floor = 1e-9 * base.peaks[0].1;
        for ((hz0, a0), (hz1, a1)) in base.peaks.iter().zip(&s.peaks).filter(|((_, a0), _)| *a0 > floor) {
            prop_assert_eq!(hz0, hz1);
            prop_assert!((a1 - k * a0).abs() <= 1e-6 * k * a0);
        }
        prop_assert!((base.pitch - s.pitch).abs() <= 1e-9 * base.pitch);
        let vol = |v: &[f64]| stress_core::badge::speech::frame_volume(&frame(v.to_vec()));
        prop_assert!((vol(&scaled) - k * vol(&x)).abs() <= 1e-6 * k * vol(&x));
    }

    #[test]
    fn voicing_flags_are_complementary(
        bursts in prop::collection::vec((0usize..290, 1usize..30, 0.1..2.0f64), 0..12),
    ) {
        let n = 300 * FRAME;
        let mut front = vec![0.0; n];
        let mut back = vec![0.0; n];
        for (i, (v, b)) in front.iter_mut().zip(back.iter_mut()).enumerate() {
            let hiss = 0.01 * ((i as f64 * 78.233).sin() * 43758.5453).fract();
            *v = hiss;
            *b = hiss * 0.7;
        }
        for (start, len, amp) in bursts {
            for i in start * FRAME..((start + len) * FRAME).min(n) {
                let t = i as f64 / AUDIO_RATE;
                front[i] += amp * (2.0 * PI * 150.0 * t).sin();
                back[i] += 0.3 * amp * (2.0 * PI * 150.0 * t).sin();
            }
        }
        let stream = |mic, samples| AudioStream { mic, start: 0.0, rate: AUDIO_RATE, samples };
        let f = stream(Mic::Front, front).frames(0.1).unwrap();
        let b = stream(Mic::Back, back).frames(0.1).unwrap();
        let sa = speech_activity(&f, &b, &VoicingParams::default()).unwrap();
        prop_assert_eq!(sa.voiced.len(), 300);
        for (v, u) in sa.voiced.values.iter().zip(&sa.unvoiced.values) {
            prop_assert!(*v == 0.0 || *v == 1.0);
            prop_assert_eq!(v + u, 1.0);
        }
    }

    #[test]
    fn body_movement_ignores_axis_order(
        ax in prop::collection::vec(-2.0..2.0f64, 500),
        ay in prop::collection::vec(-2.0..2.0f64, 500),
        az in prop::collection::vec(-2.0..2.0f64, 500),
    ) {
        let a = AccelStream::new(0.0, 50.0, ax.clone(), ay.clone(), az.clone()).unwrap();
        let b = AccelStream::new(0.0, 50.0, az, ax, ay).unwrap();
        let [bm_a, ..] = movement_features(&a, 10.0).unwrap();
        let [bm_b, ..] = movement_features(&b, 10.0).unwrap();
        prop_assert_eq!(bm_a.len(), bm_b.len());
        for (x, y) in bm_a.values.iter().zip(&bm_b.values) {
            prop_assert!((x - y).abs() <= 1e-12 * x.abs().max(1.0));
        }
    }
}
