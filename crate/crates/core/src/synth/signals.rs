//! Parametric raw-signal models.

use std::f64::consts::{PI, SQRT_2};

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp, Normal, StandardNormal};

use crate::badge::{AccelStream, AudioStream, Mic};
use crate::data::{Label, Task, TaskSegment, TimeSeries};
use crate::error::Result;
use crate::synth::MechanismParams;

/// First-order lag of the stress indicator sampled at `rate`.
pub(crate) fn stress_response(segments: &[TaskSegment], rate: f64, n: usize, tau: f64) -> Vec<f64> {
    let keep = if tau > 0.0 { (-1.0 / (rate * tau)).exp() } else { 0.0 };
    let mut out = Vec::with_capacity(n);
    let mut level = 0.0;
    let mut seg = 0;
    for i in 0..n {
        let t = i as f64 / rate;
        while seg + 1 < segments.len() && t >= segments[seg].end {
            seg += 1;
        }
        let target = if segments[seg].label == Label::Stress { 1.0 } else { 0.0 };
        if i == 0 {
            level = target;
        }
        level = keep * level + (1.0 - keep) * target;
        out.push(level);
    }
    out
}

fn task_at(segments: &[TaskSegment], t: f64) -> Task {
    segments
        .iter()
        .find(|s| t < s.end)
        .or(segments.last())
        .map(|s| s.task)
        .unwrap_or(Task::Nt1)
}

fn normal(rng: &mut ChaCha8Rng) -> f64 {
    StandardNormal.sample(rng)
}

/// Event times of an inhomogeneous Poisson process by thinning.
fn poisson_events(rng: &mut ChaCha8Rng, duration: f64, max_rate: f64, rate_at: impl Fn(f64) -> f64) -> Vec<f64> {
    let mut out = Vec::new();
    if !(max_rate > 0.0) {
        return out;
    }
    let gap = Exp::new(max_rate).expect("positive rate");
    let mut t = 0.0;
    loop {
        t += gap.sample(rng);
        if t >= duration {
            return out;
        }
        if rng.random::<f64>() * max_rate < rate_at(t) {
            out.push(t);
        }
    }
}

const SCR_RISE_S: f64 = 0.75;
const SCR_DECAY_S: f64 = 2.0;

/// Tonic level plus Poisson skin-conductance responses plus white noise (µS).
pub(crate) fn eda(p: &MechanismParams, s: f64, response: &[f64], rate: f64, rng: &mut ChaCha8Rng) -> Vec<f64> {
    let n = response.len();
    let duration = n as f64 / rate;
    let mut out: Vec<f64> = response.iter().map(|&u| p.eda_level.at(s, u)).collect();

    let per_min = |u: f64| p.scr_rate.at(s, u).max(0.0) / 60.0;
    let max_rate = per_min(0.0).max(per_min(1.0));
    let at = |t: f64| response[((t * rate) as usize).min(n - 1)];
    let onsets = poisson_events(rng, duration, max_rate, |t| per_min(at(t)));
    let peak_t = SCR_RISE_S * SCR_DECAY_S / (SCR_DECAY_S - SCR_RISE_S) * (SCR_DECAY_S / SCR_RISE_S).ln();
    let peak = (-peak_t / SCR_DECAY_S).exp() - (-peak_t / SCR_RISE_S).exp();
    let amp = Exp::new(1.0 / p.scr_rate.noise.max(1e-12)).expect("positive amplitude");
    let span = (8.0 * SCR_DECAY_S * rate) as usize;
    for onset in onsets {
        let a = amp.sample(rng) / peak;
        let i0 = (onset * rate).ceil() as usize;
        for (k, v) in out.iter_mut().enumerate().skip(i0).take(span) {
            let dt = k as f64 / rate - onset;
            *v += a * ((-dt / SCR_DECAY_S).exp() - (-dt / SCR_RISE_S).exp());
        }
    }
    let noise = p.eda_level.noise;
    for v in &mut out {
        *v += noise * normal(rng);
    }
    out
}

const BREATH_HZ: f64 = 0.25;

/// Pulse train with stress-dependent rate, interval variability and shape
/// variability, riding on a respiratory baseline.
pub(crate) fn ppg(p: &MechanismParams, s: f64, response: &[f64], rate: f64, rng: &mut ChaCha8Rng) -> Vec<f64> {
    let n = response.len();
    let duration = n as f64 / rate;
    let at = |t: f64| response[((t * rate) as usize).min(n - 1)];
    let mut out = vec![0.0; n];

    let phase = rng.random_range(0.0..2.0 * PI);
    let mut t = rng.random_range(0.0..1.0);
    while t < duration {
        let u = at(t);
        let shape_sd = p.pulse_shape.at(s, u).max(0.0);
        let amp = 1.0 + p.heart_rate.noise * normal(rng);
        let dicrotic = 0.4 * (1.0 + shape_sd * normal(rng));
        let notch = 0.33 * (1.0 + 0.5 * shape_sd * normal(rng));
        let width = 0.045 * (1.0 + 0.5 * shape_sd * normal(rng)).max(0.3);
        let i0 = (t * rate).ceil() as usize;
        let len = (0.8 * rate) as usize;
        for (k, v) in out.iter_mut().enumerate().skip(i0).take(len) {
            let tau = k as f64 / rate - t;
            let sys = (-(tau - 0.12).powi(2) / (2.0 * width * width)).exp();
            let dia = (-(tau - 0.12 - notch).powi(2) / (2.0 * 0.06f64.powi(2))).exp();
            *v += amp * (sys + dicrotic * dia);
        }
        let mean_ibi = 60.0 / p.heart_rate.at(s, u).max(30.0);
        // Respiratory sinus arrhythmia carries most of the interval variance.
        let sd = p.ibi_sd.at(s, u).max(0.005);
        let rsa = SQRT_2 * sd * (2.0 * PI * BREATH_HZ * t + phase).sin();
        t += (mean_ibi + rsa + 0.2 * sd * normal(rng)).clamp(0.35, 1.8);
    }
    for (i, v) in out.iter_mut().enumerate() {
        let t = i as f64 / rate;
        *v += 0.15 * (2.0 * PI * BREATH_HZ * t + phase).sin() + 0.02 * normal(rng);
    }
    out
}

/// Unit-variance AR(1) process whose inverse time constant follows `speed`.
fn ar1(rate: f64, speed: impl Fn(usize) -> f64, n: usize, rng: &mut ChaCha8Rng) -> Vec<f64> {
    let mut x = normal(rng);
    (0..n)
        .map(|i| {
            let phi = (-speed(i).max(1e-3) / rate).exp();
            x = phi * x + (1.0 - phi * phi).sqrt() * normal(rng);
            x
        })
        .collect()
}

const BURST_S: f64 = 1.5;

/// Gravity along a slowly swaying torso plus movement bursts and sensor noise.
pub(crate) fn accel(p: &MechanismParams, s: f64, response: &[f64], rate: f64, rng: &mut ChaCha8Rng) -> Result<AccelStream> {
    let n = response.len();
    let duration = n as f64 / rate;
    let speed = |i: usize| p.sway_rate.at(s, response[i]);
    let sway_fb = ar1(rate, speed, n, rng);
    let sway_lr = ar1(rate, speed, n, rng);
    let (mut ax, mut ay, mut az) = (Vec::with_capacity(n), Vec::with_capacity(n), Vec::with_capacity(n));
    for i in 0..n {
        let amp = p.sway.at(s, response[i]).max(0.0);
        let fb = (p.lean_deg + amp * sway_fb[i]).to_radians();
        let lr = (0.5 * amp * sway_lr[i]).to_radians();
        let (gx, gy) = (lr.tan(), fb.tan());
        let norm = (gx * gx + gy * gy + 1.0).sqrt();
        ax.push(gx / norm);
        ay.push(gy / norm);
        az.push(1.0 / norm);
    }

    let per_min = |u: f64| p.movement.at(s, u).max(0.0) / 60.0;
    let max_rate = per_min(0.0).max(per_min(1.0));
    let at = |t: f64| response[((t * rate) as usize).min(n - 1)];
    let onsets = poisson_events(rng, duration, max_rate, |t| per_min(at(t)));
    let amp = Exp::new(1.0 / p.movement.noise.max(1e-12)).expect("positive amplitude");
    let len = (BURST_S * rate) as usize;
    for onset in onsets {
        let a = amp.sample(rng);
        let freq = rng.random_range(2.0..5.0);
        let dir = [normal(rng), normal(rng), normal(rng)];
        let dn = (dir[0] * dir[0] + dir[1] * dir[1] + dir[2] * dir[2]).sqrt().max(1e-9);
        let i0 = (onset * rate).ceil() as usize;
        for k in i0..(i0 + len).min(n) {
            let tau = k as f64 / rate - onset;
            let env = (PI * tau / BURST_S).sin().powi(2);
            let v = a * env * (2.0 * PI * freq * tau).sin() / dn;
            ax[k] += v * dir[0];
            ay[k] += v * dir[1];
            az[k] += v * dir[2];
        }
    }
    for ch in [&mut ax, &mut ay, &mut az] {
        for v in ch.iter_mut() {
            *v += 0.01 * normal(rng);
        }
    }
    AccelStream::new(0.0, rate, ax, ay, az)
}

fn talks(task: Task) -> bool {
    matches!(task, Task::Nt1 | Task::Nt2 | Task::Ps)
}

const HARMONICS: usize = 5;
/// Samples between pitch jitter redraws.
const PITCH_HOLD: usize = 40;
const FADE_S: f64 = 0.02;

/// Alternating talk spurts and pauses picked up by both microphones; the
/// back microphone hears an attenuated copy.
pub(crate) fn audio(
    p: &MechanismParams,
    s: f64,
    segments: &[TaskSegment],
    response: &[f64],
    rate: f64,
    rng: &mut ChaCha8Rng,
) -> (AudioStream, AudioStream) {
    let n = response.len();
    let duration = n as f64 / rate;
    let mut voice = vec![0.0; n];
    let silent_duty = p.talk.baseline;
    let talk_duty = p.talk.baseline + p.talk.stress_shift;
    let mean_duty = 0.5 * (silent_duty + talk_duty);
    let spurt = Exp::new(1.0 / p.talk.noise.max(1e-3)).expect("positive spurt length");
    let pitch_spread = Normal::new(0.0, p.pitch.noise.max(0.0)).expect("finite spread");

    let mut t = 0.0;
    while t < duration {
        let task = task_at(segments, t);
        let d = (mean_duty + s * (if talks(task) { talk_duty } else { silent_duty } - mean_duty)).clamp(0.0, 1.0);
        let on = spurt.sample(rng).max(0.2);
        if rng.random::<f64>() < d {
            let i0 = (t * rate) as usize;
            let i1 = (((t + on) * rate) as usize).min(n);
            let mut f_off = pitch_spread.sample(rng);
            let mut phase = rng.random_range(0.0..2.0 * PI);
            for (k, v) in voice.iter_mut().enumerate().take(i1).skip(i0) {
                let u = response[k];
                if k % PITCH_HOLD == 0 {
                    f_off = pitch_spread.sample(rng);
                }
                let f0 = (p.pitch.at(s, u) + f_off).clamp(60.0, 380.0);
                phase += 2.0 * PI * f0 / rate;
                let tau = k as f64 / rate - t;
                let env = (tau / FADE_S).min((on - tau) / FADE_S).clamp(0.0, 1.0);
                let a = p.loudness.at(s, u).max(0.0) * env;
                let mut w = 0.0;
                for h in 1..=HARMONICS {
                    w += (h as f64 * phase).sin() / h as f64;
                }
                *v = a * w;
            }
        }
        t += on;
    }
    let floor = p.loudness.noise;
    let mic = |gain: f64, which: Mic, rng: &mut ChaCha8Rng| AudioStream {
        mic: which,
        start: 0.0,
        rate,
        // Stored at single precision so WAV files round-trip exactly.
        samples: voice.iter().map(|&v| (gain * v + floor * normal(rng)) as f32 as f64).collect(),
    };
    let front = mic(1.0, Mic::Front, rng);
    let back = mic(0.3, Mic::Back, rng);
    (front, back)
}

pub(crate) fn series(name: &str, rate: f64, values: Vec<f64>) -> TimeSeries {
    TimeSeries {
        name: name.into(),
        start: 0.0,
        rate,
        values,
    }
}
