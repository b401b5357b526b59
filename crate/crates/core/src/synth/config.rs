use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::data::{Task, TaskSegment};
use crate::error::{Error, Result};

/// Task durations in seconds, run in the order NT1, PP, PS, CG, PAD, NT2.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TsstTimeline {
    pub nt1: f64,
    pub pp: f64,
    pub ps: f64,
    pub cg: f64,
    pub pad: f64,
    pub nt2: f64,
    /// Half-width of the uniform per-task duration jitter.
    pub task_jitter_s: f64,
    /// Half-width of the uniform PAD duration jitter.
    pub pad_jitter_s: f64,
}

/// Mean per-participant sample count the default PAD is sized to.
pub const TARGET_SAMPLES: f64 = 13745.0;
pub const FEATURE_RATE: f64 = 10.0;

impl Default for TsstTimeline {
    fn default() -> Self {
        let fixed = 120.0 + 180.0 + 300.0 + 300.0 + 120.0;
        TsstTimeline {
            nt1: 120.0,
            pp: 180.0,
            ps: 300.0,
            cg: 300.0,
            pad: TARGET_SAMPLES / FEATURE_RATE - fixed,
            nt2: 120.0,
            task_jitter_s: 5.0,
            pad_jitter_s: 105.0,
        }
    }
}

impl TsstTimeline {
    pub fn order(&self) -> [(Task, f64); 6] {
        [
            (Task::Nt1, self.nt1),
            (Task::Pp, self.pp),
            (Task::Ps, self.ps),
            (Task::Cg, self.cg),
            (Task::Pad, self.pad),
            (Task::Nt2, self.nt2),
        ]
    }

    pub fn validate(&self) -> Result<()> {
        for (task, d) in self.order() {
            let jitter = if task == Task::Pad { self.pad_jitter_s } else { self.task_jitter_s };
            if !(d.is_finite() && jitter >= 0.0 && d - jitter > 0.0) {
                return Err(Error::Config(format!("{task} duration {d} s with jitter ±{jitter} s can reach zero")));
            }
        }
        Ok(())
    }

    /// Nominal total length in seconds.
    pub fn total(&self) -> f64 {
        self.order().iter().map(|(_, d)| d).sum()
    }

    /// Segments without jitter.
    pub fn nominal_segments(&self) -> Vec<TaskSegment> {
        build(self.order().map(|(t, d)| (t, d)))
    }

    /// Segments with independent uniform duration jitter per task.
    pub fn jittered_segments(&self, rng: &mut impl Rng) -> Vec<TaskSegment> {
        build(self.order().map(|(t, d)| {
            let j = if t == Task::Pad { self.pad_jitter_s } else { self.task_jitter_s };
            let delta = if j > 0.0 { rng.random_range(-j..=j) } else { 0.0 };
            (t, d + delta)
        }))
    }
}

fn build(durations: [(Task, f64); 6]) -> Vec<TaskSegment> {
    let mut t = 0.0;
    durations
        .iter()
        .map(|&(task, d)| {
            let s = TaskSegment::new(task, t, t + d);
            t += d;
            s
        })
        .collect()
}

/// One class-conditional mechanism: value `baseline + separability *
/// stress_shift * response(t)` with a mechanism-specific noise scale.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Effect {
    pub baseline: f64,
    pub stress_shift: f64,
    pub noise: f64,
}

impl Effect {
    pub const fn new(baseline: f64, stress_shift: f64, noise: f64) -> Self {
        Effect {
            baseline,
            stress_shift,
            noise,
        }
    }

    pub fn at(&self, separability: f64, response: f64) -> f64 {
        self.baseline + separability * self.stress_shift * response
    }
}

/// Generator parameters. Every mechanism is scaled by `separability`, so
/// at zero the stress and neutral segments share one distribution.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GeneratorConfig {
    pub seed: u64,
    pub separability: f64,
    pub cohort_size: usize,
    pub timeline: TsstTimeline,
    /// Relative half-width of per-participant parameter jitter.
    pub participant_jitter: f64,
    /// Time constant of the physiological response to task changes.
    pub response_tau_s: f64,

    pub physio_rate: f64,
    pub accel_rate: f64,
    pub audio_rate: f64,

    /// Tonic skin conductance (µS); noise is the white measurement noise.
    pub eda_level: Effect,
    /// Skin-conductance responses per minute; noise is the mean amplitude (µS).
    pub scr_rate: Effect,
    /// Heart rate (bpm); noise is the pulse amplitude noise.
    pub heart_rate: Effect,
    /// Inter-beat-interval standard deviation (s).
    pub ibi_sd: Effect,
    /// Per-beat pulse shape variability (relative).
    pub pulse_shape: Effect,
    /// Postural sway standard deviation (degrees); noise is unused.
    pub sway: Effect,
    /// Inverse sway time constant (1/s); noise is unused.
    pub sway_rate: Effect,
    /// Movement bursts per minute; noise is the mean burst amplitude (g).
    pub movement: Effect,
    /// Probability of talking outside of tasks that involve speech versus
    /// inside them: `baseline` is the duty cycle of silent tasks, `stress_shift`
    /// the extra duty cycle of talking tasks; noise is the mean talk spurt (s).
    pub talk: Effect,
    /// Voice fundamental frequency (Hz); noise is the pitch jitter.
    pub pitch: Effect,
    /// Voice amplitude (full scale); noise is the microphone noise floor.
    pub loudness: Effect,
}

impl Default for GeneratorConfig {
    fn default() -> Self {
        GeneratorConfig {
            seed: 0,
            separability: 0.7,
            cohort_size: 18,
            timeline: TsstTimeline::default(),
            participant_jitter: 0.2,
            response_tau_s: 4.0,
            physio_rate: 1000.0,
            accel_rate: 50.0,
            audio_rate: 2000.0,
            eda_level: Effect::new(4.0, 0.03, 0.02),
            scr_rate: Effect::new(3.0, 1.0, 0.25),
            heart_rate: Effect::new(72.0, 15.0, 0.05),
            ibi_sd: Effect::new(0.06, -0.002, 0.0),
            pulse_shape: Effect::new(0.05, 0.03, 0.0),
            sway: Effect::new(1.0, 2.5, 0.0),
            sway_rate: Effect::new(1.0, 0.0, 0.0),
            movement: Effect::new(2.0, 6.0, 0.15),
            talk: Effect::new(0.15, 0.7, 1.5),
            pitch: Effect::new(160.0, 35.0, 10.0),
            loudness: Effect::new(0.1, 0.08, 0.004),
        }
    }
}

impl GeneratorConfig {
    /// Only the tonic EDA level and the speed of postural sway respond to
    /// stress.
    pub fn planted_eda_posture() -> Self {
        let d = GeneratorConfig::default();
        let flat = |e: Effect| Effect { stress_shift: 0.0, ..e };
        GeneratorConfig {
            separability: 1.0,
            eda_level: Effect::new(4.0, 0.6, 0.02),
            scr_rate: flat(d.scr_rate),
            heart_rate: flat(d.heart_rate),
            ibi_sd: flat(d.ibi_sd),
            pulse_shape: flat(d.pulse_shape),
            sway: Effect::new(1.5, 1.5, 0.0),
            sway_rate: Effect::new(0.3, 0.7, 0.0),
            movement: flat(d.movement),
            talk: Effect { stress_shift: 0.0, ..d.talk },
            pitch: flat(d.pitch),
            loudness: flat(d.loudness),
            ..d
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.timeline.validate()?;
        if !(0.0..=1.0).contains(&self.separability) {
            return Err(Error::Config(format!("separability must lie in [0, 1], got {}", self.separability)));
        }
        if self.cohort_size == 0 {
            return Err(Error::Config("cohort size must be at least 1".into()));
        }
        if !(0.0..1.0).contains(&self.participant_jitter) {
            return Err(Error::Config(format!("participant jitter must lie in [0, 1), got {}", self.participant_jitter)));
        }
        for (name, rate) in [("physio", self.physio_rate), ("accel", self.accel_rate), ("audio", self.audio_rate)] {
            let per_tick = rate / FEATURE_RATE;
            if !(rate > 0.0) || per_tick.fract() != 0.0 {
                return Err(Error::Config(format!("{name} rate {rate} Hz must be a positive multiple of {FEATURE_RATE} Hz")));
            }
        }
        if !(self.response_tau_s >= 0.0) {
            return Err(Error::Config("response time constant must be non-negative".into()));
        }
        let talk_max = self.talk.baseline + self.talk.stress_shift;
        if !(0.0..=1.0).contains(&self.talk.baseline) || !(0.0..=1.0).contains(&talk_max) {
            return Err(Error::Config("talk duty cycles must lie in [0, 1]".into()));
        }
        Ok(())
    }
}
