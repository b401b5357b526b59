//! Synthetic protocol sessions with planted ground truth.
//!
//! A cohort is planned first (per-participant seeds, jittered parameters and
//! task timelines) and each session is then generated independently from its
//! plan, so sessions can be produced in any order or in parallel.

mod config;
mod signals;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

pub use config::{Effect, GeneratorConfig, TsstTimeline, FEATURE_RATE, TARGET_SAMPLES};

use crate::badge::{AccelStream, AudioStream};
use crate::data::{Label, TaskSegment, TimeSeries};
use crate::error::Result;

/// Stress mechanisms of one participant after jitter.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MechanismParams {
    pub eda_level: Effect,
    pub scr_rate: Effect,
    pub heart_rate: Effect,
    pub ibi_sd: Effect,
    pub pulse_shape: Effect,
    pub sway: Effect,
    pub sway_rate: Effect,
    pub movement: Effect,
    pub talk: Effect,
    pub pitch: Effect,
    pub loudness: Effect,
    /// Forward lean of the torso (degrees).
    pub lean_deg: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParticipantPlan {
    pub participant_id: String,
    pub seed: u64,
    pub params: MechanismParams,
    pub segments: Vec<TaskSegment>,
    pub expected_stress: usize,
    pub expected_neutral: usize,
}

/// Ground-truth manifest of a generated cohort.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub seed: u64,
    pub separability: f64,
    pub config: GeneratorConfig,
    pub participants: Vec<ParticipantPlan>,
}

/// Raw recordings of one session.
#[derive(Debug, Clone, PartialEq)]
pub struct RawSession {
    pub participant_id: String,
    pub segments: Vec<TaskSegment>,
    pub eda: TimeSeries,
    pub ppg: TimeSeries,
    pub accel: AccelStream,
    pub front: AudioStream,
    pub back: AudioStream,
}

/// SplitMix64 step, used to derive independent per-participant seeds.
pub fn derive_seed(master: u64, index: u64) -> u64 {
    let mut z = master.wrapping_add(0x9E37_79B9_7F4A_7C15u64.wrapping_mul(index.wrapping_add(1)));
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

pub fn participant_id(index: usize) -> String {
    format!("P{}", index + 1)
}

fn jitter(e: Effect, j: f64, rng: &mut ChaCha8Rng) -> Effect {
    let mut f = || if j > 0.0 { rng.random_range(1.0 - j..=1.0 + j) } else { 1.0 };
    Effect {
        baseline: e.baseline * f(),
        stress_shift: e.stress_shift * f(),
        noise: e.noise,
    }
}

/// Feature ticks of a session at [`FEATURE_RATE`], split by label.
pub fn expected_counts(segments: &[TaskSegment], physio_rate: f64) -> (usize, usize) {
    let total = segments.last().map_or(0.0, |s| s.end);
    let per_tick = (physio_rate / FEATURE_RATE).round() as usize;
    let ticks = (total * physio_rate).floor() as usize / per_tick;
    let mut stress = 0;
    for i in 0..ticks {
        let t = i as f64 / FEATURE_RATE;
        let seg = segments.iter().find(|s| t < s.end).unwrap_or(&segments[segments.len() - 1]);
        if seg.label == Label::Stress {
            stress += 1;
        }
    }
    (stress, ticks - stress)
}

pub fn plan_participant(config: &GeneratorConfig, index: usize) -> ParticipantPlan {
    let seed = derive_seed(config.seed, index as u64);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let j = config.participant_jitter;
    let talk = config.talk;
    let params = MechanismParams {
        eda_level: jitter(config.eda_level, j, &mut rng),
        scr_rate: jitter(config.scr_rate, j, &mut rng),
        heart_rate: jitter(config.heart_rate, j, &mut rng),
        ibi_sd: jitter(config.ibi_sd, j, &mut rng),
        pulse_shape: jitter(config.pulse_shape, j, &mut rng),
        sway: jitter(config.sway, j, &mut rng),
        sway_rate: jitter(config.sway_rate, j, &mut rng),
        movement: jitter(config.movement, j, &mut rng),
        talk,
        pitch: jitter(config.pitch, j, &mut rng),
        loudness: jitter(config.loudness, j, &mut rng),
        lean_deg: rng.random_range(5.0..15.0),
    };
    let segments = config.timeline.jittered_segments(&mut rng);
    let (expected_stress, expected_neutral) = expected_counts(&segments, config.physio_rate);
    ParticipantPlan {
        participant_id: participant_id(index),
        seed,
        params,
        segments,
        expected_stress,
        expected_neutral,
    }
}

pub fn plan_cohort(config: &GeneratorConfig) -> Result<Manifest> {
    config.validate()?;
    Ok(Manifest {
        seed: config.seed,
        separability: config.separability,
        config: config.clone(),
        participants: (0..config.cohort_size).map(|i| plan_participant(config, i)).collect(),
    })
}

fn stream(seed: u64, id: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(id);
    rng
}

/// Generates the raw recordings of one planned session.
pub fn generate_session(config: &GeneratorConfig, plan: &ParticipantPlan) -> Result<RawSession> {
    config.validate()?;
    let s = config.separability;
    let p = &plan.params;
    let total = plan.segments.last().map_or(0.0, |seg| seg.end);
    let samples = |rate: f64| (total * rate).floor() as usize;
    let response = |rate: f64| signals::stress_response(&plan.segments, rate, samples(rate), config.response_tau_s);

    let physio_resp = response(config.physio_rate);
    let eda = signals::eda(p, s, &physio_resp, config.physio_rate, &mut stream(plan.seed, 1));
    let ppg = signals::ppg(p, s, &physio_resp, config.physio_rate, &mut stream(plan.seed, 2));
    drop(physio_resp);
    let accel = signals::accel(p, s, &response(config.accel_rate), config.accel_rate, &mut stream(plan.seed, 3))?;
    let (front, back) = signals::audio(
        p,
        s,
        &plan.segments,
        &response(config.audio_rate),
        config.audio_rate,
        &mut stream(plan.seed, 4),
    );
    Ok(RawSession {
        participant_id: plan.participant_id.clone(),
        segments: plan.segments.clone(),
        eda: signals::series("eda", config.physio_rate, eda),
        ppg: signals::series("ppg", config.physio_rate, ppg),
        accel,
        front,
        back,
    })
}

/// Plans and generates every session. Holds all raw streams in memory;
/// large cohorts should generate sessions one at a time from the manifest.
pub fn generate_cohort(config: &GeneratorConfig) -> Result<(Manifest, Vec<RawSession>)> {
    let manifest = plan_cohort(config)?;
    let sessions = manifest
        .participants
        .iter()
        .map(|p| generate_session(config, p))
        .collect::<Result<Vec<_>>>()?;
    Ok((manifest, sessions))
}
