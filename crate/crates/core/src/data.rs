//! Data model shared by every stage of the pipeline: uniformly sampled
//! channels, the fused 36-dimensional feature vector, task segments and
//! per-participant labeled datasets.
//!
//! Fusion aligns the physiological and badge channels on a common tick grid
//! by taking, for every tick, the sample of each channel closest in time.

use std::fmt;
use std::ops::Range;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Number of physiological features at the head of every [`FeatureVector`].
pub const PHYS_DIM: usize = 5;
/// Number of sociometric badge features following the physiological block.
pub const BADGE_DIM: usize = 31;
pub const FEATURE_DIM: usize = PHYS_DIM + BADGE_DIM;

/// Canonical feature order. Model files and rankings index into this table.
pub const FEATURE_NAMES: [&str; FEATURE_DIM] = [
    "eda", "eda_f", "ppg", "ppg_t", "hrv", // physiological
    "bm", "bm_act", "bm_r", "pos_act", "pos_r", "pos_lr", "pos_fb", "voiced", "unvoiced",
    "vol_f", "vol_b", "volc_f", "volc_b", "hz0_f", "amp0_f", "hz1_f", "amp1_f", "hz2_f",
    "amp2_f", "hz3_f", "amp3_f", "hz0_b", "amp0_b", "hz1_b", "amp1_b", "hz2_b", "amp2_b",
    "hz3_b", "amp3_b", "pitch_f", "pitch_b",
];

pub fn phys_feature_names() -> &'static [&'static str] {
    &FEATURE_NAMES[..PHYS_DIM]
}

pub fn badge_feature_names() -> &'static [&'static str] {
    &FEATURE_NAMES[PHYS_DIM..]
}

pub fn feature_index(name: &str) -> Option<usize> {
    FEATURE_NAMES.iter().position(|n| *n == name)
}

/// A uniformly sampled channel. Sample `i` sits at `start + i / rate`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TimeSeries {
    pub name: String,
    pub start: f64,
    pub rate: f64,
    pub values: Vec<f64>,
}

impl TimeSeries {
    pub fn new(name: impl Into<String>, start: f64, rate: f64, values: Vec<f64>) -> Result<Self> {
        let name = name.into();
        if !(rate > 0.0 && rate.is_finite()) {
            return Err(Error::Config(format!("channel {name}: rate must be positive, got {rate}")));
        }
        if !start.is_finite() {
            return Err(Error::Config(format!("channel {name}: start time is not finite")));
        }
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::Schema(format!("channel {name}: non-finite value at sample {i}")));
        }
        Ok(TimeSeries {
            name,
            start,
            rate,
            values,
        })
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn timestamp(&self, i: usize) -> f64 {
        self.start + i as f64 / self.rate
    }

    /// Timestamp of the last sample; `None` for an empty channel.
    pub fn end(&self) -> Option<f64> {
        self.values.len().checked_sub(1).map(|i| self.timestamp(i))
    }

    pub fn grid(&self) -> TickGrid {
        TickGrid {
            start: self.start,
            rate: self.rate,
            len: self.values.len(),
        }
    }

    /// Index of the sample closest in time to `t`; the earlier sample wins ties.
    pub fn nearest_index(&self, t: f64) -> Option<usize> {
        let n = self.values.len();
        if n == 0 {
            return None;
        }
        let approx = ((t - self.start) * self.rate).floor();
        let guess = if approx <= 0.0 {
            0
        } else {
            (approx as usize).min(n - 1)
        };
        let lo = guess.saturating_sub(1);
        let hi = (guess + 1).min(n - 1);
        let mut best = lo;
        let mut best_dist = (self.timestamp(lo) - t).abs();
        for i in lo + 1..=hi {
            let d = (self.timestamp(i) - t).abs();
            if d < best_dist {
                best = i;
                best_dist = d;
            }
        }
        Some(best)
    }
}

/// Output tick grid shared by derived channels.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TickGrid {
    pub start: f64,
    pub rate: f64,
    pub len: usize,
}

impl TickGrid {
    pub fn tick(&self, i: usize) -> f64 {
        self.start + i as f64 / self.rate
    }

    pub fn ticks(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.len).map(|i| self.tick(i))
    }

    pub fn series(&self, name: impl Into<String>, values: Vec<f64>) -> TimeSeries {
        debug_assert_eq!(values.len(), self.len);
        TimeSeries {
            name: name.into(),
            start: self.start,
            rate: self.rate,
            values,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Label {
    Stress,
    Neutral,
}

impl Label {
    /// Stress maps to +1, neutral to -1.
    pub fn sign(self) -> f64 {
        match self {
            Label::Stress => 1.0,
            Label::Neutral => -1.0,
        }
    }

    /// Positive values are stress; zero and negative values are neutral.
    pub fn from_score(score: f64) -> Self {
        if score > 0.0 {
            Label::Stress
        } else {
            Label::Neutral
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Label::Stress => "stress",
            Label::Neutral => "neutral",
        }
    }
}

impl fmt::Display for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Label {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "stress" => Ok(Label::Stress),
            "neutral" => Ok(Label::Neutral),
            other => Err(Error::Schema(format!("unknown label {other:?}"))),
        }
    }
}

/// Protocol tasks. `Pad` is the neutral debrief/settling period.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Task {
    #[serde(rename = "NT1")]
    Nt1,
    #[serde(rename = "PP")]
    Pp,
    #[serde(rename = "PS")]
    Ps,
    #[serde(rename = "CG")]
    Cg,
    #[serde(rename = "NT2")]
    Nt2,
    #[serde(rename = "PAD")]
    Pad,
}

impl Task {
    pub const ALL: [Task; 6] = [Task::Nt1, Task::Pp, Task::Ps, Task::Cg, Task::Nt2, Task::Pad];

    pub fn as_str(self) -> &'static str {
        match self {
            Task::Nt1 => "NT1",
            Task::Pp => "PP",
            Task::Ps => "PS",
            Task::Cg => "CG",
            Task::Nt2 => "NT2",
            Task::Pad => "PAD",
        }
    }

    pub fn default_label(self) -> Label {
        match self {
            Task::Pp | Task::Ps | Task::Cg => Label::Stress,
            Task::Nt1 | Task::Nt2 | Task::Pad => Label::Neutral,
        }
    }
}

impl fmt::Display for Task {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Task {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Task::ALL
            .into_iter()
            .find(|t| t.as_str() == s.trim())
            .ok_or_else(|| Error::Schema(format!("unknown task {s:?}")))
    }
}

/// A task interval `[start, end)`. The last segment of a session also owns
/// its end point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TaskSegment {
    pub task: Task,
    pub start: f64,
    pub end: f64,
    pub label: Label,
}

impl TaskSegment {
    pub fn new(task: Task, start: f64, end: f64) -> Self {
        TaskSegment {
            task,
            start,
            end,
            label: task.default_label(),
        }
    }

    pub fn duration(&self) -> f64 {
        self.end - self.start
    }
}

/// Checks that segments have positive length and are ordered without overlap.
pub fn validate_segments(segments: &[TaskSegment]) -> Result<()> {
    for (i, s) in segments.iter().enumerate() {
        if !(s.end > s.start) {
            return Err(Error::Schema(format!(
                "segment {i} ({}) has end {} <= start {}",
                s.task, s.end, s.start
            )));
        }
        if i > 0 && s.start < segments[i - 1].end {
            return Err(Error::Schema(format!(
                "segment {i} ({}) starts at {} before previous segment ends at {}",
                s.task,
                s.start,
                segments[i - 1].end
            )));
        }
    }
    Ok(())
}

/// Index of the segment containing `t`, if any.
pub fn segment_at(segments: &[TaskSegment], t: f64) -> Option<usize> {
    let idx = segments.partition_point(|s| s.end <= t);
    if let Some(s) = segments.get(idx) {
        if s.start <= t && t < s.end {
            return Some(idx);
        }
    }
    match segments.last() {
        Some(last) if t == last.end => Some(segments.len() - 1),
        _ => None,
    }
}

/// One fused sample `x^t`: five physiological features followed by the 31
/// badge features, in [`FEATURE_NAMES`] order.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FeatureVector {
    pub timestamp: f64,
    #[serde(with = "feature_array")]
    pub values: [f64; FEATURE_DIM],
}

impl FeatureVector {
    pub fn phys(&self) -> &[f64] {
        &self.values[..PHYS_DIM]
    }

    pub fn badge(&self) -> &[f64] {
        &self.values[PHYS_DIM..]
    }

    pub fn get(&self, name: &str) -> Option<f64> {
        feature_index(name).map(|i| self.values[i])
    }

    /// Checks the per-feature domain constraints.
    pub fn validate(&self) -> Result<()> {
        if let Some(i) = self.values.iter().position(|v| !v.is_finite()) {
            return Err(Error::Schema(format!(
                "feature {} is not finite at t={}",
                FEATURE_NAMES[i], self.timestamp
            )));
        }
        let voiced = self.values[feature_index("voiced").unwrap()];
        let unvoiced = self.values[feature_index("unvoiced").unwrap()];
        let binary = |v: f64| v == 0.0 || v == 1.0;
        if !binary(voiced) || !binary(unvoiced) || voiced + unvoiced != 1.0 {
            return Err(Error::Schema(format!(
                "voiced/unvoiced must be complementary binary flags at t={}",
                self.timestamp
            )));
        }
        for (i, name) in FEATURE_NAMES.iter().enumerate() {
            let nonneg = name.starts_with("hz") || name.starts_with("amp") || name.starts_with("pitch");
            if nonneg && self.values[i] < 0.0 {
                return Err(Error::Schema(format!("{name} is negative at t={}", self.timestamp)));
            }
        }
        Ok(())
    }
}

mod feature_array {
    use super::FEATURE_DIM;
    use serde::de::Error as _;
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(v: &[f64; FEATURE_DIM], s: S) -> Result<S::Ok, S::Error> {
        s.collect_seq(v.iter())
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<[f64; FEATURE_DIM], D::Error> {
        let v = Vec::<f64>::deserialize(d)?;
        v.try_into()
            .map_err(|v: Vec<f64>| D::Error::custom(format!("expected {FEATURE_DIM} features, got {}", v.len())))
    }
}

/// Which block of the feature vector a classifier sees.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Modality {
    Phys,
    Badge,
    Combined,
}

impl Modality {
    pub fn feature_range(self) -> Range<usize> {
        match self {
            Modality::Phys => 0..PHYS_DIM,
            Modality::Badge => PHYS_DIM..FEATURE_DIM,
            Modality::Combined => 0..FEATURE_DIM,
        }
    }

    pub fn feature_names(self) -> &'static [&'static str] {
        &FEATURE_NAMES[self.feature_range()]
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Modality::Phys => "phys",
            Modality::Badge => "badge",
            Modality::Combined => "combined",
        }
    }
}

impl fmt::Display for Modality {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Modality {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "phys" => Ok(Modality::Phys),
            "badge" => Ok(Modality::Badge),
            "combined" => Ok(Modality::Combined),
            other => Err(Error::Config(format!("unknown modality {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LabeledRow {
    pub vector: FeatureVector,
    pub label: Label,
}

/// The per-participant dataset `D_k`, rows in time order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LabeledDataset {
    pub participant_id: String,
    pub rows: Vec<LabeledRow>,
}

impl LabeledDataset {
    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn count(&self, label: Label) -> usize {
        self.rows.iter().filter(|r| r.label == label).count()
    }

    pub fn labels(&self) -> Vec<Label> {
        self.rows.iter().map(|r| r.label).collect()
    }

    /// Subset of rows by index, preserving the given order.
    pub fn select(&self, indices: &[usize]) -> LabeledDataset {
        LabeledDataset {
            participant_id: self.participant_id.clone(),
            rows: indices.iter().map(|&i| self.rows[i]).collect(),
        }
    }

    /// Errors unless the dataset is non-empty and contains both classes.
    pub fn require_trainable(&self) -> Result<()> {
        if self.rows.is_empty() {
            return Err(Error::Training(format!("dataset {} is empty", self.participant_id)));
        }
        for label in [Label::Stress, Label::Neutral] {
            if self.count(label) == 0 {
                return Err(Error::Training(format!(
                    "dataset {} has no {label} rows",
                    self.participant_id
                )));
            }
        }
        Ok(())
    }
}

fn collect_channels<'a>(channels: &'a [TimeSeries], names: &[&str]) -> Result<Vec<&'a TimeSeries>> {
    names
        .iter()
        .map(|name| {
            let mut matches = channels.iter().filter(|c| c.name == *name);
            let ch = matches
                .next()
                .ok_or_else(|| Error::Schema(format!("missing channel {name:?}")))?;
            if matches.next().is_some() {
                return Err(Error::Schema(format!("duplicate channel {name:?}")));
            }
            if ch.is_empty() {
                return Err(Error::Schema(format!("channel {name:?} is empty")));
            }
            Ok(ch)
        })
        .collect()
}

/// Fuses the physiological and badge channels onto a common grid at
/// `target_rate`, taking for every tick each channel's closest sample in
/// time (earlier sample on ties).
///
/// The grid starts at the latest channel start and stops at the earliest
/// channel end, so it spans `floor(overlap * target_rate) + 1` ticks.
pub fn synchronize(
    phys: &[TimeSeries],
    badge: &[TimeSeries],
    target_rate: f64,
) -> Result<Vec<FeatureVector>> {
    if !(target_rate > 0.0 && target_rate.is_finite()) {
        return Err(Error::Config(format!("target rate must be positive, got {target_rate}")));
    }
    let mut channels = collect_channels(phys, phys_feature_names())?;
    channels.extend(collect_channels(badge, badge_feature_names())?);

    let start = channels.iter().map(|c| c.start).fold(f64::NEG_INFINITY, f64::max);
    let end = channels
        .iter()
        .map(|c| c.end().expect("non-empty"))
        .fold(f64::INFINITY, f64::min);
    if end < start {
        return Err(Error::Alignment(format!(
            "channel spans do not overlap (latest start {start} s, earliest end {end} s)"
        )));
    }
    // Small slack absorbs rounding in (end - start) * rate.
    let len = ((end - start) * target_rate + 1e-9).floor() as usize + 1;
    let grid = TickGrid {
        start,
        rate: target_rate,
        len,
    };

    let mut out: Vec<FeatureVector> = grid
        .ticks()
        .map(|t| FeatureVector {
            timestamp: t,
            values: [0.0; FEATURE_DIM],
        })
        .collect();
    for (j, ch) in channels.iter().enumerate() {
        for fv in out.iter_mut() {
            let i = ch.nearest_index(fv.timestamp).expect("non-empty");
            fv.values[j] = ch.values[i];
        }
    }
    Ok(out)
}

/// Attaches the label of the containing task segment to every vector.
pub fn label_by_segments(
    participant_id: impl Into<String>,
    vectors: &[FeatureVector],
    segments: &[TaskSegment],
) -> Result<LabeledDataset> {
    validate_segments(segments)?;
    let rows = vectors
        .iter()
        .map(|v| {
            segment_at(segments, v.timestamp)
                .map(|i| LabeledRow {
                    vector: *v,
                    label: segments[i].label,
                })
                .ok_or(Error::Labeling {
                    timestamp: v.timestamp,
                })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(LabeledDataset {
        participant_id: participant_id.into(),
        rows,
    })
}
