//! On-disk cohort layout: one directory per participant plus a manifest.
//!
//! A session directory always holds `segments.csv`. Feature sessions add
//! `phys.csv` and `badge.csv`; raw sessions add `physio.csv`, `accel.csv`
//! and one WAV file per microphone. `dataset.csv` is the fused output.

use std::fs;
use std::path::{Path, PathBuf};

use crate::badge::Mic;
use crate::data::{LabeledDataset, TaskSegment};
use crate::error::{Error, Result};
use crate::experiment::SessionFeatures;
use crate::io::{self, write_atomic};
use crate::synth::{Manifest, RawSession};

pub const MANIFEST_FILE: &str = "manifest.json";

/// Sort key that orders `P2` before `P10`.
fn natural_key(name: &str) -> (String, u64, String) {
    let digits_at = name.find(|c: char| c.is_ascii_digit()).unwrap_or(name.len());
    let (prefix, rest) = name.split_at(digits_at);
    let digits_end = rest.find(|c: char| !c.is_ascii_digit()).unwrap_or(rest.len());
    let number = rest[..digits_end].parse().unwrap_or(0);
    (prefix.to_string(), number, rest[digits_end..].to_string())
}

/// Participant directories (those holding a segments file), naturally sorted.
pub fn session_dirs(cohort: &Path) -> Result<Vec<(String, PathBuf)>> {
    let entries = fs::read_dir(cohort).map_err(|e| Error::input(cohort, e.to_string()))?;
    let mut dirs = Vec::new();
    for entry in entries {
        let entry = entry.map_err(|e| Error::input(cohort, e.to_string()))?;
        let path = entry.path();
        if path.is_dir() && path.join(io::SEGMENTS_FILE).is_file() {
            dirs.push((entry.file_name().to_string_lossy().into_owned(), path));
        }
    }
    dirs.sort_by(|a, b| natural_key(&a.0).cmp(&natural_key(&b.0)));
    if dirs.is_empty() {
        return Err(Error::input(cohort, "no participant sessions found"));
    }
    Ok(dirs)
}

pub fn write_manifest(cohort: &Path, manifest: &Manifest) -> Result<()> {
    let text = serde_json::to_string_pretty(manifest)? + "\n";
    write_atomic(&cohort.join(MANIFEST_FILE), text.as_bytes())
}

pub fn read_manifest(cohort: &Path) -> Result<Manifest> {
    let path = cohort.join(MANIFEST_FILE);
    let text = fs::read_to_string(&path).map_err(|e| Error::input(&path, e.to_string()))?;
    serde_json::from_str(&text).map_err(|e| Error::input(&path, e.to_string()))
}

pub fn write_features(dir: &Path, features: &SessionFeatures) -> Result<()> {
    fs::create_dir_all(dir)?;
    io::write_segments(&dir.join(io::SEGMENTS_FILE), &features.segments)?;
    io::write_channels(&dir.join(io::PHYS_FILE), &features.phys)?;
    io::write_channels(&dir.join(io::BADGE_FILE), &features.badge)
}

pub fn read_features(dir: &Path, participant_id: &str) -> Result<SessionFeatures> {
    Ok(SessionFeatures {
        participant_id: participant_id.to_string(),
        segments: io::read_segments(&dir.join(io::SEGMENTS_FILE))?,
        phys: io::read_channels(&dir.join(io::PHYS_FILE))?,
        badge: io::read_channels(&dir.join(io::BADGE_FILE))?,
    })
}

pub fn write_raw(dir: &Path, raw: &RawSession) -> Result<()> {
    fs::create_dir_all(dir)?;
    io::write_segments(&dir.join(io::SEGMENTS_FILE), &raw.segments)?;
    io::write_raw_physio(&dir.join(io::RAW_PHYSIO_FILE), &raw.eda, &raw.ppg)?;
    io::write_accel(&dir.join(io::ACCEL_FILE), &raw.accel)?;
    io::write_wav(&dir.join(io::audio_file(Mic::Front)), &raw.front)?;
    io::write_wav(&dir.join(io::audio_file(Mic::Back)), &raw.back)
}

pub fn has_raw(dir: &Path) -> bool {
    dir.join(io::RAW_PHYSIO_FILE).is_file() && dir.join(io::ACCEL_FILE).is_file()
}

pub fn read_raw(dir: &Path, participant_id: &str) -> Result<RawSession> {
    let (eda, ppg) = io::read_raw_physio(&dir.join(io::RAW_PHYSIO_FILE))?;
    let accel = io::read_accel(&dir.join(io::ACCEL_FILE))?;
    Ok(RawSession {
        participant_id: participant_id.to_string(),
        segments: io::read_segments(&dir.join(io::SEGMENTS_FILE))?,
        front: io::read_wav(&dir.join(io::audio_file(Mic::Front)), Mic::Front, eda.start)?,
        back: io::read_wav(&dir.join(io::audio_file(Mic::Back)), Mic::Back, eda.start)?,
        eda,
        ppg,
        accel,
    })
}

/// The labeled dataset of a session: `dataset.csv` when present, otherwise
/// the fusion of its feature files.
pub fn load_labeled(dir: &Path, participant_id: &str) -> Result<(LabeledDataset, Vec<TaskSegment>)> {
    let segments = io::read_segments(&dir.join(io::SEGMENTS_FILE))?;
    let dataset_path = dir.join(io::DATASET_FILE);
    let data = if dataset_path.is_file() {
        io::read_dataset(&dataset_path, participant_id)?
    } else {
        read_features(dir, participant_id)?.fuse()?
    };
    Ok((data, segments))
}
