//! Session directory files.
//!
//! Feature files (`phys.csv`, `badge.csv`) hold one column per channel on a
//! shared grid, `segments.csv` the task timeline and `dataset.csv` the fused
//! labeled rows. Raw recordings are `physio.csv` (EDA and PPG),
//! `accel.csv` and one 32-bit float WAV file per microphone. Reals are
//! written in shortest round-trip form, so reading a file back reproduces
//! the values exactly. Every writer goes through a `.partial` file that is
//! renamed on success.

use std::fs;
use std::path::{Path, PathBuf};

use crate::badge::{AccelStream, AudioStream, Mic};
use crate::data::{FeatureVector, Label, LabeledDataset, LabeledRow, Task, TaskSegment, TimeSeries, FEATURE_DIM, FEATURE_NAMES};
use crate::error::{Error, Result};
use crate::evaluation::{FeatureFrequency, PredictionTrace};

pub const PHYS_FILE: &str = "phys.csv";
pub const BADGE_FILE: &str = "badge.csv";
pub const SEGMENTS_FILE: &str = "segments.csv";
pub const DATASET_FILE: &str = "dataset.csv";
pub const RAW_PHYSIO_FILE: &str = "physio.csv";
pub const ACCEL_FILE: &str = "accel.csv";
pub const TRACE_FILE: &str = "trace.csv";

pub fn audio_file(mic: Mic) -> String {
    format!("audio_{mic}.wav")
}

/// Writes `bytes` to `path` via `path.partial` and a rename.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let partial = partial_path(path);
    fs::write(&partial, bytes).map_err(|e| Error::input(&partial, e.to_string()))?;
    fs::rename(&partial, path).map_err(|e| Error::input(path, e.to_string()))?;
    Ok(())
}

pub fn partial_path(path: &Path) -> PathBuf {
    let mut name = path.file_name().unwrap_or_default().to_os_string();
    name.push(".partial");
    path.with_file_name(name)
}

fn csv_bytes(header: &[String], rows: impl Iterator<Item = Vec<String>>) -> Result<Vec<u8>> {
    let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(Vec::new());
    w.write_record(header)?;
    for r in rows {
        w.write_record(&r)?;
    }
    w.into_inner().map_err(|e| Error::Io(e.into_error()))
}

fn num(v: f64) -> String {
    format!("{v}")
}

struct Table {
    header: Vec<String>,
    rows: Vec<csv::StringRecord>,
}

fn read_table(path: &Path) -> Result<Table> {
    let wrap = |e: csv::Error| Error::input(path, e.to_string());
    let mut r = csv::ReaderBuilder::new().from_path(path).map_err(wrap)?;
    let header = r.headers().map_err(wrap)?.iter().map(|s| s.trim().to_string()).collect();
    let rows = r.records().collect::<std::result::Result<Vec<_>, _>>().map_err(wrap)?;
    Ok(Table { header, rows })
}

fn parse_f64(path: &Path, line: usize, field: &str) -> Result<f64> {
    let v: f64 = field
        .trim()
        .parse()
        .map_err(|_| Error::input(path, format!("row {line}: {field:?} is not a number")))?;
    if !v.is_finite() {
        return Err(Error::input(path, format!("row {line}: non-finite value {field:?}")));
    }
    Ok(v)
}

fn require_header(path: &Path, header: &[String], first: &str) -> Result<()> {
    if header.first().map(String::as_str) != Some(first) {
        return Err(Error::input(path, format!("header must start with {first:?}, got {header:?}")));
    }
    Ok(())
}

/// Rate implied by evenly spaced timestamps, rounded to 1 µHz.
fn infer_rate(path: &Path, t: &[f64]) -> Result<f64> {
    if t.len() < 2 {
        return Err(Error::input(path, "need at least two rows to infer the sampling rate"));
    }
    let span = t[t.len() - 1] - t[0];
    if !(span > 0.0) {
        return Err(Error::input(path, "timestamps must increase"));
    }
    let rate = ((t.len() - 1) as f64 / span * 1e6).round() / 1e6;
    for (i, &ti) in t.iter().enumerate() {
        let expect = t[0] + i as f64 / rate;
        if (ti - expect).abs() > 1e-6 * (1.0 + expect.abs()) {
            return Err(Error::input(path, format!("row {}: timestamp {ti} breaks the {rate} Hz grid", i + 1)));
        }
    }
    Ok(rate)
}

/// Writes channels sharing one grid as `timestamp_s,<names...>`.
pub fn write_channels(path: &Path, channels: &[TimeSeries]) -> Result<()> {
    let first = channels.first().ok_or_else(|| Error::Schema("no channels to write".into()))?;
    if let Some(c) = channels.iter().find(|c| c.len() != first.len() || c.rate != first.rate || c.start != first.start) {
        return Err(Error::Schema(format!("channel {} does not share the grid of {}", c.name, first.name)));
    }
    let mut header = vec!["timestamp_s".to_string()];
    header.extend(channels.iter().map(|c| c.name.clone()));
    let rows = (0..first.len()).map(|i| {
        let mut r = vec![num(first.timestamp(i))];
        r.extend(channels.iter().map(|c| num(c.values[i])));
        r
    });
    write_atomic(path, &csv_bytes(&header, rows)?)
}

pub fn read_channels(path: &Path) -> Result<Vec<TimeSeries>> {
    let table = read_table(path)?;
    require_header(path, &table.header, "timestamp_s")?;
    let width = table.header.len();
    let mut cols = vec![Vec::with_capacity(table.rows.len()); width];
    for (i, rec) in table.rows.iter().enumerate() {
        if rec.len() != width {
            return Err(Error::input(path, format!("row {} has {} fields, expected {width}", i + 1, rec.len())));
        }
        for (j, field) in rec.iter().enumerate() {
            cols[j].push(parse_f64(path, i + 1, field)?);
        }
    }
    let rate = infer_rate(path, &cols[0])?;
    let start = cols[0][0];
    cols.drain(1..)
        .zip(&table.header[1..])
        .map(|(values, name)| TimeSeries::new(name.clone(), start, rate, values).map_err(|e| Error::input(path, e.to_string())))
        .collect()
}

pub fn write_segments(path: &Path, segments: &[TaskSegment]) -> Result<()> {
    let header = ["task", "start_s", "end_s", "label"].map(String::from);
    let rows = segments
        .iter()
        .map(|s| vec![s.task.as_str().to_string(), num(s.start), num(s.end), s.label.to_string()]);
    write_atomic(path, &csv_bytes(&header, rows)?)
}

pub fn read_segments(path: &Path) -> Result<Vec<TaskSegment>> {
    let table = read_table(path)?;
    if table.header != ["task", "start_s", "end_s", "label"] {
        return Err(Error::input(path, format!("expected header task,start_s,end_s,label, got {:?}", table.header)));
    }
    let segments = table
        .rows
        .iter()
        .enumerate()
        .map(|(i, r)| {
            let bad = |e: Error| Error::input(path, format!("row {}: {e}", i + 1));
            if r.len() != 4 {
                return Err(Error::input(path, format!("row {} has {} fields, expected 4", i + 1, r.len())));
            }
            Ok(TaskSegment {
                task: r[0].trim().parse::<Task>().map_err(bad)?,
                start: parse_f64(path, i + 1, &r[1])?,
                end: parse_f64(path, i + 1, &r[2])?,
                label: r[3].parse::<Label>().map_err(bad)?,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    crate::data::validate_segments(&segments).map_err(|e| Error::input(path, e.to_string()))?;
    Ok(segments)
}

pub fn write_dataset(path: &Path, data: &LabeledDataset) -> Result<()> {
    let mut header = vec!["timestamp_s".to_string()];
    header.extend(FEATURE_NAMES.iter().map(|s| s.to_string()));
    header.push("label".into());
    let rows = data.rows.iter().map(|r| {
        let mut rec = vec![num(r.vector.timestamp)];
        rec.extend(r.vector.values.iter().map(|&v| num(v)));
        rec.push(r.label.to_string());
        rec
    });
    write_atomic(path, &csv_bytes(&header, rows)?)
}

pub fn read_dataset(path: &Path, participant_id: &str) -> Result<LabeledDataset> {
    let table = read_table(path)?;
    let ok = table.header.len() == FEATURE_DIM + 2
        && table.header[0] == "timestamp_s"
        && table.header[1..=FEATURE_DIM].iter().zip(FEATURE_NAMES).all(|(a, b)| a == b)
        && table.header[FEATURE_DIM + 1] == "label";
    if !ok {
        return Err(Error::input(path, "header must be timestamp_s, the 36 feature names in order, label"));
    }
    let rows = table
        .rows
        .iter()
        .enumerate()
        .map(|(i, r)| {
            if r.len() != FEATURE_DIM + 2 {
                return Err(Error::input(path, format!("row {} has {} fields", i + 1, r.len())));
            }
            let mut values = [0.0; FEATURE_DIM];
            for (j, v) in values.iter_mut().enumerate() {
                *v = parse_f64(path, i + 1, &r[j + 1])?;
            }
            let vector = FeatureVector {
                timestamp: parse_f64(path, i + 1, &r[0])?,
                values,
            };
            vector.validate().map_err(|e| Error::input(path, format!("row {}: {e}", i + 1)))?;
            let label = r[FEATURE_DIM + 1]
                .parse::<Label>()
                .map_err(|e| Error::input(path, format!("row {}: {e}", i + 1)))?;
            Ok(LabeledRow { vector, label })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(LabeledDataset {
        participant_id: participant_id.to_string(),
        rows,
    })
}

/// Session-wide predictions: `t_s,truth,predicted,task` with labels as
/// +1 (stress) and -1 (neutral).
pub fn write_trace(path: &Path, trace: &PredictionTrace) -> Result<()> {
    let header = ["t_s", "truth", "predicted", "task"].map(String::from);
    let rows = trace.rows.iter().map(|r| {
        vec![
            num(r.t_s),
            r.truth.to_string(),
            r.predicted.to_string(),
            r.task.map_or(String::new(), |t| t.as_str().to_string()),
        ]
    });
    write_atomic(path, &csv_bytes(&header, rows)?)
}

/// Cohort ranking table: `feature,count,percent`.
pub fn write_frequencies(path: &Path, freqs: &[FeatureFrequency]) -> Result<()> {
    let header = ["feature", "count", "percent"].map(String::from);
    let rows = freqs.iter().map(|f| vec![f.feature.clone(), f.count.to_string(), num(f.percent)]);
    write_atomic(path, &csv_bytes(&header, rows)?)
}

/// Raw EDA (µS) and PPG on their shared grid.
pub fn write_raw_physio(path: &Path, eda: &TimeSeries, ppg: &TimeSeries) -> Result<()> {
    let eda = TimeSeries { name: "eda".into(), ..eda.clone() };
    let ppg = TimeSeries { name: "ppg".into(), ..ppg.clone() };
    write_channels(path, &[eda, ppg])
}

pub fn read_raw_physio(path: &Path) -> Result<(TimeSeries, TimeSeries)> {
    let mut ch = read_channels(path)?;
    let names: Vec<&str> = ch.iter().map(|c| c.name.as_str()).collect();
    if names != ["eda", "ppg"] {
        return Err(Error::input(path, format!("expected columns eda,ppg, got {names:?}")));
    }
    let ppg = ch.pop().unwrap();
    let eda = ch.pop().unwrap();
    Ok((eda, ppg))
}

pub fn write_accel(path: &Path, accel: &AccelStream) -> Result<()> {
    let grid = |name: &str, v: &Vec<f64>| TimeSeries {
        name: name.into(),
        start: accel.start,
        rate: accel.rate,
        values: v.clone(),
    };
    write_channels(path, &[grid("ax_g", &accel.ax), grid("ay_g", &accel.ay), grid("az_g", &accel.az)])
}

pub fn read_accel(path: &Path) -> Result<AccelStream> {
    let ch = read_channels(path)?;
    let names: Vec<&str> = ch.iter().map(|c| c.name.as_str()).collect();
    if names != ["ax_g", "ay_g", "az_g"] {
        return Err(Error::input(path, format!("expected columns ax_g,ay_g,az_g, got {names:?}")));
    }
    let mut it = ch.into_iter();
    let (x, y, z) = (it.next().unwrap(), it.next().unwrap(), it.next().unwrap());
    AccelStream::new(x.start, x.rate, x.values, y.values, z.values)
}

/// Mono 32-bit float WAV. The start time is not stored; readers pass it in.
pub fn write_wav(path: &Path, audio: &AudioStream) -> Result<()> {
    let rate = audio.rate.round();
    if rate != audio.rate || rate < 1.0 || rate > u32::MAX as f64 {
        return Err(Error::Config(format!("WAV needs an integral sample rate, got {}", audio.rate)));
    }
    let spec = hound::WavSpec {
        channels: 1,
        sample_rate: rate as u32,
        bits_per_sample: 32,
        sample_format: hound::SampleFormat::Float,
    };
    let mut buf = std::io::Cursor::new(Vec::new());
    {
        let mut w = hound::WavWriter::new(&mut buf, spec)?;
        for &s in &audio.samples {
            w.write_sample(s as f32)?;
        }
        w.finalize()?;
    }
    write_atomic(path, &buf.into_inner())
}

pub fn read_wav(path: &Path, mic: Mic, start: f64) -> Result<AudioStream> {
    let wrap = |e: hound::Error| Error::input(path, e.to_string());
    let mut r = hound::WavReader::open(path).map_err(wrap)?;
    let spec = r.spec();
    if spec.channels != 1 {
        return Err(Error::input(path, format!("expected mono audio, got {} channels", spec.channels)));
    }
    let samples: Vec<f64> = match spec.sample_format {
        hound::SampleFormat::Float => r.samples::<f32>().map(|s| s.map(f64::from)).collect::<std::result::Result<_, _>>().map_err(wrap)?,
        hound::SampleFormat::Int => {
            let scale = 2f64.powi(spec.bits_per_sample as i32 - 1);
            r.samples::<i32>().map(|s| s.map(|v| v as f64 / scale)).collect::<std::result::Result<_, _>>().map_err(wrap)?
        }
    };
    Ok(AudioStream {
        mic,
        start,
        rate: spec.sample_rate as f64,
        samples,
    })
}
