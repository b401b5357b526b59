//! Personalized stress detection from a wearable physiological sensor and a
//! sociometric badge.
//!
//! The crate covers the whole batch pipeline: feature extraction from raw
//! EDA/PPG and badge streams ([`dsp`], [`badge`]), closest-timestamp fusion
//! and labeling ([`data`]), per-participant classifiers ([`learning`]),
//! metrics and feature rankings ([`evaluation`]), a synthetic protocol
//! generator with planted ground truth ([`synth`]) and the experiment driver
//! that ties them together ([`experiment`]).

pub mod badge;
pub mod cohort;
pub mod data;
pub mod dsp;
pub mod error;
pub mod evaluation;
pub mod experiment;
pub mod io;
pub mod learning;
pub mod synth;

pub use error::{Error, Result};
