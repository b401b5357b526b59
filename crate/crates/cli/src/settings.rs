//! Settings from an optional `key = value` file overlaid with flags.
//!
//! Generator keys: `profile` (default | planted), `separability`,
//! `cohort_size`, `synth_seed`. Every other key is an experiment setting.

use std::fs;
use std::path::Path;

use stress_core::experiment::{parse_key_values, ExperimentConfig};
use stress_core::synth::GeneratorConfig;
use stress_core::Error;

use crate::commands::CliError;

#[derive(Debug, Default)]
pub struct Overrides(Vec<(String, String)>);

impl Overrides {
    pub fn push(&mut self, key: &str, value: &str) {
        self.0.push((key.to_string(), value.to_string()));
    }

    pub fn push_opt(&mut self, key: &str, value: &Option<String>) {
        if let Some(v) = value {
            self.push(key, v);
        }
    }
}

#[derive(Debug, Clone)]
pub struct Settings {
    pub generator: GeneratorConfig,
    pub experiment: ExperimentConfig,
}

fn parse<T: std::str::FromStr>(key: &str, value: &str) -> Result<T, Error> {
    value
        .trim()
        .parse()
        .map_err(|_| Error::Config(format!("{key}: cannot parse {value:?}")))
}

fn profile(name: &str) -> Result<GeneratorConfig, Error> {
    match name.trim() {
        "default" => Ok(GeneratorConfig::default()),
        "planted" => Ok(GeneratorConfig::planted_eda_posture()),
        other => Err(Error::Config(format!("unknown profile {other:?} (expected default or planted)"))),
    }
}

pub fn load(file: Option<&Path>, flags: &Overrides) -> Result<Settings, CliError> {
    let mut pairs = Vec::new();
    if let Some(path) = file {
        let text = fs::read_to_string(path).map_err(|e| Error::Input {
            path: path.to_path_buf(),
            message: e.to_string(),
        })?;
        pairs = parse_key_values(&text).map_err(|e| Error::Input {
            path: path.to_path_buf(),
            message: e.to_string(),
        })?;
    }
    pairs.extend(flags.0.iter().cloned());

    let base = pairs.iter().rev().find(|(k, _)| k == "profile").map(|(_, v)| v.as_str());
    let mut generator = profile(base.unwrap_or("default"))?;
    let mut experiment = ExperimentConfig::default();
    for (key, value) in &pairs {
        match key.as_str() {
            "profile" => {}
            "separability" => generator.separability = parse(key, value)?,
            "cohort_size" => generator.cohort_size = parse(key, value)?,
            "synth_seed" => generator.seed = parse(key, value)?,
            _ => experiment.set(key, value)?,
        }
    }
    generator.validate()?;
    experiment.validate()?;
    Ok(Settings { generator, experiment })
}
