use std::fs;
use std::path::{Path, PathBuf};

use rayon::prelude::*;

use stress_core::cohort::{self, session_dirs};
use stress_core::data::Modality;
use stress_core::experiment::{
    build_report, evaluate_participant, extract_session, train_participant, ExperimentConfig, ExperimentReport, ExtractionConfig,
    ParticipantResult,
};
use stress_core::io::{self, write_atomic};
use stress_core::learning::{ClassifierKind, ModelFile};
use stress_core::synth::{generate_session, plan_cohort, GeneratorConfig};
use stress_core::Error;

use crate::report;
use crate::settings::Settings;

pub const REPORT_FILE: &str = "report.json";
pub const RANKING_FILE: &str = "ranking.csv";
pub const SUMMARY_FILE: &str = "report.md";
const MODEL_FILE: &str = "model.json";
const PARTICIPANTS_DIR: &str = "participants";

/// Exit code 2 for input and configuration problems, 3 for solver
/// non-convergence.
#[derive(Debug)]
pub struct CliError {
    pub code: u8,
    pub messages: Vec<String>,
}

impl CliError {
    pub fn usage(message: impl Into<String>) -> Self {
        CliError {
            code: 2,
            messages: vec![message.into()],
        }
    }
}

pub fn exit_code(e: &Error) -> u8 {
    match e {
        Error::Convergence { .. } => 3,
        _ => 2,
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        CliError {
            code: exit_code(&e),
            messages: vec![e.to_string()],
        }
    }
}

/// Runs `f` on every session in parallel and reports every failure, not
/// just the first.
fn per_session<T: Send>(dirs: &[(String, PathBuf)], f: impl Fn(&str, &Path) -> Result<T, Error> + Sync) -> Result<Vec<T>, CliError> {
    let results: Vec<Result<T, Error>> = dirs.par_iter().map(|(id, dir)| f(id, dir)).collect();
    let mut ok = Vec::with_capacity(results.len());
    let mut failure: Option<CliError> = None;
    for ((id, _), r) in dirs.iter().zip(results) {
        match r {
            Ok(v) => ok.push(v),
            Err(e) => {
                let f = failure.get_or_insert(CliError {
                    code: 0,
                    messages: Vec::new(),
                });
                f.code = f.code.max(exit_code(&e));
                f.messages.push(format!("{id}: {e}"));
            }
        }
    }
    match failure {
        Some(f) => Err(f),
        None => Ok(ok),
    }
}

fn create_dir(path: &Path) -> Result<(), Error> {
    fs::create_dir_all(path).map_err(|e| Error::Input {
        path: path.to_path_buf(),
        message: e.to_string(),
    })
}

pub fn synth(out: &Path, generator: &GeneratorConfig, raw: bool) -> Result<(), CliError> {
    create_dir(out)?;
    let manifest = plan_cohort(generator)?;
    let extraction = ExtractionConfig::default();
    let dirs: Vec<(String, PathBuf)> = manifest
        .participants
        .iter()
        .map(|p| (p.participant_id.clone(), out.join(&p.participant_id)))
        .collect();
    per_session(&dirs, |id, dir| {
        let plan = manifest.participants.iter().find(|p| p.participant_id == id).expect("planned participant");
        let session = generate_session(generator, plan)?;
        cohort::write_features(dir, &extract_session(&session, &extraction)?)?;
        if raw {
            cohort::write_raw(dir, &session)?;
        }
        Ok(())
    })?;
    cohort::write_manifest(out, &manifest)?;
    eprintln!("synth: {} sessions in {}", dirs.len(), out.display());
    Ok(())
}

pub fn extract(cohort_dir: &Path) -> Result<(), CliError> {
    let dirs = session_dirs(cohort_dir)?;
    let extraction = ExtractionConfig::default();
    per_session(&dirs, |id, dir| {
        let features = if cohort::has_raw(dir) {
            let features = extract_session(&cohort::read_raw(dir, id)?, &extraction)?;
            cohort::write_features(dir, &features)?;
            features
        } else {
            cohort::read_features(dir, id)?
        };
        io::write_dataset(&dir.join(io::DATASET_FILE), &features.fuse()?)
    })?;
    eprintln!("extract: {} datasets in {}", dirs.len(), cohort_dir.display());
    Ok(())
}

fn participant_dir(out: &Path, id: &str) -> PathBuf {
    out.join(PARTICIPANTS_DIR).join(id)
}

pub fn train(cohort_dir: &Path, out: &Path, config: &ExperimentConfig) -> Result<(), CliError> {
    let dirs = session_dirs(cohort_dir)?;
    per_session(&dirs, |id, dir| {
        let (data, _) = cohort::load_labeled(dir, id)?;
        let model = train_participant(&data, config)?;
        let target = participant_dir(out, id);
        create_dir(&target)?;
        write_atomic(&target.join(MODEL_FILE), model.to_json()?.as_bytes())
    })?;
    eprintln!("train: {} {} models ({}) in {}", dirs.len(), config.classifier, config.modality, out.display());
    Ok(())
}

/// The modality and classifier every model agrees on.
fn model_kind(models: &[ModelFile]) -> Result<(Modality, ClassifierKind), Error> {
    let first = &models[0];
    let kind = (first.modality, first.classifier.kind());
    for m in models {
        if (m.modality, m.classifier.kind()) != kind {
            return Err(Error::Config(format!(
                "models disagree: {} is {}/{}, {} is {}/{}",
                first.participant_id,
                kind.0,
                kind.1,
                m.participant_id,
                m.modality,
                m.classifier.kind()
            )));
        }
    }
    Ok(kind)
}

pub fn eval(cohort_dir: &Path, out: &Path, config: &ExperimentConfig) -> Result<ExperimentReport, CliError> {
    let dirs = session_dirs(cohort_dir)?;
    let models = per_session(&dirs, |id, _| ModelFile::read(&participant_dir(out, id).join(MODEL_FILE)))?;
    let (modality, classifier) = model_kind(&models)?;
    let config = ExperimentConfig {
        modality,
        classifier,
        split: models[0].split,
        ..config.clone()
    };
    let jobs: Vec<(String, PathBuf)> = dirs.clone();
    let results: Vec<ParticipantResult> = per_session(&jobs, |id, dir| {
        let (data, segments) = cohort::load_labeled(dir, id)?;
        let model = models.iter().find(|m| m.participant_id == id).cloned().ok_or_else(|| {
            Error::Config(format!("no model for {id}"))
        })?;
        let outcome = evaluate_participant(&data, &segments, model, config.top_k)?;
        io::write_trace(&participant_dir(out, id).join(io::TRACE_FILE), &outcome.trace)?;
        Ok(outcome.result)
    })?;
    let report = build_report(&config, results)?;
    write_atomic(&out.join(REPORT_FILE), report.to_json()?.as_bytes())?;
    io::write_frequencies(&out.join(RANKING_FILE), &report.ranking)?;
    eprintln!("eval: {report} (majority rate {:.3})", report.majority_rate);
    Ok(report)
}

fn read_report(path: &Path) -> Result<ExperimentReport, Error> {
    let text = fs::read_to_string(path).map_err(|e| Error::Input {
        path: path.to_path_buf(),
        message: e.to_string(),
    })?;
    ExperimentReport::from_json(&text).map_err(|e| Error::Input {
        path: path.to_path_buf(),
        message: e.to_string(),
    })
}

pub fn rank(out: &Path) -> Result<(), CliError> {
    let report = read_report(&out.join(REPORT_FILE))?;
    io::write_frequencies(&out.join(RANKING_FILE), &report.ranking)?;
    if report.ranking.is_empty() {
        println!("no feature ranking ({} models carry none)", report.classifier);
    }
    for f in &report.ranking {
        println!("{:<10} {:>4} {:>6.1}%", f.feature, f.count, f.percent);
    }
    Ok(())
}

/// Reports under `out`: its own `report.json` and those one level below.
fn collect_reports(out: &Path) -> Result<Vec<(String, ExperimentReport)>, CliError> {
    let mut found = Vec::new();
    if out.join(REPORT_FILE).is_file() {
        found.push((".".to_string(), out.join(REPORT_FILE)));
    }
    if let Ok(entries) = fs::read_dir(out) {
        let mut subdirs: Vec<PathBuf> = entries.filter_map(|e| e.ok()).map(|e| e.path()).filter(|p| p.join(REPORT_FILE).is_file()).collect();
        subdirs.sort();
        for dir in subdirs {
            let name = dir.file_name().unwrap_or_default().to_string_lossy().into_owned();
            found.push((name, dir.join(REPORT_FILE)));
        }
    }
    if found.is_empty() {
        return Err(CliError::usage(format!("{}: no {REPORT_FILE} found; run eval or all first", out.display())));
    }
    found
        .into_iter()
        .map(|(name, path)| Ok((name, read_report(&path)?)))
        .collect()
}

pub fn report(out: &Path) -> Result<(), CliError> {
    let runs = collect_reports(out)?;
    let text = report::render(&runs);
    write_atomic(&out.join(SUMMARY_FILE), text.as_bytes())?;
    eprintln!("report: {} runs summarized in {}", runs.len(), out.join(SUMMARY_FILE).display());
    Ok(())
}

/// Named configurations of the comparison suite.
pub fn suite(base: &ExperimentConfig) -> Vec<(String, ExperimentConfig)> {
    let variant = |modality: Modality, classifier: ClassifierKind, rounds: usize| ExperimentConfig {
        modality,
        classifier,
        rounds,
        ..base.clone()
    };
    let mut runs = vec![
        variant(Modality::Combined, ClassifierKind::Adaboost, base.rounds),
        variant(Modality::Combined, ClassifierKind::SvmRbf, base.rounds),
        variant(Modality::Combined, ClassifierKind::SvmLinear, base.rounds),
        variant(Modality::Phys, ClassifierKind::Adaboost, base.rounds),
        variant(Modality::Badge, ClassifierKind::Adaboost, base.rounds),
    ];
    runs.push(variant(Modality::Combined, ClassifierKind::Adaboost, 5));
    runs.into_iter()
        .map(|c| {
            let mut name = format!("{}-{}", c.modality, c.classifier);
            if c.classifier == ClassifierKind::Adaboost {
                name += &format!("-t{}", c.rounds);
            }
            (name, c)
        })
        .collect()
}

pub fn all(out: &Path, cohort_dir: Option<&Path>, settings: &Settings, with_suite: bool, raw: bool) -> Result<(), CliError> {
    create_dir(out)?;
    let cohort_dir = match cohort_dir {
        Some(dir) => dir.to_path_buf(),
        None => {
            let dir = out.join("cohort");
            synth(&dir, &settings.generator, raw)?;
            dir
        }
    };
    extract(&cohort_dir)?;
    let runs = if with_suite {
        suite(&settings.experiment)
    } else {
        vec![(String::new(), settings.experiment.clone())]
    };
    for (name, config) in &runs {
        let dir = out.join(name);
        create_dir(&dir)?;
        train(&cohort_dir, &dir, config)?;
        eval(&cohort_dir, &dir, config)?;
    }
    report(out)
}
