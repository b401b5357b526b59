use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use stress_core::cohort;
use stress_core::data::{segment_at, Label};
use stress_core::experiment::{extract_session, run_experiment, synthesize_features, ExperimentConfig, ExtractionConfig};
use stress_core::synth::{expected_counts, generate_session, plan_cohort, GeneratorConfig, TARGET_SAMPLES};

/// Low sampling rates; enough for the raw EDA statistics, not for
/// feature extraction.
fn coarse(seed: u64, separability: f64) -> GeneratorConfig {
    GeneratorConfig {
        seed,
        separability,
        cohort_size: 1,
        physio_rate: 100.0,
        accel_rate: 10.0,
        audio_rate: 10.0,
        ..GeneratorConfig::default()
    }
}

#[test]
fn default_cohort_matches_target_counts() {
    let manifest = plan_cohort(&GeneratorConfig::default()).unwrap();
    assert_eq!(manifest.participants.len(), 18);
    let totals: Vec<f64> = manifest.participants.iter().map(|p| (p.expected_stress + p.expected_neutral) as f64).collect();
    let mean = totals.iter().sum::<f64>() / totals.len() as f64;
    assert!((mean - TARGET_SAMPLES).abs() <= 1000.0, "mean sample count {mean}");
    for p in &manifest.participants {
        let fraction = p.expected_stress as f64 / (p.expected_stress + p.expected_neutral) as f64;
        assert!(fraction > 0.0 && fraction < 1.0, "{}: stress fraction {fraction}", p.participant_id);
        assert_eq!(expected_counts(&p.segments, 1000.0), (p.expected_stress, p.expected_neutral));
    }
}

#[test]
fn fused_session_matches_its_plan() {
    let config = GeneratorConfig {
        cohort_size: 2,
        seed: 4,
        ..GeneratorConfig::default()
    };
    let manifest = plan_cohort(&config).unwrap();
    let plan = &manifest.participants[1];
    let features = extract_session(&generate_session(&config, plan).unwrap(), &ExtractionConfig::default()).unwrap();
    let data = features.fuse().unwrap();
    assert_eq!((data.count(Label::Stress), data.count(Label::Neutral)), (plan.expected_stress, plan.expected_neutral));
    for row in &data.rows {
        row.vector.validate().unwrap();
    }

    // Writing the same session twice gives byte-identical files.
    let again = synthesize_features(&config, &manifest, &ExtractionConfig::default()).unwrap();
    assert_eq!(again[1], features);
    let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    cohort::write_features(a.path(), &features).unwrap();
    cohort::write_features(b.path(), &again[1]).unwrap();
    for file in ["phys.csv", "badge.csv", "segments.csv"] {
        assert_eq!(std::fs::read(a.path().join(file)).unwrap(), std::fs::read(b.path().join(file)).unwrap(), "{file}");
    }
}

#[test]
fn seed_determines_raw_streams() {
    let config = coarse(77, 0.7);
    let plan = &plan_cohort(&config).unwrap().participants[0];
    let a = generate_session(&config, plan).unwrap();
    let b = generate_session(&config, plan).unwrap();
    assert_eq!(a, b);
    let other = coarse(78, 0.7);
    let c = generate_session(&other, &plan_cohort(&other).unwrap().participants[0]).unwrap();
    assert_ne!(a.eda.values, c.eda.values);
}

/// Two-sample Kolmogorov-Smirnov statistic.
fn ks_statistic(a: &mut [f64], b: &mut [f64]) -> f64 {
    a.sort_by(f64::total_cmp);
    b.sort_by(f64::total_cmp);
    let (mut i, mut j, mut d) = (0, 0, 0.0f64);
    while i < a.len() && j < b.len() {
        let x = a[i].min(b[j]);
        while i < a.len() && a[i] <= x {
            i += 1;
        }
        while j < b.len() && b[j] <= x {
            j += 1;
        }
        d = d.max((i as f64 / a.len() as f64 - j as f64 / b.len() as f64).abs());
    }
    d
}

/// At separability 0 stress and neutral EDA share one distribution. Samples
/// are taken 20 s apart (ten skin-response decay times) at a random phase
/// so they are close to independent.
#[test]
fn eda_classes_are_indistinguishable_without_separability() {
    let mut accepted = 0;
    let seeds = 100;
    for seed in 0..seeds {
        let config = coarse(1000 + seed, 0.0);
        let plan = &plan_cohort(&config).unwrap().participants[0];
        let raw = generate_session(&config, plan).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut t = rng.random_range(0.0..20.0);
        let (mut stress, mut neutral) = (Vec::new(), Vec::new());
        let end = raw.eda.len() as f64 / raw.eda.rate;
        while t < end {
            let v = raw.eda.values[(t * raw.eda.rate) as usize];
            match segment_at(&raw.segments, t).map(|k| raw.segments[k].label) {
                Some(Label::Stress) => stress.push(v),
                Some(Label::Neutral) => neutral.push(v),
                None => {}
            }
            t += 20.0;
        }
        let (n, m) = (stress.len() as f64, neutral.len() as f64);
        let critical = 1.628 * ((n + m) / (n * m)).sqrt();
        if ks_statistic(&mut stress, &mut neutral) <= critical {
            accepted += 1;
        }
    }
    assert!(accepted >= 95, "KS fails to reject on only {accepted} of {seeds} seeds");
}

/// Cohort-mean AdaBoost accuracy does not drop as separability grows.
#[test]
fn accuracy_grows_with_separability() {
    let experiment = ExperimentConfig {
        rounds: 100,
        ..ExperimentConfig::default()
    };
    let mut previous = 0.0;
    for separability in [0.0, 0.25, 0.5, 0.75, 1.0] {
        let config = GeneratorConfig {
            separability,
            cohort_size: 3,
            seed: 12,
            ..GeneratorConfig::default()
        };
        let manifest = plan_cohort(&config).unwrap();
        let sessions: Vec<_> = synthesize_features(&config, &manifest, &ExtractionConfig::default())
            .unwrap()
            .into_iter()
            .map(|f| (f.fuse().unwrap(), f.segments.clone()))
            .collect();
        let (report, _) = run_experiment(&sessions, &experiment).unwrap();
        let acc = report.cohort.accuracy.mean;
        eprintln!("separability {separability}: accuracy {acc:.4}");
        assert!(acc >= previous, "accuracy {acc} at separability {separability} below {previous}");
        previous = acc;
    }
}
