//! Markdown summary that sets synthetic-cohort results beside published
//! reference values. The references come from private participant data
//! and are quoted only for orientation.

use std::fmt::Write;

use stress_core::data::Modality;
use stress_core::evaluation::{Aggregate, ConfusionPercentages};
use stress_core::experiment::ExperimentReport;
use stress_core::learning::ClassifierKind;

/// Accuracy, precision, recall as published.
type Published = [&'static str; 3];

const CLASSIFIERS: [(&str, ClassifierKind, Published); 3] = [
    ("AdaBoost", ClassifierKind::Adaboost, ["0.94±0.03", "0.94±0.03", "0.96±0.02"]),
    ("RBF kernel SVM", ClassifierKind::SvmRbf, ["0.93±0.03", "0.93±0.03", "0.96±0.01"]),
    ("Linear kernel SVM", ClassifierKind::SvmLinear, ["0.85±0.04", "0.84±0.04", "0.94±0.02"]),
];

const PARTICIPANTS: [Published; 18] = [
    ["0.95", "0.95", "0.97"],
    ["0.91", "0.92", "0.96"],
    ["0.87", "0.89", "0.92"],
    ["0.96", "0.96", "0.98"],
    ["0.99", "0.99", "0.99"],
    ["0.89", "0.90", "0.93"],
    ["0.966", "0.97", "0.966"],
    ["0.93", "0.94", "0.94"],
    ["0.93", "0.94", "0.95"],
    ["0.92", "0.92", "0.95"],
    ["0.95", "0.95", "0.96"],
    ["0.96", "0.96", "0.97"],
    ["0.91", "0.92", "0.94"],
    ["0.97", "0.96", "0.98"],
    ["0.91", "0.90", "0.95"],
    ["0.95", "0.96", "0.96"],
    ["0.98", "0.98", "0.99"],
    ["0.96", "0.96", "0.97"],
];

/// Row percentages: stress row, neutral row.
const CONFUSION: [[&str; 2]; 2] = [["96.05", "3.95"], ["9.00", "91.00"]];

const MODALITIES: [(&str, Modality, Published); 3] = [
    ("Physiological", Modality::Phys, ["0.79±0.08", "0.79±0.09", "0.86±0.06"]),
    ("Sociometric", Modality::Badge, ["0.89±0.03", "0.90±0.03", "0.92±0.03"]),
    ("Physiological + Sociometric", Modality::Combined, ["0.94±0.03", "0.94±0.03", "0.96±0.02"]),
];

const TOP_FEATURES: [(&str, &str); 5] = [("eda", "16"), ("pos_act", "15"), ("hz3_f", "14"), ("bm_act", "13"), ("amp3_f", "13")];

const FIVE_FEATURES: Published = ["0.83±0.04", "0.84±0.07", "0.88±0.04"];

const NOTE: &str = "Reference columns quote published results measured on private participant data. \
They are orientation only, never acceptance targets, and synthetic cohorts are not expected to reproduce them.";

fn agg(a: Option<&Aggregate>) -> String {
    a.map_or("n/a".into(), Aggregate::display)
}

fn opt(v: Option<f64>) -> String {
    v.map_or("n/a".into(), |v| format!("{v:.2}"))
}

fn metrics_cells(r: Option<&ExperimentReport>) -> [String; 3] {
    match r {
        Some(r) => [agg(Some(&r.cohort.accuracy)), agg(r.cohort.precision.as_ref()), agg(r.cohort.recall.as_ref())],
        None => ["not run".into(), "-".into(), "-".into()],
    }
}

fn is_full(r: &ExperimentReport) -> bool {
    r.classifier != ClassifierKind::Adaboost || r.config.rounds != 5
}

fn find<'a>(runs: &'a [(String, ExperimentReport)], pred: impl Fn(&ExperimentReport) -> bool) -> Option<&'a ExperimentReport> {
    runs.iter().map(|(_, r)| r).find(|r| pred(r))
}

fn pct(p: &ConfusionPercentages) -> [[String; 2]; 2] {
    let row = |r: Option<[f64; 2]>| r.map_or(["n/a".into(), "n/a".into()], |[a, b]| [format!("{a:.2}"), format!("{b:.2}")]);
    [row(p.stress), row(p.neutral)]
}

pub fn render(runs: &[(String, ExperimentReport)]) -> String {
    let mut s = String::new();
    let w = &mut s;
    let _ = writeln!(w, "# Stress detection results\n\n> {NOTE}\n");

    let _ = writeln!(w, "## Runs\n");
    let _ = writeln!(w, "| Run | Modality | Classifier | Participants | Accuracy | Majority-class rate |");
    let _ = writeln!(w, "|---|---|---|---|---|---|");
    for (name, r) in runs {
        let _ = writeln!(
            w,
            "| {name} | {} | {}{} | {} | {} | {:.3} |",
            r.modality,
            r.classifier,
            if r.classifier == ClassifierKind::Adaboost { format!(" (T={})", r.config.rounds) } else { String::new() },
            r.participants.len(),
            r.cohort.accuracy.display(),
            r.majority_rate
        );
    }

    let _ = writeln!(w, "\n## Classifier comparison, combined sensors\n");
    let _ = writeln!(w, "| Method | Accuracy | Precision | Recall | Reference accuracy | Reference precision | Reference recall |");
    let _ = writeln!(w, "|---|---|---|---|---|---|---|");
    for (label, kind, published) in CLASSIFIERS {
        let run = find(runs, |r| r.modality == Modality::Combined && r.classifier == kind && is_full(r));
        let label = match (kind, run) {
            (ClassifierKind::Adaboost, Some(r)) => format!("{label} (T={})", r.config.rounds),
            (ClassifierKind::Adaboost, None) => format!("{label} (T=300)"),
            _ => label.to_string(),
        };
        let [a, p, rc] = metrics_cells(run);
        let _ = writeln!(w, "| {label} | {a} | {p} | {rc} | {} (reference) | {} (reference) | {} (reference) |", published[0], published[1], published[2]);
    }

    let main = find(runs, |r| r.modality == Modality::Combined && r.classifier == ClassifierKind::Adaboost && is_full(r));
    let _ = writeln!(w, "\n## Per-participant results, combined sensors, AdaBoost\n");
    let _ = writeln!(w, "| Participant | Accuracy | Precision | Recall | Reference accuracy | Reference precision | Reference recall |");
    let _ = writeln!(w, "|---|---|---|---|---|---|---|");
    let synthetic = main.map_or(&[][..], |r| &r.participants[..]);
    for i in 0..synthetic.len().max(PARTICIPANTS.len()) {
        let id = synthetic.get(i).map_or(format!("P{}", i + 1), |p| p.participant_id.clone());
        let cells = synthetic.get(i).map_or(["-".to_string(), "-".into(), "-".into()], |p| {
            [format!("{:.2}", p.metrics.accuracy), opt(p.metrics.precision), opt(p.metrics.recall)]
        });
        let reference = PARTICIPANTS.get(i).map_or(["-"; 3], |r| *r);
        let _ = writeln!(
            w,
            "| {id} | {} | {} | {} | {} | {} | {} |",
            cells[0], cells[1], cells[2], reference[0], reference[1], reference[2]
        );
    }

    let _ = writeln!(w, "\n## Average confusion matrix, combined sensors, AdaBoost (row %)\n");
    let _ = writeln!(w, "| Original label | Predicted stress | Predicted neutral | Reference stress | Reference neutral |");
    let _ = writeln!(w, "|---|---|---|---|---|");
    let cm = main.map(|r| pct(&r.confusion.mean_percentages));
    for (row, name) in ["Stress", "Neutral"].iter().enumerate() {
        let cells = cm.as_ref().map_or(["-".to_string(), "-".into()], |c| c[row].clone());
        let _ = writeln!(w, "| {name} | {} | {} | {} | {} |", cells[0], cells[1], CONFUSION[row][0], CONFUSION[row][1]);
    }
    if let Some(r) = main {
        let p = &r.confusion.pooled;
        let _ = writeln!(w, "\nPooled test counts: TP {} FN {} FP {} TN {}.", p.tp, p.fn_, p.fp, p.tn);
    }

    let _ = writeln!(w, "\n## Modality comparison, AdaBoost\n");
    let _ = writeln!(w, "| Method | Accuracy | Precision | Recall | Reference accuracy | Reference precision | Reference recall |");
    let _ = writeln!(w, "|---|---|---|---|---|---|---|");
    for (label, modality, published) in MODALITIES {
        let run = find(runs, |r| r.modality == modality && r.classifier == ClassifierKind::Adaboost && is_full(r));
        let [a, p, rc] = metrics_cells(run);
        let _ = writeln!(w, "| {label} | {a} | {p} | {rc} | {} (reference) | {} (reference) | {} (reference) |", published[0], published[1], published[2]);
    }

    let _ = writeln!(w, "\n## Most discriminative features, combined sensors, AdaBoost\n");
    match main {
        Some(r) => {
            let _ = writeln!(w, "| Classifier | 1 | 2 | 3 | 4 | 5 |");
            let _ = writeln!(w, "|---|---|---|---|---|---|");
            for p in &r.participants {
                let mut cells: Vec<&str> = p.ranking.iter().map(String::as_str).collect();
                cells.resize(5.max(cells.len()), "-");
                let _ = writeln!(w, "| {} | {} |", p.participant_id, cells.join(" | "));
            }
            let _ = writeln!(w, "\n| Feature | Appearances | Frequency |");
            let _ = writeln!(w, "|---|---|---|");
            for f in r.ranking.iter().take(10) {
                let _ = writeln!(w, "| {} | {} | {:.1}% |", f.feature, f.count, f.percent);
            }
        }
        None => {
            let _ = writeln!(w, "Not run.");
        }
    }
    let refs: Vec<String> = TOP_FEATURES.iter().map(|(f, p)| format!("{f} {p}%")).collect();
    let _ = writeln!(w, "\nReference frequencies: {}.", refs.join(", "));

    let _ = writeln!(w, "\n## AdaBoost with the five most discriminative features (T=5)\n");
    let _ = writeln!(w, "| Method | Accuracy | Precision | Recall | Reference accuracy | Reference precision | Reference recall |");
    let _ = writeln!(w, "|---|---|---|---|---|---|---|");
    let t5 = find(runs, |r| r.modality == Modality::Combined && r.classifier == ClassifierKind::Adaboost && r.config.rounds == 5);
    let [a, p, rc] = metrics_cells(t5);
    let _ = writeln!(
        w,
        "| AdaBoost (T=5) | {a} | {p} | {rc} | {} (reference) | {} (reference) | {} (reference) |",
        FIVE_FEATURES[0], FIVE_FEATURES[1], FIVE_FEATURES[2]
    );

    if let Some(r) = main {
        let _ = writeln!(w, "\n## Session traces\n");
        let _ = writeln!(w, "Per-participant `trace.csv` files hold truth and prediction (+1 stress, -1 neutral) at every tick.\n");
        let _ = writeln!(w, "| Participant | False alarm time (s) | Wrong runs |");
        let _ = writeln!(w, "|---|---|---|");
        for p in &r.participants {
            let _ = writeln!(w, "| {} | {:.1} | {} |", p.participant_id, p.false_alarm_s, p.wrong_runs);
        }
    }
    s
}
