//! Acceptance suite. Each criterion prints one PASS/FAIL line; the process
//! exits non-zero when any criterion fails.

use std::f64::consts::PI;
use std::process::Command;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use stress_core::data::{Label, Modality, TickGrid, TimeSeries};
use stress_core::dsp::beats::BeatSequence;
use stress_core::dsp::{band_pass_ppg, compute_hrv, low_pass_eda, FilterSpec};
use stress_core::evaluation::{evaluate, ConfusionMatrix};
use stress_core::experiment::{run_experiment, synthesize_features, ExperimentConfig, ExperimentReport, ExtractionConfig, ParticipantOutcome};
use stress_core::learning::split::stratified_split_indices;
use stress_core::learning::svm::{train_smo, KernelSpec, SmoParams, SvmModel, WorkingSet};
use stress_core::learning::{train_adaboost, train_rbf_svm, train_stump, Classifier, Samples, SplitSpec};
use stress_core::synth::{plan_cohort, GeneratorConfig};

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome { pass, detail: detail.into() }
}

fn sign(l: Label) -> f64 {
    if l == Label::Stress {
        1.0
    } else {
        -1.0
    }
}

fn label(b: bool) -> Label {
    if b {
        Label::Stress
    } else {
        Label::Neutral
    }
}

fn metric_oracle() -> Outcome {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let mut worst = 0.0f64;
    let mut mismatched_none = 0;
    for _ in 0..1000 {
        let n = rng.random_range(1..300);
        let truth: Vec<Label> = (0..n).map(|_| label(rng.random_bool(0.55))).collect();
        let pred: Vec<Label> = (0..n).map(|_| label(rng.random_bool(0.5))).collect();
        let (_, m) = evaluate(&pred, &truth).unwrap();
        let count = |p: Label, t: Label| pred.iter().zip(&truth).filter(|(a, b)| **a == p && **b == t).count() as f64;
        let (tp, tn) = (count(Label::Stress, Label::Stress), count(Label::Neutral, Label::Neutral));
        let (fp, fn_) = (count(Label::Stress, Label::Neutral), count(Label::Neutral, Label::Stress));
        worst = worst.max((m.accuracy - (tp + tn) / n as f64).abs());
        for (got, num, den) in [(m.precision, tp, tp + fp), (m.recall, tp, tp + fn_)] {
            match got {
                Some(v) if den > 0.0 => worst = worst.max((v - num / den).abs()),
                None if den == 0.0 => {}
                _ => mismatched_none += 1,
            }
        }
    }
    let secs = start.elapsed().as_secs_f64();
    outcome(
        worst <= 1e-12 && mismatched_none == 0 && secs < 1.0,
        format!("max deviation {worst:.1e}, undefined mismatches {mismatched_none}, {secs:.3} s"),
    )
}

fn confusion_reproduction() -> Outcome {
    let p = ConfusionMatrix::new(9605, 395, 900, 9100).percentages();
    outcome(
        p.stress == Some([96.05, 3.95]) && p.neutral == Some([9.0, 91.0]),
        format!("stress row {:?}, neutral row {:?}", p.stress, p.neutral),
    )
}

fn random_samples(rng: &mut ChaCha8Rng, n: usize, d: usize, levels: u32) -> Samples {
    let x = (0..n).map(|_| (0..d).map(|_| rng.random_range(0..levels) as f64 * 0.25).collect()).collect();
    let mut y: Vec<Label> = (0..n).map(|_| label(rng.random_bool(0.5))).collect();
    y[0] = Label::Stress;
    y[1] = Label::Neutral;
    Samples::new((0..d).map(|j| format!("f{j}")).collect(), x, y).unwrap()
}

fn stump_oracle() -> Outcome {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut worst = 0.0f64;
    for case in 0..50 {
        let s = random_samples(&mut rng, 20, 1, if case % 2 == 0 { 5 } else { 10_000 });
        let raw: Vec<f64> = (0..20).map(|_| rng.random_range(0.01..1.0)).collect();
        let w: Vec<f64> = raw.iter().map(|v| v / raw.iter().sum::<f64>()).collect();
        let col: Vec<f64> = s.x.iter().map(|r| r[0]).collect();
        let mut best = f64::INFINITY;
        for t in col.iter().copied().chain([f64::NEG_INFINITY, f64::INFINITY]) {
            for p in [1.0, -1.0] {
                let err: f64 = (0..20).filter(|&i| (if col[i] > t { p } else { -p }) != sign(s.y[i])).map(|i| w[i]).sum();
                best = best.min(err);
            }
        }
        worst = worst.max((train_stump(&s, &w, 0).error - best).abs());
    }
    let secs = start.elapsed().as_secs_f64();
    outcome(worst <= 1e-12 && secs < 5.0, format!("max error gap {worst:.1e}, {secs:.3} s"))
}

/// Empirical training error against the product bound for one ensemble.
fn bound_holds(model: &stress_core::learning::StumpEnsemble, train_error: f64) -> bool {
    let bound: f64 = model.round_errors.iter().map(|e| 2.0 * (e * (1.0 - e)).sqrt()).product();
    train_error <= bound + 1e-12
}

fn adaboost_bound(cohort_runs: &[&[ParticipantOutcome]]) -> Outcome {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let mut checked = 0;
    let mut violations = 0;
    for case in 0..20 {
        let s = random_samples(&mut rng, 150, 4, 40);
        let model = train_adaboost(&s, 1 + 5 * case).unwrap();
        let wrong = s.x.iter().zip(&s.y).filter(|(x, y)| model.predict(x).unwrap().0 != **y).count();
        checked += 1;
        violations += usize::from(!bound_holds(&model, wrong as f64 / s.len() as f64));
    }
    let synthetic_secs = start.elapsed().as_secs_f64();
    for run in cohort_runs {
        for o in run.iter() {
            if let Classifier::Adaboost { ensemble } = &o.model.classifier {
                checked += 1;
                violations += usize::from(!bound_holds(ensemble, 1.0 - o.result.train_accuracy));
            }
        }
    }
    let x: Vec<Vec<f64>> = (0..40).map(|i| vec![(i * 7 % 11) as f64, i as f64]).collect();
    let y: Vec<Label> = (0..40).map(|i| label(i >= 17)).collect();
    let s = Samples::new(vec!["noise".into(), "t".into()], x, y).unwrap();
    let sep = train_adaboost(&s, 300).unwrap();
    let perfect = s.x.iter().zip(&s.y).all(|(x, y)| sep.predict(x).unwrap().0 == *y);
    outcome(
        violations == 0 && sep.stumps.len() == 1 && perfect && synthetic_secs < 10.0,
        format!(
            "{violations} bound violations in {checked} ensembles; separable data: {} stump(s), perfect {perfect}",
            sep.stumps.len()
        ),
    )
}

fn kernel(spec: &KernelSpec, a: &[f64], b: &[f64]) -> f64 {
    if spec.gamma > 0.0 {
        (-spec.gamma * a.iter().zip(b).map(|(x, y)| (x - y).powi(2)).sum::<f64>()).exp()
    } else {
        a.iter().zip(b).map(|(x, y)| x * y).sum()
    }
}

/// Dual optimum by accelerated projected gradient; the projection onto
/// `{0 <= a <= c, y'a = 0}` bisects on the equality multiplier.
fn dual_oracle(q: &[Vec<f64>], y: &[f64], c: f64) -> f64 {
    let n = y.len();
    let project = |v: &[f64]| -> Vec<f64> {
        let at = |l: f64| v.iter().zip(y).map(|(vi, yi)| (vi - l * yi).clamp(0.0, c)).collect::<Vec<f64>>();
        let bound = v.iter().fold(c, |m, x| m.max(x.abs())) + c;
        let (mut lo, mut hi) = (-bound, bound);
        for _ in 0..100 {
            let mid = 0.5 * (lo + hi);
            if at(mid).iter().zip(y).map(|(a, b)| a * b).sum::<f64>() > 0.0 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        at(0.5 * (lo + hi))
    };
    let step = 1.0 / q.iter().map(|r| r.iter().map(|v| v.abs()).sum::<f64>()).fold(0.0, f64::max);
    let (mut a, mut z, mut t) = (vec![0.0; n], vec![0.0; n], 1.0f64);
    for _ in 0..50_000 {
        let v: Vec<f64> = (0..n).map(|i| z[i] + step * (1.0 - (0..n).map(|j| q[i][j] * z[j]).sum::<f64>())).collect();
        let next = project(&v);
        let t_next = 0.5 * (1.0 + (1.0 + 4.0 * t * t).sqrt());
        z = (0..n).map(|i| next[i] + (t - 1.0) / t_next * (next[i] - a[i])).collect();
        a = next;
        t = t_next;
    }
    objective(&a, q)
}

fn objective(a: &[f64], q: &[Vec<f64>]) -> f64 {
    let quad: f64 = (0..a.len()).map(|i| (0..a.len()).map(|j| a[i] * q[i][j] * a[j]).sum::<f64>()).sum();
    a.iter().sum::<f64>() - 0.5 * quad
}

fn model_alphas(model: &SvmModel, s: &Samples) -> Vec<f64> {
    s.x.iter()
        .map(|x| model.support_vectors.iter().zip(&model.dual_coefficients).find(|(sv, _)| *sv == x).map_or(0.0, |(_, c)| c.abs()))
        .collect()
}

fn svm_correctness() -> Outcome {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let (mut gap, mut kkt) = (0.0f64, 0.0f64);
    for case in 0..8 {
        let x: Vec<Vec<f64>> = (0..20)
            .map(|i| {
                let centre = if i % 2 == 0 { 0.5 } else { -0.5 };
                (0..2).map(|_| centre + rng.random_range(-1.0..1.0)).collect()
            })
            .collect();
        let y: Vec<Label> = (0..20).map(|i| label(i % 2 == 0)).collect();
        let s = Samples::new(vec!["a".into(), "b".into()], x, y).unwrap();
        let c = [0.5, 4.0][case % 2];
        let spec = if case < 4 { KernelSpec::rbf(c, 0.7) } else { KernelSpec::linear(c) };
        let ys: Vec<f64> = s.y.iter().map(|&l| sign(l)).collect();
        let q: Vec<Vec<f64>> = (0..20).map(|i| (0..20).map(|j| ys[i] * ys[j] * kernel(&spec, &s.x[i], &s.x[j])).collect()).collect();
        let want = dual_oracle(&q, &ys, c);
        for ws in [WorkingSet::MaximalViolatingPair, WorkingSet::SecondOrder] {
            let model = train_smo(&s, spec, &SmoParams { working_set: ws, ..SmoParams::default() }).unwrap();
            let a = model_alphas(&model, &s);
            gap = gap.max((objective(&a, &q) - want).abs());
            for i in 0..20 {
                let m = ys[i] * model.decision(&s.x[i]);
                let r = if a[i] <= 1e-12 {
                    (1.0 - m).max(0.0)
                } else if a[i] >= c - 1e-12 {
                    (m - 1.0).max(0.0)
                } else {
                    (m - 1.0).abs()
                };
                kkt = kkt.max(r);
            }
        }
    }
    let x: Vec<Vec<f64>> = (0..40).map(|i| vec![[-1.0, 1.0][i % 2] + 0.05 * (i as f64).sin(), [-1.0, 1.0][(i / 2) % 2]]).collect();
    let y: Vec<Label> = x.iter().map(|r| label(r[0] * r[1] > 0.0)).collect();
    let xor = Samples::new(vec!["a".into(), "b".into()], x, y).unwrap();
    let model = train_rbf_svm(&xor, KernelSpec::rbf(10.0, 1.0)).unwrap();
    let acc = xor.x.iter().zip(&xor.y).filter(|(x, y)| model.predict(x).unwrap().0 == **y).count() as f64 / xor.len() as f64;
    let secs = start.elapsed().as_secs_f64();
    outcome(
        gap <= 1e-3 && kkt <= 1e-3 && acc == 1.0 && secs < 30.0,
        format!("objective gap {gap:.1e}, KKT residual {kkt:.1e}, XOR accuracy {acc}, {secs:.1} s"),
    )
}

/// Amplitude at `freq` of a filtered unit sine, middle third, whole periods.
fn gain(filter: impl Fn(&TimeSeries) -> TimeSeries, freq: f64, rate: f64, periods: f64) -> f64 {
    let n = (periods / freq * rate) as usize;
    let x = TimeSeries::new("x", 0.0, rate, (0..n).map(|i| (2.0 * PI * freq * i as f64 / rate).sin()).collect()).unwrap();
    let y = filter(&x).values;
    let period = (rate / freq).round() as usize;
    let (start, len) = (n / 3, n / 3 / period * period);
    let (mut s, mut c) = (0.0, 0.0);
    for (i, v) in y.iter().enumerate().skip(start).take(len) {
        let w = 2.0 * PI * freq * i as f64 / rate;
        s += v * w.sin();
        c += v * w.cos();
    }
    2.0 * (s * s + c * c).sqrt() / len as f64
}

/// Zero-phase Butterworth magnitude: the single-pass prewarped response squared.
fn analytic(freq: f64, cut: f64, order: usize, rate: f64, high_pass: bool) -> f64 {
    let r = (PI * freq / rate).tan() / (PI * cut / rate).tan();
    let r = if high_pass { 1.0 / r } else { r };
    1.0 / (1.0 + r.powi(2 * order as i32))
}

fn filter_responses() -> Outcome {
    let start = Instant::now();
    let rate = 1000.0;
    let eda = FilterSpec::eda_default();
    let ppg = FilterSpec::ppg_default();
    let eda_gain = |f: f64, periods| gain(|x| low_pass_eda(x, &eda).unwrap(), f, rate, periods);
    let pass = eda_gain(0.05, 30.0);
    let stop = eda_gain(5.0, 300.0);
    let deviation = [(0.05, pass), (5.0, stop)]
        .iter()
        .map(|&(f, g)| (g - analytic(f, eda.high_cut, eda.order, rate, false)).abs())
        .fold(0.0, f64::max);
    let dc = TimeSeries::new("x", 0.0, rate, vec![1.0; 60_000]).unwrap();
    let out = band_pass_ppg(&dc, &ppg).unwrap();
    let leak = out.values[20_000..40_000].iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let secs = start.elapsed().as_secs_f64();
    outcome(
        (pass - 1.0).abs() <= 0.05 && stop <= 0.05 && leak <= 0.01 && deviation < 1e-3 && secs < 5.0,
        format!("0.05 Hz gain {pass:.4}, 5 Hz gain {stop:.4}, PPG DC leak {leak:.1e}, max deviation from analytic {deviation:.1e}"),
    )
}

fn hrv_closed_form() -> Outcome {
    let grid = TickGrid { start: 0.0, rate: 10.0, len: 3000 };
    let sequence = |ivs: Vec<f64>| {
        let mut t = 0.5;
        let mut beat_times = vec![t];
        for iv in ivs {
            t += iv;
            beat_times.push(t);
        }
        BeatSequence { beat_times, source_rate: 1000.0 }
    };
    let alt = sequence((0..300).map(|i| if i % 2 == 0 { 0.9 } else { 1.1 }).collect());
    let hrv = compute_hrv(&alt, 30.0, grid);
    // Windows holding an even number of intervals have mean 1.0 exactly.
    let mut worst = 0.0f64;
    let mut windows = 0;
    for (i, t) in grid.ticks().enumerate() {
        let n = alt.beat_times.windows(2).filter(|w| w[1] <= t && w[1] > t - 30.0).count();
        if n >= 2 && n % 2 == 0 {
            windows += 1;
            worst = worst.max((hrv.values[i] - 0.1).abs());
        }
    }
    let regular = compute_hrv(&sequence(vec![0.8; 400]), 30.0, grid);
    let flat = regular.values.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    outcome(
        worst <= 1e-6 && windows > 0 && flat <= 1e-12,
        format!("alternating max |SDNN - 0.1| {worst:.1e} over {windows} windows, regular max {flat:.1e}"),
    )
}

fn stratified_split() -> Outcome {
    let start = Instant::now();
    let mut labels = vec![Label::Stress; 8200];
    labels.extend(vec![Label::Neutral; 4600]);
    let mut bad = 0;
    for seed in 0..100 {
        let (train, test) = stratified_split_indices(&labels, &SplitSpec { train_fraction: 0.75, seed }).unwrap();
        let count = |idx: &[usize], l| idx.iter().filter(|&&i| labels[i] == l).count();
        let got = [count(&train, Label::Stress), count(&train, Label::Neutral), count(&test, Label::Stress), count(&test, Label::Neutral)];
        bad += usize::from(got != [6150, 3450, 2050, 1150]);
    }
    let secs = start.elapsed().as_secs_f64();
    outcome(bad == 0 && secs < 5.0, format!("{bad} of 100 seeds off target, {secs:.2} s"))
}

type Runs = Vec<(Modality, ExperimentReport, Vec<ParticipantOutcome>)>;

fn cohort_runs(gen: &GeneratorConfig, modalities: &[Modality]) -> Runs {
    let manifest = plan_cohort(gen).unwrap();
    let sessions: Vec<_> = synthesize_features(gen, &manifest, &ExtractionConfig::default())
        .unwrap()
        .into_iter()
        .map(|f| (f.fuse().unwrap(), f.segments.clone()))
        .collect();
    modalities
        .iter()
        .map(|&modality| {
            let config = ExperimentConfig { modality, ..ExperimentConfig::default() };
            let (report, outcomes) = run_experiment(&sessions, &config).unwrap();
            (modality, report, outcomes)
        })
        .collect()
}

fn accuracy(runs: &Runs, m: Modality) -> f64 {
    runs.iter().find(|r| r.0 == m).unwrap().1.cohort.accuracy.mean
}

fn cohort_ordering(strong: &Runs, null: &Runs, secs: f64) -> Outcome {
    let (c, b, p) = (accuracy(strong, Modality::Combined), accuracy(strong, Modality::Badge), accuracy(strong, Modality::Phys));
    let ordered = c >= b && b >= p - 0.02 && c >= 0.90;
    let gaps: Vec<String> = null.iter().map(|(m, r, _)| format!("{m} {:+.3}", r.cohort.accuracy.mean - r.majority_rate)).collect();
    let near_majority = null.iter().all(|(_, r, _)| (r.cohort.accuracy.mean - r.majority_rate).abs() <= 0.05);
    outcome(
        ordered && near_majority && secs < 600.0,
        format!(
            "separability 0.7: combined {c:.4}, badge {b:.4}, phys {p:.4}; separability 0 accuracy minus majority: {}; {secs:.0} s",
            gaps.join(", ")
        ),
    )
}

fn ranking_recovery(planted: &Runs) -> Outcome {
    let report = &planted[0].1;
    let top: Vec<&str> = report.ranking.iter().take(3).map(|f| f.feature.as_str()).collect();
    let share: f64 = report.ranking.iter().filter(|f| f.feature == "eda" || f.feature == "pos_act").map(|f| f.percent).sum();
    let listed: Vec<String> = report.ranking.iter().take(5).map(|f| format!("{} {:.1}%", f.feature, f.percent)).collect();
    outcome(
        top.contains(&"eda") && top.contains(&"pos_act") && share >= 30.0,
        format!("top features {}; eda + pos_act {share:.1}%", listed.join(", ")),
    )
}

fn end_to_end_determinism() -> Outcome {
    let start = Instant::now();
    let run = || {
        let dir = tempfile::tempdir().unwrap();
        let status = Command::new(env!("CARGO_BIN_EXE_stressdetect"))
            .args(["all", "--seed", "7", "--out"])
            .arg(dir.path())
            .output()
            .unwrap();
        assert!(status.status.success(), "{}", String::from_utf8_lossy(&status.stderr));
        std::fs::read(dir.path().join("report.json")).unwrap()
    };
    let (a, b) = (run(), run());
    outcome(a == b && !a.is_empty(), format!("report.json {} bytes, identical {}, {:.0} s", a.len(), a == b, start.elapsed().as_secs_f64()))
}

fn main() {
    let mut results: Vec<(u32, &str, Outcome)> = vec![
        (1, "metric oracle", metric_oracle()),
        (2, "confusion percentages", confusion_reproduction()),
        (3, "stump oracle", stump_oracle()),
    ];

    let start = Instant::now();
    let modalities = [Modality::Phys, Modality::Badge, Modality::Combined];
    let strong = cohort_runs(&GeneratorConfig { separability: 0.7, ..GeneratorConfig::default() }, &modalities);
    let null = cohort_runs(&GeneratorConfig { separability: 0.0, ..GeneratorConfig::default() }, &modalities);
    let ordering_secs = start.elapsed().as_secs_f64();
    let planted = cohort_runs(&GeneratorConfig::planted_eda_posture(), &[Modality::Combined]);

    let suite: Vec<&[ParticipantOutcome]> = strong.iter().chain(&null).chain(&planted).map(|r| r.2.as_slice()).collect();
    results.push((4, "AdaBoost bound", adaboost_bound(&suite)));
    results.push((5, "SVM correctness", svm_correctness()));
    results.push((6, "filter responses", filter_responses()));
    results.push((7, "HRV closed form", hrv_closed_form()));
    results.push((8, "stratified split", stratified_split()));
    results.push((9, "cohort ordering", cohort_ordering(&strong, &null, ordering_secs)));
    results.push((10, "ranking recovery", ranking_recovery(&planted)));
    results.push((11, "end-to-end determinism", end_to_end_determinism()));

    let mut failed = 0;
    for (n, name, o) in &results {
        println!("criterion {n:>2} {name:<24} {}  {}", if o.pass { "PASS" } else { "FAIL" }, o.detail);
        failed += usize::from(!o.pass);
    }
    println!("{} of {} criteria passed", results.len() - failed, results.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
