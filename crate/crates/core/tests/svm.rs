use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use stress_core::data::Label;
use stress_core::learning::grid::{geometric_grid, grid_search_cv};
use stress_core::learning::svm::{train_linear_svm_with, train_smo, KernelKind, KernelSpec, LinearSvmParams, SmoParams, SvmModel, WorkingSet};
use stress_core::learning::{stratified_folds, train_rbf_svm, Samples};

fn kernel(spec: &KernelSpec, a: &[f64], b: &[f64]) -> f64 {
    match spec.kind {
        KernelKind::Linear => a.iter().zip(b).map(|(x, y)| x * y).sum(),
        KernelKind::Rbf => (-spec.gamma * a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>()).exp(),
    }
}

fn signs(s: &Samples) -> Vec<f64> {
    s.y.iter().map(|&l| if l == Label::Stress { 1.0 } else { -1.0 }).collect()
}

/// Projection onto `{0 <= a <= c, y'a = 0}` by bisection on the multiplier.
fn project(v: &[f64], y: &[f64], c: f64) -> Vec<f64> {
    let at = |lambda: f64| -> Vec<f64> { v.iter().zip(y).map(|(vi, yi)| (vi - lambda * yi).clamp(0.0, c)).collect() };
    let g = |lambda: f64| at(lambda).iter().zip(y).map(|(a, yi)| a * yi).sum::<f64>();
    let bound = v.iter().fold(c, |m, x| m.max(x.abs())) + c;
    let (mut lo, mut hi) = (-bound, bound);
    for _ in 0..100 {
        let mid = 0.5 * (lo + hi);
        // g is non-increasing in lambda.
        if g(mid) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    at(0.5 * (lo + hi))
}

fn dual_objective(alpha: &[f64], q: &[Vec<f64>]) -> f64 {
    let n = alpha.len();
    let quad: f64 = (0..n).map(|i| (0..n).map(|j| alpha[i] * q[i][j] * alpha[j]).sum::<f64>()).sum();
    alpha.iter().sum::<f64>() - 0.5 * quad
}

/// Accelerated projected gradient ascent on the dual with the bias
/// equality constraint.
fn oracle_dual(s: &Samples, spec: &KernelSpec) -> f64 {
    let y = signs(s);
    let n = s.len();
    let q: Vec<Vec<f64>> = (0..n).map(|i| (0..n).map(|j| y[i] * y[j] * kernel(spec, &s.x[i], &s.x[j])).collect()).collect();
    let lipschitz: f64 = (0..n).map(|i| q[i].iter().map(|v| v.abs()).sum::<f64>()).fold(0.0, f64::max);
    let step = 1.0 / lipschitz;
    let mut a = vec![0.0; n];
    let mut z = a.clone();
    let mut t = 1.0f64;
    for _ in 0..50_000 {
        let grad: Vec<f64> = (0..n).map(|i| 1.0 - (0..n).map(|j| q[i][j] * z[j]).sum::<f64>()).collect();
        let v: Vec<f64> = (0..n).map(|i| z[i] + step * grad[i]).collect();
        let next = project(&v, &y, spec.c);
        let t_next = 0.5 * (1.0 + (1.0 + 4.0 * t * t).sqrt());
        z = (0..n).map(|i| next[i] + (t - 1.0) / t_next * (next[i] - a[i])).collect();
        a = next;
        t = t_next;
    }
    dual_objective(&a, &q)
}

/// Per-row `alpha_i` recovered from the model's support vectors.
fn alphas(model: &SvmModel, s: &Samples) -> Vec<f64> {
    s.x.iter()
        .map(|x| {
            model
                .support_vectors
                .iter()
                .zip(&model.dual_coefficients)
                .find(|(sv, _)| *sv == x)
                .map_or(0.0, |(_, c)| c.abs())
        })
        .collect()
}

fn model_dual_objective(model: &SvmModel, s: &Samples) -> f64 {
    let y = signs(s);
    let n = s.len();
    let q: Vec<Vec<f64>> = (0..n).map(|i| (0..n).map(|j| y[i] * y[j] * kernel(&model.kernel, &s.x[i], &s.x[j])).collect()).collect();
    dual_objective(&alphas(model, s), &q)
}

/// Largest violation of the KKT conditions on the training rows.
fn kkt_residual(model: &SvmModel, s: &Samples, c: f64) -> f64 {
    let y = signs(s);
    let a = alphas(model, s);
    let eps = 1e-12 * c.max(1.0);
    let mut worst = 0.0f64;
    for i in 0..s.len() {
        let m = y[i] * model.decision(&s.x[i]);
        let r = if a[i] <= eps {
            (1.0 - m).max(0.0)
        } else if a[i] >= c - eps {
            (m - 1.0).max(0.0)
        } else {
            (m - 1.0).abs()
        };
        worst = worst.max(r);
    }
    worst
}

fn blobs(rng: &mut ChaCha8Rng, n: usize, d: usize, spread: f64) -> Samples {
    let mut x = Vec::new();
    let mut y = Vec::new();
    for i in 0..n {
        let label = if i % 2 == 0 { Label::Stress } else { Label::Neutral };
        let centre = if label == Label::Stress { 0.5 } else { -0.5 };
        x.push((0..d).map(|_| centre + spread * rng.random_range(-1.0..1.0)).collect());
        y.push(label);
    }
    Samples::new((0..d).map(|j| format!("f{j}")).collect(), x, y).unwrap()
}

#[test]
fn smo_matches_dual_oracle_and_kkt() {
    let mut rng = ChaCha8Rng::seed_from_u64(21);
    for case in 0..12 {
        let s = blobs(&mut rng, 20, 2, if case % 3 == 0 { 0.4 } else { 1.2 });
        let c = [0.5, 2.0, 10.0][case % 3];
        let spec = if case % 2 == 0 { KernelSpec::rbf(c, 0.8) } else { KernelSpec::linear(c) };
        let want = oracle_dual(&s, &spec);
        for ws in [WorkingSet::MaximalViolatingPair, WorkingSet::SecondOrder] {
            let params = SmoParams {
                working_set: ws,
                ..SmoParams::default()
            };
            let model = train_smo(&s, spec, &params).unwrap();
            let got = model_dual_objective(&model, &s);
            assert!((got - want).abs() <= 1e-3, "case {case} {ws:?}: objective {got} vs oracle {want}");
            assert!((model.dual_objective - got).abs() <= 1e-6 * got.abs().max(1.0));
            let kkt = kkt_residual(&model, &s, c);
            assert!(kkt <= 1e-3, "case {case} {ws:?}: KKT residual {kkt}");
            for a in alphas(&model, &s) {
                assert!((0.0..=c + 1e-12).contains(&a));
            }
        }
    }
}

#[test]
fn rbf_separates_xor() {
    let mut x = Vec::new();
    let mut y = Vec::new();
    for i in 0..40 {
        let (a, b) = ([-1.0, 1.0][i % 2], [-1.0, 1.0][(i / 2) % 2]);
        let jitter = 0.1 * ((i as f64) * 1.3).sin();
        x.push(vec![a + jitter, b - jitter]);
        y.push(if a * b > 0.0 { Label::Stress } else { Label::Neutral });
    }
    let s = Samples::new(vec!["a".into(), "b".into()], x, y).unwrap();
    let model = train_rbf_svm(&s, KernelSpec::rbf(10.0, 1.0)).unwrap();
    let correct = s.x.iter().zip(&s.y).filter(|(x, y)| model.predict(x).unwrap().0 == **y).count();
    assert_eq!(correct, s.len());
}

/// The linear solver folds the bias into an extra constant feature, so its
/// dual has box constraints only.
fn oracle_augmented_dual(s: &Samples, c: f64, bias_feature: f64) -> f64 {
    let y = signs(s);
    let n = s.len();
    let aug = |i: usize, j: usize| s.x[i].iter().zip(&s.x[j]).map(|(a, b)| a * b).sum::<f64>() + bias_feature * bias_feature;
    let q: Vec<Vec<f64>> = (0..n).map(|i| (0..n).map(|j| y[i] * y[j] * aug(i, j)).collect()).collect();
    let lipschitz: f64 = (0..n).map(|i| q[i].iter().map(|v| v.abs()).sum::<f64>()).fold(0.0, f64::max);
    let step = 1.0 / lipschitz;
    let mut a = vec![0.0; n];
    let mut z = a.clone();
    let mut t = 1.0f64;
    for _ in 0..200_000 {
        let next: Vec<f64> = (0..n)
            .map(|i| (z[i] + step * (1.0 - (0..n).map(|j| q[i][j] * z[j]).sum::<f64>())).clamp(0.0, c))
            .collect();
        let t_next = 0.5 * (1.0 + (1.0 + 4.0 * t * t).sqrt());
        z = (0..n).map(|i| next[i] + (t - 1.0) / t_next * (next[i] - a[i])).collect();
        a = next;
        t = t_next;
    }
    dual_objective(&a, &q)
}

#[test]
fn linear_dual_coordinate_descent_matches_oracle() {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    for case in 0..10 {
        let s = blobs(&mut rng, 20, 3, 1.0);
        let c = [0.1, 1.0, 10.0][case % 3];
        let params = LinearSvmParams::new(c);
        let model = train_linear_svm_with(&s, &params).unwrap();
        let want = oracle_augmented_dual(&s, c, params.bias_feature);
        assert!((model.dual_objective - want).abs() <= 1e-3, "case {case}: {} vs {want}", model.dual_objective);
        let kkt = kkt_residual(&model, &s, c);
        assert!(kkt <= 1e-3, "case {case}: KKT residual {kkt}");
    }
}

#[test]
fn linear_svm_converges_on_overlapping_data() {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let s = blobs(&mut rng, 2000, 10, 2.0);
    let model = train_linear_svm_with(&s, &LinearSvmParams::new(10.0)).unwrap();
    assert!(kkt_residual(&model, &s, 10.0) <= 1e-3);
    assert!(model.iterations <= 10_000);
}

#[test]
fn grid_search_agrees_with_manual_folds() {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let s = blobs(&mut rng, 60, 2, 1.0);
    let cs = geometric_grid(-1, 5, 2);
    let gammas = geometric_grid(-3, 1, 2);
    let search = grid_search_cv(&s, &cs, &gammas, 3, 17).unwrap();
    let folds = stratified_folds(&s.y, 3, 17).unwrap();
    assert_eq!(search.table.len(), cs.len() * gammas.len());
    let mut best = (f64::NEG_INFINITY, 0.0, 0.0);
    for &c in &cs {
        for &g in &gammas {
            let mut correct = 0;
            for (k, test) in folds.iter().enumerate() {
                let mut train: Vec<usize> = folds.iter().enumerate().filter(|(m, _)| *m != k).flat_map(|(_, f)| f.clone()).collect();
                train.sort_unstable();
                let model = train_smo(&s.subset(&train), KernelSpec::rbf(c, g), &SmoParams::default()).unwrap();
                correct += test.iter().filter(|&&i| model.predict(&s.x[i]).unwrap().0 == s.y[i]).count();
            }
            let acc = correct as f64 / s.len() as f64;
            let point = search.table.iter().find(|p| p.c == c && p.gamma == g).unwrap();
            assert_eq!(point.accuracy, Some(acc), "C={c} gamma={g}");
            if acc > best.0 {
                best = (acc, c, g);
            }
        }
    }
    assert_eq!(search.best_accuracy, best.0);
    assert_eq!((search.best.c, search.best.gamma), (best.1, best.2));
}

#[test]
fn smo_is_deterministic() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let s = blobs(&mut rng, 200, 4, 1.5);
    let a = train_rbf_svm(&s, KernelSpec::rbf(4.0, 0.5)).unwrap();
    let b = train_rbf_svm(&s, KernelSpec::rbf(4.0, 0.5)).unwrap();
    assert_eq!(a, b);
}
