//! Dual coordinate ascent for the hinge-loss linear SVM.
//!
//! The bias is learned as the weight of a constant augmented feature, so
//! the dual has box constraints only and each coordinate step is exact.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::learning::svm::{dot, KernelSpec, SvmModel};
use crate::learning::Samples;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinearSvmParams {
    pub c: f64,
    /// Stop when the largest projected-gradient magnitude falls below this.
    pub tolerance: f64,
    /// Cap in epochs of `n` coordinate steps; passes over a shrunken active
    /// set count only the steps they take.
    pub max_epochs: usize,
    /// Value of the constant feature carrying the bias.
    pub bias_feature: f64,
    pub seed: u64,
}

impl LinearSvmParams {
    pub fn new(c: f64) -> Self {
        LinearSvmParams {
            c,
            tolerance: 1e-3,
            max_epochs: 10_000,
            bias_feature: 1.0,
            seed: 0,
        }
    }
}

pub fn train_linear_svm(train: &Samples, c: f64) -> Result<SvmModel> {
    train_linear_svm_with(train, &LinearSvmParams::new(c))
}

fn projected_gradient(g: f64, alpha: f64, c: f64) -> f64 {
    if alpha <= 0.0 {
        g.min(0.0)
    } else if alpha >= c {
        g.max(0.0)
    } else {
        g
    }
}

pub fn train_linear_svm_with(train: &Samples, params: &LinearSvmParams) -> Result<SvmModel> {
    KernelSpec::linear(params.c).validate()?;
    train.require_both_classes()?;
    let n = train.len();
    let d = train.n_features();
    let c = params.c;
    let b2 = params.bias_feature * params.bias_feature;
    let y = train.signs();
    let q_diag: Vec<f64> = train.x.iter().map(|x| dot(x, x) + b2).collect();

    let mut alpha = vec![0.0; n];
    let mut w = vec![0.0; d];
    let mut wb = 0.0;
    let margin_grad = |w: &[f64], wb: f64, i: usize| y[i] * (dot(w, &train.x[i]) + wb * params.bias_feature) - 1.0;

    // Active-set shrinking: variables stuck at a bound whose gradient points
    // further outward than last epoch's extremes are skipped until the active
    // problem converges, then everything is re-examined.
    let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
    let mut active: Vec<usize> = (0..n).collect();
    let (mut pg_max_old, mut pg_min_old) = (f64::INFINITY, f64::NEG_INFINITY);
    let mut violation = f64::INFINITY;
    let mut steps = 0usize;
    while steps < params.max_epochs * n {
        steps += active.len();
        active.shuffle(&mut rng);
        let (mut pg_max, mut pg_min) = (f64::NEG_INFINITY, f64::INFINITY);
        let mut s = 0;
        while s < active.len() {
            let i = active[s];
            let g = margin_grad(&w, wb, i);
            let pg = if alpha[i] <= 0.0 {
                if g > pg_max_old {
                    active.swap_remove(s);
                    continue;
                }
                g.min(0.0)
            } else if alpha[i] >= c {
                if g < pg_min_old {
                    active.swap_remove(s);
                    continue;
                }
                g.max(0.0)
            } else {
                g
            };
            pg_max = pg_max.max(pg);
            pg_min = pg_min.min(pg);
            if pg != 0.0 {
                let old = alpha[i];
                alpha[i] = (old - g / q_diag[i]).clamp(0.0, c);
                let delta = (alpha[i] - old) * y[i];
                if delta != 0.0 {
                    for (wj, xj) in w.iter_mut().zip(&train.x[i]) {
                        *wj += delta * xj;
                    }
                    wb += delta * params.bias_feature;
                }
            }
            s += 1;
        }
        let max_pg = pg_max.abs().max(pg_min.abs());
        if active.is_empty() || max_pg < params.tolerance {
            // Certify on the full problem with the final weights.
            violation = (0..n)
                .map(|i| projected_gradient(margin_grad(&w, wb, i), alpha[i], c).abs())
                .fold(0.0, f64::max);
            if violation < params.tolerance {
                let support: Vec<usize> = (0..n).filter(|&i| alpha[i] > 0.0).collect();
                let primal_sq = dot(&w, &w) + wb * wb;
                return Ok(SvmModel {
                    kernel: KernelSpec::linear(c),
                    support_vectors: support.iter().map(|&i| train.x[i].clone()).collect(),
                    dual_coefficients: support.iter().map(|&i| alpha[i] * y[i]).collect(),
                    bias: wb * params.bias_feature,
                    weights: Some(w),
                    dual_objective: alpha.iter().sum::<f64>() - 0.5 * primal_sq,
                    iterations: steps.div_ceil(n),
                });
            }
            active = (0..n).collect();
            pg_max_old = f64::INFINITY;
            pg_min_old = f64::NEG_INFINITY;
            continue;
        }
        violation = max_pg;
        pg_max_old = if pg_max <= 0.0 { f64::INFINITY } else { pg_max };
        pg_min_old = if pg_min >= 0.0 { f64::NEG_INFINITY } else { pg_min };
    }
    Err(Error::Convergence {
        iterations: params.max_epochs,
        violation,
        tolerance: params.tolerance,
    })
}
