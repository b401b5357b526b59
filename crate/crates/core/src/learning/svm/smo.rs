//! Two-variable SMO on the C-SVC dual with maximal-violating-pair selection.

use std::collections::VecDeque;

use crate::error::{Error, Result};
use crate::learning::svm::{KernelKind, KernelSpec, SvmModel};
use crate::learning::Samples;

/// Curvature floor for non-positive-definite pairs.
const TAU: f64 = 1e-12;

/// How the second index of the working pair is chosen. The first is always
/// the maximal violator.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum WorkingSet {
    /// Partner with the opposite extreme gradient.
    MaximalViolatingPair,
    /// Partner with the largest second-order decrease of the objective.
    SecondOrder,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SmoParams {
    pub working_set: WorkingSet,
    /// Stop when `max_up(-y G) - min_low(-y G)` falls below this.
    pub tolerance: f64,
    /// `None` uses `max(10_000_000, 100 n)`.
    pub max_iterations: Option<usize>,
    /// Kernel row cache budget in bytes.
    pub cache_bytes: usize,
}

impl Default for SmoParams {
    fn default() -> Self {
        SmoParams {
            working_set: WorkingSet::MaximalViolatingPair,
            tolerance: 1e-3,
            max_iterations: None,
            cache_bytes: 256 << 20,
        }
    }
}

pub fn train_rbf_svm(train: &Samples, spec: KernelSpec) -> Result<SvmModel> {
    if spec.kind != KernelKind::Rbf {
        return Err(Error::Config(format!("expected an rbf kernel, got {}", spec.kind)));
    }
    train_smo(train, spec, &SmoParams::default())
}

struct KernelRows<'a> {
    x: &'a [Vec<f64>],
    spec: KernelSpec,
    rows: Vec<Option<Vec<f64>>>,
    fifo: VecDeque<usize>,
    capacity: usize,
}

impl<'a> KernelRows<'a> {
    fn new(x: &'a [Vec<f64>], spec: KernelSpec, cache_bytes: usize) -> Self {
        let n = x.len().max(1);
        let capacity = (cache_bytes / (n * 8)).max(2);
        KernelRows {
            x,
            spec,
            rows: vec![None; x.len()],
            fifo: VecDeque::new(),
            capacity,
        }
    }

    fn ensure(&mut self, i: usize, keep: usize) {
        if self.rows[i].is_some() {
            return;
        }
        if self.fifo.len() >= self.capacity {
            let mut old = self.fifo.pop_front().unwrap();
            if old == keep {
                self.fifo.push_back(old);
                old = self.fifo.pop_front().unwrap();
            }
            self.rows[old] = None;
        }
        let xi = &self.x[i];
        self.rows[i] = Some(self.x.iter().map(|xt| self.spec.eval(xi, xt)).collect());
        self.fifo.push_back(i);
    }

    /// Kernel rows of `i` and `j`; both stay cached until the next call.
    fn pair(&mut self, i: usize, j: usize) -> (&[f64], &[f64]) {
        self.ensure(i, j);
        self.ensure(j, i);
        (self.rows[i].as_deref().unwrap(), self.rows[j].as_deref().unwrap())
    }
}

/// Solves the dual for any kernel.
pub fn train_smo(train: &Samples, spec: KernelSpec, params: &SmoParams) -> Result<SvmModel> {
    spec.validate()?;
    train.require_both_classes()?;
    let n = train.len();
    let c = spec.c;
    let y = train.signs();
    let diag: Vec<f64> = train.x.iter().map(|x| spec.eval(x, x)).collect();
    let mut kernel = KernelRows::new(&train.x, spec, params.cache_bytes);
    let max_iter = params.max_iterations.unwrap_or_else(|| (100 * n).max(10_000_000));

    let mut alpha = vec![0.0; n];
    // Gradient of 1/2 a'Qa - e'a.
    let mut grad = vec![-1.0; n];
    let in_up = |a: f64, y: f64| (y > 0.0 && a < c) || (y < 0.0 && a > 0.0);
    let in_low = |a: f64, y: f64| (y > 0.0 && a > 0.0) || (y < 0.0 && a < c);

    let mut iterations = 0;
    loop {
        let (mut i, mut g_max) = (usize::MAX, f64::NEG_INFINITY);
        let (mut j, mut g_min) = (usize::MAX, f64::INFINITY);
        for t in 0..n {
            let v = -y[t] * grad[t];
            if in_up(alpha[t], y[t]) && v > g_max {
                g_max = v;
                i = t;
            }
            if in_low(alpha[t], y[t]) && v < g_min {
                g_min = v;
                j = t;
            }
        }
        let gap = g_max - g_min;
        if i == usize::MAX || j == usize::MAX || gap < params.tolerance {
            break;
        }
        if params.working_set == WorkingSet::SecondOrder {
            kernel.ensure(i, i);
            let ki = kernel.rows[i].as_deref().unwrap();
            let mut best = f64::INFINITY;
            for t in 0..n {
                let b = g_max + y[t] * grad[t];
                if in_low(alpha[t], y[t]) && b > 0.0 {
                    let mut a = diag[i] + diag[t] - 2.0 * ki[t];
                    if a <= 0.0 {
                        a = TAU;
                    }
                    if -b * b / a < best {
                        best = -b * b / a;
                        j = t;
                    }
                }
            }
        }
        if iterations >= max_iter {
            return Err(Error::Convergence {
                iterations,
                violation: gap,
                tolerance: params.tolerance,
            });
        }
        iterations += 1;

        let (ki, kj) = kernel.pair(i, j);
        let kij = ki[j];
        let (old_i, old_j) = (alpha[i], alpha[j]);
        let mut quad = diag[i] + diag[j] - 2.0 * kij;
        if quad <= 0.0 {
            quad = TAU;
        }
        let (mut ai, mut aj) = (old_i, old_j);
        if y[i] != y[j] {
            let delta = (-grad[i] - grad[j]) / quad;
            let diff = ai - aj;
            ai += delta;
            aj += delta;
            if diff > 0.0 {
                if aj < 0.0 {
                    aj = 0.0;
                    ai = diff;
                }
            } else if ai < 0.0 {
                ai = 0.0;
                aj = -diff;
            }
            if diff > 0.0 {
                if ai > c {
                    ai = c;
                    aj = c - diff;
                }
            } else if aj > c {
                aj = c;
                ai = c + diff;
            }
        } else {
            let delta = (grad[i] - grad[j]) / quad;
            let sum = ai + aj;
            ai -= delta;
            aj += delta;
            if sum > c {
                if ai > c {
                    ai = c;
                    aj = sum - c;
                }
            } else if aj < 0.0 {
                aj = 0.0;
                ai = sum;
            }
            if sum > c {
                if aj > c {
                    aj = c;
                    ai = sum - c;
                }
            } else if ai < 0.0 {
                ai = 0.0;
                aj = sum;
            }
        }
        alpha[i] = ai;
        alpha[j] = aj;
        let di = (ai - old_i) * y[i];
        let dj = (aj - old_j) * y[j];
        for t in 0..n {
            grad[t] += y[t] * (ki[t] * di + kj[t] * dj);
        }
    }

    let rho = compute_rho(&alpha, &grad, &y, c);
    let support: Vec<usize> = (0..n).filter(|&t| alpha[t] > 0.0).collect();
    let dual_objective = 0.5 * alpha.iter().zip(&grad).map(|(a, g)| a * (1.0 - g)).sum::<f64>();
    let weights = (spec.kind == KernelKind::Linear).then(|| {
        let mut w = vec![0.0; train.n_features()];
        for &t in &support {
            for (wj, xj) in w.iter_mut().zip(&train.x[t]) {
                *wj += alpha[t] * y[t] * xj;
            }
        }
        w
    });
    Ok(SvmModel {
        kernel: spec,
        support_vectors: support.iter().map(|&t| train.x[t].clone()).collect(),
        dual_coefficients: support.iter().map(|&t| alpha[t] * y[t]).collect(),
        bias: -rho,
        weights,
        dual_objective,
        iterations,
    })
}

fn compute_rho(alpha: &[f64], grad: &[f64], y: &[f64], c: f64) -> f64 {
    let (mut ub, mut lb) = (f64::INFINITY, f64::NEG_INFINITY);
    let (mut sum_free, mut n_free) = (0.0, 0usize);
    for t in 0..alpha.len() {
        let yg = y[t] * grad[t];
        if alpha[t] >= c {
            if y[t] < 0.0 {
                ub = ub.min(yg);
            } else {
                lb = lb.max(yg);
            }
        } else if alpha[t] <= 0.0 {
            if y[t] > 0.0 {
                ub = ub.min(yg);
            } else {
                lb = lb.max(yg);
            }
        } else {
            n_free += 1;
            sum_free += yg;
        }
    }
    if n_free > 0 {
        sum_free / n_free as f64
    } else {
        (ub + lb) / 2.0
    }
}
