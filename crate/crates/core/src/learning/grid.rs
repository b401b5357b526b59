//! Cross-validated grid search over `(C, gamma)` for the RBF SVM.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::learning::split::stratified_folds;
use crate::learning::svm::{train_smo, KernelSpec, SmoParams};
use crate::learning::Samples;

/// `2^lo, 2^(lo+step), ..., 2^hi`.
pub fn geometric_grid(lo: i32, hi: i32, step: i32) -> Vec<f64> {
    (lo..=hi).step_by(step as usize).map(|e| 2f64.powi(e)).collect()
}

pub fn default_c_grid() -> Vec<f64> {
    geometric_grid(-5, 15, 2)
}

pub fn default_gamma_grid() -> Vec<f64> {
    geometric_grid(-15, 3, 2)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridPoint {
    pub c: f64,
    pub gamma: f64,
    /// Pooled fold accuracy; `None` when a fold failed to converge.
    pub accuracy: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridSearch {
    pub best: KernelSpec,
    pub best_accuracy: f64,
    pub folds: usize,
    /// Every grid point, `C` ascending then `gamma` ascending.
    pub table: Vec<GridPoint>,
}

/// Pooled accuracy of one kernel over the given folds.
pub fn cv_accuracy(data: &Samples, spec: KernelSpec, folds: &[Vec<usize>], params: &SmoParams) -> Result<f64> {
    let mut correct = 0usize;
    let mut total = 0usize;
    for (k, test) in folds.iter().enumerate() {
        let train: Vec<usize> = folds
            .iter()
            .enumerate()
            .filter(|&(m, _)| m != k)
            .flat_map(|(_, f)| f.iter().copied())
            .collect();
        let mut train = train;
        train.sort_unstable();
        let model = train_smo(&data.subset(&train), spec, params)?;
        for &i in test {
            if model.predict(&data.x[i])?.0 == data.y[i] {
                correct += 1;
            }
        }
        total += test.len();
    }
    Ok(correct as f64 / total as f64)
}

/// Returns the grid point with the highest CV accuracy; ties go to the
/// smaller `C`, then the smaller `gamma`.
pub fn grid_search_cv(data: &Samples, c_grid: &[f64], gamma_grid: &[f64], folds: usize, seed: u64) -> Result<GridSearch> {
    grid_search_cv_with(data, c_grid, gamma_grid, folds, seed, &SmoParams::default())
}

pub fn grid_search_cv_with(
    data: &Samples,
    c_grid: &[f64],
    gamma_grid: &[f64],
    folds: usize,
    seed: u64,
    params: &SmoParams,
) -> Result<GridSearch> {
    if c_grid.is_empty() || gamma_grid.is_empty() {
        return Err(Error::Config("grid search needs a non-empty C and gamma grid".into()));
    }
    if folds < 2 {
        return Err(Error::Config(format!("grid search needs at least 2 folds, got {folds}")));
    }
    let mut cs = c_grid.to_vec();
    let mut gammas = gamma_grid.to_vec();
    cs.sort_by(f64::total_cmp);
    cs.dedup();
    gammas.sort_by(f64::total_cmp);
    gammas.dedup();
    for &c in &cs {
        KernelSpec::rbf(c, 1.0).validate()?;
    }
    for &g in &gammas {
        KernelSpec::rbf(1.0, g).validate()?;
    }

    let fold_sets = stratified_folds(&data.y, folds, seed)?;
    let points: Vec<(f64, f64)> = cs.iter().flat_map(|&c| gammas.iter().map(move |&g| (c, g))).collect();
    let table: Vec<GridPoint> = points
        .par_iter()
        .map(|&(c, gamma)| {
            let accuracy = match cv_accuracy(data, KernelSpec::rbf(c, gamma), &fold_sets, params) {
                Ok(a) => Some(a),
                Err(Error::Convergence { .. }) => None,
                Err(e) => return Err(e),
            };
            Ok(GridPoint { c, gamma, accuracy })
        })
        .collect::<Result<_>>()?;

    let mut best: Option<&GridPoint> = None;
    for p in &table {
        if let Some(a) = p.accuracy {
            if best.is_none_or(|b| a > b.accuracy.unwrap()) {
                best = Some(p);
            }
        }
    }
    let best = best.ok_or_else(|| Error::Training("no grid point converged".into()))?;
    Ok(GridSearch {
        best: KernelSpec::rbf(best.c, best.gamma),
        best_accuracy: best.accuracy.unwrap(),
        folds,
        table,
    })
}
