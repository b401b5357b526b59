//! Discrete AdaBoost over one-dimensional stumps.
//!
//! Every round fits the best stump on every feature under the current
//! sample weights and keeps the overall best. Because each weak learner
//! reads a single feature, the selection order doubles as a feature
//! ranking.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::data::Label;
use crate::error::{Error, Result};
use crate::learning::stump::{argsort, best_split, vote, DecisionStump, ERROR_TIE_EPS};
use crate::learning::{check_dim, Samples};

/// Floor applied to a zero weighted error before computing alpha.
pub const MIN_ERROR: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StumpEnsemble {
    pub feature_names: Vec<String>,
    /// Stumps in selection order.
    pub stumps: Vec<DecisionStump>,
    /// Requested number of rounds `T`.
    pub rounds: usize,
    /// Weighted error of every admitted stump (floored at [`MIN_ERROR`]).
    pub round_errors: Vec<f64>,
}

impl StumpEnsemble {
    /// Signed vote sum; positive means stress.
    pub fn margin(&self, x: &[f64]) -> f64 {
        self.stumps.iter().map(|s| s.weight * s.vote(x)).sum()
    }

    pub fn predict(&self, x: &[f64]) -> Result<(Label, f64)> {
        check_dim(x, self.feature_names.len())?;
        let m = self.margin(x);
        Ok((Label::from_score(m), m))
    }

    /// `prod 2 sqrt(e (1 - e))` over the admitted rounds.
    pub fn training_error_bound(&self) -> f64 {
        self.round_errors
            .iter()
            .map(|e| 2.0 * (e * (1.0 - e)).sqrt())
            .product()
    }

    /// Feature names of the stumps in selection order.
    pub fn selected_features(&self) -> Vec<&str> {
        self.stumps
            .iter()
            .map(|s| self.feature_names[s.feature_index].as_str())
            .collect()
    }
}

pub fn alpha(error: f64) -> f64 {
    let e = error.max(MIN_ERROR);
    0.5 * ((1.0 - e) / e).ln()
}

/// Trains at most `rounds` stumps.
///
/// Training stops early when a stump classifies the weighted sample
/// perfectly (it is admitted with the capped weight) or when the best stump
/// is no better than chance (that round is discarded).
pub fn train_adaboost(train: &Samples, rounds: usize) -> Result<StumpEnsemble> {
    if rounds == 0 {
        return Err(Error::Config("AdaBoost needs at least one round".into()));
    }
    train.require_both_classes()?;
    let n = train.len();
    let d = train.n_features();
    let signs = train.signs();
    let columns: Vec<Vec<f64>> = (0..d).map(|j| train.x.iter().map(|r| r[j]).collect()).collect();
    let orders: Vec<Vec<usize>> = columns.par_iter().map(|c| argsort(c)).collect();

    let mut weights = vec![1.0 / n as f64; n];
    let mut ensemble = StumpEnsemble {
        feature_names: train.feature_names.clone(),
        stumps: Vec::new(),
        rounds,
        round_errors: Vec::new(),
    };
    for _ in 0..rounds {
        let fits: Vec<(f64, f64, f64)> = (0..d)
            .into_par_iter()
            .map(|j| best_split(&columns[j], &orders[j], &signs, &weights))
            .collect();
        let mut best = 0;
        for j in 1..d {
            if fits[j].2 < fits[best].2 - ERROR_TIE_EPS {
                best = j;
            }
        }
        let (threshold, polarity, error) = fits[best];
        if error >= 0.5 - ERROR_TIE_EPS {
            break;
        }
        let a = alpha(error);
        ensemble.stumps.push(DecisionStump {
            feature_index: best,
            threshold,
            polarity,
            weight: a,
        });
        ensemble.round_errors.push(error.max(MIN_ERROR));
        if error < MIN_ERROR {
            break;
        }
        let col = &columns[best];
        let mut total = 0.0;
        for i in 0..n {
            let h = vote(col[i], threshold, polarity);
            weights[i] *= (-a * signs[i] * h).exp();
            total += weights[i];
        }
        weights.iter_mut().for_each(|w| *w /= total);
    }
    Ok(ensemble)
}

#[cfg(test)]
mod tests {
    use super::*;
    use Label::*;

    #[test]
    fn single_class_rejected() {
        let s = Samples::new(vec!["a".into()], vec![vec![1.0], vec![2.0]], vec![Stress, Stress]).unwrap();
        assert!(matches!(train_adaboost(&s, 10), Err(Error::Training(_))));
    }

    #[test]
    fn alpha_is_capped() {
        assert!(alpha(0.0).is_finite());
        assert_eq!(alpha(0.0), alpha(MIN_ERROR));
        assert!((alpha(0.25) - 0.5 * 3f64.ln()).abs() < 1e-12);
    }

    #[test]
    fn one_stump_prediction_and_tie_rule() {
        let stump = |p: f64, w: f64| DecisionStump { feature_index: 0, threshold: 0.5, polarity: p, weight: w };
        let one = StumpEnsemble { feature_names: vec!["a".into()], stumps: vec![stump(1.0, 0.7)], rounds: 1, round_errors: vec![0.2] };
        assert_eq!(one.predict(&[1.0]).unwrap(), (Stress, 0.7));
        let tie = StumpEnsemble { stumps: vec![stump(1.0, 0.7), stump(-1.0, 0.7)], ..one.clone() };
        assert_eq!(tie.predict(&[1.0]).unwrap(), (Neutral, 0.0));
        assert!(matches!(one.predict(&[1.0, 2.0]), Err(Error::Schema(_))));
    }
}
