//! One-dimensional threshold classifiers.

use serde::{Deserialize, Serialize};

use crate::learning::Samples;

/// Errors closer than this are treated as ties.
pub(crate) const ERROR_TIE_EPS: f64 = 1e-12;

/// `h(x) = polarity` if `x[feature_index] > threshold`, else `-polarity`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DecisionStump {
    pub feature_index: usize,
    #[serde(with = "crate::learning::model::extended_float")]
    pub threshold: f64,
    pub polarity: f64,
    /// Vote weight `alpha` inside an ensemble.
    pub weight: f64,
}

impl DecisionStump {
    pub fn vote(&self, x: &[f64]) -> f64 {
        vote(x[self.feature_index], self.threshold, self.polarity)
    }
}

#[inline]
pub(crate) fn vote(value: f64, threshold: f64, polarity: f64) -> f64 {
    if value > threshold {
        polarity
    } else {
        -polarity
    }
}

/// Best stump on one feature together with its weighted 0/1 error.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StumpFit {
    pub feature_index: usize,
    pub threshold: f64,
    pub polarity: f64,
    pub error: f64,
}

/// Scans every threshold of one presorted column.
///
/// Candidates are `-inf`, the midpoints between consecutive distinct
/// values and `+inf`, visited in ascending order with polarity +1 before
/// -1; a candidate only replaces the incumbent when strictly better.
pub(crate) fn best_split(values: &[f64], order: &[usize], signs: &[f64], weights: &[f64]) -> (f64, f64, f64) {
    let (mut w_pos, mut w_neg) = (0.0, 0.0);
    for (&s, &w) in signs.iter().zip(weights) {
        if s > 0.0 {
            w_pos += w;
        } else {
            w_neg += w;
        }
    }
    // Weight of each class at or below the current threshold.
    let (mut pos_le, mut neg_le) = (0.0, 0.0);
    let mut best = (f64::NEG_INFINITY, 1.0, f64::INFINITY);
    let mut consider = |threshold: f64, pos_le: f64, neg_le: f64| {
        let err_plus = pos_le + (w_neg - neg_le);
        let err_minus = neg_le + (w_pos - pos_le);
        if err_plus < best.2 - ERROR_TIE_EPS {
            best = (threshold, 1.0, err_plus);
        }
        if err_minus < best.2 - ERROR_TIE_EPS {
            best = (threshold, -1.0, err_minus);
        }
    };
    consider(f64::NEG_INFINITY, 0.0, 0.0);
    let n = order.len();
    for k in 0..n {
        let i = order[k];
        if signs[i] > 0.0 {
            pos_le += weights[i];
        } else {
            neg_le += weights[i];
        }
        let v = values[i];
        if k + 1 < n {
            let next = values[order[k + 1]];
            if next > v {
                let mut mid = v + (next - v) / 2.0;
                if mid >= next {
                    mid = v;
                }
                consider(mid, pos_le, neg_le);
            }
        } else {
            consider(f64::INFINITY, pos_le, neg_le);
        }
    }
    let (threshold, polarity, error) = best;
    (threshold, polarity, error.max(0.0))
}

pub(crate) fn argsort(values: &[f64]) -> Vec<usize> {
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
    order
}

/// Stump on `feature` minimizing the weighted 0/1 error.
pub fn train_stump(samples: &Samples, weights: &[f64], feature: usize) -> StumpFit {
    let values: Vec<f64> = samples.x.iter().map(|r| r[feature]).collect();
    let order = argsort(&values);
    let (threshold, polarity, error) = best_split(&values, &order, &samples.signs(), weights);
    StumpFit {
        feature_index: feature,
        threshold,
        polarity,
        error,
    }
}
