//! Feature ranking from boosted stump ensembles.
//!
//! A participant's ranking is the feature sequence of the first `k` stumps
//! in selection order, so a feature may appear more than once.

use serde::{Deserialize, Serialize};

use crate::learning::StumpEnsemble;

pub fn rank_features(model: &StumpEnsemble, top_k: usize) -> Vec<String> {
    model
        .stumps
        .iter()
        .take(top_k)
        .map(|s| model.feature_names[s.feature_index].clone())
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureFrequency {
    pub feature: String,
    pub count: usize,
    /// `count / (participants * k) * 100`.
    pub percent: f64,
}

/// Appearance counts across per-participant top-`k` lists, most frequent
/// first; equal counts keep first-appearance order.
pub fn cohort_frequencies(rankings: &[Vec<String>], top_k: usize) -> Vec<FeatureFrequency> {
    let mut out: Vec<FeatureFrequency> = Vec::new();
    for name in rankings.iter().flatten() {
        match out.iter_mut().find(|f| &f.feature == name) {
            Some(f) => f.count += 1,
            None => out.push(FeatureFrequency {
                feature: name.clone(),
                count: 1,
                percent: 0.0,
            }),
        }
    }
    let denom = (rankings.len() * top_k) as f64;
    for f in &mut out {
        f.percent = if denom > 0.0 { 100.0 * f.count as f64 / denom } else { 0.0 };
    }
    // Stable sort keeps first-appearance order among ties.
    out.sort_by(|a, b| b.count.cmp(&a.count));
    out
}
