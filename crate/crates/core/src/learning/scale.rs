use serde::{Deserialize, Serialize};

use crate::learning::Samples;

/// Per-feature range learned on training rows.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScalerParams {
    pub min: Vec<f64>,
    pub max: Vec<f64>,
}

impl ScalerParams {
    pub fn fit(rows: &[Vec<f64>]) -> Self {
        let d = rows.first().map_or(0, Vec::len);
        let mut min = vec![f64::INFINITY; d];
        let mut max = vec![f64::NEG_INFINITY; d];
        for row in rows {
            for (j, &v) in row.iter().enumerate() {
                min[j] = min[j].min(v);
                max[j] = max[j].max(v);
            }
        }
        ScalerParams { min, max }
    }

    pub fn is_constant(&self, j: usize) -> bool {
        self.max[j] == self.min[j]
    }

    /// Maps the training range onto [-1, 1]; values outside the training
    /// range are extrapolated, constant features map to 0.
    pub fn transform_row(&self, row: &[f64]) -> Vec<f64> {
        row.iter()
            .enumerate()
            .map(|(j, &v)| {
                if self.is_constant(j) {
                    0.0
                } else {
                    2.0 * (v - self.min[j]) / (self.max[j] - self.min[j]) - 1.0
                }
            })
            .collect()
    }

    pub fn transform(&self, samples: &Samples) -> Samples {
        Samples {
            feature_names: samples.feature_names.clone(),
            x: samples.x.iter().map(|r| self.transform_row(r)).collect(),
            y: samples.y.clone(),
        }
    }
}

/// Fits the scaler on `train` and applies it to both parts.
pub fn scale_to_unit_range(train: &Samples, test: &Samples) -> (Samples, Samples, ScalerParams) {
    let params = ScalerParams::fit(&train.x);
    (params.transform(train), params.transform(test), params)
}
