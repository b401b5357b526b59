//! Dataset preparation and the three per-participant classifiers:
//! decision-stump AdaBoost, linear SVM and RBF SVM with grid-search
//! cross-validation.

pub mod adaboost;
pub mod grid;
pub mod model;
pub mod scale;
pub mod split;
pub mod stump;
pub mod svm;

pub use adaboost::{train_adaboost, StumpEnsemble};
pub use grid::{grid_search_cv, GridPoint, GridSearch};
pub use model::{Classifier, ClassifierKind, ModelFile};
pub use scale::{scale_to_unit_range, ScalerParams};
pub use split::{stratified_folds, stratified_split, SplitSpec};
pub use stump::{train_stump, DecisionStump};
pub use svm::{train_linear_svm, train_rbf_svm, KernelKind, KernelSpec, SvmModel};

use crate::data::{Label, LabeledDataset, Modality};
use crate::error::{Error, Result};

/// Row-major design matrix with labels, restricted to one modality's columns.
#[derive(Debug, Clone, PartialEq)]
pub struct Samples {
    pub feature_names: Vec<String>,
    pub x: Vec<Vec<f64>>,
    pub y: Vec<Label>,
}

impl Samples {
    pub fn new(feature_names: Vec<String>, x: Vec<Vec<f64>>, y: Vec<Label>) -> Result<Self> {
        if x.len() != y.len() {
            return Err(Error::Schema(format!("{} rows but {} labels", x.len(), y.len())));
        }
        if let Some(row) = x.iter().find(|r| r.len() != feature_names.len()) {
            return Err(Error::Schema(format!(
                "row has {} features, expected {}",
                row.len(),
                feature_names.len()
            )));
        }
        Ok(Samples { feature_names, x, y })
    }

    pub fn from_dataset(data: &LabeledDataset, modality: Modality) -> Self {
        let range = modality.feature_range();
        Samples {
            feature_names: modality.feature_names().iter().map(|s| s.to_string()).collect(),
            x: data.rows.iter().map(|r| r.vector.values[range.clone()].to_vec()).collect(),
            y: data.labels(),
        }
    }

    pub fn len(&self) -> usize {
        self.y.len()
    }

    pub fn is_empty(&self) -> bool {
        self.y.is_empty()
    }

    pub fn n_features(&self) -> usize {
        self.feature_names.len()
    }

    /// Labels as +1 (stress) / -1 (neutral).
    pub fn signs(&self) -> Vec<f64> {
        self.y.iter().map(|l| l.sign()).collect()
    }

    pub fn count(&self, label: Label) -> usize {
        self.y.iter().filter(|&&l| l == label).count()
    }

    pub fn subset(&self, indices: &[usize]) -> Samples {
        Samples {
            feature_names: self.feature_names.clone(),
            x: indices.iter().map(|&i| self.x[i].clone()).collect(),
            y: indices.iter().map(|&i| self.y[i]).collect(),
        }
    }

    pub(crate) fn require_both_classes(&self) -> Result<()> {
        if self.count(Label::Stress) == 0 || self.count(Label::Neutral) == 0 {
            return Err(Error::Training(format!(
                "training data needs both classes ({} stress, {} neutral)",
                self.count(Label::Stress),
                self.count(Label::Neutral)
            )));
        }
        Ok(())
    }
}

pub(crate) fn check_dim(x: &[f64], expected: usize) -> Result<()> {
    if x.len() != expected {
        return Err(Error::Schema(format!(
            "input has {} features, model expects {expected}",
            x.len()
        )));
    }
    Ok(())
}
