//! Trained classifiers and their JSON model file.

use std::fmt;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::data::{FeatureVector, Label, Modality};
use crate::error::{Error, Result};
use crate::learning::grid::GridSearch;
use crate::learning::{ScalerParams, SplitSpec, StumpEnsemble, SvmModel};

pub const MODEL_FORMAT: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ClassifierKind {
    Adaboost,
    SvmLinear,
    SvmRbf,
}

impl ClassifierKind {
    pub const ALL: [ClassifierKind; 3] = [ClassifierKind::Adaboost, ClassifierKind::SvmLinear, ClassifierKind::SvmRbf];

    pub fn as_str(self) -> &'static str {
        match self {
            ClassifierKind::Adaboost => "adaboost",
            ClassifierKind::SvmLinear => "svm_linear",
            ClassifierKind::SvmRbf => "svm_rbf",
        }
    }
}

impl fmt::Display for ClassifierKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ClassifierKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        ClassifierKind::ALL
            .into_iter()
            .find(|k| k.as_str() == s)
            .ok_or_else(|| Error::Config(format!("unknown classifier {s:?} (adaboost, svm_linear, svm_rbf)")))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Classifier {
    Adaboost {
        ensemble: StumpEnsemble,
    },
    SvmLinear {
        model: SvmModel,
    },
    SvmRbf {
        model: SvmModel,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        grid: Option<GridSearch>,
    },
}

impl Classifier {
    pub fn kind(&self) -> ClassifierKind {
        match self {
            Classifier::Adaboost { .. } => ClassifierKind::Adaboost,
            Classifier::SvmLinear { .. } => ClassifierKind::SvmLinear,
            Classifier::SvmRbf { .. } => ClassifierKind::SvmRbf,
        }
    }

    /// Label and signed score for an already scaled row.
    pub fn predict(&self, x: &[f64]) -> Result<(Label, f64)> {
        match self {
            Classifier::Adaboost { ensemble } => ensemble.predict(x),
            Classifier::SvmLinear { model } | Classifier::SvmRbf { model, .. } => model.predict(x),
        }
    }

    pub fn ensemble(&self) -> Option<&StumpEnsemble> {
        match self {
            Classifier::Adaboost { ensemble } => Some(ensemble),
            _ => None,
        }
    }
}

/// Everything needed to classify raw feature vectors of one participant.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelFile {
    pub format: u32,
    pub participant_id: String,
    pub modality: Modality,
    pub split: SplitSpec,
    pub scaler: ScalerParams,
    pub classifier: Classifier,
}

impl ModelFile {
    pub fn new(participant_id: impl Into<String>, modality: Modality, split: SplitSpec, scaler: ScalerParams, classifier: Classifier) -> Self {
        ModelFile {
            format: MODEL_FORMAT,
            participant_id: participant_id.into(),
            modality,
            split,
            scaler,
            classifier,
        }
    }

    pub fn predict_vector(&self, v: &FeatureVector) -> Result<(Label, f64)> {
        let row = self.scaler.transform_row(&v.values[self.modality.feature_range()]);
        self.classifier.predict(&row)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let m: ModelFile = serde_json::from_str(text)?;
        if m.format != MODEL_FORMAT {
            return Err(Error::Schema(format!("unsupported model format {}", m.format)));
        }
        Ok(m)
    }

    pub fn read(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::input(path, e.to_string()))?;
        ModelFile::from_json(&text).map_err(|e| Error::input(path, e.to_string()))
    }
}

/// Serializes non-finite floats as the strings `"inf"`, `"-inf"`, `"nan"`.
pub(crate) mod extended_float {
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    #[derive(Serialize, Deserialize)]
    #[serde(untagged)]
    enum Repr {
        Num(f64),
        Text(String),
    }

    pub fn serialize<S: Serializer>(v: &f64, s: S) -> Result<S::Ok, S::Error> {
        if v.is_finite() {
            s.serialize_f64(*v)
        } else if v.is_nan() {
            s.serialize_str("nan")
        } else if *v > 0.0 {
            s.serialize_str("inf")
        } else {
            s.serialize_str("-inf")
        }
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
        match Repr::deserialize(d)? {
            Repr::Num(v) => Ok(v),
            Repr::Text(t) => match t.as_str() {
                "inf" => Ok(f64::INFINITY),
                "-inf" => Ok(f64::NEG_INFINITY),
                "nan" => Ok(f64::NAN),
                other => Err(serde::de::Error::custom(format!("invalid float {other:?}"))),
            },
        }
    }
}
