use serde::{Deserialize, Serialize};

use crate::data::Label;
use crate::error::{Error, Result};

/// Binary confusion counts with stress as the positive class.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConfusionMatrix {
    pub tp: usize,
    pub tn: usize,
    pub fp: usize,
    #[serde(rename = "fn")]
    pub fn_: usize,
}

impl ConfusionMatrix {
    pub fn new(tp: usize, fn_: usize, fp: usize, tn: usize) -> Self {
        ConfusionMatrix { tp, tn, fp, fn_ }
    }

    pub fn from_pairs(predicted: &[Label], truth: &[Label]) -> Result<Self> {
        if predicted.len() != truth.len() {
            return Err(Error::Schema(format!(
                "{} predictions but {} truth labels",
                predicted.len(),
                truth.len()
            )));
        }
        let mut cm = ConfusionMatrix::default();
        for (&p, &t) in predicted.iter().zip(truth) {
            match (t, p) {
                (Label::Stress, Label::Stress) => cm.tp += 1,
                (Label::Stress, Label::Neutral) => cm.fn_ += 1,
                (Label::Neutral, Label::Stress) => cm.fp += 1,
                (Label::Neutral, Label::Neutral) => cm.tn += 1,
            }
        }
        Ok(cm)
    }

    pub fn total(&self) -> usize {
        self.tp + self.tn + self.fp + self.fn_
    }

    pub fn positives(&self) -> usize {
        self.tp + self.fn_
    }

    pub fn negatives(&self) -> usize {
        self.fp + self.tn
    }

    pub fn accuracy(&self) -> Option<f64> {
        ratio(self.tp + self.tn, self.total())
    }

    pub fn precision(&self) -> Option<f64> {
        ratio(self.tp, self.tp + self.fp)
    }

    pub fn recall(&self) -> Option<f64> {
        ratio(self.tp, self.positives())
    }

    pub fn specificity(&self) -> Option<f64> {
        ratio(self.tn, self.negatives())
    }

    pub fn metrics(&self) -> Metrics {
        Metrics {
            accuracy: self.accuracy().unwrap_or(0.0),
            precision: self.precision(),
            recall: self.recall(),
        }
    }

    /// Row-normalized percentages: stress row `(TP, FN)`, neutral row `(FP, TN)`.
    pub fn percentages(&self) -> ConfusionPercentages {
        let row = |a: usize, b: usize| {
            let n = a + b;
            (n > 0).then(|| [100.0 * a as f64 / n as f64, 100.0 * b as f64 / n as f64])
        };
        ConfusionPercentages {
            stress: row(self.tp, self.fn_),
            neutral: row(self.fp, self.tn),
        }
    }
}

impl std::ops::Add for ConfusionMatrix {
    type Output = ConfusionMatrix;

    fn add(self, o: ConfusionMatrix) -> ConfusionMatrix {
        ConfusionMatrix {
            tp: self.tp + o.tp,
            tn: self.tn + o.tn,
            fp: self.fp + o.fp,
            fn_: self.fn_ + o.fn_,
        }
    }
}

fn ratio(num: usize, den: usize) -> Option<f64> {
    (den > 0).then(|| num as f64 / den as f64)
}

/// Accuracy, precision and recall. `None` marks an empty denominator.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Metrics {
    pub accuracy: f64,
    pub precision: Option<f64>,
    pub recall: Option<f64>,
}

pub fn evaluate(predicted: &[Label], truth: &[Label]) -> Result<(ConfusionMatrix, Metrics)> {
    if truth.is_empty() {
        return Err(Error::Schema("cannot evaluate an empty prediction sequence".into()));
    }
    let cm = ConfusionMatrix::from_pairs(predicted, truth)?;
    Ok((cm, cm.metrics()))
}

/// Row percentages; a row is `None` when that class has no truth samples.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConfusionPercentages {
    pub stress: Option<[f64; 2]>,
    pub neutral: Option<[f64; 2]>,
}

pub fn confusion_percentages(cm: &ConfusionMatrix) -> ConfusionPercentages {
    cm.percentages()
}

/// Mean of defined row percentages across participants.
pub fn mean_confusion_percentages(rows: &[ConfusionPercentages]) -> ConfusionPercentages {
    let mean = |pick: fn(&ConfusionPercentages) -> Option<[f64; 2]>| {
        let defined: Vec<[f64; 2]> = rows.iter().filter_map(pick).collect();
        (!defined.is_empty()).then(|| {
            let n = defined.len() as f64;
            [
                defined.iter().map(|r| r[0]).sum::<f64>() / n,
                defined.iter().map(|r| r[1]).sum::<f64>() / n,
            ]
        })
    };
    ConfusionPercentages {
        stress: mean(|r| r.stress),
        neutral: mean(|r| r.neutral),
    }
}

/// Mean and population standard deviation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Aggregate {
    pub mean: f64,
    pub std: f64,
    pub n: usize,
}

impl Aggregate {
    pub fn of(values: &[f64]) -> Option<Aggregate> {
        if values.is_empty() {
            return None;
        }
        let n = values.len() as f64;
        let mean = values.iter().sum::<f64>() / n;
        let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n;
        Some(Aggregate {
            mean,
            std: var.sqrt(),
            n: values.len(),
        })
    }

    /// `mean±std` at two decimals.
    pub fn display(&self) -> String {
        format!("{:.2}±{:.2}", self.mean, self.std)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CohortMetrics {
    pub accuracy: Aggregate,
    /// Over participants with a defined value.
    pub precision: Option<Aggregate>,
    pub recall: Option<Aggregate>,
}

pub fn aggregate_cohort(per_participant: &[Metrics]) -> Result<CohortMetrics> {
    let acc: Vec<f64> = per_participant.iter().map(|m| m.accuracy).collect();
    let accuracy = Aggregate::of(&acc).ok_or_else(|| Error::Config("cohort aggregate needs at least one participant".into()))?;
    let prec: Vec<f64> = per_participant.iter().filter_map(|m| m.precision).collect();
    let rec: Vec<f64> = per_participant.iter().filter_map(|m| m.recall).collect();
    Ok(CohortMetrics {
        accuracy,
        precision: Aggregate::of(&prec),
        recall: Aggregate::of(&rec),
    })
}
