//! Soft-margin SVMs: a dual coordinate ascent solver for the linear kernel
//! and a two-variable SMO solver for arbitrary kernels.

mod linear;
mod smo;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

pub use linear::{train_linear_svm, train_linear_svm_with, LinearSvmParams};
pub use smo::{train_rbf_svm, train_smo, SmoParams, WorkingSet};

use crate::data::Label;
use crate::error::{Error, Result};
use crate::learning::check_dim;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum KernelKind {
    Linear,
    Rbf,
}

impl fmt::Display for KernelKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            KernelKind::Linear => "linear",
            KernelKind::Rbf => "rbf",
        })
    }
}

impl FromStr for KernelKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "linear" => Ok(KernelKind::Linear),
            "rbf" => Ok(KernelKind::Rbf),
            other => Err(Error::Config(format!("unknown kernel {other:?}"))),
        }
    }
}

/// Kernel and box constraint. `gamma` is ignored by the linear kernel.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KernelSpec {
    pub kind: KernelKind,
    pub c: f64,
    pub gamma: f64,
}

impl KernelSpec {
    pub fn linear(c: f64) -> Self {
        KernelSpec {
            kind: KernelKind::Linear,
            c,
            gamma: 0.0,
        }
    }

    pub fn rbf(c: f64, gamma: f64) -> Self {
        KernelSpec {
            kind: KernelKind::Rbf,
            c,
            gamma,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.c > 0.0 && self.c.is_finite()) {
            return Err(Error::Config(format!("C must be positive, got {}", self.c)));
        }
        if self.kind == KernelKind::Rbf && !(self.gamma > 0.0 && self.gamma.is_finite()) {
            return Err(Error::Config(format!("gamma must be positive, got {}", self.gamma)));
        }
        Ok(())
    }

    pub fn eval(&self, a: &[f64], b: &[f64]) -> f64 {
        match self.kind {
            KernelKind::Linear => dot(a, b),
            KernelKind::Rbf => {
                let d2: f64 = a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum();
                (-self.gamma * d2).exp()
            }
        }
    }
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Trained SVM: `f(x) = sum_i coef_i k(sv_i, x) + bias`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SvmModel {
    pub kernel: KernelSpec,
    pub support_vectors: Vec<Vec<f64>>,
    /// `alpha_i * y_i` per support vector.
    pub dual_coefficients: Vec<f64>,
    pub bias: f64,
    /// Explicit primal weights for linear models.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub weights: Option<Vec<f64>>,
    /// Dual objective `sum alpha - 1/2 alpha' Q alpha` at the solution.
    pub dual_objective: f64,
    pub iterations: usize,
}

impl SvmModel {
    /// A linear model given directly by its primal weights.
    pub fn from_weights(weights: Vec<f64>, bias: f64, c: f64) -> Self {
        SvmModel {
            kernel: KernelSpec::linear(c),
            support_vectors: Vec::new(),
            dual_coefficients: Vec::new(),
            bias,
            weights: Some(weights),
            dual_objective: 0.0,
            iterations: 0,
        }
    }

    pub fn n_features(&self) -> Option<usize> {
        self.weights
            .as_ref()
            .map(Vec::len)
            .or_else(|| self.support_vectors.first().map(Vec::len))
    }

    pub fn decision(&self, x: &[f64]) -> f64 {
        match &self.weights {
            Some(w) => dot(w, x) + self.bias,
            None => {
                self.support_vectors
                    .iter()
                    .zip(&self.dual_coefficients)
                    .map(|(sv, c)| c * self.kernel.eval(sv, x))
                    .sum::<f64>()
                    + self.bias
            }
        }
    }

    pub fn predict(&self, x: &[f64]) -> Result<(Label, f64)> {
        if let Some(d) = self.n_features() {
            check_dim(x, d)?;
        }
        let f = self.decision(x);
        Ok((Label::from_score(f), f))
    }
}
