//! Soft-margin binary SVM with an RBF kernel.

mod grid;
mod smo;

use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

#[allow(unused_imports)]
use crate::prelude::*;

pub use grid::{grid_search, GridResult, GRID_C, GRID_FOLDS, GRID_GAMMA_SCALE};
pub use smo::{train_smo, SmoConfig, TrainReport, ALPHA_EPS};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum SvmError {
    #[error("no training points")]
    Empty,
    #[error("training labels contain a single class")]
    SingleClass,
    #[error("label {label} at point {index} is not +1 or -1")]
    InvalidLabel { index: usize, label: i8 },
    #[error("point {index} has dimension {found}, expected {expected}")]
    DimensionMismatch { index: usize, expected: usize, found: usize },
    #[error("point {index} has a non-finite coordinate")]
    NonFinite { index: usize },
    #[error("{0} must be positive and finite")]
    InvalidHyperparameter(&'static str),
    #[error("{points} points but {labels} labels")]
    LabelCount { points: usize, labels: usize },
}

/// `exp(-gamma * |x - z|^2)`.
pub fn rbf_kernel(x: &[f64], z: &[f64], gamma: f64) -> Result<f64, SvmError> {
    if x.len() != z.len() {
        return Err(SvmError::DimensionMismatch {
            index: 0,
            expected: x.len(),
            found: z.len(),
        });
    }
    Ok(rbf(x, z, gamma))
}

#[inline]
pub(crate) fn rbf(x: &[f64], z: &[f64], gamma: f64) -> f64 {
    let d2: f64 = x.iter().zip(z).map(|(a, b)| (a - b) * (a - b)).sum();
    (-gamma * d2).exp()
}

/// Labelled points plus the box constraint `C` and kernel width `gamma`.
#[derive(Debug, Clone, PartialEq)]
pub struct SvmProblem {
    points: Vec<Vec<f64>>,
    labels: Vec<i8>,
    c: f64,
    gamma: f64,
}

impl SvmProblem {
    pub fn new(points: Vec<Vec<f64>>, labels: Vec<i8>, c: f64, gamma: f64) -> Result<Self, SvmError> {
        if points.len() != labels.len() {
            return Err(SvmError::LabelCount {
                points: points.len(),
                labels: labels.len(),
            });
        }
        let dim = points.first().ok_or(SvmError::Empty)?.len();
        for (index, (p, &y)) in points.iter().zip(&labels).enumerate() {
            if y != 1 && y != -1 {
                return Err(SvmError::InvalidLabel { index, label: y });
            }
            if p.len() != dim {
                return Err(SvmError::DimensionMismatch {
                    index,
                    expected: dim,
                    found: p.len(),
                });
            }
            if p.iter().any(|v| !v.is_finite()) {
                return Err(SvmError::NonFinite { index });
            }
        }
        if !labels.contains(&1) || !labels.contains(&-1) {
            return Err(SvmError::SingleClass);
        }
        if !(c > 0.0 && c.is_finite()) {
            return Err(SvmError::InvalidHyperparameter("C"));
        }
        if !(gamma > 0.0 && gamma.is_finite()) {
            return Err(SvmError::InvalidHyperparameter("gamma"));
        }
        Ok(Self {
            points,
            labels,
            c,
            gamma,
        })
    }

    pub fn points(&self) -> &[Vec<f64>] {
        &self.points
    }

    pub fn labels(&self) -> &[i8] {
        &self.labels
    }

    pub fn c(&self) -> f64 {
        self.c
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    pub fn dim(&self) -> usize {
        self.points[0].len()
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn with_hyperparameters(&self, c: f64, gamma: f64) -> Result<Self, SvmError> {
        Self::new(self.points.clone(), self.labels.clone(), c, gamma)
    }
}

/// Kernel expansion `f(x) = sum coef_i K(x, sv_i) + bias`, with
/// `coef_i = alpha_i * y_i`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SvmModel {
    pub support_vectors: Vec<Vec<f64>>,
    pub coefficients: Vec<f64>,
    pub bias: f64,
    pub gamma: f64,
}

impl SvmModel {
    pub fn dim(&self) -> usize {
        self.support_vectors.first().map_or(0, Vec::len)
    }

    pub fn decision_value(&self, x: &[f64]) -> Result<f64, SvmError> {
        if x.len() != self.dim() {
            return Err(SvmError::DimensionMismatch {
                index: 0,
                expected: self.dim(),
                found: x.len(),
            });
        }
        Ok(self
            .support_vectors
            .iter()
            .zip(&self.coefficients)
            .map(|(sv, &w)| w * rbf(x, sv, self.gamma))
            .sum::<f64>()
            + self.bias)
    }

    /// Sign of the decision value; exactly zero gives +1.
    pub fn predict(&self, x: &[f64]) -> Result<i8, SvmError> {
        self.decision_value(x).map(sign)
    }
}

/// `+1` for non-negative values, `-1` otherwise.
pub fn sign(v: f64) -> i8 {
    if v >= 0.0 {
        1
    } else {
        -1
    }
}

/// Hyperparameter policy for one training problem.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SvmParams {
    pub c: f64,
    /// Absolute kernel width; `None` means `1 / d`.
    pub gamma: Option<f64>,
    /// Choose `C` and `gamma` by an inner cross-validated grid instead.
    pub grid: bool,
    pub smo: SmoConfig,
}

impl Default for SvmParams {
    fn default() -> Self {
        Self {
            c: 10.0,
            gamma: None,
            grid: false,
            smo: SmoConfig::default(),
        }
    }
}

impl SvmParams {
    pub fn gamma_for(&self, dim: usize) -> f64 {
        self.gamma.unwrap_or(1.0 / dim.max(1) as f64)
    }
}

/// Trains on `points`/`labels` with the hyperparameters `params` resolves to.
pub fn fit(points: Vec<Vec<f64>>, labels: Vec<i8>, params: &SvmParams) -> Result<(SvmModel, TrainReport), SvmError> {
    let dim = points.first().map_or(0, Vec::len);
    let probe = SvmProblem::new(points, labels, params.c, params.gamma_for(dim))?;
    let problem = if params.grid {
        let best = grid_search(&probe, &params.smo)?;
        probe.with_hyperparameters(best.c, best.gamma)?
    } else {
        probe
    };
    Ok(train_smo(&problem, &params.smo))
}
