use alloc::sync::Arc;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use super::{FeatureError, FeatureVector};
#[allow(unused_imports)]
use crate::prelude::*;

/// Dimensions whose spread falls below this are left unscaled.
pub const MIN_STD: f64 = 1e-12;

/// Per-dimension z-score parameters fitted on training vectors.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Scaler {
    pub mean: Vec<f64>,
    pub std: Vec<f64>,
    pub registry_fingerprint: u64,
}

impl Scaler {
    pub fn dim(&self) -> usize {
        self.mean.len()
    }

    /// Scales raw values without a registry check.
    pub fn apply_values(&self, x: &[f64]) -> Vec<f64> {
        x.iter()
            .zip(self.mean.iter().zip(&self.std))
            .map(|(v, (m, s))| (v - m) / s)
            .collect()
    }
}

pub fn zscore_fit(train: &[FeatureVector]) -> Result<Scaler, FeatureError> {
    let first = train.first().ok_or(FeatureError::EmptyTrainSet)?;
    if train.iter().any(|v| v.registry() != first.registry()) {
        return Err(FeatureError::RegistryMismatch);
    }
    let rows: Vec<&[f64]> = train.iter().map(FeatureVector::values).collect();
    fit_rows(&rows, first.registry().fingerprint())
}

/// Fits on raw rows that all follow the registry with `registry_fingerprint`.
pub fn fit_rows(rows: &[&[f64]], registry_fingerprint: u64) -> Result<Scaler, FeatureError> {
    let d = rows.first().ok_or(FeatureError::EmptyTrainSet)?.len();
    if rows.iter().any(|r| r.len() != d) {
        return Err(FeatureError::RegistryMismatch);
    }
    let n = rows.len() as f64;
    let mut mean = alloc::vec![0.0; d];
    for r in rows {
        for (m, x) in mean.iter_mut().zip(r.iter()) {
            *m += x;
        }
    }
    mean.iter_mut().for_each(|m| *m /= n);
    let mut var = alloc::vec![0.0; d];
    for r in rows {
        for ((s, x), m) in var.iter_mut().zip(r.iter()).zip(&mean) {
            *s += (x - m) * (x - m);
        }
    }
    let std = var
        .into_iter()
        .map(|s| {
            let sd = (s / n).sqrt();
            if sd < MIN_STD {
                1.0
            } else {
                sd
            }
        })
        .collect();
    Ok(Scaler {
        mean,
        std,
        registry_fingerprint,
    })
}

pub fn zscore_apply(s: &Scaler, v: &FeatureVector) -> Result<FeatureVector, FeatureError> {
    if v.registry().fingerprint() != s.registry_fingerprint || v.len() != s.dim() {
        return Err(FeatureError::RegistryMismatch);
    }
    FeatureVector::new(s.apply_values(v.values()), Arc::clone(v.registry_arc()))
}
