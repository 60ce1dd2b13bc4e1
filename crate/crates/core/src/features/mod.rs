//! Named acoustic feature vectors built from per-frame tracks.
//!
//! Every track contributes statistics of its minima, maxima, inter-extremum
//! durations and raw values. Groups that need external models (loudness,
//! voice source, GNE/PSP, harmonicity) only enter through a sidecar.

mod blocks;
mod extract;
mod registry;
mod scaler;
mod stats;
mod subset;

use alloc::string::String;
use alloc::sync::Arc;
use alloc::vec::Vec;

pub use blocks::{
    duration_feature_block, f0_feature_block, formant_feature_block, perturbation_block,
    track_feature_block, PQ_WINDOW,
};
pub use extract::{
    sidecar_groups, utterance_features, utterance_features_from, AcousticAnalysis, Sidecar,
};
pub(crate) use extract::append_sidecar;
pub use registry::{external_group_of, FeatureGroup, FeatureRegistry};
pub use scaler::{fit_rows, zscore_apply, zscore_fit, Scaler, MIN_STD};
pub use stats::{extrema_series, quantile, series_statistics, Extrema, STAT_NAMES};
pub use subset::{select_subset, select_subset_many, FeatureSubset, SHIPPED_SUBSETS};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum FeatureError {
    #[error("duplicate feature name {0:?}")]
    DuplicateFeature(String),
    #[error("feature {0:?} is not in the registry")]
    UnknownFeature(String),
    #[error("sidecar feature {0:?} is not an external feature")]
    UnknownSidecarFeature(String),
    #[error("sidecar feature {0:?} has a non-finite value")]
    NonFiniteSidecar(String),
    #[error("sidecar group {group} is incomplete: missing {missing:?}")]
    IncompleteSidecarGroup { group: &'static str, missing: String },
    #[error("feature vector has {values} values but its registry has {registry}")]
    LengthMismatch { values: usize, registry: usize },
    #[error("feature {0:?} is not finite")]
    NonFinite(String),
    #[error("feature vectors do not share a registry")]
    RegistryMismatch,
    #[error("no training vectors")]
    EmptyTrainSet,
}

/// Values paired with the registry that names them.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureVector {
    values: Vec<f64>,
    registry: Arc<FeatureRegistry>,
}

impl FeatureVector {
    pub fn new(values: Vec<f64>, registry: Arc<FeatureRegistry>) -> Result<Self, FeatureError> {
        if values.len() != registry.len() {
            return Err(FeatureError::LengthMismatch {
                values: values.len(),
                registry: registry.len(),
            });
        }
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(FeatureError::NonFinite(registry.entries()[i].0.clone()));
        }
        Ok(Self { values, registry })
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn registry(&self) -> &FeatureRegistry {
        &self.registry
    }

    pub fn registry_arc(&self) -> &Arc<FeatureRegistry> {
        &self.registry
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn get(&self, name: &str) -> Option<f64> {
        self.registry.index_of(name).map(|i| self.values[i])
    }
}
