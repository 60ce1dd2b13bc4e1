use alloc::collections::BTreeSet;
use alloc::string::{String, ToString};
use alloc::sync::Arc;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use super::registry::FeatureRegistry;
use super::{FeatureError, FeatureVector};

const UNIVERSAL_UTTERANCE: &str = include_str!("../../subsets/universal-utterance.txt");
const UNIVERSAL_SEGMENT: &str = include_str!("../../subsets/universal-segment.txt");

/// Names of the subset lists bundled with the crate.
pub const SHIPPED_SUBSETS: [&str; 2] = ["universal-utterance", "universal-segment"];

/// A named, ordered selection of feature names.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FeatureSubset {
    name: String,
    feature_names: Vec<String>,
}

impl FeatureSubset {
    pub fn new(name: impl Into<String>, feature_names: Vec<String>) -> Result<Self, FeatureError> {
        let mut seen = BTreeSet::new();
        for n in &feature_names {
            if !seen.insert(n.as_str()) {
                return Err(FeatureError::DuplicateFeature(n.clone()));
            }
        }
        Ok(Self {
            name: name.into(),
            feature_names,
        })
    }

    /// One feature name per line; blank lines and `#` comments are ignored.
    pub fn parse(name: impl Into<String>, text: &str) -> Result<Self, FeatureError> {
        let names = text
            .lines()
            .map(|l| l.split('#').next().unwrap_or("").trim())
            .filter(|l| !l.is_empty())
            .map(ToString::to_string)
            .collect();
        Self::new(name, names)
    }

    /// A subset bundled with the crate, by name.
    pub fn shipped(name: &str) -> Option<Self> {
        let text = match name {
            "universal-utterance" => UNIVERSAL_UTTERANCE,
            "universal-segment" => UNIVERSAL_SEGMENT,
            _ => return None,
        };
        Some(Self::parse(name, text).expect("shipped subsets have unique names"))
    }

    /// Every feature of a registry, in registry order.
    pub fn all_of(registry: &FeatureRegistry) -> Self {
        Self {
            name: "all".to_string(),
            feature_names: registry.names().map(ToString::to_string).collect(),
        }
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn feature_names(&self) -> &[String] {
        &self.feature_names
    }

    pub fn len(&self) -> usize {
        self.feature_names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.feature_names.is_empty()
    }

    /// Source indices and the derived registry for `registry`.
    pub fn resolve(&self, registry: &FeatureRegistry) -> Result<(Vec<usize>, FeatureRegistry), FeatureError> {
        let mut idx = Vec::with_capacity(self.len());
        let mut entries = Vec::with_capacity(self.len());
        for n in &self.feature_names {
            let i = registry.index_of(n).ok_or_else(|| FeatureError::UnknownFeature(n.clone()))?;
            idx.push(i);
            entries.push(registry.entries()[i].clone());
        }
        Ok((idx, FeatureRegistry::from_entries(entries)?))
    }
}

/// Projects `v` onto the subset's names, in subset order.
pub fn select_subset(v: &FeatureVector, s: &FeatureSubset) -> Result<FeatureVector, FeatureError> {
    let (idx, registry) = s.resolve(v.registry())?;
    let values = idx.iter().map(|&i| v.values()[i]).collect();
    FeatureVector::new(values, Arc::new(registry))
}

/// Selects the same subset from many vectors sharing one registry.
pub fn select_subset_many(vs: &[FeatureVector], s: &FeatureSubset) -> Result<Vec<FeatureVector>, FeatureError> {
    let Some(first) = vs.first() else {
        return Ok(Vec::new());
    };
    let (idx, registry) = s.resolve(first.registry())?;
    let registry = Arc::new(registry);
    vs.iter()
        .map(|v| {
            if v.registry() != first.registry() {
                return Err(FeatureError::RegistryMismatch);
            }
            FeatureVector::new(idx.iter().map(|&i| v.values()[i]).collect(), registry.clone())
        })
        .collect()
}
