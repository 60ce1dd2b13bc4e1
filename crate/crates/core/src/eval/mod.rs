//! Leave-one-out evaluation and its summary tables.

mod loo;
mod matrix;

use alloc::collections::BTreeSet;
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::corpus::{AgeGroup, Gender, Kind, UtteranceRecord};
use crate::taxonomy::TaxonomyError;

pub use loo::{loocv, plan_folds, run_fold, Example, Fold, FoldOutcome};
pub use matrix::{confusion, contrast, group_rates, ConfusionMatrix, ContrastMatrix, GroupRate, Grouping};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum EvalError {
    #[error(transparent)]
    Taxonomy(#[from] TaxonomyError),
    #[error("unit {unit:?} has {count} utterance(s) labelled {label:?}; at least 2 are needed")]
    UnitTooSmall { unit: String, label: String, count: usize },
    #[error("utterance id {0:?} appears more than once")]
    DuplicateId(String),
    #[error("utterance {id:?} has label {label:?}, which is outside the task label set")]
    UnknownLabel { id: String, label: String },
    #[error("matrices have different label sets")]
    LabelMismatch,
    #[error("no utterances remain after the protocol filter")]
    NothingToEvaluate,
    #[error("unknown {what} {token:?}")]
    UnknownToken { what: &'static str, token: String },
}

/// What a leave-one-out run iterates over.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Unit {
    /// Each speaker's utterances form a separate experiment.
    Speaker,
    /// The whole manifest is one experiment.
    Pooled,
}

impl Unit {
    pub fn as_str(self) -> &'static str {
        match self {
            Unit::Speaker => "speaker",
            Unit::Pooled => "pooled",
        }
    }
}

impl fmt::Display for Unit {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Unit {
    type Err = EvalError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "speaker" => Ok(Unit::Speaker),
            "pooled" => Ok(Unit::Pooled),
            _ => Err(EvalError::UnknownToken {
                what: "unit",
                token: s.into(),
            }),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Protocol {
    pub unit: Unit,
    pub exclude_kinds: Vec<Kind>,
}

impl Default for Protocol {
    fn default() -> Self {
        Self {
            unit: Unit::Speaker,
            exclude_kinds: Vec::new(),
        }
    }
}

impl Protocol {
    /// Per-speaker units without passages.
    pub fn without_passages() -> Self {
        Self {
            unit: Unit::Speaker,
            exclude_kinds: alloc::vec![Kind::Passage],
        }
    }

    pub fn admits(&self, r: &UtteranceRecord) -> bool {
        !self.exclude_kinds.contains(&r.kind)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PredictionEntry {
    pub id: String,
    pub true_label: String,
    pub predicted: String,
    pub speaker: String,
    pub gender: Gender,
    pub kind: Kind,
    pub age_group: AgeGroup,
}

impl PredictionEntry {
    pub fn new(r: &UtteranceRecord, predicted: impl Into<String>) -> Self {
        Self {
            id: r.id.clone(),
            true_label: r.label.clone(),
            predicted: predicted.into(),
            speaker: r.speaker.clone(),
            gender: r.gender,
            kind: r.kind,
            age_group: r.age_group,
        }
    }

    pub fn correct(&self) -> bool {
        self.true_label == self.predicted
    }
}

/// One prediction per evaluated utterance, over a fixed label set.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PredictionLog {
    labels: Vec<String>,
    entries: Vec<PredictionEntry>,
}

impl PredictionLog {
    pub fn new(labels: Vec<String>, entries: Vec<PredictionEntry>) -> Result<Self, EvalError> {
        let mut ids = BTreeSet::new();
        for e in &entries {
            if !ids.insert(e.id.as_str()) {
                return Err(EvalError::DuplicateId(e.id.clone()));
            }
            for l in [&e.true_label, &e.predicted] {
                if !labels.contains(l) {
                    return Err(EvalError::UnknownLabel {
                        id: e.id.clone(),
                        label: l.clone(),
                    });
                }
            }
        }
        Ok(Self { labels, entries })
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn entries(&self) -> &[PredictionEntry] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn accuracy(&self) -> f64 {
        if self.entries.is_empty() {
            return 0.0;
        }
        self.entries.iter().filter(|e| e.correct()).count() as f64 / self.entries.len() as f64
    }
}
