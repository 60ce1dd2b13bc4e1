//! Multistage emotion categorization from speech.
//!
//! The classifier is a binary tree of taxons. Each internal taxon holds a
//! soft-margin RBF support vector machine that separates two disjoint sets
//! of emotion labels; an utterance is routed from the root down to a leaf by
//! the sign of each node's margin, so exactly one label comes out per
//! utterance.
//!
//! Everything in this crate is a pure function of in-memory data and builds
//! without `std`: waveform resampling, the DSP tracks (intensity, band
//! intensities, F0, MFCC, formants, audibility), the series-statistics
//! feature vectors, the three acoustic representations, the SMO solver, the
//! taxonomy tree and the leave-one-out evaluation arithmetic. File formats,
//! parallelism and the command line live in the `dichotomy` crate.

#![no_std]

extern crate alloc;

#[cfg(test)]
extern crate std;

pub mod corpus;
pub mod dsp;
pub mod eval;
pub mod features;
pub mod fingerprint;
pub mod representation;
pub mod svm;
pub mod taxonomy;

// `core` carries unstable inherent f64 math that makes rustc flag the trait
// import as unused even though the build needs it; hence the `allow`s at use sites.
mod prelude {
    #[allow(unused_imports)]
    pub(crate) use num_traits::Float;
}

pub use eval::{ConfusionMatrix, ContrastMatrix, PredictionLog, Protocol};
pub use corpus::{AgeGroup, CorpusManifest, Gender, Kind, UtteranceRecord, Waveform};
pub use features::{FeatureRegistry, FeatureSubset, FeatureVector, Scaler};
pub use representation::{Mode, Representation, SegmentSet};
pub use svm::{SvmModel, SvmProblem};
pub use taxonomy::{TaxonomyTree, TrainConfig};

/// Sample rate every waveform is converted to before analysis.
pub const PIPELINE_RATE: u32 = 16_000;
