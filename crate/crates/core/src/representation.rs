//! Utterance, segment and combination representations.
//!
//! Segments come from energy valleys inside audible runs: candidate splits
//! are local minima of a moving-average intensity, accepted deepest first
//! while both resulting pieces stay at or above the minimum segment length
//! and the valley is deep enough relative to its flanking peaks.
//! Pieces that are still too short are merged into a neighbour.

use alloc::string::String;
use alloc::sync::Arc;
use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::corpus::Waveform;
use crate::dsp::{audibility, intensity_track, AudibilitySegmentation, ScalarTrack};
use crate::features::{
    append_sidecar, sidecar_groups, utterance_features_from, AcousticAnalysis, FeatureError,
    FeatureRegistry, FeatureVector, Sidecar,
};
#[allow(unused_imports)]
use crate::prelude::*;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum RepresentationError {
    #[error(transparent)]
    Feature(#[from] FeatureError),
    #[error("segment [{t0}, {t1}) s excises no samples")]
    EmptyExcision { t0: f64, t1: f64 },
    #[error("invalid segment set: {0}")]
    InvalidSegments(String),
    #[error("{0} representation is missing a required part")]
    MissingPart(Mode),
    #[error("unknown representation mode {0:?}")]
    UnknownMode(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    Utterance,
    Segment,
    Combination,
}

impl Mode {
    pub const ALL: [Mode; 3] = [Mode::Utterance, Mode::Segment, Mode::Combination];

    pub fn as_str(self) -> &'static str {
        match self {
            Mode::Utterance => "utterance",
            Mode::Segment => "segment",
            Mode::Combination => "combination",
        }
    }

    pub fn needs_utterance(self) -> bool {
        self != Mode::Segment
    }

    pub fn needs_segments(self) -> bool {
        self != Mode::Utterance
    }
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Mode {
    type Err = RepresentationError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Mode::ALL
            .into_iter()
            .find(|m| m.as_str() == s)
            .ok_or_else(|| RepresentationError::UnknownMode(s.into()))
    }
}

/// Segmentation parameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SegmentationConfig {
    /// Width of the centred moving average applied to intensity.
    pub smoothing_frames: usize,
    pub min_segment_s: f64,
    /// How far a valley must sit below the lower of its flanking peaks.
    pub min_valley_depth_db: f64,
}

impl Default for SegmentationConfig {
    fn default() -> Self {
        Self {
            smoothing_frames: 5,
            min_segment_s: 0.2,
            min_valley_depth_db: 3.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Segment {
    pub t0: f64,
    pub t1: f64,
    pub vector: FeatureVector,
}

/// Time-ordered, non-overlapping segment vectors sharing one registry.
#[derive(Debug, Clone, PartialEq)]
pub struct SegmentSet {
    segments: Vec<Segment>,
}

impl SegmentSet {
    pub fn new(segments: Vec<Segment>) -> Result<Self, RepresentationError> {
        let bad = |m: &str| Err(RepresentationError::InvalidSegments(m.into()));
        for (i, s) in segments.iter().enumerate() {
            if !(s.t0 < s.t1) {
                return bad("segment with t0 >= t1");
            }
            if i > 0 {
                let prev = &segments[i - 1];
                if s.t0 < prev.t1 {
                    return bad("overlapping or unordered segments");
                }
                if s.vector.registry() != prev.vector.registry() {
                    return bad("segments with different registries");
                }
            }
        }
        Ok(Self { segments })
    }

    pub fn segments(&self) -> &[Segment] {
        &self.segments
    }

    pub fn len(&self) -> usize {
        self.segments.len()
    }

    pub fn is_empty(&self) -> bool {
        self.segments.is_empty()
    }

    pub fn vectors(&self) -> impl Iterator<Item = &FeatureVector> {
        self.segments.iter().map(|s| &s.vector)
    }
}

/// One utterance in a given mode.
#[derive(Debug, Clone, PartialEq)]
pub struct Representation {
    mode: Mode,
    utterance_vector: Option<FeatureVector>,
    segment_set: Option<SegmentSet>,
}

impl Representation {
    pub fn new(
        mode: Mode,
        utterance_vector: Option<FeatureVector>,
        segment_set: Option<SegmentSet>,
    ) -> Result<Self, RepresentationError> {
        let has_segments = segment_set.as_ref().is_some_and(|s| !s.is_empty());
        if (mode.needs_utterance() && utterance_vector.is_none()) || (mode.needs_segments() && !has_segments) {
            return Err(RepresentationError::MissingPart(mode));
        }
        Ok(Self {
            mode,
            utterance_vector: if mode.needs_utterance() { utterance_vector } else { None },
            segment_set: if mode.needs_segments() { segment_set } else { None },
        })
    }

    pub fn mode(&self) -> Mode {
        self.mode
    }

    pub fn utterance_vector(&self) -> Option<&FeatureVector> {
        self.utterance_vector.as_ref()
    }

    pub fn segment_set(&self) -> Option<&SegmentSet> {
        self.segment_set.as_ref()
    }

    /// The same utterance viewed in a mode whose parts this one carries.
    pub fn restrict(&self, mode: Mode) -> Result<Self, RepresentationError> {
        Self::new(mode, self.utterance_vector.clone(), self.segment_set.clone())
    }
}

fn moving_average(x: &[f64], width: usize) -> Vec<f64> {
    let half = width / 2;
    (0..x.len())
        .map(|i| {
            let lo = i.saturating_sub(half);
            let hi = (i + half + 1).min(x.len());
            x[lo..hi].iter().sum::<f64>() / (hi - lo) as f64
        })
        .collect()
}

/// Frame ranges `[a, b)` of the segments of one utterance.
pub fn segment_frames(
    intensity: &ScalarTrack,
    seg: &AudibilitySegmentation,
    cfg: &SegmentationConfig,
) -> Vec<(usize, usize)> {
    let n = intensity.len();
    let min_frames = ((cfg.min_segment_s / intensity.hop_s).round() as usize).max(1);
    let smooth = moving_average(&intensity.values, cfg.smoothing_frames.max(1));

    let mut pieces: Vec<(usize, usize)> = Vec::new();
    for run in seg.audible_runs() {
        let (a, b) = (run.start, run.end.min(n));
        let mut valleys: Vec<usize> = (a + 1..b.saturating_sub(1))
            .filter(|&i| smooth[i - 1] > smooth[i] && smooth[i] <= smooth[i + 1])
            .collect();
        valleys.sort_by(|&i, &j| smooth[i].total_cmp(&smooth[j]).then(i.cmp(&j)));
        let mut cuts: Vec<usize> = alloc::vec![a, b];
        for v in valleys {
            let pos = cuts.partition_point(|&c| c < v);
            let (lo, hi) = (cuts[pos - 1], cuts[pos]);
            let peak = |r: &[f64]| r.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            let depth = peak(&smooth[lo..v]).min(peak(&smooth[v..hi])) - smooth[v];
            if v - lo >= min_frames && hi - v >= min_frames && depth >= cfg.min_valley_depth_db {
                cuts.insert(pos, v);
            }
        }
        pieces.extend(cuts.windows(2).map(|w| (w[0], w[1])));
    }
    if pieces.is_empty() {
        return alloc::vec![(0, n.max(1))];
    }

    // A short piece joins the piece before it, or the next one when first.
    let mut merged: Vec<(usize, usize)> = Vec::with_capacity(pieces.len());
    let mut pending: Option<usize> = None;
    let last_end = pieces[pieces.len() - 1].1;
    for (mut a, b) in pieces {
        if let Some(p) = pending.take() {
            a = p;
        }
        if b - a < min_frames {
            match merged.last_mut() {
                Some(prev) => prev.1 = b,
                None => pending = Some(a),
            }
        } else {
            merged.push((a, b));
        }
    }
    // Only reachable when every piece was short.
    if let Some(p) = pending {
        merged.push((p, last_end));
    }
    merged
}

/// Segment times in seconds. A segment reaching the last frame ends at
/// `duration_s`.
pub fn segment_bounds(
    intensity: &ScalarTrack,
    seg: &AudibilitySegmentation,
    duration_s: f64,
    cfg: &SegmentationConfig,
) -> Vec<(f64, f64)> {
    let n = intensity.len();
    segment_frames(intensity, seg, cfg)
        .into_iter()
        .map(|(a, b)| {
            let t0 = a as f64 * intensity.hop_s;
            let t1 = if b >= n { duration_s } else { (b as f64 * intensity.hop_s).min(duration_s) };
            (t0, t1.max(t0))
        })
        .collect()
}

fn excise(w: &Waveform, t0: f64, t1: f64) -> Result<Waveform, RepresentationError> {
    let rate = f64::from(w.rate());
    let a = (t0 * rate).round() as usize;
    let b = ((t1 * rate).round() as usize).min(w.len());
    w.excise(a, b).ok_or(RepresentationError::EmptyExcision { t0, t1 })
}

fn segment_vector(
    w: &Waveform,
    (t0, t1): (f64, f64),
    sidecar: Option<&Sidecar>,
    registry: &Arc<FeatureRegistry>,
) -> Result<FeatureVector, RepresentationError> {
    let part = excise(w, t0, t1)?;
    let mut values = alloc::vec![t1 - t0];
    values.extend(AcousticAnalysis::of(&part).native_values(false));
    if let Some(s) = sidecar {
        append_sidecar(&mut values, &sidecar_groups(s)?, s);
    }
    Ok(FeatureVector::new(values, Arc::clone(registry))?)
}

fn segment_registry(sidecar: Option<&Sidecar>) -> Result<Arc<FeatureRegistry>, RepresentationError> {
    let groups = match sidecar {
        Some(s) => sidecar_groups(s)?,
        None => Vec::new(),
    };
    Ok(Arc::new(FeatureRegistry::segment(&groups)))
}

/// Segment duration followed by every feature except the run-duration
/// group, computed on the excised segment. Utterance-level sidecar values
/// are reused for each segment.
pub fn segment_features(
    w: &Waveform,
    bounds: (f64, f64),
    sidecar: Option<&Sidecar>,
) -> Result<FeatureVector, RepresentationError> {
    segment_vector(w, bounds, sidecar, &segment_registry(sidecar)?)
}

pub fn build_representation(
    w: &Waveform,
    mode: Mode,
    sidecar: Option<&Sidecar>,
) -> Result<Representation, RepresentationError> {
    build_representation_with(w, mode, sidecar, &SegmentationConfig::default())
}

pub fn build_representation_with(
    w: &Waveform,
    mode: Mode,
    sidecar: Option<&Sidecar>,
    cfg: &SegmentationConfig,
) -> Result<Representation, RepresentationError> {
    let (utterance, intensity, seg) = if mode.needs_utterance() {
        let a = AcousticAnalysis::of(w);
        let v = utterance_features_from(&a, sidecar)?;
        (Some(v), a.intensity, a.audibility)
    } else {
        let intensity = intensity_track(w);
        let seg = audibility(&intensity);
        (None, intensity, seg)
    };
    let segments = if mode.needs_segments() {
        let registry = segment_registry(sidecar)?;
        let segments = segment_bounds(&intensity, &seg, w.duration_s(), cfg)
            .into_iter()
            .map(|b| {
                Ok(Segment {
                    t0: b.0,
                    t1: b.1,
                    vector: segment_vector(w, b, sidecar, &registry)?,
                })
            })
            .collect::<Result<Vec<_>, RepresentationError>>()?;
        Some(SegmentSet::new(segments)?)
    } else {
        None
    };
    Representation::new(mode, utterance, segments)
}
