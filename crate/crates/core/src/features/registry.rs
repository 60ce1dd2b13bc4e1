use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use super::blocks::{
    DURATION_BLOCK_LEN, F0_BLOCK_LEN, FORMANT_BLOCK_LEN, PERTURBATION_BLOCK_LEN, TRACK_BLOCK_LEN,
};
use super::stats::STAT_NAMES;
use super::FeatureError;
use crate::fingerprint::Fnv64;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FeatureGroup {
    SegmentDuration,
    F0,
    Intensity,
    LowpassIntensity,
    HighpassIntensity,
    Mfcc,
    Formant,
    Duration,
    Perturbation,
    Loudness,
    VoiceSource,
    GnePsp,
    Harmonicity,
}

const SERIES: [&str; 4] = ["minima", "maxima", "extrema durations", "series"];

const VOICE_SOURCE_SYMBOLS: [&str; 7] = ["E_v", "gamma", "alpha", "beta", "OQ", "eps_v", "eps_s"];

const HARMONICITY: [&str; 14] = [
    "median of intrinsic diss. D_b",
    "range of intrinsic diss. D_i",
    "median of avg. diss.",
    "median of avg. diss. derivative",
    "median of cons. values at interval alpha1c",
    "median of highest cons. interval alpha1c",
    "median of cons. values at interval alpha2c",
    "median of second highest cons. interval alpha2c",
    "median of avg. cons. peak values",
    "median of diss. values at interval alpha1d",
    "median of highest diss. interval alpha1d",
    "median of diss. values at interval alpha2d",
    "median of second highest diss. interval alpha2d",
    "median of avg. diss. peak values",
];

const DURATION: [&str; DURATION_BLOCK_LEN] = [
    "mean dur. of aud. segs.",
    "max dur. of aud. segs.",
    "min dur. of aud. segs.",
    "std. of dur. of aud. segs.",
    "mean dur. of inaud. segs.",
    "max dur. of inaud. segs.",
    "min dur. of inaud. segs.",
    "std. of dur. of inaud. segs.",
    "no. of aud. segs.",
    "no. of inaud. segs.",
    "no. of aud. frames",
    "no. of inaud. frames",
    "longest aud. seg.",
    "longest inaud. seg.",
    "ratio no. of aud. to inaud. frames",
    "ratio no. of aud. to inaud. segs.",
    "ratio no. of aud. to total no. of frames",
    "ratio no. of aud. to total no. of segs.",
    "ratio no. of aud. frames to no. of aud. segs.",
    "ratio total duration of aud. segs. to total duration of inaud. segs.",
    "ratio duration of aud. segs. to total duration of utterance",
    "ratio duration of inaud. segs. to total duration of utterance",
    "ratio avg. duration of aud. segs. to avg. duration of inaud. segs.",
];

fn track_names(prefix: &str) -> Vec<String> {
    SERIES
        .iter()
        .flat_map(|s| STAT_NAMES.iter().map(move |stat| format!("{prefix} {s} {stat}")))
        .collect()
}

fn percentile_names(symbol: &str) -> [String; 4] {
    [
        format!("25 percentile of {symbol}"),
        format!("median of {symbol}"),
        format!("75 percentile of {symbol}"),
        format!("IQR of normalized delta {symbol}"),
    ]
}

impl FeatureGroup {
    /// Native groups of an utterance vector, in vector order.
    pub const NATIVE: [FeatureGroup; 8] = [
        FeatureGroup::F0,
        FeatureGroup::Intensity,
        FeatureGroup::LowpassIntensity,
        FeatureGroup::HighpassIntensity,
        FeatureGroup::Mfcc,
        FeatureGroup::Formant,
        FeatureGroup::Duration,
        FeatureGroup::Perturbation,
    ];

    /// Groups supplied only through a sidecar, in vector order.
    pub const EXTERNAL: [FeatureGroup; 4] = [
        FeatureGroup::Loudness,
        FeatureGroup::VoiceSource,
        FeatureGroup::GnePsp,
        FeatureGroup::Harmonicity,
    ];

    pub fn is_external(self) -> bool {
        Self::EXTERNAL.contains(&self)
    }

    pub fn as_str(self) -> &'static str {
        match self {
            FeatureGroup::SegmentDuration => "segment_duration",
            FeatureGroup::F0 => "f0",
            FeatureGroup::Intensity => "intensity",
            FeatureGroup::LowpassIntensity => "lowpass_intensity",
            FeatureGroup::HighpassIntensity => "highpass_intensity",
            FeatureGroup::Mfcc => "mfcc",
            FeatureGroup::Formant => "formant",
            FeatureGroup::Duration => "duration",
            FeatureGroup::Perturbation => "perturbation",
            FeatureGroup::Loudness => "loudness",
            FeatureGroup::VoiceSource => "voice_source",
            FeatureGroup::GnePsp => "gne_psp",
            FeatureGroup::Harmonicity => "harmonicity",
        }
    }

    /// Feature names of the group, in vector order.
    pub fn names(self) -> Vec<String> {
        match self {
            FeatureGroup::SegmentDuration => alloc::vec!["segment duration".to_string()],
            FeatureGroup::F0 => {
                let mut v = track_names("f0");
                v.extend(
                    [
                        "f0 series skewness",
                        "f0 fraction voiced above mean",
                        "f0 range above mean",
                        "f0 range below mean",
                    ]
                    .map(String::from),
                );
                v
            }
            FeatureGroup::Intensity => track_names("intensity"),
            FeatureGroup::LowpassIntensity => track_names("lp intensity"),
            FeatureGroup::HighpassIntensity => track_names("hp intensity"),
            FeatureGroup::Mfcc => track_names("mfcc"),
            FeatureGroup::Formant => ["mean", "std", "max", "min", "range"]
                .iter()
                .flat_map(|s| (1..=3).map(move |k| format!("{s} F{k}")))
                .collect(),
            FeatureGroup::Duration => DURATION.iter().map(|s| s.to_string()).collect(),
            FeatureGroup::Perturbation => [
                "jitter_PF",
                "max jitter_PQ",
                "min jitter_PQ",
                "shimmer_PF",
                "max shimmer_PQ",
                "min shimmer_PQ",
            ]
            .map(String::from)
            .to_vec(),
            FeatureGroup::Loudness => {
                let mut v: Vec<String> = [
                    "loudness mean",
                    "loudness 25 percentile",
                    "loudness 50 percentile",
                    "loudness 75 percentile",
                    "loudness 25 percentile RMS",
                    "loudness 50 percentile RMS",
                    "loudness 75 percentile RMS",
                ]
                .map(String::from)
                .to_vec();
                v.extend((1..=13).map(|b| format!("msl b{b}")));
                v
            }
            FeatureGroup::VoiceSource => VOICE_SOURCE_SYMBOLS
                .iter()
                .flat_map(|s| percentile_names(s))
                .collect(),
            FeatureGroup::GnePsp => ["GNE", "PSP"].iter().flat_map(|s| percentile_names(s)).collect(),
            FeatureGroup::Harmonicity => HARMONICITY.iter().map(|s| s.to_string()).collect(),
        }
    }

    pub fn len(self) -> usize {
        match self {
            FeatureGroup::SegmentDuration => 1,
            FeatureGroup::F0 => F0_BLOCK_LEN,
            FeatureGroup::Intensity
            | FeatureGroup::LowpassIntensity
            | FeatureGroup::HighpassIntensity
            | FeatureGroup::Mfcc => TRACK_BLOCK_LEN,
            FeatureGroup::Formant => FORMANT_BLOCK_LEN,
            FeatureGroup::Duration => DURATION_BLOCK_LEN,
            FeatureGroup::Perturbation => PERTURBATION_BLOCK_LEN,
            FeatureGroup::Loudness => 20,
            FeatureGroup::VoiceSource => 28,
            FeatureGroup::GnePsp => 8,
            FeatureGroup::Harmonicity => 14,
        }
    }
}

/// Ordered, uniquely named feature dimensions.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(try_from = "Vec<(String, FeatureGroup)>", into = "Vec<(String, FeatureGroup)>")]
pub struct FeatureRegistry {
    entries: Vec<(String, FeatureGroup)>,
    index: BTreeMap<String, usize>,
    fingerprint: u64,
}

impl PartialEq for FeatureRegistry {
    fn eq(&self, other: &Self) -> bool {
        self.fingerprint == other.fingerprint && self.entries == other.entries
    }
}

impl TryFrom<Vec<(String, FeatureGroup)>> for FeatureRegistry {
    type Error = FeatureError;

    fn try_from(entries: Vec<(String, FeatureGroup)>) -> Result<Self, FeatureError> {
        Self::from_entries(entries)
    }
}

impl From<FeatureRegistry> for Vec<(String, FeatureGroup)> {
    fn from(r: FeatureRegistry) -> Self {
        r.entries
    }
}

impl FeatureRegistry {
    pub fn from_entries(entries: Vec<(String, FeatureGroup)>) -> Result<Self, FeatureError> {
        let mut index = BTreeMap::new();
        let mut h = Fnv64::new();
        for (i, (name, group)) in entries.iter().enumerate() {
            if index.insert(name.clone(), i).is_some() {
                return Err(FeatureError::DuplicateFeature(name.clone()));
            }
            h.write_str(name);
            h.write_str(group.as_str());
        }
        Ok(Self {
            entries,
            index,
            fingerprint: h.finish(),
        })
    }

    fn from_groups(groups: impl IntoIterator<Item = FeatureGroup>) -> Self {
        let entries = groups
            .into_iter()
            .flat_map(|g| g.names().into_iter().map(move |n| (n, g)))
            .collect();
        Self::from_entries(entries).expect("built-in feature names are unique")
    }

    /// Utterance registry: the native groups then the given external groups.
    pub fn utterance(external: &[FeatureGroup]) -> Self {
        Self::from_groups(FeatureGroup::NATIVE.into_iter().chain(Self::ordered_external(external)))
    }

    /// Segment registry: segment duration, the native groups other than
    /// run durations, then the given external groups.
    pub fn segment(external: &[FeatureGroup]) -> Self {
        let native = FeatureGroup::NATIVE.into_iter().filter(|&g| g != FeatureGroup::Duration);
        Self::from_groups(
            core::iter::once(FeatureGroup::SegmentDuration)
                .chain(native)
                .chain(Self::ordered_external(external)),
        )
    }

    fn ordered_external(external: &[FeatureGroup]) -> impl Iterator<Item = FeatureGroup> + '_ {
        FeatureGroup::EXTERNAL.into_iter().filter(move |g| external.contains(g))
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn entries(&self) -> &[(String, FeatureGroup)] {
        &self.entries
    }

    pub fn names(&self) -> impl Iterator<Item = &str> {
        self.entries.iter().map(|(n, _)| n.as_str())
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.index.get(name).copied()
    }

    pub fn group_len(&self, group: FeatureGroup) -> usize {
        self.entries.iter().filter(|(_, g)| *g == group).count()
    }

    pub fn fingerprint(&self) -> u64 {
        self.fingerprint
    }
}

/// The external group a sidecar feature name belongs to.
pub fn external_group_of(name: &str) -> Option<FeatureGroup> {
    FeatureGroup::EXTERNAL
        .into_iter()
        .find(|g| g.names().iter().any(|n| n == name))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn native_utterance_registry() {
        let r = FeatureRegistry::utterance(&[]);
        assert_eq!(r.len(), 248);
        let sizes: Vec<usize> = FeatureGroup::NATIVE.iter().map(|&g| r.group_len(g)).collect();
        assert_eq!(sizes, [44, 40, 40, 40, 40, 15, 23, 6]);
    }

    #[test]
    fn full_registries() {
        assert_eq!(FeatureRegistry::utterance(&FeatureGroup::EXTERNAL).len(), 318);
        assert_eq!(FeatureRegistry::segment(&[]).len(), 226);
        assert_eq!(FeatureRegistry::segment(&FeatureGroup::EXTERNAL).len(), 296);
    }

    #[test]
    fn group_names_match_lengths() {
        for g in FeatureGroup::NATIVE.iter().chain(&FeatureGroup::EXTERNAL) {
            assert_eq!(g.names().len(), g.len(), "{}", g.as_str());
        }
    }

    #[test]
    fn external_order_is_canonical() {
        let a = FeatureRegistry::utterance(&[FeatureGroup::Harmonicity, FeatureGroup::Loudness]);
        let b = FeatureRegistry::utterance(&[FeatureGroup::Loudness, FeatureGroup::Harmonicity]);
        assert_eq!(a, b);
        assert_eq!(a.index_of("msl b1"), Some(248 + 7));
    }

    #[test]
    fn lookup_and_fingerprint() {
        let r = FeatureRegistry::utterance(&[]);
        assert_eq!(r.index_of("f0 minima mean"), Some(0));
        assert_eq!(r.index_of("mean F1"), Some(204));
        assert_eq!(r.index_of("jitter_PF"), Some(242));
        assert_eq!(r.index_of("msl b1"), None);
        assert_ne!(r.fingerprint(), FeatureRegistry::segment(&[]).fingerprint());
        assert_eq!(external_group_of("median of GNE"), Some(FeatureGroup::GnePsp));
        assert_eq!(external_group_of("mean F1"), None);
    }

    #[test]
    fn duplicate_names_rejected() {
        let e = alloc::vec![
            ("a".to_string(), FeatureGroup::F0),
            ("a".to_string(), FeatureGroup::Mfcc),
        ];
        assert!(matches!(FeatureRegistry::from_entries(e), Err(FeatureError::DuplicateFeature(_))));
    }
}
