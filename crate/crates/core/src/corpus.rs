//! Corpus records, manifests and the in-memory waveform.

use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;

use serde::{Deserialize, Serialize};
#[allow(unused_imports)]
use crate::prelude::*;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum CorpusError {
    #[error("waveform has no samples")]
    EmptyWaveform,
    #[error("sample rate must be positive")]
    ZeroRate,
    #[error("sample {index} is not finite")]
    NonFiniteSample { index: usize },
    #[error("sample {index} = {value} is outside [-1, 1]")]
    SampleOutOfRange { index: usize, value: f64 },
    #[error("record {row}: empty id")]
    EmptyId { row: usize },
    #[error("record {row}: duplicate id {id:?}")]
    DuplicateId { row: usize, id: String },
    #[error("record {row}: label {label:?} is not in the declared label set")]
    UnknownLabel { row: usize, label: String },
    #[error("label set needs at least two distinct labels, got {0}")]
    TooFewLabels(usize),
    #[error("label set declares {0:?} more than once")]
    DuplicateLabel(String),
    #[error("unknown {field} token {token:?}")]
    UnknownToken { field: &'static str, token: String },
}

/// Rate every waveform is brought to before analysis.
pub const PIPELINE_RATE: u32 = 16_000;

/// Mono audio in `[-1, 1]` with its sample rate.
#[derive(Debug, Clone, PartialEq)]
pub struct Waveform {
    samples: Vec<f64>,
    rate: u32,
}

impl Waveform {
    pub fn new(samples: Vec<f64>, rate: u32) -> Result<Self, CorpusError> {
        if rate == 0 {
            return Err(CorpusError::ZeroRate);
        }
        if samples.is_empty() {
            return Err(CorpusError::EmptyWaveform);
        }
        for (index, &value) in samples.iter().enumerate() {
            if !value.is_finite() {
                return Err(CorpusError::NonFiniteSample { index });
            }
            if !(-1.0..=1.0).contains(&value) {
                return Err(CorpusError::SampleOutOfRange { index, value });
            }
        }
        Ok(Self { samples, rate })
    }

    pub fn samples(&self) -> &[f64] {
        &self.samples
    }

    pub fn rate(&self) -> u32 {
        self.rate
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn duration_s(&self) -> f64 {
        self.samples.len() as f64 / f64::from(self.rate)
    }

    /// Samples in `[start, end)`, clamped to the waveform. `None` when the
    /// clamped range is empty.
    pub fn excise(&self, start: usize, end: usize) -> Option<Waveform> {
        let end = end.min(self.samples.len());
        if start >= end {
            return None;
        }
        Some(Waveform {
            samples: self.samples[start..end].to_vec(),
            rate: self.rate,
        })
    }

    /// Linear-interpolation resampling to `target_rate`.
    ///
    /// Output sample `i` sits at source position `i * rate / target_rate`.
    /// Positions past the last source sample extend the final segment
    /// linearly, so straight lines are reproduced exactly; values are then
    /// clamped back into `[-1, 1]`.
    pub fn resample(&self, target_rate: u32) -> Result<Waveform, CorpusError> {
        if target_rate == 0 {
            return Err(CorpusError::ZeroRate);
        }
        if target_rate == self.rate {
            return Ok(self.clone());
        }
        let n_in = self.samples.len();
        let ratio = f64::from(self.rate) / f64::from(target_rate);
        let n_out = ((n_in as f64) / ratio).round().max(1.0) as usize;
        let x = &self.samples;
        let out = (0..n_out)
            .map(|i| {
                let pos = i as f64 * ratio;
                let v = if n_in == 1 {
                    x[0]
                } else {
                    let k = (pos.floor() as usize).min(n_in - 2);
                    let frac = pos - k as f64;
                    x[k] + (x[k + 1] - x[k]) * frac
                };
                v.clamp(-1.0, 1.0)
            })
            .collect();
        Ok(Waveform {
            samples: out,
            rate: target_rate,
        })
    }

    /// Element-wise scaling, clamped into range.
    pub fn scaled(&self, gain: f64) -> Waveform {
        Waveform {
            samples: self.samples.iter().map(|&s| (s * gain).clamp(-1.0, 1.0)).collect(),
            rate: self.rate,
        }
    }
}

macro_rules! token_enum {
    ($name:ident, $field:literal, { $($variant:ident => $token:literal),+ $(,)? }) => {
        #[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
        #[serde(rename_all = "snake_case")]
        pub enum $name {
            $($variant),+
        }

        impl $name {
            pub const ALL: &'static [$name] = &[$($name::$variant),+];

            pub fn as_str(self) -> &'static str {
                match self {
                    $($name::$variant => $token),+
                }
            }
        }

        impl FromStr for $name {
            type Err = CorpusError;

            fn from_str(s: &str) -> Result<Self, Self::Err> {
                match s.trim() {
                    $($token => Ok($name::$variant),)+
                    other => Err(CorpusError::UnknownToken {
                        field: $field,
                        token: other.to_string(),
                    }),
                }
            }
        }

        impl fmt::Display for $name {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str(self.as_str())
            }
        }
    };
}

token_enum!(Gender, "gender", { Male => "male", Female => "female", Unknown => "unknown" });
token_enum!(AgeGroup, "age_group", { Young => "young", Old => "old", Unknown => "unknown" });
token_enum!(Kind, "kind", {
    Word => "word",
    ShortSentence => "short_sentence",
    LongSentence => "long_sentence",
    Passage => "passage",
});

/// One labelled utterance in a corpus.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UtteranceRecord {
    pub id: String,
    pub audio_path: String,
    pub speaker: String,
    pub gender: Gender,
    pub age_group: AgeGroup,
    pub label: String,
    pub kind: Kind,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorpusManifest {
    records: Vec<UtteranceRecord>,
    label_set: Vec<String>,
}

impl CorpusManifest {
    /// Validates ids and labels. Without a declared label set, labels are
    /// collected in order of first appearance.
    pub fn new(
        records: Vec<UtteranceRecord>,
        declared_labels: Option<Vec<String>>,
    ) -> Result<Self, CorpusError> {
        let label_set = match declared_labels {
            Some(labels) => {
                for (i, l) in labels.iter().enumerate() {
                    if labels[..i].contains(l) {
                        return Err(CorpusError::DuplicateLabel(l.clone()));
                    }
                }
                labels
            }
            None => {
                let mut seen: Vec<String> = Vec::new();
                for r in &records {
                    if !seen.contains(&r.label) {
                        seen.push(r.label.clone());
                    }
                }
                seen
            }
        };
        if label_set.len() < 2 {
            return Err(CorpusError::TooFewLabels(label_set.len()));
        }
        let mut ids: alloc::collections::BTreeSet<&str> = alloc::collections::BTreeSet::new();
        for (row, r) in records.iter().enumerate() {
            if r.id.is_empty() {
                return Err(CorpusError::EmptyId { row });
            }
            if !ids.insert(r.id.as_str()) {
                return Err(CorpusError::DuplicateId {
                    row,
                    id: r.id.clone(),
                });
            }
            if !label_set.contains(&r.label) {
                return Err(CorpusError::UnknownLabel {
                    row,
                    label: r.label.clone(),
                });
            }
        }
        Ok(Self { records, label_set })
    }

    pub fn records(&self) -> &[UtteranceRecord] {
        &self.records
    }

    pub fn label_set(&self) -> &[String] {
        &self.label_set
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    fn record(id: &str, label: &str) -> UtteranceRecord {
        UtteranceRecord {
            id: id.into(),
            audio_path: "a.wav".into(),
            speaker: "s".into(),
            gender: Gender::Unknown,
            age_group: AgeGroup::Unknown,
            label: label.into(),
            kind: Kind::Word,
        }
    }

    #[test]
    fn waveform_rejects_bad_samples() {
        assert_eq!(Waveform::new(vec![], 16000), Err(CorpusError::EmptyWaveform));
        assert_eq!(Waveform::new(vec![0.0], 0), Err(CorpusError::ZeroRate));
        assert!(matches!(
            Waveform::new(vec![0.0, f64::NAN], 16000),
            Err(CorpusError::NonFiniteSample { index: 1 })
        ));
        assert!(matches!(
            Waveform::new(vec![1.5], 16000),
            Err(CorpusError::SampleOutOfRange { index: 0, .. })
        ));
    }

    #[test]
    fn resample_identity_returns_input() {
        let w = Waveform::new(vec![0.1, -0.2, 0.3], 16000).unwrap();
        assert_eq!(w.resample(16000).unwrap(), w);
    }

    #[test]
    fn resample_constant_stays_constant() {
        let w = Waveform::new(vec![0.25; 441], 44100).unwrap();
        let r = w.resample(16000).unwrap();
        assert_eq!(r.len(), 160);
        assert!(r.samples().iter().all(|&s| (s - 0.25).abs() < 1e-15));
        let up = Waveform::new(vec![0.25; 80], 8000).unwrap().resample(16000).unwrap();
        assert_eq!(up.len(), 160);
        assert!(up.samples().iter().all(|&s| (s - 0.25).abs() < 1e-15));
    }

    #[test]
    fn resample_ramp_matches_line() {
        // Ramp 0..1 over one second at 8 kHz; value at time t is t.
        let src: Vec<f64> = (0..8000).map(|n| n as f64 / 8000.0).collect();
        let w = Waveform::new(src, 8000).unwrap();
        let r = w.resample(16000).unwrap();
        assert_eq!(r.len(), 16000);
        let max_err = r
            .samples()
            .iter()
            .enumerate()
            .map(|(i, &v)| (v - i as f64 / 16000.0).abs())
            .fold(0.0, f64::max);
        assert!(max_err < 1e-6, "max error {max_err}");
    }

    #[test]
    fn resample_is_idempotent_at_own_rate() {
        let w = Waveform::new((0..1000).map(|i| ((i as f64) * 0.01).sin() * 0.5).collect(), 22050)
            .unwrap();
        let once = w.resample(16000).unwrap();
        assert_eq!(once.resample(16000).unwrap(), once);
    }

    #[test]
    fn manifest_label_set_from_first_appearance() {
        let m = CorpusManifest::new(
            vec![record("a", "sad"), record("b", "happy"), record("c", "sad")],
            None,
        )
        .unwrap();
        assert_eq!(m.label_set(), ["sad", "happy"]);
    }

    #[test]
    fn manifest_rejects_duplicates_and_unknown_labels() {
        let dup = CorpusManifest::new(vec![record("u1", "a"), record("u1", "b")], None);
        assert_eq!(
            dup,
            Err(CorpusError::DuplicateId {
                row: 1,
                id: "u1".into()
            })
        );
        let unknown = CorpusManifest::new(
            vec![record("u1", "a"), record("u2", "c")],
            Some(vec!["a".into(), "b".into()]),
        );
        assert!(matches!(unknown, Err(CorpusError::UnknownLabel { row: 1, .. })));
        let single = CorpusManifest::new(vec![record("u1", "a")], None);
        assert_eq!(single, Err(CorpusError::TooFewLabels(1)));
    }

    #[test]
    fn tokens_round_trip() {
        for k in Kind::ALL {
            assert_eq!(k.as_str().parse::<Kind>().unwrap(), *k);
        }
        assert!("sentence".parse::<Kind>().is_err());
        assert_eq!("female".parse::<Gender>().unwrap(), Gender::Female);
        assert!("elderly".parse::<AgeGroup>().is_err());
    }
}
