//! JSON-lines feature store.
//!
//! The first line is a header naming the label set, the representation mode
//! and the feature registries with their fingerprints. Each following line
//! is one utterance: its manifest fields and its `utterance_vector` and/or
//! `segments`. Floats are written in shortest round-trip form, so reading a
//! store back reproduces every value bit for bit.

use std::path::Path;
use std::sync::Arc;

use dichotomy_core::corpus::{AgeGroup, CorpusManifest, Gender, Kind, UtteranceRecord};
use dichotomy_core::eval::Example;
use dichotomy_core::features::{FeatureGroup, FeatureRegistry, FeatureVector};
use dichotomy_core::representation::{Mode, Representation, Segment, SegmentSet};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const STORE_FORMAT: &str = "dichotomy-feature-store";
pub const STORE_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
struct Header {
    format: String,
    version: u32,
    mode: Mode,
    labels: Vec<String>,
    utterance_registry: Option<FeatureRegistry>,
    utterance_fingerprint: Option<String>,
    segment_registry: Option<FeatureRegistry>,
    segment_fingerprint: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
struct StoredSegment {
    t0: f64,
    t1: f64,
    vector: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
struct Record {
    id: String,
    path: String,
    speaker: String,
    gender: Gender,
    age_group: AgeGroup,
    label: String,
    kind: Kind,
    mode: Mode,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    utterance_vector: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    segments: Option<Vec<StoredSegment>>,
}

/// A manifest together with every utterance's representation.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureStore {
    pub manifest: CorpusManifest,
    pub examples: Vec<Example>,
}

impl FeatureStore {
    pub fn mode(&self) -> Option<Mode> {
        self.examples.first().map(|e| e.representation.mode())
    }
}

fn hex(fp: u64) -> String {
    format!("{fp:016x}")
}

/// External groups present in a registry, in canonical order.
fn externals(r: &FeatureRegistry) -> Vec<FeatureGroup> {
    FeatureGroup::EXTERNAL.into_iter().filter(|g| r.group_len(*g) > 0).collect()
}

pub fn store_to_string(labels: &[String], examples: &[Example]) -> Result<String> {
    let Some(first) = examples.first() else {
        return Err(Error::Config("cannot write an empty feature store".into()));
    };
    let mode = first.representation.mode();
    let utterance_registry = first.representation.utterance_vector().map(|v| v.registry().clone());
    let segment_registry = examples
        .iter()
        .filter_map(|e| e.representation.segment_set())
        .flat_map(|s| s.vectors())
        .next()
        .map(|v| v.registry().clone());
    let header = Header {
        format: STORE_FORMAT.into(),
        version: STORE_VERSION,
        mode,
        labels: labels.to_vec(),
        utterance_fingerprint: utterance_registry.as_ref().map(|r| hex(r.fingerprint())),
        utterance_registry,
        segment_fingerprint: segment_registry.as_ref().map(|r| hex(r.fingerprint())),
        segment_registry,
    };
    let mut out = serde_json::to_string(&header).expect("header serializes");
    out.push('\n');
    for e in examples {
        let r = &e.record;
        let rep = &e.representation;
        if rep.mode() != mode {
            return Err(Error::Config(format!("{}: mixed representation modes in one store", r.id)));
        }
        let rec = Record {
            id: r.id.clone(),
            path: r.audio_path.clone(),
            speaker: r.speaker.clone(),
            gender: r.gender,
            age_group: r.age_group,
            label: r.label.clone(),
            kind: r.kind,
            mode,
            utterance_vector: rep.utterance_vector().map(|v| v.values().to_vec()),
            segments: rep.segment_set().map(|s| {
                s.segments()
                    .iter()
                    .map(|g| StoredSegment {
                        t0: g.t0,
                        t1: g.t1,
                        vector: g.vector.values().to_vec(),
                    })
                    .collect()
            }),
        };
        out.push_str(&serde_json::to_string(&rec).expect("record serializes"));
        out.push('\n');
    }
    Ok(out)
}

pub fn read_store(path: &Path) -> Result<FeatureStore> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_store_str(&text, path)
}

fn checked_registry(
    r: Option<FeatureRegistry>,
    fp: Option<&str>,
    canonical: fn(&[FeatureGroup]) -> FeatureRegistry,
    origin: &Path,
) -> Result<Option<Arc<FeatureRegistry>>> {
    let Some(r) = r else { return Ok(None) };
    if fp != Some(hex(r.fingerprint()).as_str()) {
        return Err(Error::format(origin, 1, "registry fingerprint does not match its names"));
    }
    if canonical(&externals(&r)) != r {
        return Err(Error::format(
            origin,
            1,
            "store was written with a different feature registry; re-run extract",
        ));
    }
    Ok(Some(Arc::new(r)))
}

pub fn parse_store_str(text: &str, origin: &Path) -> Result<FeatureStore> {
    let mut lines = text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty());
    let (_, head) = lines.next().ok_or_else(|| Error::format(origin, 1, "empty feature store"))?;
    let header: Header = serde_json::from_str(head).map_err(|source| Error::Json {
        path: origin.to_path_buf(),
        line: 1,
        source,
    })?;
    if header.format != STORE_FORMAT || header.version != STORE_VERSION {
        return Err(Error::format(origin, 1, "not a version 1 feature store"));
    }
    let utt_reg = checked_registry(
        header.utterance_registry,
        header.utterance_fingerprint.as_deref(),
        FeatureRegistry::utterance,
        origin,
    )?;
    let seg_reg = checked_registry(
        header.segment_registry,
        header.segment_fingerprint.as_deref(),
        FeatureRegistry::segment,
        origin,
    )?;

    let mut records = Vec::new();
    let mut examples = Vec::new();
    for (i, line) in lines {
        let at = |msg: String| Error::format(origin, i + 1, msg);
        let rec: Record = serde_json::from_str(line).map_err(|source| Error::Json {
            path: origin.to_path_buf(),
            line: i + 1,
            source,
        })?;
        if rec.mode != header.mode {
            return Err(at(format!("record mode {} differs from store mode {}", rec.mode, header.mode)));
        }
        let vector = |values: Vec<f64>, reg: &Option<Arc<FeatureRegistry>>| -> Result<FeatureVector> {
            let reg = reg.clone().ok_or_else(|| at("vector without a registry in the header".into()))?;
            FeatureVector::new(values, reg).map_err(|e| at(e.to_string()))
        };
        let utterance = rec.utterance_vector.map(|v| vector(v, &utt_reg)).transpose()?;
        let segments = match rec.segments {
            Some(segs) => {
                let segs = segs
                    .into_iter()
                    .map(|s| {
                        Ok(Segment {
                            t0: s.t0,
                            t1: s.t1,
                            vector: vector(s.vector, &seg_reg)?,
                        })
                    })
                    .collect::<Result<Vec<_>>>()?;
                Some(SegmentSet::new(segs).map_err(|e| at(e.to_string()))?)
            }
            None => None,
        };
        let representation = Representation::new(rec.mode, utterance, segments).map_err(|e| at(e.to_string()))?;
        let record = UtteranceRecord {
            id: rec.id,
            audio_path: rec.path,
            speaker: rec.speaker,
            gender: rec.gender,
            age_group: rec.age_group,
            label: rec.label,
            kind: rec.kind,
        };
        records.push(record.clone());
        examples.push(Example { record, representation });
    }
    let manifest = CorpusManifest::new(records, Some(header.labels))?;
    Ok(FeatureStore { manifest, examples })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn example(id: &str, label: &str, mode: Mode, x: f64) -> Example {
        let ur = Arc::new(FeatureRegistry::utterance(&[]));
        let sr = Arc::new(FeatureRegistry::segment(&[]));
        let fill = |r: &Arc<FeatureRegistry>, k: f64| {
            FeatureVector::new((0..r.len()).map(|i| x + k * i as f64 / 3.0).collect(), r.clone()).unwrap()
        };
        let utt = mode.needs_utterance().then(|| fill(&ur, 1.0));
        let segs = mode.needs_segments().then(|| {
            SegmentSet::new(vec![
                Segment {
                    t0: 0.0,
                    t1: 0.31,
                    vector: fill(&sr, 0.1),
                },
                Segment {
                    t0: 0.31,
                    t1: 0.9,
                    vector: fill(&sr, 0.7),
                },
            ])
            .unwrap()
        });
        Example {
            record: UtteranceRecord {
                id: id.into(),
                audio_path: format!("{id}.wav"),
                speaker: "s1".into(),
                gender: Gender::Male,
                age_group: AgeGroup::Old,
                label: label.into(),
                kind: Kind::Word,
            },
            representation: Representation::new(mode, utt, segs).unwrap(),
        }
    }

    #[test]
    fn round_trip_is_exact_in_every_mode() {
        let labels = vec!["a".to_string(), "b".to_string()];
        for mode in Mode::ALL {
            let ex = vec![example("u1", "a", mode, 0.1), example("u2", "b", mode, -7.25e-5)];
            let text = store_to_string(&labels, &ex).unwrap();
            let back = parse_store_str(&text, Path::new("s.jsonl")).unwrap();
            assert_eq!(back.examples, ex);
            assert_eq!(back.manifest.label_set(), labels.as_slice());
            assert_eq!(store_to_string(&labels, &back.examples).unwrap(), text);
        }
    }

    #[test]
    fn stale_registry_is_rejected() {
        let labels = vec!["a".to_string(), "b".to_string()];
        let text = store_to_string(&labels, &[example("u1", "a", Mode::Utterance, 1.0)]).unwrap();
        let renamed = text.replacen("mean F1", "mean F1 (old)", 1);
        let err = parse_store_str(&renamed, Path::new("s.jsonl")).unwrap_err();
        assert!(err.to_string().contains("fingerprint"), "{err}");
    }

    #[test]
    fn wrong_vector_length_reports_line() {
        let labels = vec!["a".to_string(), "b".to_string()];
        let mut text = store_to_string(&labels, &[example("u1", "a", Mode::Utterance, 1.0)]).unwrap();
        text.push_str(
            r#"{"id":"u2","path":"x","speaker":"s","gender":"male","age_group":"old","label":"b","kind":"word","mode":"utterance","utterance_vector":[1.0]}"#,
        );
        assert!(matches!(parse_store_str(&text, Path::new("s")), Err(Error::Format { line: 3, .. })));
    }
}
