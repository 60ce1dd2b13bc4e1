#![allow(dead_code)]

use std::path::{Path, PathBuf};

use dichotomy::manifest::manifest_to_string;
use dichotomy::wav::write_wav;
use dichotomy_core::corpus::{AgeGroup, CorpusManifest, Gender, Kind, UtteranceRecord, Waveform};

pub const LABELS: [&str; 3] = ["anger", "neutral", "sad"];

/// Harmonic tone with a silent gap in the middle. Each label has its own
/// pitch and level; `k` varies both slightly.
pub fn voice(label: &str, k: usize, pitch_scale: f64) -> Waveform {
    let (f0, amp) = match label {
        "anger" => (250.0, 0.6),
        "neutral" => (160.0, 0.3),
        _ => (110.0, 0.12),
    };
    let f0 = pitch_scale * (f0 + 4.0 * k as f64);
    let amp = amp * (1.0 + 0.05 * k as f64);
    let rate = 16000.0;
    let n = (0.7 * rate) as usize;
    let samples = (0..n)
        .map(|i| {
            let t = i as f64 / rate;
            if (0.3..0.42).contains(&t) {
                return 0.0;
            }
            let vibrato = 1.0 + 0.01 * (2.0 * std::f64::consts::PI * 5.0 * t).sin();
            let phase = 2.0 * std::f64::consts::PI * f0 * vibrato * t;
            let tone: f64 = (1..=5).map(|h| (h as f64 * phase).sin() / h as f64).sum();
            amp * 0.6 * tone
        })
        .collect();
    Waveform::new(samples, 16000).unwrap()
}

/// Two speakers, three labels, `per_label` utterances each; returns the
/// manifest path.
pub fn write_corpus(dir: &Path, per_label: usize) -> PathBuf {
    let audio = dir.join("audio");
    std::fs::create_dir_all(&audio).unwrap();
    let mut records = Vec::new();
    for (speaker, gender, scale) in [("s1", Gender::Female, 1.0), ("s2", Gender::Male, 0.9)] {
        for label in LABELS {
            for k in 0..per_label {
                let id = format!("{speaker}_{label}_{k}");
                write_wav(&audio.join(format!("{id}.wav")), &voice(label, k, scale)).unwrap();
                records.push(UtteranceRecord {
                    id: id.clone(),
                    audio_path: format!("audio/{id}.wav"),
                    speaker: speaker.into(),
                    gender,
                    age_group: AgeGroup::Young,
                    label: label.into(),
                    kind: if k % 2 == 0 { Kind::Word } else { Kind::ShortSentence },
                });
            }
        }
    }
    let m = CorpusManifest::new(records, Some(LABELS.map(String::from).to_vec())).unwrap();
    let path = dir.join("manifest.csv");
    std::fs::write(&path, manifest_to_string(&m)).unwrap();
    path
}

pub const TREE: &str = "(anger | (neutral | sad))";

/// All files of a directory, sorted by name.
pub fn dir_contents(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut out: Vec<_> = std::fs::read_dir(dir)
        .unwrap()
        .map(|e| {
            let e = e.unwrap();
            (e.file_name().to_string_lossy().into_owned(), std::fs::read(e.path()).unwrap())
        })
        .collect();
    out.sort();
    out
}
