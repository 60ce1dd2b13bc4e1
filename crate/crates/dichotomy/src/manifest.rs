//! Corpus manifest CSV.
//!
//! ```text
//! # labels: anger,happy,neutral,sad,fear
//! id,path,speaker,gender,age_group,label,kind
//! sk_a_001,sk/a001.wav,sk,male,young,anger,word
//! ```
//!
//! The `# labels:` line is optional; without it the label set is the labels
//! in order of first appearance. Relative audio paths are resolved against
//! the manifest's directory.

use std::path::{Path, PathBuf};

use dichotomy_core::corpus::{CorpusError, CorpusManifest, UtteranceRecord};

use crate::error::{Error, Result};

pub const HEADER: [&str; 7] = ["id", "path", "speaker", "gender", "age_group", "label", "kind"];
const LABELS_PREFIX: &str = "# labels:";

pub fn parse_manifest(path: &Path) -> Result<CorpusManifest> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_manifest_str(&text, path)
}

/// Parses manifest text; `origin` is used in diagnostics only.
pub fn parse_manifest_str(text: &str, origin: &Path) -> Result<CorpusManifest> {
    let mut declared = None;
    for (i, line) in text.lines().enumerate() {
        if let Some(rest) = line.trim_start().strip_prefix(LABELS_PREFIX) {
            if declared.is_some() {
                return Err(Error::format(origin, i + 1, "second `# labels:` line"));
            }
            let labels: Vec<String> = rest.split(',').map(|l| l.trim().to_string()).filter(|l| !l.is_empty()).collect();
            declared = Some(labels);
        }
    }

    let mut reader = csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes());
    let csv_err = |source| Error::Csv {
        path: origin.to_path_buf(),
        source,
    };
    let header = reader.headers().map_err(csv_err)?.clone();
    if header.iter().collect::<Vec<_>>() != HEADER {
        return Err(Error::format(origin, 1, format!("header must be `{}`", HEADER.join(","))));
    }

    let mut records = Vec::new();
    let mut lines = Vec::new();
    for row in reader.records() {
        let row = row.map_err(csv_err)?;
        let line = row.position().map_or(0, |p| p.line() as usize);
        let field = |i: usize| row.get(i).unwrap_or("");
        let token = |e: CorpusError| Error::format(origin, line, e.to_string());
        records.push(UtteranceRecord {
            id: field(0).to_string(),
            audio_path: field(1).to_string(),
            speaker: field(2).to_string(),
            gender: field(3).parse().map_err(token)?,
            age_group: field(4).parse().map_err(token)?,
            label: field(5).to_string(),
            kind: field(6).parse().map_err(token)?,
        });
        lines.push(line);
    }

    CorpusManifest::new(records, declared).map_err(|e| {
        let row = match &e {
            CorpusError::EmptyId { row } | CorpusError::DuplicateId { row, .. } | CorpusError::UnknownLabel { row, .. } => {
                Some(*row)
            }
            _ => None,
        };
        match row {
            Some(r) => Error::format(origin, lines[r], e.to_string()),
            None => Error::Corpus(e),
        }
    })
}

/// Location of a record's audio, relative paths taken from `manifest`'s directory.
pub fn audio_path(manifest: &Path, record: &UtteranceRecord) -> PathBuf {
    let p = Path::new(&record.audio_path);
    if p.is_absolute() {
        p.to_path_buf()
    } else {
        manifest.parent().unwrap_or(Path::new(".")).join(p)
    }
}

pub fn manifest_to_string(m: &CorpusManifest) -> String {
    let mut out = format!("{LABELS_PREFIX} {}\n{}\n", m.label_set().join(","), HEADER.join(","));
    let mut w = csv::WriterBuilder::new().has_headers(false).from_writer(Vec::new());
    for r in m.records() {
        w.write_record([
            r.id.as_str(),
            &r.audio_path,
            &r.speaker,
            r.gender.as_str(),
            r.age_group.as_str(),
            &r.label,
            r.kind.as_str(),
        ])
        .expect("writing to memory");
    }
    out.push_str(std::str::from_utf8(&w.into_inner().expect("writing to memory")).expect("utf-8 fields"));
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use dichotomy_core::corpus::{Gender, Kind};

    const HEAD: &str = "id,path,speaker,gender,age_group,label,kind\n";

    fn parse(text: &str) -> Result<CorpusManifest> {
        parse_manifest_str(text, Path::new("m.csv"))
    }

    #[test]
    fn parses_rows_and_collects_labels() {
        let text = format!("{HEAD}u1,a.wav,s1,female,young,sad,word\nu2,b.wav,s1,female,young,anger,passage\n");
        let m = parse(&text).unwrap();
        assert_eq!(m.len(), 2);
        assert_eq!(m.label_set(), ["sad", "anger"]);
        assert_eq!(m.records()[0].gender, Gender::Female);
        assert_eq!(m.records()[1].kind, Kind::Passage);
    }

    #[test]
    fn declared_labels_fix_the_order() {
        let text = format!("# labels: anger, sad, fear\n{HEAD}u1,a.wav,s1,male,old,sad,word\n");
        assert_eq!(parse(&text).unwrap().label_set(), ["anger", "sad", "fear"]);
        let text = format!("# labels: anger,sad\n{HEAD}u1,a.wav,s1,male,old,fear,word\n");
        match parse(&text) {
            Err(Error::Format { line, .. }) => assert_eq!(line, 3),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn duplicate_id_reports_its_line() {
        let text = format!("{HEAD}u1,a.wav,s,male,young,sad,word\nu1,b.wav,s,male,young,anger,word\n");
        match parse(&text) {
            Err(Error::Format { line, msg, .. }) => {
                assert_eq!(line, 3);
                assert!(msg.contains("u1"));
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn bad_tokens_and_rows() {
        let text = format!("{HEAD}u1,a.wav,s,robot,young,sad,word\nu2,b.wav,s,male,young,anger,word\n");
        assert!(matches!(parse(&text), Err(Error::Format { line: 2, .. })));
        let text = format!("{HEAD}u1,a.wav,s,male\n");
        assert!(matches!(parse(&text), Err(Error::Csv { .. })));
        assert!(matches!(parse("id,path\nu1,a\n"), Err(Error::Format { line: 1, .. })));
    }

    #[test]
    fn corpus_shaped_manifests() {
        let mut text = format!("{HEAD}");
        for s in 0..6 {
            for (e, l) in ["anger", "happy", "neutral", "sad", "fear"].iter().enumerate() {
                for k in 0..93 {
                    text.push_str(&format!("s{s}_{e}_{k},x.wav,s{s},male,young,{l},word\n"));
                }
            }
        }
        assert_eq!(parse(&text).unwrap().len(), 2790);
    }

    #[test]
    fn round_trip_and_path_resolution() {
        let text = format!("# labels: a,b\n{HEAD}u1,sub/a.wav,s1,unknown,unknown,a,long_sentence\nu2,/abs/b.wav,s1,male,old,b,short_sentence\n");
        let m = parse(&text).unwrap();
        assert_eq!(parse(&manifest_to_string(&m)).unwrap(), m);
        let base = Path::new("/data/corpus/manifest.csv");
        assert_eq!(audio_path(base, &m.records()[0]), Path::new("/data/corpus/sub/a.wav"));
        assert_eq!(audio_path(base, &m.records()[1]), Path::new("/abs/b.wav"));
    }
}
