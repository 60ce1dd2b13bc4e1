//! CSV tables: confusion and contrast matrices, prediction logs and group
//! rates. Percentages are written with two decimals.

use std::path::Path;

use dichotomy_core::eval::{ConfusionMatrix, ContrastMatrix, GroupRate, PredictionEntry, PredictionLog};

use crate::error::{Error, Result};

const CORNER: &str = "true\\predicted";
const CONFIG_PREFIX: &str = "# config ";
const LABELS_PREFIX: &str = "# labels:";

/// Two decimals, without a sign on values that round to zero.
pub fn percent(v: f64) -> String {
    let s = format!("{v:.2}");
    if s == "-0.00" {
        "0.00".into()
    } else {
        s
    }
}

fn writer() -> csv::Writer<Vec<u8>> {
    csv::WriterBuilder::new().has_headers(false).from_writer(Vec::new())
}

fn finish(head: String, w: csv::Writer<Vec<u8>>) -> String {
    let body = String::from_utf8(w.into_inner().expect("writing to memory")).expect("utf-8 fields");
    head + &body
}

fn config_line(config_hash: &str) -> String {
    format!("{CONFIG_PREFIX}{config_hash}\n")
}

fn matrix_csv(labels: &[String], rows: &[Vec<f64>], config_hash: &str) -> String {
    let mut w = writer();
    let header: Vec<&str> = std::iter::once(CORNER).chain(labels.iter().map(String::as_str)).collect();
    w.write_record(&header).expect("writing to memory");
    for (l, row) in labels.iter().zip(rows) {
        let cells: Vec<String> = std::iter::once(l.clone()).chain(row.iter().map(|&v| percent(v))).collect();
        w.write_record(&cells).expect("writing to memory");
    }
    finish(config_line(config_hash), w)
}

pub fn confusion_csv(m: &ConfusionMatrix, config_hash: &str) -> String {
    matrix_csv(m.labels(), m.percents(), config_hash)
}

pub fn contrast_csv(m: &ContrastMatrix, config_hash: &str) -> String {
    matrix_csv(m.labels(), m.cells(), config_hash)
}

pub fn read_matrix_csv(path: &Path) -> Result<ConfusionMatrix> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_matrix_csv(&text, path)
}

/// A percentage matrix in the written shape: first column true labels,
/// header row predicted labels in the same order.
pub fn parse_matrix_csv(text: &str, origin: &Path) -> Result<ConfusionMatrix> {
    let mut r = csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes());
    let csv_err = |source| Error::Csv {
        path: origin.to_path_buf(),
        source,
    };
    let header = r.headers().map_err(csv_err)?.clone();
    let labels: Vec<String> = header.iter().skip(1).map(str::to_string).collect();
    let mut rows = Vec::with_capacity(labels.len());
    for rec in r.records() {
        let rec = rec.map_err(csv_err)?;
        let line = rec.position().map_or(0, |p| p.line() as usize);
        let expected = labels.get(rows.len()).map(String::as_str);
        if Some(&rec[0]) != expected {
            return Err(Error::format(
                origin,
                line,
                format!("row label {:?} does not follow the header order", &rec[0]),
            ));
        }
        let row = rec
            .iter()
            .skip(1)
            .map(|c| c.parse::<f64>().ok().filter(|v| v.is_finite()))
            .collect::<Option<Vec<f64>>>()
            .ok_or_else(|| Error::format(origin, line, "cell is not a finite number"))?;
        rows.push(row);
    }
    if rows.len() != labels.len() {
        return Err(Error::format(origin, 0, format!("{} rows for {} labels", rows.len(), labels.len())));
    }
    Ok(ConfusionMatrix::from_percents(labels, rows))
}

const LOG_HEADER: [&str; 7] = ["id", "true", "predicted", "speaker", "gender", "age_group", "kind"];

pub fn log_csv(log: &PredictionLog, config_hash: &str) -> String {
    let head = format!("{}{LABELS_PREFIX} {}\n", config_line(config_hash), log.labels().join(","));
    let mut w = writer();
    w.write_record(LOG_HEADER).expect("writing to memory");
    for e in log.entries() {
        w.write_record([
            e.id.as_str(),
            &e.true_label,
            &e.predicted,
            &e.speaker,
            e.gender.as_str(),
            e.age_group.as_str(),
            e.kind.as_str(),
        ])
        .expect("writing to memory");
    }
    finish(head, w)
}

pub fn read_log_csv(path: &Path) -> Result<(PredictionLog, Option<String>)> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_log_csv(&text, path)
}

/// The log and the config hash recorded with it.
pub fn parse_log_csv(text: &str, origin: &Path) -> Result<(PredictionLog, Option<String>)> {
    let hash = text.lines().find_map(|l| l.strip_prefix(CONFIG_PREFIX)).map(|h| h.trim().to_string());
    let labels: Vec<String> = text
        .lines()
        .find_map(|l| l.strip_prefix(LABELS_PREFIX))
        .ok_or_else(|| Error::format(origin, 1, "missing `# labels:` line"))?
        .split(',')
        .map(|l| l.trim().to_string())
        .collect();
    let mut r = csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes());
    let csv_err = |source| Error::Csv {
        path: origin.to_path_buf(),
        source,
    };
    if r.headers().map_err(csv_err)?.iter().collect::<Vec<_>>() != LOG_HEADER {
        return Err(Error::format(origin, 0, format!("header must be `{}`", LOG_HEADER.join(","))));
    }
    let mut entries = Vec::new();
    for rec in r.records() {
        let rec = rec.map_err(csv_err)?;
        let line = rec.position().map_or(0, |p| p.line() as usize);
        let bad = |e: dichotomy_core::corpus::CorpusError| Error::format(origin, line, e.to_string());
        entries.push(PredictionEntry {
            id: rec[0].to_string(),
            true_label: rec[1].to_string(),
            predicted: rec[2].to_string(),
            speaker: rec[3].to_string(),
            gender: rec[4].parse().map_err(bad)?,
            age_group: rec[5].parse().map_err(bad)?,
            kind: rec[6].parse().map_err(bad)?,
        });
    }
    Ok((PredictionLog::new(labels, entries)?, hash))
}

pub fn rates_csv(labels: &[String], rates: &[GroupRate], config_hash: &str) -> String {
    let mut w = writer();
    let header: Vec<&str> = ["group", "total", "correct", "accuracy"]
        .into_iter()
        .chain(labels.iter().map(String::as_str))
        .collect();
    w.write_record(&header).expect("writing to memory");
    for g in rates {
        let mut row = vec![g.group.clone(), g.total.to_string(), g.correct.to_string(), percent(100.0 * g.accuracy)];
        row.extend(g.per_class.iter().map(|p| p.map(percent).unwrap_or_default()));
        w.write_record(&row).expect("writing to memory");
    }
    finish(config_line(config_hash), w)
}
