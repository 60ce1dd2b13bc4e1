//! Parallel extraction and leave-one-out runs with ordered results.

use std::collections::BTreeSet;
use std::path::{Path, PathBuf};

use dichotomy_core::corpus::CorpusManifest;
use dichotomy_core::eval::{confusion, group_rates, plan_folds, run_fold, Example, Grouping, PredictionLog};
use dichotomy_core::representation::{build_representation, Mode};
use dichotomy_core::taxonomy::{train_tree, TaxonomyTree};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::config::Experiment;
use crate::error::{Error, Result};
use crate::manifest::audio_path;
use crate::sidecar::SidecarTable;
use crate::tables::{confusion_csv, log_csv, rates_csv};
use crate::wav::load_audio;

/// A pool with `workers` threads, or one per core.
pub fn thread_pool(workers: Option<usize>) -> Result<rayon::ThreadPool> {
    rayon::ThreadPoolBuilder::new()
        .num_threads(workers.unwrap_or(0))
        .build()
        .map_err(|e| Error::Config(format!("thread pool: {e}")))
}

/// Loads, analyses and represents every utterance, in manifest order.
pub fn extract_examples(
    manifest_path: &Path,
    manifest: &CorpusManifest,
    sidecars: Option<&SidecarTable>,
    mode: Mode,
    pool: &rayon::ThreadPool,
) -> Result<Vec<Example>> {
    if let Some(table) = sidecars {
        let ids: BTreeSet<&str> = manifest.records().iter().map(|r| r.id.as_str()).collect();
        if let Some(stray) = table.keys().find(|k| !ids.contains(k.as_str())) {
            return Err(Error::Config(format!("sidecar names utterance {stray:?}, which is not in the manifest")));
        }
    }
    pool.install(|| {
        manifest
            .records()
            .par_iter()
            .map(|r| {
                let one = || -> Result<Example> {
                    let w = load_audio(&audio_path(manifest_path, r))?;
                    let sidecar = sidecars.and_then(|t| t.get(&r.id));
                    let representation = build_representation(&w, mode, sidecar)?;
                    Ok(Example {
                        record: r.clone(),
                        representation,
                    })
                };
                one().map_err(|e| Error::Utterance {
                    id: r.id.clone(),
                    source: Box::new(e),
                })
            })
            .collect()
    })
}

/// Narrows stored representations to what `mode` uses.
pub fn restrict_examples(examples: Vec<Example>, mode: Mode) -> Result<Vec<Example>> {
    examples
        .into_iter()
        .map(|e| {
            let representation = e.representation.restrict(mode).map_err(|err| Error::Utterance {
                id: e.record.id.clone(),
                source: Box::new(err.into()),
            })?;
            Ok(Example { representation, ..e })
        })
        .collect()
}

/// Leave-one-out with folds spread over `pool`; the log is in manifest order
/// whatever the worker count.
pub fn run_loocv(exp: &Experiment, examples: &[Example], pool: &rayon::ThreadPool) -> Result<PredictionLog> {
    let folds = plan_folds(&exp.tree, examples, &exp.protocol)?;
    let entries = pool.install(|| {
        folds
            .par_iter()
            .map(|f| run_fold(&exp.tree, examples, f, &exp.train).map(|o| o.entry))
            .collect::<Result<Vec<_>, _>>()
    })?;
    Ok(PredictionLog::new(exp.tree.spec().labels(), entries)?)
}

/// Trains on every example the protocol admits.
pub fn train_model(exp: &Experiment, examples: &[Example]) -> Result<TaxonomyTree> {
    let data: Vec<_> = examples
        .iter()
        .filter(|e| exp.protocol.admits(&e.record))
        .map(|e| (&e.representation, e.record.label.as_str()))
        .collect();
    Ok(train_tree(&exp.tree, &data, &exp.train)?)
}

fn file_token(s: &str) -> String {
    s.chars()
        .map(|c| if c.is_ascii_alphanumeric() || c == '-' || c == '_' { c } else { '_' })
        .collect()
}

/// `predictions.csv`, `confusion_all.csv` and one confusion matrix per group
/// of every grouping.
pub fn loocv_outputs(log: &PredictionLog, config_hash: &str, dir: &Path) -> Result<Vec<(PathBuf, String)>> {
    let mut files = vec![
        (dir.join("predictions.csv"), log_csv(log, config_hash)),
        (dir.join("confusion_all.csv"), confusion_csv(&confusion(log, |_| true), config_hash)),
    ];
    for g in Grouping::ALL.into_iter().filter(|g| *g != Grouping::All) {
        for rate in group_rates(log, g) {
            let name = format!("confusion_{}_{}.csv", g.as_str(), file_token(&rate.group));
            let m = confusion(log, |e| g.key(e) == rate.group);
            files.push((dir.join(name), confusion_csv(&m, config_hash)));
        }
    }
    let mut seen = BTreeSet::new();
    for (p, _) in &files {
        if !seen.insert(p) {
            return Err(Error::Config(format!("two groups map to the file name {}", p.display())));
        }
    }
    Ok(files)
}

/// One `rates_<grouping>.csv` per grouping.
pub fn report_outputs(log: &PredictionLog, config_hash: &str, dir: &Path, groupings: &[Grouping]) -> Vec<(PathBuf, String)> {
    groupings
        .iter()
        .map(|&g| {
            let text = rates_csv(log.labels(), &group_rates(log, g), config_hash);
            (dir.join(format!("rates_{}.csv", g.as_str())), text)
        })
        .collect()
}

pub const MODEL_FORMAT: &str = "dichotomy-model";

/// A trained tree with the run it came from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelFile {
    pub format: String,
    pub version: u32,
    pub config_hash: String,
    pub spec: String,
    pub tree: TaxonomyTree,
}

impl ModelFile {
    pub fn new(tree: TaxonomyTree, config_hash: &str) -> Self {
        Self {
            format: MODEL_FORMAT.into(),
            version: 1,
            config_hash: config_hash.into(),
            spec: tree.spec().to_string(),
            tree,
        }
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("model serializes");
        s.push('\n');
        s
    }

    pub fn from_json(text: &str, origin: &Path) -> Result<Self> {
        let m: ModelFile = serde_json::from_str(text).map_err(|source| Error::Json {
            path: origin.to_path_buf(),
            line: 0,
            source,
        })?;
        if m.format != MODEL_FORMAT || m.version != 1 {
            return Err(Error::format(origin, 0, "not a version 1 model file"));
        }
        if m.tree.spec().to_string() != m.spec || !m.tree.is_trained() {
            return Err(Error::format(origin, 0, "model tree does not match its spec or is untrained"));
        }
        Ok(m)
    }

    pub fn read(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_json(&text, path)
    }
}
