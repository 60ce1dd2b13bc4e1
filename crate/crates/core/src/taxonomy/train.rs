use alloc::string::{String, ToString};
use alloc::vec::Vec;

use super::{Dichotomizer, NodeModel, Taxon, TaxonNode, TaxonomyError, TaxonomyTree, TrainConfig};
use crate::features::{fit_rows, FeatureError, FeatureSubset, FeatureVector};
use crate::representation::{Mode, Representation};
use crate::svm;

/// Maps vectors of one registry onto a subset, resolving names once.
struct Projector<'a> {
    subset: Option<&'a FeatureSubset>,
    cached: Option<(u64, Vec<usize>, u64)>,
}

impl<'a> Projector<'a> {
    fn new(subset: Option<&'a FeatureSubset>) -> Self {
        Self { subset, cached: None }
    }

    /// Projected values and the fingerprint of the projected registry.
    fn project(&mut self, v: &FeatureVector) -> Result<(Vec<f64>, u64), FeatureError> {
        let Some(subset) = self.subset else {
            return Ok((v.values().to_vec(), v.registry().fingerprint()));
        };
        let source = v.registry().fingerprint();
        if self.cached.as_ref().is_none_or(|c| c.0 != source) {
            let (idx, reg) = subset.resolve(v.registry())?;
            self.cached = Some((source, idx, reg.fingerprint()));
        }
        let (_, idx, fp) = self.cached.as_ref().expect("filled above");
        Ok((idx.iter().map(|&i| v.values()[i]).collect(), *fp))
    }
}

struct Prepared {
    label: String,
    utterance: Option<Vec<f64>>,
    segments: Vec<Vec<f64>>,
}

fn check_mode(mode: Mode, r: &Representation) -> Result<(), TaxonomyError> {
    let ok = (!mode.needs_utterance() || r.utterance_vector().is_some())
        && (!mode.needs_segments() || r.segment_set().is_some_and(|s| !s.is_empty()));
    if ok {
        Ok(())
    } else {
        Err(TaxonomyError::ModeMismatch {
            expected: mode,
            found: r.mode(),
        })
    }
}

fn uniform(fp: &mut Option<u64>, found: u64) -> Result<(), TaxonomyError> {
    match *fp {
        Some(f) if f != found => Err(FeatureError::RegistryMismatch.into()),
        _ => {
            *fp = Some(found);
            Ok(())
        }
    }
}

fn fit_part(
    rows: &[&[f64]],
    ys: Vec<i8>,
    fingerprint: u64,
    cfg: &TrainConfig,
    path: &str,
) -> Result<Dichotomizer, TaxonomyError> {
    let scaler = fit_rows(rows, fingerprint)?;
    let points = rows.iter().map(|r| scaler.apply_values(r)).collect();
    let (svm, report) = svm::fit(points, ys, &cfg.svm).map_err(|source| TaxonomyError::Svm {
        path: path.to_string(),
        source,
    })?;
    Ok(Dichotomizer {
        scaler,
        svm,
        report,
        n_train: rows.len(),
    })
}

fn train_node(
    node: &mut TaxonNode,
    path: &str,
    data: &[Prepared],
    fps: (u64, u64),
    cfg: &TrainConfig,
) -> Result<(), TaxonomyError> {
    let side = |l: &str| -> Option<i8> {
        if node.left_labels.iter().any(|x| x == l) {
            Some(1)
        } else if node.right_labels.iter().any(|x| x == l) {
            Some(-1)
        } else {
            None
        }
    };
    let relevant: Vec<(&Prepared, i8)> = data.iter().filter_map(|p| side(&p.label).map(|y| (p, y))).collect();
    for (y, name) in [(1, "left"), (-1, "right")] {
        if !relevant.iter().any(|(_, s)| *s == y) {
            return Err(TaxonomyError::EmptySide {
                path: path.to_string(),
                labels: node.describe(),
                side: name,
            });
        }
    }

    let utterance = if cfg.mode.needs_utterance() {
        let rows: Vec<&[f64]> = relevant.iter().filter_map(|(p, _)| p.utterance.as_deref()).collect();
        let ys = relevant.iter().map(|(_, y)| *y).collect();
        Some(fit_part(&rows, ys, fps.0, cfg, path)?)
    } else {
        None
    };
    let segment = if cfg.mode.needs_segments() {
        let mut rows: Vec<&[f64]> = Vec::new();
        let mut ys = Vec::new();
        for (p, y) in &relevant {
            for s in &p.segments {
                rows.push(s);
                ys.push(*y);
            }
        }
        Some(fit_part(&rows, ys, fps.1, cfg, path)?)
    } else {
        None
    };
    node.model = Some(NodeModel { utterance, segment });

    for (child, step) in [(&mut node.left, "L"), (&mut node.right, "R")] {
        if let Taxon::Node(n) = child {
            train_node(n, &alloc::format!("{path}.{step}"), data, fps, cfg)?;
        }
    }
    Ok(())
}

/// Trains one SVM per internal node on the examples whose labels fall under
/// it: left labels are positive, right labels negative. In segment mode each
/// segment is an example carrying its utterance's label.
pub fn train_tree(
    tree: &TaxonomyTree,
    data: &[(&Representation, &str)],
    cfg: &TrainConfig,
) -> Result<TaxonomyTree, TaxonomyError> {
    let mut utt = Projector::new(cfg.utterance_subset.as_ref());
    let mut seg = Projector::new(cfg.segment_subset.as_ref());
    let (mut utt_fp, mut seg_fp) = (None, None);
    let mut prepared = Vec::with_capacity(data.len());
    for (r, label) in data {
        if !tree.label_set.iter().any(|l| l == label) {
            return Err(TaxonomyError::UnknownLabel(label.to_string()));
        }
        check_mode(cfg.mode, r)?;
        let utterance = match r.utterance_vector().filter(|_| cfg.mode.needs_utterance()) {
            Some(v) => {
                let (x, fp) = utt.project(v)?;
                uniform(&mut utt_fp, fp)?;
                Some(x)
            }
            None => None,
        };
        let mut segments = Vec::new();
        if cfg.mode.needs_segments() {
            for v in r.segment_set().into_iter().flat_map(|s| s.vectors()) {
                let (x, fp) = seg.project(v)?;
                uniform(&mut seg_fp, fp)?;
                segments.push(x);
            }
        }
        prepared.push(Prepared {
            label: label.to_string(),
            utterance,
            segments,
        });
    }

    let mut out = TaxonomyTree {
        root: tree.root.clone(),
        label_set: tree.label_set.clone(),
        config: Some(cfg.clone()),
    };
    let fps = (utt_fp.unwrap_or(0), seg_fp.unwrap_or(0));
    train_node(&mut out.root, "root", &prepared, fps, cfg)?;
    Ok(out)
}

/// Margin of a node for a whole utterance. Segment margins are averaged;
/// combination mode weights the utterance margin by `utterance_weight`.
pub fn combine_margins(mode: Mode, utterance: Option<f64>, segments: &[f64], utterance_weight: f64) -> f64 {
    let seg_mean = if segments.is_empty() {
        0.0
    } else {
        segments.iter().sum::<f64>() / segments.len() as f64
    };
    match mode {
        Mode::Utterance => utterance.unwrap_or(0.0),
        Mode::Segment => seg_mean,
        Mode::Combination => utterance_weight * utterance.unwrap_or(0.0) + (1.0 - utterance_weight) * seg_mean,
    }
}

fn part_margin(d: &Dichotomizer, x: (Vec<f64>, u64), path: &str) -> Result<f64, TaxonomyError> {
    if x.1 != d.scaler.registry_fingerprint || x.0.len() != d.scaler.dim() {
        return Err(FeatureError::RegistryMismatch.into());
    }
    d.svm
        .decision_value(&d.scaler.apply_values(&x.0))
        .map_err(|source| TaxonomyError::Svm {
            path: path.to_string(),
            source,
        })
}

fn margin_with(
    node: &TaxonNode,
    path: &str,
    r: &Representation,
    cfg: &TrainConfig,
    utt: &mut Projector,
    seg: &mut Projector,
) -> Result<f64, TaxonomyError> {
    let model = node.model.as_ref().ok_or_else(|| TaxonomyError::Untrained(path.to_string()))?;
    check_mode(cfg.mode, r)?;
    let untrained = || TaxonomyError::Untrained(path.to_string());
    let u = if cfg.mode.needs_utterance() {
        let d = model.utterance.as_ref().ok_or_else(untrained)?;
        let v = r.utterance_vector().expect("checked by check_mode");
        Some(part_margin(d, utt.project(v)?, path)?)
    } else {
        None
    };
    let mut s = Vec::new();
    if cfg.mode.needs_segments() {
        let d = model.segment.as_ref().ok_or_else(untrained)?;
        for v in r.segment_set().into_iter().flat_map(|s| s.vectors()) {
            s.push(part_margin(d, seg.project(v)?, path)?);
        }
    }
    Ok(combine_margins(cfg.mode, u, &s, cfg.utterance_weight))
}

/// Margin of a trained node for one representation.
pub fn node_margin(node: &TaxonNode, r: &Representation, cfg: &TrainConfig) -> Result<f64, TaxonomyError> {
    let mut utt = Projector::new(cfg.utterance_subset.as_ref());
    let mut seg = Projector::new(cfg.segment_subset.as_ref());
    margin_with(node, "node", r, cfg, &mut utt, &mut seg)
}

/// Routes one utterance from the root to exactly one leaf label.
pub fn classify<'t>(tree: &'t TaxonomyTree, r: &Representation) -> Result<&'t str, TaxonomyError> {
    let cfg = tree.config.as_ref().ok_or_else(|| TaxonomyError::Untrained("root".to_string()))?;
    let mut utt = Projector::new(cfg.utterance_subset.as_ref());
    let mut seg = Projector::new(cfg.segment_subset.as_ref());
    tree.route(|path, node| margin_with(node, path, r, cfg, &mut utt, &mut seg))
}
