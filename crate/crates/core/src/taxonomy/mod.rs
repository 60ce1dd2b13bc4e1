//! Hierarchical dichotomy trees.
//!
//! Each internal node separates its left label set (the positive class)
//! from its right label set. Classification walks from the root, going left
//! when the node margin is non-negative, until a leaf is reached.

mod spec;
mod train;

use alloc::boxed::Box;
use alloc::collections::BTreeSet;
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::features::{FeatureError, FeatureSubset, Scaler};
use crate::fingerprint::Fnv64;
use crate::representation::Mode;
use crate::svm::{SvmError, SvmModel, SvmParams, TrainReport};

pub use spec::{TreeSpec, GENERALIZED_SPEC};
pub use train::{classify, combine_margins, node_margin, train_tree};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum TaxonomyError {
    #[error("tree spec parse error at byte {pos}: {msg}")]
    Parse { pos: usize, msg: String },
    #[error("label {0:?} appears more than once in the tree")]
    DuplicateLabel(String),
    #[error("a tree needs at least two labels, got {0}")]
    TooFewLabels(usize),
    #[error("label {0:?} is not in the tree")]
    UnknownLabel(String),
    #[error("node {path} ({labels}) has no training data on its {side} side")]
    EmptySide {
        path: String,
        labels: String,
        side: &'static str,
    },
    #[error("node {0} is untrained")]
    Untrained(String),
    #[error("representation mode {found} does not carry what a {expected} tree needs")]
    ModeMismatch { expected: Mode, found: Mode },
    #[error(transparent)]
    Feature(#[from] FeatureError),
    #[error("node {path}: {source}")]
    Svm { path: String, source: SvmError },
}

/// One side of a node: a single label or a further dichotomy.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Taxon {
    Leaf(String),
    Node(Box<TaxonNode>),
}

/// A scaler and SVM trained for one part of a representation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Dichotomizer {
    pub scaler: Scaler,
    pub svm: SvmModel,
    pub report: TrainReport,
    pub n_train: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NodeModel {
    pub utterance: Option<Dichotomizer>,
    pub segment: Option<Dichotomizer>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TaxonNode {
    /// Positive class.
    pub left_labels: Vec<String>,
    pub right_labels: Vec<String>,
    pub model: Option<NodeModel>,
    pub left: Taxon,
    pub right: Taxon,
}

impl TaxonNode {
    pub fn labels(&self) -> impl Iterator<Item = &String> {
        self.left_labels.iter().chain(&self.right_labels)
    }

    pub fn describe(&self) -> String {
        format!("{{{}}} | {{{}}}", self.left_labels.join(","), self.right_labels.join(","))
    }
}

/// How a tree is trained and how node margins are combined.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainConfig {
    pub mode: Mode,
    pub svm: SvmParams,
    /// Weight of the utterance margin in combination mode; segments get the rest.
    pub utterance_weight: f64,
    pub utterance_subset: Option<FeatureSubset>,
    pub segment_subset: Option<FeatureSubset>,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            mode: Mode::Utterance,
            svm: SvmParams::default(),
            utterance_weight: 0.5,
            utterance_subset: None,
            segment_subset: None,
        }
    }
}

impl TrainConfig {
    pub fn with_mode(mode: Mode) -> Self {
        Self {
            mode,
            ..Self::default()
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TaxonomyTree {
    pub root: TaxonNode,
    pub label_set: Vec<String>,
    /// Present once trained.
    pub config: Option<TrainConfig>,
}

fn build(spec: &TreeSpec) -> Taxon {
    match spec {
        TreeSpec::Leaf(l) => Taxon::Leaf(l.clone()),
        TreeSpec::Node(a, b) => Taxon::Node(Box::new(TaxonNode {
            left_labels: a.labels(),
            right_labels: b.labels(),
            model: None,
            left: build(a),
            right: build(b),
        })),
    }
}

fn to_spec(t: &Taxon) -> TreeSpec {
    match t {
        Taxon::Leaf(l) => TreeSpec::Leaf(l.clone()),
        Taxon::Node(n) => TreeSpec::node(to_spec(&n.left), to_spec(&n.right)),
    }
}

impl TaxonomyTree {
    pub fn from_spec(spec: &TreeSpec) -> Result<Self, TaxonomyError> {
        let labels = spec.labels();
        let mut seen = BTreeSet::new();
        for l in &labels {
            if !seen.insert(l.as_str()) {
                return Err(TaxonomyError::DuplicateLabel(l.clone()));
            }
        }
        match build(spec) {
            Taxon::Node(root) => Ok(Self {
                root: *root,
                label_set: labels,
                config: None,
            }),
            Taxon::Leaf(_) => Err(TaxonomyError::TooFewLabels(1)),
        }
    }

    pub fn parse(text: &str) -> Result<Self, TaxonomyError> {
        Self::from_spec(&text.parse()?)
    }

    /// Active {fear, anger, happy, surprise} against Passive {neutral, sad,
    /// disgust}, each refined one label at a time.
    pub fn generalized() -> Self {
        Self::parse(GENERALIZED_SPEC).expect("built-in spec is valid")
    }

    pub fn spec(&self) -> TreeSpec {
        TreeSpec::node(to_spec(&self.root.left), to_spec(&self.root.right))
    }

    /// Keeps only the labels in `keep`, collapsing single-child nodes.
    /// Models are discarded.
    pub fn prune<S: AsRef<str>>(&self, keep: &[S]) -> Result<Self, TaxonomyError> {
        let mut set = BTreeSet::new();
        for k in keep {
            let k = k.as_ref();
            if !self.label_set.iter().any(|l| l == k) {
                return Err(TaxonomyError::UnknownLabel(k.to_string()));
            }
            set.insert(k);
        }
        if set.len() < 2 {
            return Err(TaxonomyError::TooFewLabels(set.len()));
        }
        let spec = self.spec().retain(&set).ok_or(TaxonomyError::TooFewLabels(0))?;
        Self::from_spec(&spec)
    }

    pub fn leaf_count(&self) -> usize {
        self.label_set.len()
    }

    pub fn internal_count(&self) -> usize {
        self.nodes().len()
    }

    /// Internal nodes in pre-order with their paths (`root`, `root.L`, ...).
    pub fn nodes(&self) -> Vec<(String, &TaxonNode)> {
        fn walk<'a>(n: &'a TaxonNode, path: String, out: &mut Vec<(String, &'a TaxonNode)>) {
            out.push((path.clone(), n));
            if let Taxon::Node(c) = &n.left {
                walk(c, format!("{path}.L"), out);
            }
            if let Taxon::Node(c) = &n.right {
                walk(c, format!("{path}.R"), out);
            }
        }
        let mut out = Vec::new();
        walk(&self.root, "root".to_string(), &mut out);
        out
    }

    pub fn is_trained(&self) -> bool {
        self.config.is_some() && self.nodes().iter().all(|(_, n)| n.model.is_some())
    }

    /// Walks from the root using `margin` at each internal node: a
    /// non-negative margin goes left.
    pub fn route<E>(&self, mut margin: impl FnMut(&str, &TaxonNode) -> Result<f64, E>) -> Result<&str, E> {
        let mut node = &self.root;
        let mut path = String::from("root");
        loop {
            let m = margin(&path, node)?;
            let (next, step) = if m >= 0.0 { (&node.left, ".L") } else { (&node.right, ".R") };
            match next {
                Taxon::Leaf(l) => return Ok(l),
                Taxon::Node(n) => {
                    node = n;
                    path.push_str(step);
                }
            }
        }
    }

    /// Structural hash of the tree shape and every trained parameter.
    pub fn fingerprint(&self) -> u64 {
        let mut h = Fnv64::new();
        h.write_str(&self.spec().to_string());
        for (path, n) in self.nodes() {
            h.write_str(&path);
            if let Some(m) = &n.model {
                for d in [&m.utterance, &m.segment].into_iter().flatten() {
                    for v in d.scaler.mean.iter().chain(&d.scaler.std) {
                        h.write_f64(*v);
                    }
                    h.write_f64(d.svm.bias);
                    h.write_f64(d.svm.gamma);
                    for (sv, c) in d.svm.support_vectors.iter().zip(&d.svm.coefficients) {
                        h.write_f64(*c);
                        sv.iter().for_each(|x| h.write_f64(*x));
                    }
                }
            }
        }
        h.finish()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    #[test]
    fn generalized_shape() {
        let t = TaxonomyTree::generalized();
        assert_eq!(t.leaf_count(), 7);
        assert_eq!(t.internal_count(), 6);
        assert_eq!(t.root.left_labels, ["fear", "anger", "happy", "surprise"]);
        assert_eq!(t.root.right_labels, ["neutral", "sad", "disgust"]);
        let sad_disgust = t
            .nodes()
            .into_iter()
            .find(|(_, n)| n.left_labels == ["sad"] && n.right_labels == ["disgust"]);
        assert_eq!(sad_disgust.unwrap().0, "root.R.R");
    }

    #[test]
    fn prune_to_five_class_tasks() {
        let g = TaxonomyTree::generalized();
        let gees = g.prune(&["happy", "sad", "anger", "neutral", "fear"]).unwrap();
        assert_eq!(gees.spec().to_string(), "((fear | (anger | happy)) | (neutral | sad))");
        assert_eq!(gees.root.left_labels, ["fear", "anger", "happy"]);
        let des = g.prune(&["happy", "sad", "anger", "neutral", "surprise"]).unwrap();
        assert_eq!(des.spec().to_string(), "((anger | (happy | surprise)) | (neutral | sad))");
        assert_eq!(g.prune(&g.label_set).unwrap(), g);
    }

    #[test]
    fn prune_is_idempotent() {
        let g = TaxonomyTree::generalized();
        let keep = ["sad", "fear", "surprise"];
        let once = g.prune(&keep).unwrap();
        assert_eq!(once.prune(&keep).unwrap(), once);
        assert_eq!(once.spec().to_string(), "((fear | surprise) | sad)");
    }

    #[test]
    fn prune_errors() {
        let g = TaxonomyTree::generalized();
        assert_eq!(g.prune(&["happy"]), Err(TaxonomyError::TooFewLabels(1)));
        assert_eq!(g.prune(&["happy", "bored"]), Err(TaxonomyError::UnknownLabel("bored".into())));
    }

    #[test]
    fn duplicate_and_single_label_specs_rejected() {
        assert_eq!(TaxonomyTree::parse("(a | (b | a))"), Err(TaxonomyError::DuplicateLabel("a".into())));
        assert_eq!(TaxonomyTree::parse("a"), Err(TaxonomyError::TooFewLabels(1)));
    }

    fn scripted<'a>(margins: &'a [(&'a str, f64)]) -> impl FnMut(&str, &TaxonNode) -> Result<f64, ()> + 'a {
        move |path, _| Ok(margins.iter().find(|(p, _)| *p == path).map_or(1.0, |m| m.1))
    }

    #[test]
    fn routing_table() {
        let gees = TaxonomyTree::parse("((fear | (anger | happy)) | (neutral | sad))").unwrap();
        let m = [("root", 0.8), ("root.L", -0.2), ("root.L.R", 0.5)];
        assert_eq!(gees.route(scripted(&m)), Ok("anger"));
        assert_eq!(gees.route(scripted(&[("root", 0.0)])), Ok("fear"));
        let des = TaxonomyTree::parse("((anger | (happy | surprise)) | (neutral | sad))").unwrap();
        assert_eq!(des.route(|_, _| Ok::<_, ()>(1.0)), Ok("anger"));
    }

    #[test]
    fn routing_ignores_positive_rescaling() {
        let g = TaxonomyTree::generalized();
        let margins = vec![("root", -0.3), ("root.R", 0.7), ("root.L", 0.1), ("root.R.R", -2.0)];
        for path_margins in [margins.clone(), vec![("root", 0.3), ("root.L", -0.1), ("root.L.R", -1.0)]] {
            let base = g.route(scripted(&path_margins)).unwrap();
            for scale in [1e-6, 0.5, 3.0, 1e6] {
                let scaled: Vec<(&str, f64)> = path_margins.iter().map(|(p, m)| (*p, m * scale)).collect();
                assert_eq!(g.route(scripted(&scaled)).unwrap(), base);
            }
        }
    }

    #[test]
    fn route_depth_is_bounded() {
        let g = TaxonomyTree::generalized();
        for bits in 0u32..64 {
            let mut steps = 0;
            let label = g
                .route(|_, _| {
                    steps += 1;
                    Ok::<_, ()>(if bits >> steps & 1 == 1 { 1.0 } else { -1.0 })
                })
                .unwrap();
            assert!(g.label_set.iter().any(|l| l == label));
            assert!(steps <= g.leaf_count() - 1);
        }
    }
}
