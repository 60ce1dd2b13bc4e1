//! Run settings: a flat `key = value` file overridden by command-line flags.

use std::path::{Path, PathBuf};

use dichotomy_core::corpus::Kind;
use dichotomy_core::eval::{Protocol, Unit};
use dichotomy_core::features::FeatureSubset;
use dichotomy_core::fingerprint::Fnv64;
use dichotomy_core::representation::Mode;
use dichotomy_core::svm::SvmParams;
use dichotomy_core::taxonomy::{TaxonomyTree, TrainConfig};

use crate::error::{Error, Result};

/// Every setting a command may read. `None` means "not given".
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Settings {
    pub manifest: Option<PathBuf>,
    pub store: Option<PathBuf>,
    pub tree: Option<String>,
    pub mode: Option<Mode>,
    pub subset: Option<String>,
    pub c: Option<f64>,
    pub gamma: Option<f64>,
    pub grid: Option<bool>,
    pub unit: Option<Unit>,
    pub exclude_kind: Option<Vec<Kind>>,
    pub sidecar: Option<PathBuf>,
    pub out: Option<PathBuf>,
    pub workers: Option<usize>,
    pub utterance_weight: Option<f64>,
}

fn parse_bool(v: &str) -> Option<bool> {
    match v {
        "true" | "yes" | "on" | "1" => Some(true),
        "false" | "no" | "off" | "0" => Some(false),
        _ => None,
    }
}

pub fn parse_kinds(v: &str) -> std::result::Result<Vec<Kind>, String> {
    v.split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty() && *s != "none")
        .map(|s| s.parse::<Kind>().map_err(|e| e.to_string()))
        .collect()
}

impl Settings {
    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse(&text, path)
    }

    /// Relative paths are taken from the directory of `origin`.
    pub fn parse(text: &str, origin: &Path) -> Result<Self> {
        let base = origin.parent().unwrap_or(Path::new(""));
        let mut s = Settings::default();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let bad = |msg: String| Error::format(origin, i + 1, msg);
            let (key, value) = line
                .split_once('=')
                .map(|(k, v)| (k.trim(), v.trim()))
                .ok_or_else(|| bad(format!("expected `key = value`, got {line:?}")))?;
            let invalid = || bad(format!("invalid value {value:?} for {key}"));
            let path = || Some(base.join(value));
            match key.to_ascii_lowercase().replace('-', "_").as_str() {
                "manifest" => s.manifest = path(),
                "store" | "from_store" => s.store = path(),
                "tree" => s.tree = Some(value.to_string()),
                "mode" => s.mode = Some(value.parse().map_err(|_| invalid())?),
                "subset" => s.subset = Some(value.to_string()),
                "c" => s.c = Some(value.parse().map_err(|_| invalid())?),
                "gamma" => s.gamma = Some(value.parse().map_err(|_| invalid())?),
                "grid" => s.grid = Some(parse_bool(value).ok_or_else(invalid)?),
                "unit" => s.unit = Some(value.parse().map_err(|_| invalid())?),
                "exclude_kind" => s.exclude_kind = Some(parse_kinds(value).map_err(|_| invalid())?),
                "sidecar" => s.sidecar = path(),
                "out" => s.out = path(),
                "workers" => s.workers = Some(value.parse().map_err(|_| invalid())?),
                "utterance_weight" => s.utterance_weight = Some(value.parse().map_err(|_| invalid())?),
                _ => return Err(bad(format!("unknown key {key:?}"))),
            }
        }
        Ok(s)
    }

    /// Fields set in `over` replace those in `self`.
    pub fn overridden_by(self, over: Settings) -> Settings {
        Settings {
            manifest: over.manifest.or(self.manifest),
            store: over.store.or(self.store),
            tree: over.tree.or(self.tree),
            mode: over.mode.or(self.mode),
            subset: over.subset.or(self.subset),
            c: over.c.or(self.c),
            gamma: over.gamma.or(self.gamma),
            grid: over.grid.or(self.grid),
            unit: over.unit.or(self.unit),
            exclude_kind: over.exclude_kind.or(self.exclude_kind),
            sidecar: over.sidecar.or(self.sidecar),
            out: over.out.or(self.out),
            workers: over.workers.or(self.workers),
            utterance_weight: over.utterance_weight.or(self.utterance_weight),
        }
    }

    /// Tree, training configuration and protocol for a task over `labels`.
    pub fn experiment(&self, labels: &[String], default_mode: Mode) -> Result<Experiment> {
        let tree = resolve_tree(self.tree.as_deref(), labels)?;
        let (utterance_subset, segment_subset) = resolve_subsets(self.subset.as_deref())?;
        let defaults = SvmParams::default();
        let weight = self.utterance_weight.unwrap_or(0.5);
        if !(0.0..=1.0).contains(&weight) {
            return Err(Error::Config(format!("utterance_weight {weight} is outside [0, 1]")));
        }
        let train = TrainConfig {
            mode: self.mode.unwrap_or(default_mode),
            svm: SvmParams {
                c: self.c.unwrap_or(defaults.c),
                gamma: self.gamma.or(defaults.gamma),
                grid: self.grid.unwrap_or(defaults.grid),
                smo: defaults.smo,
            },
            utterance_weight: weight,
            utterance_subset,
            segment_subset,
        };
        if !(train.svm.c > 0.0 && train.svm.c.is_finite()) || train.svm.gamma.is_some_and(|g| !(g > 0.0 && g.is_finite())) {
            return Err(Error::Config("C and gamma must be positive and finite".into()));
        }
        let protocol = Protocol {
            unit: self.unit.unwrap_or(Unit::Speaker),
            exclude_kinds: self.exclude_kind.clone().unwrap_or_default(),
        };
        Ok(Experiment::new(tree, train, protocol))
    }
}

/// A fully resolved run.
#[derive(Debug, Clone, PartialEq)]
pub struct Experiment {
    pub tree: TaxonomyTree,
    pub train: TrainConfig,
    pub protocol: Protocol,
    pub config_hash: String,
}

impl Experiment {
    pub fn new(tree: TaxonomyTree, train: TrainConfig, protocol: Protocol) -> Self {
        let config_hash = config_hash(&tree, &train, &protocol);
        Self {
            tree,
            train,
            protocol,
            config_hash,
        }
    }
}

/// Hash of everything that determines predictions. Paths, worker counts and
/// whether features came from a store are left out.
pub fn config_hash(tree: &TaxonomyTree, train: &TrainConfig, protocol: &Protocol) -> String {
    let mut h = Fnv64::new();
    h.write_str(&tree.spec().to_string());
    h.write_str(train.mode.as_str());
    for s in [&train.utterance_subset, &train.segment_subset] {
        match s {
            Some(s) => s.feature_names().iter().for_each(|n| h.write_str(n)),
            None => h.write_str("full"),
        }
        h.write_str("|");
    }
    h.write_f64(train.svm.c);
    h.write_f64(train.svm.gamma.unwrap_or(0.0));
    h.write_u64(u64::from(train.svm.grid));
    h.write_f64(train.svm.smo.tol);
    h.write_u64(train.svm.smo.max_passes as u64);
    h.write_f64(train.utterance_weight);
    h.write_str(protocol.unit.as_str());
    let mut kinds: Vec<&str> = protocol.exclude_kinds.iter().map(|k| k.as_str()).collect();
    kinds.sort_unstable();
    kinds.dedup();
    kinds.iter().for_each(|k| h.write_str(k));
    format!("{:016x}", h.finish())
}

/// An inline spec, a file holding one, or `generalized`. Without a value
/// the generalized tree is pruned to `labels`.
pub fn resolve_tree(arg: Option<&str>, labels: &[String]) -> Result<TaxonomyTree> {
    let text = match arg {
        None => {
            return TaxonomyTree::generalized().prune(labels).map_err(|e| {
                Error::Config(format!("labels do not fit the generalized tree ({e}); pass --tree"))
            });
        }
        Some("generalized") => return Ok(TaxonomyTree::generalized()),
        Some(t) if t.trim_start().starts_with('(') => t.to_string(),
        Some(p) => std::fs::read_to_string(p).map_err(|e| Error::io(p, e))?,
    };
    Ok(TaxonomyTree::parse(text.trim())?)
}

fn resolve_subset(token: &str) -> Result<Option<FeatureSubset>> {
    let token = token.trim();
    if token == "full" {
        return Ok(None);
    }
    if let Some(s) = FeatureSubset::shipped(token) {
        return Ok(Some(s));
    }
    let path = Path::new(token);
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let name = path.file_stem().and_then(|s| s.to_str()).unwrap_or(token);
    Ok(Some(FeatureSubset::parse(name, &text)?))
}

/// `full`, `universal`, one list for both parts, or `UTT,SEG`. A list is a
/// shipped subset name or a file path.
pub fn resolve_subsets(arg: Option<&str>) -> Result<(Option<FeatureSubset>, Option<FeatureSubset>)> {
    match arg.map(str::trim) {
        None | Some("full") => Ok((None, None)),
        Some("universal") => Ok((
            FeatureSubset::shipped("universal-utterance"),
            FeatureSubset::shipped("universal-segment"),
        )),
        Some(a) => match a.split_once(',') {
            Some((u, s)) => Ok((resolve_subset(u)?, resolve_subset(s)?)),
            None => {
                let s = resolve_subset(a)?;
                Ok((s.clone(), s))
            }
        },
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn labels(ls: &[&str]) -> Vec<String> {
        ls.iter().map(|s| s.to_string()).collect()
    }

    #[test]
    fn file_values_and_overrides() {
        let text = "# run\nmanifest = data/m.csv\nmode = segment\nC = 100\ngrid = yes\nexclude-kind = passage\nworkers=3\n";
        let file = Settings::parse(text, Path::new("/cfg/run.conf")).unwrap();
        assert_eq!(file.manifest.as_deref(), Some(Path::new("/cfg/data/m.csv")));
        assert_eq!(file.mode, Some(Mode::Segment));
        assert_eq!(file.exclude_kind, Some(vec![Kind::Passage]));
        let flags = Settings {
            c: Some(1.0),
            ..Settings::default()
        };
        let merged = file.overridden_by(flags);
        assert_eq!((merged.c, merged.grid, merged.workers), (Some(1.0), Some(true), Some(3)));
    }

    #[test]
    fn bad_lines_are_located() {
        for (text, line) in [("mode = speech\n", 1), ("\nnot a pair\n", 2), ("colour = red\n", 1), ("grid = maybe", 1)] {
            match Settings::parse(text, Path::new("c")) {
                Err(Error::Format { line: l, .. }) => assert_eq!(l, line, "{text}"),
                other => panic!("{text}: {other:?}"),
            }
        }
    }

    #[test]
    fn default_tree_is_pruned_generalized() {
        let t = resolve_tree(None, &labels(&["anger", "happy", "neutral", "sad", "surprise"])).unwrap();
        assert_eq!(t.spec().to_string(), "((anger | (happy | surprise)) | (neutral | sad))");
        assert!(resolve_tree(None, &labels(&["calm", "sad"])).is_err());
        assert_eq!(resolve_tree(Some("(x | y)"), &[]).unwrap().leaf_count(), 2);
    }

    #[test]
    fn subset_forms() {
        assert_eq!(resolve_subsets(None).unwrap(), (None, None));
        let (u, s) = resolve_subsets(Some("universal")).unwrap();
        assert_eq!(u.unwrap().name(), "universal-utterance");
        assert_eq!(s.unwrap().name(), "universal-segment");
        let (u, s) = resolve_subsets(Some("full,universal-segment")).unwrap();
        assert!(u.is_none() && s.is_some());
        assert!(resolve_subsets(Some("/no/such/file")).is_err());
    }

    #[test]
    fn hash_ignores_plumbing_but_not_hyperparameters() {
        let ls = labels(&["anger", "happy", "neutral", "sad", "fear"]);
        let base = Settings::default();
        let a = base.experiment(&ls, Mode::Utterance).unwrap();
        let plumbing = Settings {
            workers: Some(7),
            out: Some("x".into()),
            manifest: Some("m.csv".into()),
            ..Settings::default()
        };
        assert_eq!(plumbing.experiment(&ls, Mode::Utterance).unwrap().config_hash, a.config_hash);
        let c = Settings {
            c: Some(100.0),
            ..Settings::default()
        };
        assert_ne!(c.experiment(&ls, Mode::Utterance).unwrap().config_hash, a.config_hash);
        assert_eq!(a.config_hash.len(), 16);
    }
}
