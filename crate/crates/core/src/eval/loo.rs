use alloc::string::{String, ToString};
use alloc::vec::Vec;

use super::{EvalError, PredictionEntry, PredictionLog, Protocol, Unit};
use crate::corpus::UtteranceRecord;
use crate::representation::Representation;
use crate::taxonomy::{classify, train_tree, TaxonomyTree, TrainConfig};

/// A manifest record with its extracted representation.
#[derive(Debug, Clone, PartialEq)]
pub struct Example {
    pub record: UtteranceRecord,
    pub representation: Representation,
}

/// One held-out utterance and the examples its models are trained on.
/// Indices refer to the example slice the plan was built from.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Fold {
    pub unit: String,
    pub test: usize,
    pub train: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FoldOutcome {
    pub entry: PredictionEntry,
    pub model_fingerprint: u64,
}

/// Folds in manifest order. Examples whose kind the protocol excludes are
/// skipped; every label of `tree` needs two examples in every unit.
pub fn plan_folds(tree: &TaxonomyTree, examples: &[Example], protocol: &Protocol) -> Result<Vec<Fold>, EvalError> {
    let labels = tree.spec().labels();
    let mut units: Vec<(String, Vec<usize>)> = Vec::new();
    for (i, ex) in examples.iter().enumerate() {
        let r = &ex.record;
        if !protocol.admits(r) {
            continue;
        }
        if !labels.contains(&r.label) {
            return Err(EvalError::UnknownLabel {
                id: r.id.clone(),
                label: r.label.clone(),
            });
        }
        let key = match protocol.unit {
            Unit::Speaker => r.speaker.as_str(),
            Unit::Pooled => "all",
        };
        match units.iter_mut().find(|(k, _)| k == key) {
            Some((_, members)) => members.push(i),
            None => units.push((key.to_string(), alloc::vec![i])),
        }
    }
    if units.is_empty() {
        return Err(EvalError::NothingToEvaluate);
    }
    for (unit, members) in &units {
        for l in &labels {
            let count = members.iter().filter(|&&i| &examples[i].record.label == l).count();
            if count < 2 {
                return Err(EvalError::UnitTooSmall {
                    unit: unit.clone(),
                    label: l.clone(),
                    count,
                });
            }
        }
    }
    let mut folds: Vec<Fold> = units
        .iter()
        .flat_map(|(unit, members)| {
            members.iter().map(move |&test| Fold {
                unit: unit.clone(),
                test,
                train: members.iter().copied().filter(|&i| i != test).collect(),
            })
        })
        .collect();
    folds.sort_by_key(|f| f.test);
    Ok(folds)
}

/// Trains every node on the fold's training examples and classifies the
/// held-out one.
pub fn run_fold(
    tree: &TaxonomyTree,
    examples: &[Example],
    fold: &Fold,
    cfg: &TrainConfig,
) -> Result<FoldOutcome, EvalError> {
    let data: Vec<(&Representation, &str)> = fold
        .train
        .iter()
        .map(|&i| (&examples[i].representation, examples[i].record.label.as_str()))
        .collect();
    let trained = train_tree(tree, &data, cfg)?;
    let test = &examples[fold.test];
    let predicted = classify(&trained, &test.representation)?;
    Ok(FoldOutcome {
        entry: PredictionEntry::new(&test.record, predicted),
        model_fingerprint: trained.fingerprint(),
    })
}

/// Sequential leave-one-out over every fold of the protocol.
pub fn loocv(
    tree: &TaxonomyTree,
    examples: &[Example],
    cfg: &TrainConfig,
    protocol: &Protocol,
) -> Result<PredictionLog, EvalError> {
    let folds = plan_folds(tree, examples, protocol)?;
    let entries = folds
        .iter()
        .map(|f| run_fold(tree, examples, f, cfg).map(|o| o.entry))
        .collect::<Result<Vec<_>, _>>()?;
    PredictionLog::new(tree.spec().labels(), entries)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::{AgeGroup, Gender, Kind};
    use crate::eval::{confusion, group_rates, Grouping};
    use crate::features::{FeatureGroup, FeatureRegistry, FeatureVector};
    use crate::representation::{Mode, Segment, SegmentSet};
    use alloc::sync::Arc;
    use alloc::vec;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use rand_distr::{Distribution, Normal};

    fn registry(dim: usize) -> Arc<FeatureRegistry> {
        let entries = (0..dim).map(|i| (alloc::format!("x{i}"), FeatureGroup::F0)).collect();
        Arc::new(FeatureRegistry::from_entries(entries).unwrap())
    }

    fn record(id: usize, speaker: &str, label: &str) -> UtteranceRecord {
        UtteranceRecord {
            id: alloc::format!("u{id:03}"),
            audio_path: String::new(),
            speaker: speaker.into(),
            gender: if speaker == "s1" { Gender::Female } else { Gender::Male },
            age_group: AgeGroup::Young,
            label: label.into(),
            kind: Kind::ShortSentence,
        }
    }

    fn utterance_example(id: usize, speaker: &str, label: &str, x: Vec<f64>) -> Example {
        let v = FeatureVector::new(x.clone(), registry(x.len())).unwrap();
        Example {
            record: record(id, speaker, label),
            representation: Representation::new(Mode::Utterance, Some(v), None).unwrap(),
        }
    }

    fn toy_1d() -> (TaxonomyTree, Vec<Example>) {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let noise = Normal::new(0.0, 0.1).unwrap();
        let labels = ["a", "b", "c"];
        let mut ex = Vec::new();
        for k in 0..10 {
            for (c, l) in labels.iter().enumerate() {
                let x = 10.0 * c as f64 + noise.sample(&mut rng);
                ex.push(utterance_example(ex.len(), if k % 2 == 0 { "s1" } else { "s2" }, l, vec![x]));
            }
        }
        (TaxonomyTree::parse("(a | (b | c))").unwrap(), ex)
    }

    #[test]
    fn separable_toy_set_is_all_correct() {
        let (tree, ex) = toy_1d();
        let cfg = TrainConfig::with_mode(Mode::Utterance);
        for unit in [Unit::Speaker, Unit::Pooled] {
            let protocol = Protocol {
                unit,
                exclude_kinds: vec![],
            };
            let log = loocv(&tree, &ex, &cfg, &protocol).unwrap();
            assert_eq!(log.len(), 30);
            let m = confusion(&log, |_| true);
            for i in 0..3 {
                assert_eq!(m.percents()[i][i], 100.0);
            }
        }
    }

    fn circle_example(id: usize, class: usize, rng: &mut ChaCha8Rng, mode: Mode) -> Example {
        let labels = ["anger", "happy", "neutral", "sad", "fear"];
        let theta = 2.0 * core::f64::consts::PI * class as f64 / 5.0;
        let (cx, cy) = (10.0 * theta.cos(), 10.0 * theta.sin());
        let n = Normal::new(0.0, 0.5).unwrap();
        let draw = |rng: &mut ChaCha8Rng| {
            FeatureVector::new(vec![cx + n.sample(rng), cy + n.sample(rng)], registry(2)).unwrap()
        };
        let utt = mode.needs_utterance().then(|| draw(rng));
        let segs = mode.needs_segments().then(|| {
            let s = (0..3)
                .map(|k| Segment {
                    t0: k as f64,
                    t1: k as f64 + 1.0,
                    vector: draw(rng),
                })
                .collect();
            SegmentSet::new(s).unwrap()
        });
        Example {
            record: record(id, "s1", labels[class]),
            representation: Representation::new(mode, utt, segs).unwrap(),
        }
    }

    #[test]
    fn gaussian_circle_reaches_98_percent() {
        let tree = TaxonomyTree::generalized()
            .prune(&["anger", "happy", "neutral", "sad", "fear"])
            .unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let ex: Vec<Example> = (0..150).map(|i| circle_example(i, i % 5, &mut rng, Mode::Utterance)).collect();
        let log = loocv(&tree, &ex, &TrainConfig::with_mode(Mode::Utterance), &Protocol::default()).unwrap();
        assert!(log.accuracy() >= 0.98, "{}", log.accuracy());
    }

    #[test]
    fn too_small_unit_is_rejected() {
        let (tree, mut ex) = toy_1d();
        ex.retain(|e| !(e.record.speaker == "s2" && e.record.label == "b") || e.record.id == "u004");
        match plan_folds(&tree, &ex, &Protocol::default()) {
            Err(EvalError::UnitTooSmall { unit, label, count }) => {
                assert_eq!((unit.as_str(), label.as_str(), count), ("s2", "b", 1));
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn excluded_kinds_are_skipped() {
        let (tree, mut ex) = toy_1d();
        for e in ex.iter_mut().skip(27) {
            e.record.kind = Kind::Passage;
        }
        let folds = plan_folds(&tree, &ex, &Protocol::without_passages()).unwrap();
        assert_eq!(folds.len(), 27);
        assert!(folds.iter().all(|f| f.test < 27 && f.train.iter().all(|&i| i < 27)));
    }

    #[test]
    fn folds_stay_within_their_unit() {
        let (tree, ex) = toy_1d();
        let folds = plan_folds(&tree, &ex, &Protocol::default()).unwrap();
        assert_eq!(folds.iter().map(|f| f.test).collect::<Vec<_>>(), (0..30).collect::<Vec<_>>());
        for f in &folds {
            assert_eq!(f.train.len(), 14);
            assert!(!f.train.contains(&f.test));
            assert!(f.train.iter().all(|&i| ex[i].record.speaker == f.unit));
        }
    }

    #[test]
    fn held_out_values_never_reach_the_models() {
        let (tree, ex) = toy_1d();
        let cfg = TrainConfig::with_mode(Mode::Utterance);
        let folds = plan_folds(&tree, &ex, &Protocol::default()).unwrap();
        for f in folds.iter().step_by(7) {
            let before = run_fold(&tree, &ex, f, &cfg).unwrap();
            let mut perturbed = ex.clone();
            perturbed[f.test] = utterance_example(f.test, &f.unit, &ex[f.test].record.label, vec![-1e3]);
            let after = run_fold(&tree, &perturbed, f, &cfg).unwrap();
            assert_eq!(before.model_fingerprint, after.model_fingerprint);
        }
    }

    #[test]
    fn pooled_rate_is_count_weighted_mean_of_units() {
        let (tree, mut ex) = toy_1d();
        for e in ex.iter_mut().step_by(4) {
            let x = e.representation.utterance_vector().unwrap().values()[0];
            let x = if x < 15.0 { x + 10.0 } else { x - 20.0 };
            let v = FeatureVector::new(vec![x], registry(1)).unwrap();
            e.representation = Representation::new(Mode::Utterance, Some(v), None).unwrap();
        }
        let log = loocv(&tree, &ex, &TrainConfig::with_mode(Mode::Utterance), &Protocol::default()).unwrap();
        assert!(log.accuracy() < 1.0);
        let all = group_rates(&log, Grouping::All);
        let per = group_rates(&log, Grouping::Speaker);
        let weighted: f64 = per.iter().map(|g| g.accuracy * g.total as f64).sum::<f64>() / log.len() as f64;
        assert!((all[0].accuracy - weighted).abs() < 1e-12);
        assert!((all[0].accuracy - log.accuracy()).abs() < 1e-12);
    }
}
