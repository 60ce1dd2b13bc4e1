use dichotomy_core::corpus::{AgeGroup, Gender, Kind};
use dichotomy_core::eval::{
    confusion, contrast, group_rates, ConfusionMatrix, Grouping, PredictionEntry, PredictionLog,
};
use dichotomy_core::representation::Mode;
use dichotomy_core::svm::{rbf_kernel, train_smo, SmoConfig, SvmProblem};
use dichotomy_core::taxonomy::{combine_margins, TaxonomyTree, TreeSpec};
use proptest::prelude::*;

const LABELS: [&str; 7] = [
    "fear", "anger", "happy", "surprise", "neutral", "sad", "disgust",
];

fn log_from(pairs: &[(usize, usize)], n: usize) -> PredictionLog {
    let labels: Vec<String> = LABELS[..n].iter().map(|s| s.to_string()).collect();
    let entries = pairs
        .iter()
        .enumerate()
        .map(|(i, &(t, p))| PredictionEntry {
            id: format!("u{i}"),
            true_label: labels[t % n].clone(),
            predicted: labels[p % n].clone(),
            speaker: format!("s{}", i % 3),
            gender: if i % 2 == 0 {
                Gender::Female
            } else {
                Gender::Male
            },
            kind: Kind::Word,
            age_group: AgeGroup::Unknown,
        })
        .collect();
    PredictionLog::new(labels, entries).unwrap()
}

proptest! {
    #[test]
    fn confusion_rows_sum_to_100_or_are_flagged(pairs in prop::collection::vec((0usize..7, 0usize..7), 1..80), n in 2usize..=7) {
        let m = confusion(&log_from(&pairs, n), |_| true);
        for (i, row) in m.percents().iter().enumerate() {
            let s: f64 = row.iter().sum();
            if m.empty_rows()[i] {
                prop_assert_eq!(m.row_total(i), 0);
            } else {
                prop_assert!((s - 100.0).abs() < 1e-9);
            }
        }
        let total: u64 = (0..n).map(|i| m.row_total(i)).sum();
        prop_assert_eq!(total as usize, pairs.len());
    }

    #[test]
    fn contrast_is_antisymmetric(a in prop::collection::vec(0.0f64..100.0, 9), b in prop::collection::vec(0.0f64..100.0, 9)) {
        let labels: Vec<String> = LABELS[..3].iter().map(|s| s.to_string()).collect();
        let grid = |v: &[f64]| v.chunks(3).map(|r| r.to_vec()).collect::<Vec<_>>();
        let m = ConfusionMatrix::from_percents(labels.clone(), grid(&a));
        let h = ConfusionMatrix::from_percents(labels, grid(&b));
        let mh = contrast(&m, &h).unwrap();
        let hm = contrast(&h, &m).unwrap();
        for (r1, r2) in mh.cells().iter().zip(hm.cells()) {
            for (x, y) in r1.iter().zip(r2) {
                prop_assert_eq!(*x, -*y);
            }
        }
        prop_assert!(contrast(&m, &m).unwrap().cells().iter().flatten().all(|&v| v == 0.0));
    }

    #[test]
    fn group_totals_partition_the_log(pairs in prop::collection::vec((0usize..7, 0usize..7), 1..60)) {
        let log = log_from(&pairs, 5);
        for g in Grouping::ALL {
            let rates = group_rates(&log, g);
            prop_assert_eq!(rates.iter().map(|r| r.total).sum::<u64>() as usize, log.len());
            prop_assert_eq!(rates.iter().map(|r| r.correct).sum::<u64>() as usize, log.entries().iter().filter(|e| e.correct()).count());
        }
    }

    #[test]
    fn pruned_trees_stay_binary(mask in 3u8..128) {
        let keep: Vec<&str> = LABELS.iter().enumerate().filter(|(i, _)| mask & (1 << i) != 0).map(|(_, l)| *l).collect();
        prop_assume!(keep.len() >= 2);
        let t = TaxonomyTree::generalized().prune(&keep).unwrap();
        prop_assert_eq!(t.leaf_count(), keep.len());
        prop_assert_eq!(t.internal_count(), keep.len() - 1);
        let mut got = t.spec().labels();
        let mut want: Vec<String> = keep.iter().map(|s| s.to_string()).collect();
        got.sort();
        want.sort();
        prop_assert_eq!(got, want);
        let text = t.spec().to_string();
        prop_assert_eq!(text.parse::<TreeSpec>().unwrap().to_string(), text);
    }

    #[test]
    fn rbf_kernel_is_symmetric_and_bounded(x in prop::collection::vec(-5.0f64..5.0, 1..6), shift in prop::collection::vec(-5.0f64..5.0, 6), gamma in 0.001f64..10.0) {
        let z: Vec<f64> = x.iter().zip(&shift).map(|(a, b)| a + b).collect();
        let k = rbf_kernel(&x, &z, gamma).unwrap();
        prop_assert_eq!(k, rbf_kernel(&z, &x, gamma).unwrap());
        prop_assert!(k >= 0.0);
        prop_assert!(k <= 1.0);
        prop_assert_eq!(rbf_kernel(&x, &x, gamma).unwrap(), 1.0);
    }

    #[test]
    fn combined_margin_lies_between_its_parts(u in -5.0f64..5.0, segs in prop::collection::vec(-5.0f64..5.0, 1..6), w in 0.0f64..=1.0) {
        let mean = segs.iter().sum::<f64>() / segs.len() as f64;
        let m = combine_margins(Mode::Combination, Some(u), &segs, w);
        prop_assert!(m >= u.min(mean) - 1e-12 && m <= u.max(mean) + 1e-12);
    }

    #[test]
    fn smo_multipliers_are_feasible(pts in prop::collection::vec((-2.0f64..2.0, -2.0f64..2.0), 4..12), c in 0.1f64..50.0) {
        let points: Vec<Vec<f64>> = pts.iter().map(|&(a, b)| vec![a, b]).collect();
        let labels: Vec<i8> = (0..points.len()).map(|i| if i % 2 == 0 { 1 } else { -1 }).collect();
        let p = SvmProblem::new(points, labels, c, 0.5).unwrap();
        let (m, report) = train_smo(&p, &SmoConfig::default());
        prop_assert!(m.coefficients.iter().all(|a| a.abs() <= c * (1.0 + 1e-9)));
        prop_assert!(m.coefficients.iter().sum::<f64>().abs() < 1e-6 * c.max(1.0));
        prop_assert!(report.objective >= -1e-9);
    }
}
