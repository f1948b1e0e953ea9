use nbrobust::experiment::{parse_csv, write_csv, DistributionKind, ExperimentConfig, ExperimentKind, Measure, ResultRow};
use nbrobust::{
    kernel_flip_bound, make_region, ClassifierFamily, Dataset64, Distribution64, FittedClassifier, Label,
};
use proptest::prelude::*;

fn dataset(dim: usize, max_n: usize) -> impl Strategy<Value = Dataset64> {
    (1..=max_n, any::<u64>()).prop_flat_map(move |(n, seed)| {
        (
            prop::collection::vec(prop::collection::vec(-1.0f64..1.0, dim), n),
            prop::collection::vec(any::<bool>(), n),
        )
            .prop_map(move |(pts, labels)| {
                let refs: Vec<&[f64]> = pts.iter().map(|p| p.as_slice()).collect();
                let labels: Vec<Label> = labels.into_iter().map(|b| if b { Label::Positive } else { Label::Negative }).collect();
                Dataset64::from_points(&refs, &labels, seed).unwrap()
            })
    })
}

fn family() -> impl Strategy<Value = ClassifierFamily> {
    prop::sample::select(vec![
        "knn:log_ceil:1",
        "knn:power:0.5",
        "knn:fixed:1",
        "kernel:exponential:sqrt_log",
        "kernel:gaussian:fixed:0.2",
        "kernel:polynomial:cube_root",
        "histogram:power:0.5",
        "histogram:fixed:1",
    ])
    .prop_map(|s| s.parse().unwrap())
}

fn query(dim: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(-1.5f64..1.5, dim)
}

fn dist2(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn weights_are_normalized(ds in dataset(2, 60), fam in family(), x in query(2)) {
        let n = ds.len();
        if let Ok(clf) = FittedClassifier::fit(fam, ds) {
            let w = clf.weights(&x);
            prop_assert_eq!(w.weights.len(), n);
            prop_assert!(w.weights.iter().all(|&v| v >= 0.0));
            let s = w.sum();
            prop_assert!(w.is_zero() || (s - 1.0).abs() < 1e-9, "sum {s}");
        }
    }

    #[test]
    fn weights_ignore_labels(ds in dataset(2, 60), fam in family(), x in query(2), shuffle in any::<u64>()) {
        let Ok(clf) = FittedClassifier::fit(fam, ds.clone()) else { return Ok(()) };
        let mut labels: Vec<Label> = ds.labels().collect();
        let len = labels.len();
        for i in 0..len {
            let j = (shuffle.wrapping_mul(i as u64 + 1) % len as u64) as usize;
            labels.swap(i, j);
        }
        let relabeled = FittedClassifier::fit(fam, ds.with_labels(&labels).unwrap()).unwrap();
        prop_assert_eq!(clf.weights(&x), relabeled.weights(&x));
    }

    #[test]
    fn knn_matches_full_sort(ds in dataset(2, 200), k in 1usize..12, x in query(2)) {
        let n = ds.len();
        let k = k.min(n);
        let clf = FittedClassifier::fit(format!("knn:fixed:{k}").parse().unwrap(), ds.clone()).unwrap();
        let keys = ds.tiebreak_keys();
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by(|&a, &b| {
            let (da, db) = (dist2(ds.samples()[a].point.coords(), &x), dist2(ds.samples()[b].point.coords(), &x));
            da.total_cmp(&db).then(keys[a].total_cmp(&keys[b]))
        });
        let mut expected = vec![0.0; n];
        for &i in &order[..k] {
            expected[i] = 1.0 / k as f64;
        }
        prop_assert_eq!(clf.weights(&x).weights, expected);
    }

    #[test]
    fn kernel_weights_fall_with_distance(ds in dataset(2, 40), x in query(2), kind in 0usize..3) {
        let fam = ["kernel:exponential:fixed:0.3", "kernel:gaussian:fixed:0.3", "kernel:polynomial:fixed:0.3"][kind];
        let clf = FittedClassifier::fit(fam.parse().unwrap(), ds.clone()).unwrap();
        let w = clf.weights(&x).weights;
        for (i, a) in ds.samples().iter().enumerate() {
            for (j, b) in ds.samples().iter().enumerate() {
                if dist2(a.point.coords(), &x) < dist2(b.point.coords(), &x) {
                    prop_assert!(w[i] >= w[j]);
                }
            }
        }
    }

    #[test]
    fn histogram_leaves_partition_the_sample(ds in dataset(2, 120), x in query(2)) {
        let n = ds.len();
        let clf = FittedClassifier::fit("histogram:power:0.5".parse().unwrap(), ds.clone()).unwrap();
        let leaves = clf.histogram_leaves().unwrap();
        prop_assert_eq!(leaves.iter().map(|l| l.count).sum::<usize>(), n);
        let k = clf.k().unwrap();
        prop_assert!(clf.saturated_leaves() > 0 || leaves.iter().all(|l| l.count <= k));
        let leaf_area: f64 = leaves.iter().map(|l| l.side.powi(2)).sum();
        let max_side = leaves.iter().map(|l| l.side).fold(0.0, f64::max);
        prop_assert!(max_side > 0.0);
        // leaves tile the root square
        let root_lo: Vec<f64> = (0..2).map(|j| leaves.iter().map(|l| l.lo[j]).fold(f64::INFINITY, f64::min)).collect();
        let root_hi: Vec<f64> = (0..2).map(|j| leaves.iter().map(|l| l.lo[j] + l.side).fold(f64::NEG_INFINITY, f64::max)).collect();
        let area = (root_hi[0] - root_lo[0]) * (root_hi[1] - root_lo[1]);
        prop_assert!((leaf_area - area).abs() <= 1e-9 * area.max(1.0));
        let inside = (0..2).all(|j| x[j] >= root_lo[j] && x[j] < root_hi[j]);
        let containing = leaves.iter().filter(|l| (0..2).all(|j| x[j] >= l.lo[j] && x[j] < l.lo[j] + l.side)).count();
        prop_assert_eq!(containing, usize::from(inside));
    }

    #[test]
    fn flip_bound_symmetric_under_label_negation(ds in dataset(2, 40), x in query(2), r in 0.0f64..0.2) {
        let fam: ClassifierFamily = "kernel:gaussian:fixed:0.2".parse().unwrap();
        let a = FittedClassifier::fit(fam, ds.clone()).unwrap();
        let b = FittedClassifier::fit(fam, ds.with_negated_labels()).unwrap();
        prop_assert_eq!(kernel_flip_bound(&a, &x, r).unwrap(), kernel_flip_bound(&b, &x, r).unwrap());
        prop_assert!((a.margin(&x) + b.margin(&x)).abs() < 1e-12);
    }

    #[test]
    fn regions_nest_in_kappa(t in 0.0f64..1.0, k1 in 0.05f64..0.95, dk in 0.0f64..0.5, q in query(2)) {
        let dist = Distribution64::two_circles();
        let anchor = if t < 0.7 {
            let a = t / 0.7 * std::f64::consts::TAU;
            vec![a.cos(), a.sin()]
        } else {
            let a = (t - 0.7) / 0.3 * std::f64::consts::TAU;
            vec![0.5 + 0.2 * a.cos(), 0.2 * a.sin()]
        };
        let anchor = nbrobust::Point64::new(anchor).unwrap();
        let k2 = (k1 + dk).min(0.99);
        let small = make_region(&dist, &anchor, k1).unwrap();
        let large = make_region(&dist, &anchor, k2).unwrap();
        prop_assert!(!small.contains(&q) || large.contains(&q));
    }

    #[test]
    fn csv_rows_parse_back(
        rows in prop::collection::vec(
            ("[a-z]{1,8}", "[a-z:0-9._]{1,16}", 1usize..100000, 0usize..4, 0.01f64..0.99, 0.0f64..1.0, 0.0f64..0.5, 1usize..10, any::<u64>()),
            1..20,
        )
    ) {
        let rows: Vec<ResultRow> = rows
            .into_iter()
            .map(|(e, c, n, m, kappa, mean, std, trials, seed)| ResultRow {
                experiment_id: e,
                classifier: c,
                n,
                measure: match m {
                    0 => Measure::Accuracy,
                    1 => Measure::Astuteness(kappa),
                    2 => Measure::Cond2 { p: kappa },
                    _ => Measure::Cond3,
                },
                mean,
                std,
                trials,
                seed,
                wall_time_ms: 0,
            })
            .collect();
        let text = write_csv(&rows);
        let back = parse_csv(&text).unwrap();
        prop_assert_eq!(back.len(), rows.len());
        for (a, b) in rows.iter().zip(&back) {
            prop_assert_eq!(&a.classifier, &b.classifier);
            prop_assert_eq!(a.seed, b.seed);
            prop_assert!((a.mean - b.mean).abs() <= 5e-6 * a.mean.abs().max(1e-300));
        }
        prop_assert_eq!(write_csv(&back), text);
    }

    #[test]
    fn config_round_trips(
        kappas in prop::collection::btree_set(1u32..99, 1..4),
        ns in prop::collection::btree_set(2usize..100000, 1..6),
        test_points in 1usize..500,
        trials in 1usize..10,
        seed in any::<u64>(),
        step in 0.001f64..0.1,
        wall in any::<bool>(),
    ) {
        let cfg = ExperimentConfig {
            experiment: ExperimentKind::Convergence,
            distribution: DistributionKind::TwoCircles,
            pos_primitives: vec![],
            neg_primitives: vec![],
            half_primitives: vec![],
            pos_weight: None,
            label_noise: None,
            eta: None,
            classifiers: vec!["kernel:exponential:sqrt_log".into(), "knn:power:0.4".into()],
            n_schedule: ns.into_iter().collect(),
            kappas: kappas.into_iter().map(|k| k as f64 / 100.0).collect(),
            test_points,
            trials,
            grid_step: step,
            seed,
            csv_path: "out/x.csv".into(),
            plot_path: Some("out/x.svg".into()),
            condition_p: 0.2,
            condition_grid: 101,
            record_wall_time: wall,
        };
        prop_assert_eq!(ExperimentConfig::parse(&cfg.to_toml()).unwrap(), cfg);
    }
}
