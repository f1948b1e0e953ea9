//! Acceptance criteria, run against the committed configs at their pinned
//! seed. Prints one PASS/FAIL line per criterion and exits non-zero if any
//! criterion fails.
//!
//! Pass criterion numbers as arguments to run a subset:
//! `cargo test --test acceptance -- 5 6`.

use std::path::PathBuf;
use std::time::{Duration, Instant};

use nbrobust::analysis::knn_rate;
use nbrobust::certification::MAX_REFINEMENTS;
use nbrobust::experiment::{run_convergence, run_histogram_demo, run_lower_bound, write_csv, ExperimentConfig, Measure, ResultRow};
use nbrobust::{
    certify_astute, empirical_astuteness_multi, estimate_condition3, kernel_flip_bound, make_region,
    probability_radius, splitting_number_bruteforce, ClassifierFamily, Dataset64, Distribution64,
    FittedClassifier, FlipVerdict, Label, Point64, Primitive, Protocol,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

// Convergence study, two-circles distribution, n = 8000, 3 trials of 20 points.
const CONVERGENCE_N: usize = 8000;
const CONVERGENCE_TARGET: f64 = 0.8;
const CONVERGENCE_TOL: f64 = 0.08;
const POLYNOMIAL_KAPPA_GAP: f64 = 0.10;
const RUNTIME_LIMIT: Duration = Duration::from_secs(600);

// Lower-bound study on the line at n = 1e5.
const LOWER_BOUND_N: usize = 100_000;
const LINE_BAYES_ACCURACY: f64 = 0.75;
const LOWER_BOUND_ACC_TOL: f64 = 0.03;
/// Seed-0 pilot gap (0.4742) less three standard errors of the pilot's
/// per-trial spread; mirrored in configs/expected.toml.
const LOWER_BOUND_MIN_GAP: f64 = 0.38;

// Histogram demo on the two-segment distribution at kappa = 0.9.
const HISTOGRAM_KAPPA: f64 = 0.9;
const HISTOGRAM_GAP: f64 = 0.10;
const HISTOGRAM_ACC_TOL: f64 = 0.05;

// Region oracle.
const REGION_QUERIES: usize = 10_000;
const REGION_AGREEMENT: f64 = 0.9999;
const BOUNDARY_BAND: f64 = 1e-6;
const ORACLE_SAMPLES: usize = 20_000;
const INCLUSION_ANCHORS: usize = 1000;
const INCLUSION_POINTS: usize = 100;

// Certifier fuzz.
const FUZZ_CERTIFIED: usize = 200;
const FUZZ_REFINE: usize = 10;
const FLIP_VERDICTS: usize = 100;
const FLIP_SAMPLES: usize = 1000;

// Analysis checks.
const SPLIT_MAX_N: usize = 8;
const RADIUS_CASES: usize = 1000;
const RADIUS_SLACK: f64 = 1e-6;

struct Outcome {
    pass: bool,
    detail: String,
}

impl Outcome {
    fn new(pass: bool, detail: impl Into<String>) -> Self {
        Self { pass, detail: detail.into() }
    }
}

fn config_path(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../configs").join(name)
}

fn load(name: &str) -> ExperimentConfig {
    ExperimentConfig::load(&config_path(name)).expect("committed config parses")
}

fn row<'a>(rows: &'a [ResultRow], classifier: &str, n: usize, measure: Measure) -> &'a ResultRow {
    rows.iter()
        .find(|r| r.classifier == classifier && r.n == n && r.measure == measure)
        .unwrap_or_else(|| panic!("missing row {classifier} n={n} {measure}"))
}

fn convergence_rows(classifier: &str) -> (Vec<ResultRow>, Duration) {
    let mut cfg = load("convergence.toml");
    cfg.classifiers = vec![classifier.into()];
    cfg.n_schedule = vec![CONVERGENCE_N];
    let start = Instant::now();
    let rows = run_convergence(&cfg).expect("convergence run").rows;
    (rows, start.elapsed())
}

fn within(v: f64, target: f64, tol: f64) -> bool {
    (v - target).abs() <= tol
}

fn exponential_convergence() -> Outcome {
    let clf = "kernel:exponential:sqrt_log";
    let (rows, took) = convergence_rows(clf);
    let mut pass = took <= RUNTIME_LIMIT;
    let mut parts = Vec::new();
    for m in [Measure::Accuracy, Measure::Astuteness(0.1), Measure::Astuteness(0.3), Measure::Astuteness(0.5)] {
        let v = row(&rows, clf, CONVERGENCE_N, m).mean;
        pass &= within(v, CONVERGENCE_TARGET, CONVERGENCE_TOL);
        parts.push(format!("{m}={v:.4}"));
    }
    Outcome::new(
        pass,
        format!("{} (need |v-0.8| <= {CONVERGENCE_TOL}), {:.0}s", parts.join(" "), took.as_secs_f64()),
    )
}

fn polynomial_degradation() -> Outcome {
    let clf = "kernel:polynomial:cube_root";
    let (rows, took) = convergence_rows(clf);
    let acc = row(&rows, clf, CONVERGENCE_N, Measure::Accuracy).mean;
    let a1 = row(&rows, clf, CONVERGENCE_N, Measure::Astuteness(0.1)).mean;
    let a5 = row(&rows, clf, CONVERGENCE_N, Measure::Astuteness(0.5)).mean;
    let pass = within(acc, CONVERGENCE_TARGET, CONVERGENCE_TOL) && a1 - a5 >= POLYNOMIAL_KAPPA_GAP;
    Outcome::new(
        pass,
        format!(
            "accuracy={acc:.4} (need within {CONVERGENCE_TOL} of 0.8), kappa 0.1 - 0.5 gap={:.4} (need >= {POLYNOMIAL_KAPPA_GAP}), {:.0}s",
            a1 - a5,
            took.as_secs_f64()
        ),
    )
}

fn lower_bound_gap() -> Outcome {
    let cfg = load("lower_bound.toml");
    let start = Instant::now();
    let rows = run_lower_bound(&cfg).expect("lower-bound run").rows;
    let took = start.elapsed();
    let (log, pow) = ("knn:log_ceil:1", "knn:power:0.4");
    let a_log = row(&rows, log, LOWER_BOUND_N, Measure::Astuteness(0.5)).mean;
    let a_pow = row(&rows, pow, LOWER_BOUND_N, Measure::Astuteness(0.5)).mean;
    let acc_log = row(&rows, log, LOWER_BOUND_N, Measure::Accuracy).mean;
    let acc_pow = row(&rows, pow, LOWER_BOUND_N, Measure::Accuracy).mean;
    let bayes = Distribution64::line().bayes_accuracy();
    let pass = (bayes - LINE_BAYES_ACCURACY).abs() < 1e-9
        && a_pow - a_log >= LOWER_BOUND_MIN_GAP
        && within(acc_log, LINE_BAYES_ACCURACY, LOWER_BOUND_ACC_TOL)
        && within(acc_pow, LINE_BAYES_ACCURACY, LOWER_BOUND_ACC_TOL)
        && took <= RUNTIME_LIMIT;
    Outcome::new(
        pass,
        format!(
            "astuteness log_ceil={a_log:.4} power={a_pow:.4} gap={:.4} (need >= {LOWER_BOUND_MIN_GAP}); accuracy {acc_log:.4} / {acc_pow:.4} (need within {LOWER_BOUND_ACC_TOL} of 0.75), {:.0}s",
            a_pow - a_log,
            took.as_secs_f64()
        ),
    )
}

fn histogram_failure() -> Outcome {
    let mut cfg = load("histogram_demo.toml");
    let n = *cfg.n_schedule.last().unwrap();
    cfg.n_schedule = vec![n];
    cfg.kappas = vec![HISTOGRAM_KAPPA];
    let rows = run_histogram_demo(&cfg).expect("histogram demo run").rows;
    let bayes = cfg.distribution_f64().unwrap().bayes_accuracy();
    let (hist, kern) = ("histogram:power:0.5", "kernel:exponential:sqrt_log");
    let a_hist = row(&rows, hist, n, Measure::Astuteness(HISTOGRAM_KAPPA)).mean;
    let a_kern = row(&rows, kern, n, Measure::Astuteness(HISTOGRAM_KAPPA)).mean;
    let acc_hist = row(&rows, hist, n, Measure::Accuracy).mean;
    let pass = (bayes - 0.9).abs() < 1e-12 && a_kern - a_hist >= HISTOGRAM_GAP && within(acc_hist, bayes, HISTOGRAM_ACC_TOL);
    Outcome::new(
        pass,
        format!(
            "n={n}: histogram astuteness={a_hist:.4} kernel={a_kern:.4} gap={:.4} (need >= {HISTOGRAM_GAP}); histogram accuracy={acc_hist:.4} vs Bayes {bayes}",
            a_kern - a_hist
        ),
    )
}

/// Dense samples of a primitive, for distance-by-enumeration.
fn dense(p: &Primitive<f64>) -> Vec<Vec<f64>> {
    match p {
        Primitive::SinglePoint(q) => vec![q.coords().to_vec()],
        Primitive::Segment { a, b } => (0..=ORACLE_SAMPLES)
            .map(|i| {
                let t = i as f64 / ORACLE_SAMPLES as f64;
                a.coords().iter().zip(b.coords()).map(|(u, v)| u + t * (v - u)).collect()
            })
            .collect(),
        Primitive::Circle { center, radius } => (0..ORACLE_SAMPLES)
            .map(|i| {
                let t = i as f64 / ORACLE_SAMPLES as f64 * std::f64::consts::TAU;
                vec![center.coords()[0] + radius * t.cos(), center.coords()[1] + radius * t.sin()]
            })
            .collect(),
    }
}

fn euclid(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt()
}

fn region_oracle() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(0);
    let dists = [Distribution64::line(), Distribution64::two_circles(), Distribution64::two_segments()];
    let clouds: Vec<[Vec<Vec<f64>>; 2]> = dists
        .iter()
        .map(|d| {
            let opp = |sets: Vec<&nbrobust::SupportSet<f64>>| -> Vec<Vec<f64>> {
                sets.iter().flat_map(|s| s.primitives().iter().flat_map(dense)).collect()
            };
            [
                opp(vec![d.neg_support(), d.half_support()]),
                opp(vec![d.pos_support(), d.half_support()]),
            ]
        })
        .collect();
    let (mut agree, mut total, mut off_band, mut inside) = (0usize, 0usize, 0usize, 0usize);
    let per_anchor = 20;
    let mut seed = 0;
    while total < REGION_QUERIES {
        let which = rng.random_range(0..dists.len());
        let dist = &dists[which];
        seed += 1;
        let anchor = dist.sample(1, seed).unwrap().samples()[0].point.clone();
        let side = dist.bayes_label(anchor.coords()).unwrap();
        let kappa = rng.random_range(0.05..0.95);
        let region = make_region(dist, &anchor, kappa).unwrap();
        if region.is_degenerate() {
            continue;
        }
        let bbox = region.bounding_box().unwrap();
        let cloud = &clouds[which][usize::from(side == Label::Negative)];
        for _ in 0..per_anchor {
            let q: Vec<f64> = (0..bbox.dim())
                .map(|j| {
                    let w = bbox.hi[j] - bbox.lo[j];
                    rng.random_range(bbox.lo[j] - 0.2 * w..=bbox.hi[j] + 0.2 * w)
                })
                .collect();
            let d_opp = cloud.iter().map(|c| euclid(c, &q)).fold(f64::INFINITY, f64::min);
            let rho = euclid(anchor.coords(), &q);
            let oracle = rho < kappa * d_opp;
            let ours = region.contains(&q);
            total += 1;
            inside += usize::from(oracle);
            if oracle == ours {
                agree += 1;
            } else if (rho - kappa * d_opp).abs() > BOUNDARY_BAND {
                off_band += 1;
            }
        }
    }
    let rate = agree as f64 / total as f64;

    // every point of [x, 2x/3 + 1/6] lies in the kappa = 1/2 region of x < 1/2 on the line
    let line = Distribution64::line();
    let mut missing = 0;
    for _ in 0..INCLUSION_ANCHORS {
        let x = rng.random_range(0.0..0.5);
        let end = 2.0 * x / 3.0 + 1.0 / 6.0;
        let region = make_region(&line, &Point64::new(vec![x]).unwrap(), 0.5).unwrap();
        missing += (0..INCLUSION_POINTS)
            .map(|i| x + (end - x) * i as f64 / INCLUSION_POINTS as f64)
            .filter(|&q| !region.contains(&[q]))
            .count();
    }
    Outcome::new(
        rate >= REGION_AGREEMENT && off_band == 0 && missing == 0,
        format!(
            "agreement {agree}/{total} = {rate:.6} ({inside} inside), {off_band} disagreements off the boundary band; inclusion misses {missing}/{}",
            INCLUSION_ANCHORS * INCLUSION_POINTS
        ),
    )
}

fn random_family(rng: &mut ChaCha8Rng) -> ClassifierFamily {
    let h = rng.random_range(0.03..0.2);
    let choices = [
        format!("kernel:exponential:fixed:{h}"),
        format!("kernel:gaussian:fixed:{h}"),
        format!("kernel:polynomial:fixed:{h}"),
        "kernel:exponential:sqrt_log".to_string(),
        format!("knn:fixed:{}", rng.random_range(1..6)),
        "knn:power:0.5".to_string(),
        "histogram:power:0.5".to_string(),
    ];
    choices[rng.random_range(0..choices.len())].parse().unwrap()
}

fn certifier_fuzz() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let dists = [Distribution64::line(), Distribution64::two_circles(), Distribution64::two_segments()];
    let (mut certified, mut flips, mut tried, mut points) = (0usize, 0usize, 0usize, 0usize);
    let mut by_method = std::collections::BTreeMap::new();
    let mut seed = 100;
    while certified < FUZZ_CERTIFIED {
        let dist = &dists[rng.random_range(0..dists.len())];
        let family = random_family(&mut rng);
        let d = dist.dim();
        let n = rng.random_range(10..if d == 1 { 200 } else { 80 });
        seed += 1;
        let Ok(clf) = FittedClassifier::fit(family, dist.sample(n, seed).unwrap()) else { continue };
        let test_set = dist.sample(1, seed + 1_000_000).unwrap();
        let test = &test_set.samples()[0];
        let kappa = rng.random_range(0.05..if d == 1 { 0.95 } else { 0.5 });
        let step = if d == 1 { 0.01 } else { 0.02 };
        tried += 1;
        let res = certify_astute(&clf, dist, &test.point, test.label, kappa, step).unwrap();
        if !res.astute {
            continue;
        }
        certified += 1;
        *by_method.entry(format!("{:?}", res.method)).or_insert(0usize) += 1;
        let region = make_region(dist, &test.point, kappa).unwrap();
        let fine = region.grid(step / FUZZ_REFINE as f64).unwrap();
        points += fine.len();
        flips += fine.iter().filter(|q| clf.predict(q.coords()) != res.label).count();
    }

    let mut verdicts = 0;
    let (mut sign_changes, mut samples) = (0usize, 0usize);
    while verdicts < FLIP_VERDICTS {
        seed += 1;
        let h = rng.random_range(0.05..0.3);
        let kind = ["exponential", "gaussian", "polynomial"][rng.random_range(0..3)];
        let family: ClassifierFamily = format!("kernel:{kind}:fixed:{h}").parse().unwrap();
        let dist = &dists[rng.random_range(1..dists.len())];
        let clf = FittedClassifier::fit(family, dist.sample(rng.random_range(5..60), seed).unwrap()).unwrap();
        let d = dist.dim();
        let x: Vec<f64> = (0..d).map(|_| rng.random_range(-1.2..1.2)).collect();
        let radius = rng.random_range(0.0..0.1);
        if kernel_flip_bound(&clf, &x, radius).unwrap() != FlipVerdict::Certified {
            continue;
        }
        verdicts += 1;
        let at = clf.predict(&x);
        for i in 0..FLIP_SAMPLES {
            let mut dir: Vec<f64> = (0..d).map(|_| rng.random_range(-1.0..1.0)).collect();
            let norm = dir.iter().map(|v| v * v).sum::<f64>().sqrt().max(1e-12);
            // every tenth sample sits on the sphere itself
            let r = if i % 10 == 0 { radius } else { radius * rng.random_range(0.0f64..1.0).powf(1.0 / d as f64) };
            dir.iter_mut().for_each(|v| *v *= r / norm);
            let q: Vec<f64> = x.iter().zip(&dir).map(|(a, b)| a + b).collect();
            samples += 1;
            sign_changes += usize::from(clf.predict(&q) != at);
        }
    }
    Outcome::new(
        flips == 0 && sign_changes == 0,
        format!(
            "{certified} astute of {tried} cases {by_method:?}, {flips} flips on {points} finer grid points (max {MAX_REFINEMENTS} refinements); {verdicts} certified flip bounds, {sign_changes} sign changes in {samples} samples"
        ),
    )
}

fn random_dataset(rng: &mut ChaCha8Rng, n: usize, d: usize) -> Dataset64 {
    let pts: Vec<Vec<f64>> = (0..n).map(|_| (0..d).map(|_| rng.random_range(-1.0..1.0)).collect()).collect();
    let refs: Vec<&[f64]> = pts.iter().map(|p| p.as_slice()).collect();
    let labels: Vec<Label> = (0..n).map(|_| if rng.random_bool(0.5) { Label::Positive } else { Label::Negative }).collect();
    Dataset64::from_points(&refs, &labels, rng.random()).unwrap()
}

fn property_suite() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let mut failures: Vec<String> = Vec::new();

    let (mut worst_sum, mut checked) = (0.0f64, 0);
    for _ in 0..300 {
        let d = rng.random_range(1..3);
        let n = rng.random_range(1..150);
        let ds = random_dataset(&mut rng, n, d);
        let family = random_family(&mut rng);
        let Ok(clf) = FittedClassifier::fit(family, ds.clone()) else { continue };
        let x: Vec<f64> = (0..d).map(|_| rng.random_range(-1.5..1.5)).collect();
        let w = clf.weights(&x);
        if !w.is_zero() {
            worst_sum = worst_sum.max((w.sum() - 1.0).abs());
            checked += 1;
        }
        let mut labels: Vec<Label> = ds.labels().collect();
        for i in (1..labels.len()).rev() {
            labels.swap(i, rng.random_range(0..=i));
        }
        let permuted = FittedClassifier::fit(family, ds.with_labels(&labels).unwrap()).unwrap();
        if permuted.weights(&x) != w {
            failures.push(format!("weights depend on labels for {family}"));
        }
    }
    if worst_sum > 1e-9 {
        failures.push(format!("weight sum off by {worst_sum:e}"));
    }

    for _ in 0..100 {
        let n = rng.random_range(1..=200);
        let d = rng.random_range(1..3);
        let ds = random_dataset(&mut rng, n, d);
        let k = rng.random_range(1..=n.min(15));
        let clf = FittedClassifier::fit(format!("knn:fixed:{k}").parse().unwrap(), ds.clone()).unwrap();
        let x: Vec<f64> = (0..d).map(|_| rng.random_range(-1.5..1.5)).collect();
        let keys = ds.tiebreak_keys();
        let mut order: Vec<usize> = (0..n).collect();
        let dist2 = |i: usize| euclid(ds.samples()[i].point.coords(), &x).powi(2);
        order.sort_by(|&a, &b| dist2(a).total_cmp(&dist2(b)).then(keys[a].total_cmp(&keys[b])));
        let mut chosen: Vec<usize> = clf.weights(&x).support();
        chosen.sort_unstable();
        let mut expected = order[..k].to_vec();
        expected.sort_unstable();
        if chosen != expected {
            failures.push(format!("k-NN selection differs from full sort at n={n} k={k}"));
        }
    }

    let circles = Distribution64::two_circles();
    let mut nest_violations = 0;
    for s in 0..200u64 {
        let anchor = circles.sample(1, 10_000 + s).unwrap().samples()[0].point.clone();
        let k1 = rng.random_range(0.05..0.9);
        let k2 = rng.random_range(k1..0.95);
        let (small, large) = (make_region(&circles, &anchor, k1).unwrap(), make_region(&circles, &anchor, k2).unwrap());
        for _ in 0..50 {
            let q = [rng.random_range(-2.0..2.0), rng.random_range(-2.0..2.0)];
            nest_violations += usize::from(small.contains(&q) && !large.contains(&q));
        }
    }
    if nest_violations > 0 {
        failures.push(format!("{nest_violations} region nesting violations"));
    }

    let mut reports = 0;
    for (family, dist) in [
        ("kernel:exponential:sqrt_log", Distribution64::two_circles()),
        ("knn:log_ceil:1", Distribution64::line()),
        ("histogram:power:0.5", Distribution64::two_segments()),
        ("knn:power:0.4", Distribution64::two_circles()),
    ] {
        let protocol = Protocol::new(300, 15, 2, 9);
        let kappas: &[f64] = if dist.dim() == 1 { &[0.1, 0.5, 0.9] } else { &[0.1, 0.3] };
        for r in empirical_astuteness_multi(family.parse().unwrap(), &dist, &protocol, kappas).unwrap() {
            reports += 1;
            if r.astuteness > r.accuracy || r.per_point.iter().any(|p| p.astute && !p.accurate_at_anchor) {
                failures.push(format!("astuteness above accuracy for {family}"));
            }
        }
    }

    let cfg = ExperimentConfig::parse(
        r#"
experiment = "convergence"
distribution = "two_circles"
classifiers = ["kernel:exponential:sqrt_log", "knn:log_ceil:1"]
n_schedule = [100, 300]
kappas = [0.1, 0.5]
test_points = 8
trials = 2
seed = 0
csv_path = "x.csv"
"#,
    )
    .unwrap();
    let first = write_csv(&run_convergence(&cfg).unwrap().rows);
    let second = write_csv(&run_convergence(&cfg).unwrap().rows);
    if first != second {
        failures.push("CSV bytes differ between identical runs".into());
    }

    Outcome::new(
        failures.is_empty(),
        if failures.is_empty() {
            format!("{checked} weight vectors (max |sum-1| = {worst_sum:.1e}), 100 k-NN sorts, 10000 nesting queries, {reports} reports, CSV byte-identical")
        } else {
            failures.join("; ")
        },
    )
}

/// Exact mass of a closed ball under a distribution, from segment and arc lengths.
fn ball_mass_oracle(dist: &Distribution64, x: &[f64], r: f64) -> f64 {
    let part = |set: &nbrobust::SupportSet<f64>| -> f64 {
        let prims = set.primitives();
        let lengths: Vec<f64> = prims.iter().map(prim_length).collect();
        let total: f64 = lengths.iter().sum();
        if total == 0.0 {
            let points = prims.len() as f64;
            return prims.iter().filter(|p| prim_length(p) == 0.0 && point_dist(p, x) <= r).count() as f64 / points;
        }
        prims.iter().map(|p| inside_length(p, x, r)).sum::<f64>() / total
    };
    dist.pos_weight() * part(dist.pos_support()) + dist.neg_weight() * part(dist.neg_support())
}

fn prim_length(p: &Primitive<f64>) -> f64 {
    match p {
        Primitive::SinglePoint(_) => 0.0,
        Primitive::Segment { a, b } => euclid(a.coords(), b.coords()),
        Primitive::Circle { radius, .. } => std::f64::consts::TAU * radius,
    }
}

fn point_dist(p: &Primitive<f64>, x: &[f64]) -> f64 {
    match p {
        Primitive::SinglePoint(q) => euclid(q.coords(), x),
        _ => f64::INFINITY,
    }
}

fn inside_length(p: &Primitive<f64>, x: &[f64], r: f64) -> f64 {
    match p {
        Primitive::SinglePoint(_) => 0.0,
        Primitive::Segment { a, b } => {
            // |a + t (b - a) - x|^2 <= r^2 for t in [0, 1]
            let (a, b) = (a.coords(), b.coords());
            let u: Vec<f64> = a.iter().zip(b).map(|(p, q)| q - p).collect();
            let w: Vec<f64> = a.iter().zip(x).map(|(p, q)| p - q).collect();
            let qa: f64 = u.iter().map(|v| v * v).sum();
            let qb: f64 = 2.0 * u.iter().zip(&w).map(|(p, q)| p * q).sum::<f64>();
            let qc: f64 = w.iter().map(|v| v * v).sum::<f64>() - r * r;
            let disc = qb * qb - 4.0 * qa * qc;
            if disc < 0.0 {
                return 0.0;
            }
            let (t0, t1) = ((-qb - disc.sqrt()) / (2.0 * qa), (-qb + disc.sqrt()) / (2.0 * qa));
            (t1.min(1.0) - t0.max(0.0)).max(0.0) * qa.sqrt()
        }
        Primitive::Circle { center, radius } => {
            let dc = euclid(center.coords(), x);
            if dc + radius <= r {
                return std::f64::consts::TAU * radius;
            }
            if dc == 0.0 {
                return 0.0;
            }
            let c = (dc * dc + radius * radius - r * r) / (2.0 * dc * radius);
            2.0 * c.clamp(-1.0, 1.0).acos() * radius
        }
    }
}

fn analysis_checks() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut failures: Vec<String> = Vec::new();
    let line = Distribution64::line();

    let mut worst_rel = 0.0f64;
    for (i, n) in [10usize, 57, 250, 1000, 1025, 4096, 5000, 20_000].into_iter().enumerate() {
        for schedule in ["knn:log_ceil:1", "knn:power:0.4"] {
            let clf = FittedClassifier::fit(schedule.parse().unwrap(), line.sample(n, 40 + i as u64).unwrap()).unwrap();
            let k = clf.k().unwrap();
            let est = estimate_condition3(&clf, &line, knn_rate(1, k, n), 11).unwrap().value;
            let closed = ((n as f64).ln() / k as f64).sqrt();
            worst_rel = worst_rel.max((est - closed).abs() / closed);
        }
    }
    if worst_rel > 4.0 * f64::EPSILON {
        failures.push(format!("condition 3 off the closed form by {worst_rel:e}"));
    }

    let (mut worst_knn, mut worst_kernel) = (0.0f64, 0.0f64);
    for _ in 0..60 {
        let n = rng.random_range(1..=SPLIT_MAX_N);
        let ds = random_dataset(&mut rng, n, 1);
        let knn = FittedClassifier::fit(format!("knn:fixed:{}", rng.random_range(1..=n)).parse().unwrap(), ds.clone()).unwrap();
        let t = splitting_number_bruteforce(&knn, SPLIT_MAX_N).unwrap().count as f64;
        worst_knn = worst_knn.max(t / (2.0 * ((n + 1) as f64).powi(3)));
        let h = rng.random_range(0.05..1.0);
        let kernel = FittedClassifier::fit(format!("kernel:gaussian:fixed:{h}").parse().unwrap(), ds).unwrap();
        let t = splitting_number_bruteforce(&kernel, SPLIT_MAX_N).unwrap().count as f64;
        worst_kernel = worst_kernel.max(t / ((n * (n + 1) / 2 + n + 1) as f64));
    }
    if worst_knn > 1.0 || worst_kernel > 1.0 {
        failures.push(format!("splitting bound exceeded: knn ratio {worst_knn}, kernel ratio {worst_kernel}"));
    }

    let dists = [Distribution64::line(), Distribution64::two_circles(), Distribution64::two_segments()];
    let mut short = 0;
    for _ in 0..RADIUS_CASES {
        let dist = &dists[rng.random_range(0..dists.len())];
        let x: Vec<f64> = (0..dist.dim()).map(|_| rng.random_range(-1.5..1.5)).collect();
        let p = rng.random_range(1e-3..=1.0);
        let r = probability_radius(dist, &x, p).unwrap();
        short += usize::from(ball_mass_oracle(dist, &x, r + RADIUS_SLACK) < p);
    }
    if short > 0 {
        failures.push(format!("{short} probability radii too small"));
    }

    Outcome::new(
        failures.is_empty(),
        if failures.is_empty() {
            format!(
                "condition 3 max rel err {worst_rel:.1e}; splitting ratios knn {worst_knn:.3} kernel {worst_kernel:.3}; {RADIUS_CASES} radii hold mass"
            )
        } else {
            failures.join("; ")
        },
    )
}

/// The thresholds above are also recorded in configs/expected.toml.
fn check_expected_file() {
    let text = std::fs::read_to_string(config_path("expected.toml")).expect("expected.toml");
    let t: toml::Table = text.parse().expect("expected.toml parses");
    let get = |section: &str, key: &str| t[section][key].as_float().unwrap_or_else(|| panic!("{section}.{key}"));
    let pinned = [
        (get("convergence", "target_accuracy"), CONVERGENCE_TARGET),
        (get("convergence", "tolerance"), CONVERGENCE_TOL),
        (get("convergence", "polynomial_kappa_gap"), POLYNOMIAL_KAPPA_GAP),
        (get("lower_bound", "bayes_accuracy"), LINE_BAYES_ACCURACY),
        (get("lower_bound", "accuracy_tolerance"), LOWER_BOUND_ACC_TOL),
        (get("lower_bound", "min_gap"), LOWER_BOUND_MIN_GAP),
        (get("histogram_demo", "kappa"), HISTOGRAM_KAPPA),
        (get("histogram_demo", "min_gap"), HISTOGRAM_GAP),
        (get("histogram_demo", "accuracy_tolerance"), HISTOGRAM_ACC_TOL),
        (get("region_oracle", "min_agreement"), REGION_AGREEMENT),
        (get("region_oracle", "boundary_band"), BOUNDARY_BAND),
    ];
    for (i, (file, code)) in pinned.iter().enumerate() {
        assert_eq!(file, code, "threshold {i} differs between expected.toml and this file");
    }
}

fn main() {
    check_expected_file();
    let criteria: [(&str, fn() -> Outcome); 8] = [
        ("exponential kernel converges on two circles", exponential_convergence),
        ("polynomial kernel degrades with kappa", polynomial_degradation),
        ("slowly growing k leaves a persistent astuteness gap", lower_bound_gap),
        ("histogram accurate but not astute", histogram_failure),
        ("region membership matches brute force", region_oracle),
        ("certificates survive finer checks", certifier_fuzz),
        ("property suite", property_suite),
        ("analysis checks", analysis_checks),
    ];
    let selected: Vec<usize> = std::env::args().skip(1).filter_map(|a| a.parse().ok()).collect();
    let mut failed = Vec::new();
    for (i, (name, check)) in criteria.iter().enumerate() {
        let id = i + 1;
        if !selected.is_empty() && !selected.contains(&id) {
            continue;
        }
        let start = Instant::now();
        let outcome = check();
        println!(
            "criterion {id} [{}] {name}: {} ({:.1}s)",
            if outcome.pass { "PASS" } else { "FAIL" },
            outcome.detail,
            start.elapsed().as_secs_f64()
        );
        if !outcome.pass {
            failed.push(id);
        }
    }
    if !failed.is_empty() {
        println!("failed criteria: {failed:?}");
        std::process::exit(1);
    }
}
