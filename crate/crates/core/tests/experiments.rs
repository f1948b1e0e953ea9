use nbrobust::experiment::{
    certify_point, emit_plot, parse_csv, run_conditions, run_convergence, run_experiment, run_histogram_demo,
    run_lower_bound, write_csv, ExperimentConfig, ExperimentError, Measure, PlotLayout, ResultRow,
};
use nbrobust::Label;

fn config(text: &str) -> ExperimentConfig {
    ExperimentConfig::parse(text).unwrap()
}

const SMALL_CONVERGENCE: &str = r#"
experiment = "convergence"
distribution = "two_circles"
classifiers = ["kernel:exponential:sqrt_log", "knn:log_ceil:1"]
n_schedule = [100, 200]
kappas = [0.1, 0.5]
test_points = 6
trials = 2
grid_step = 0.02
seed = 11
csv_path = "c.csv"
plot_path = "c.svg"
"#;

fn accuracy_bounds_astuteness(rows: &[ResultRow]) {
    for r in rows.iter().filter(|r| matches!(r.measure, Measure::Astuteness(_))) {
        let acc = rows
            .iter()
            .find(|a| a.classifier == r.classifier && a.n == r.n && a.measure == Measure::Accuracy)
            .expect("accuracy row for every cell");
        assert!(r.mean <= acc.mean + 1e-12, "{r:?} above {acc:?}");
    }
}

#[test]
fn convergence_csv_is_byte_deterministic() {
    let cfg = config(SMALL_CONVERGENCE);
    let first = write_csv(&run_convergence(&cfg).unwrap().rows);
    let second = write_csv(&run_convergence(&cfg).unwrap().rows);
    assert_eq!(first, second);
    let single = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap();
    let serial = single.install(|| write_csv(&run_convergence(&cfg).unwrap().rows));
    assert_eq!(first, serial);

    let rows = parse_csv(&first).unwrap();
    // accuracy plus two kappas for each (classifier, n)
    assert_eq!(rows.len(), 2 * 2 * 3);
    accuracy_bounds_astuteness(&rows);
    assert!(rows.iter().all(|r| r.trials == 2 && r.seed == 11 && r.wall_time_ms == 0));
    let svg = emit_plot(&rows, &PlotLayout::astuteness("convergence")).unwrap();
    assert_eq!(svg.matches("<polyline").count(), 6);
}

#[test]
fn seed_changes_the_draws() {
    let a = config(SMALL_CONVERGENCE);
    let mut b = a.clone();
    b.seed = 12;
    let ra = run_convergence(&a).unwrap().rows;
    let rb = run_convergence(&b).unwrap().rows;
    assert_ne!(write_csv(&ra), write_csv(&rb));
}

#[test]
fn lower_bound_rows_for_both_schedules() {
    let cfg = config(
        r#"
experiment = "lower-bound"
distribution = "line"
classifiers = ["knn:log_ceil:1", "knn:power:0.4"]
n_schedule = [500, 2000]
kappas = [0.5]
test_points = 200
trials = 2
seed = 0
csv_path = "lb.csv"
"#,
    );
    let rows = run_lower_bound(&cfg).unwrap().rows;
    assert_eq!(rows.len(), 2 * 2 * 2);
    accuracy_bounds_astuteness(&rows);
    assert!(rows.iter().all(|r| r.experiment_id == "lower-bound"));

    let mut kernel = cfg.clone();
    kernel.classifiers.push("kernel:exponential:sqrt_log".into());
    assert!(matches!(run_lower_bound(&kernel), Err(ExperimentError::Config(_))));
}

#[test]
fn histogram_demo_separates_families() {
    let cfg = config(
        r#"
experiment = "histogram-demo"
distribution = "two_segments"
classifiers = ["histogram:power:0.5", "kernel:exponential:sqrt_log"]
n_schedule = [2000]
kappas = [0.5, 0.9]
test_points = 60
trials = 2
seed = 5
csv_path = "h.csv"
"#,
    );
    let rows = run_histogram_demo(&cfg).unwrap().rows;
    accuracy_bounds_astuteness(&rows);
    let get = |c: &str, m: Measure| rows.iter().find(|r| r.classifier == c && r.measure == m).unwrap().mean;
    let hist = get("histogram:power:0.5", Measure::Astuteness(0.9));
    let kern = get("kernel:exponential:sqrt_log", Measure::Astuteness(0.9));
    // positive anchors' regions reach past the histogram's root cell
    assert!(hist < kern - 0.2, "histogram {hist} kernel {kern}");
    assert!(get("histogram:power:0.5", Measure::Accuracy) > 0.75);
}

#[test]
fn conditions_rows_match_closed_form() {
    let cfg = config(
        r#"
experiment = "conditions"
distribution = "line"
classifiers = ["knn:log_ceil:1", "knn:power:0.4"]
n_schedule = [250, 1000, 5000]
trials = 2
seed = 0
condition_grid = 101
csv_path = "cond.csv"
"#,
    );
    let rows = run_conditions(&cfg).unwrap().rows;
    assert_eq!(rows.len(), 2 * 3 * 2);
    for r in rows.iter().filter(|r| r.measure == Measure::Cond3) {
        let n = r.n as f64;
        let k = if r.classifier == "knn:power:0.4" { n.powf(0.4).ceil() } else { n.log2().ceil() };
        let expected = (n.ln() / k).sqrt();
        assert!((r.mean - expected).abs() < 1e-12, "{r:?} vs {expected}");
        assert_eq!(r.std, 0.0);
    }
    let power: Vec<f64> = rows
        .iter()
        .filter(|r| r.classifier == "knn:power:0.4" && r.measure == Measure::Cond3)
        .map(|r| r.mean)
        .collect();
    assert!(power.windows(2).all(|w| w[1] < w[0]));
    let cond2 = rows
        .iter()
        .find(|r| r.classifier == "knn:power:0.4" && r.n == 5000 && r.measure == Measure::Cond2 { p: 0.2 })
        .unwrap();
    assert!(cond2.mean < 0.01);

    let mut kernel = cfg.clone();
    kernel.classifiers = vec!["kernel:exponential:sqrt_log".into()];
    assert!(matches!(kernel.validate(), Err(ExperimentError::Config(_))));
}

#[test]
fn run_dispatch_checks_kind() {
    let cfg = config(SMALL_CONVERGENCE);
    let e = run_lower_bound(&cfg).unwrap_err();
    assert_eq!(e.exit_code(), 1);
    assert!(e.to_string().contains("convergence"));
    assert_eq!(run_experiment(&cfg).unwrap().rows, run_convergence(&cfg).unwrap().rows);
}

#[test]
fn single_point_certification() {
    let cfg = config(SMALL_CONVERGENCE);
    let r = certify_point(&cfg, &[0.0, 1.0], 0.1, None).unwrap();
    assert_eq!(r.label, Label::Positive);
    assert!(r.flip_bound_used);
    // the inner circle's center is off the support
    let e = certify_point(&cfg, &[0.5, 0.0], 0.1, None).unwrap_err();
    assert_eq!(e.exit_code(), 2);
}
