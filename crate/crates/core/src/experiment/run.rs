//! Experiment runners.

use std::path::{Path, PathBuf};
use std::time::Instant;

use rayon::prelude::*;

use super::config::{ExperimentConfig, ExperimentKind};
use super::plot::{emit_plot, PlotLayout};
use super::rows::{sort_rows, write_csv, Measure, ResultRow};
use super::ExperimentError;
use crate::analysis::{estimate_condition2, estimate_condition3, knn_rate};
use crate::certification::{empirical_astuteness_multi, mean_std, certify_in_region, CertResult, Protocol, TestLabels};
use crate::classifiers::{ClassifierFamily, FittedClassifier};
use crate::distributions::{Label, Point};
use crate::regions::make_region;

/// Rows of one run plus diagnostics worth surfacing to the user.
#[derive(Clone, Debug, PartialEq)]
pub struct ExperimentRun {
    pub rows: Vec<ResultRow>,
    pub notes: Vec<String>,
}

fn expect_kind(cfg: &ExperimentConfig, kind: ExperimentKind) -> Result<(), ExperimentError> {
    if cfg.experiment != kind {
        return Err(ExperimentError::Config(format!(
            "experiment: config is for `{}`, not `{}`",
            cfg.experiment.id(),
            kind.id()
        )));
    }
    cfg.validate()
}

fn protocol(cfg: &ExperimentConfig, n: usize) -> Protocol<f64> {
    Protocol {
        n,
        test_points: cfg.test_points,
        trials: cfg.trials,
        seed: cfg.seed,
        step: cfg.grid_step,
        test_labels: TestLabels::Sampled,
    }
}

fn cells(cfg: &ExperimentConfig) -> Result<Vec<(ClassifierFamily, usize)>, ExperimentError> {
    let families = cfg.families()?;
    Ok(families
        .iter()
        .flat_map(|&f| cfg.n_schedule.iter().map(move |&n| (f, n)))
        .collect())
}

/// Accuracy and astuteness at every `(classifier, n)`; all `kappa` values
/// and the accuracy row share the same draws.
fn astuteness_sweep(cfg: &ExperimentConfig) -> Result<ExperimentRun, ExperimentError> {
    let dist = cfg.distribution_f64()?;
    let results = cells(cfg)?
        .into_par_iter()
        .map(|(family, n)| {
            let start = Instant::now();
            let reports = empirical_astuteness_multi(family, &dist, &protocol(cfg, n), &cfg.kappas)?;
            let wall = if cfg.record_wall_time { start.elapsed().as_millis() as u64 } else { 0 };
            let row = |measure, mean, std| ResultRow {
                experiment_id: cfg.experiment.id().into(),
                classifier: family.to_string(),
                n,
                measure,
                mean,
                std,
                trials: cfg.trials,
                seed: cfg.seed,
                wall_time_ms: wall,
            };
            let mut rows = vec![row(Measure::Accuracy, reports[0].accuracy, reports[0].accuracy_std)];
            let mut notes = Vec::new();
            for r in &reports {
                let kappa = r.kappa.expect("astuteness report has kappa");
                rows.push(row(Measure::Astuteness(kappa), r.astuteness, r.astuteness_std));
                if r.exhausted_points() > 0 {
                    notes.push(format!(
                        "{family} n={n} kappa={kappa}: {} of {} points inconclusive after refinement",
                        r.exhausted_points(),
                        r.per_point.len()
                    ));
                }
                if r.grid_only_points() > 0 && kappa == cfg.kappas[0] {
                    notes.push(format!("{family} n={n}: robustness checked on the region grid only"));
                }
            }
            let r = &reports[0];
            if r.kernel_fallbacks > 0 {
                notes.push(format!("{family} n={n}: {} kernel queries fell back to 1-NN", r.kernel_fallbacks));
            }
            if r.saturated_leaves > 0 {
                notes.push(format!("{family} n={n}: {} histogram leaves hit the depth cap", r.saturated_leaves));
            }
            Ok((rows, notes))
        })
        .collect::<Result<Vec<_>, ExperimentError>>()?;
    let (mut rows, mut notes) = (Vec::new(), Vec::new());
    for (r, n) in results {
        rows.extend(r);
        notes.extend(n);
    }
    sort_rows(&mut rows);
    Ok(ExperimentRun { rows, notes })
}

pub fn run_convergence(cfg: &ExperimentConfig) -> Result<ExperimentRun, ExperimentError> {
    expect_kind(cfg, ExperimentKind::Convergence)?;
    astuteness_sweep(cfg)
}

pub fn run_lower_bound(cfg: &ExperimentConfig) -> Result<ExperimentRun, ExperimentError> {
    expect_kind(cfg, ExperimentKind::LowerBound)?;
    if cfg.families()?.iter().any(|f| !matches!(f, ClassifierFamily::Knn(_))) {
        return Err(ExperimentError::Config("classifiers: the lower-bound study compares k-NN schedules".into()));
    }
    astuteness_sweep(cfg)
}

pub fn run_histogram_demo(cfg: &ExperimentConfig) -> Result<ExperimentRun, ExperimentError> {
    expect_kind(cfg, ExperimentKind::HistogramDemo)?;
    astuteness_sweep(cfg)
}

/// Condition estimates per `(classifier, n)`, averaged over independent
/// training samples.
pub fn run_conditions(cfg: &ExperimentConfig) -> Result<ExperimentRun, ExperimentError> {
    expect_kind(cfg, ExperimentKind::Conditions)?;
    let dist = cfg.distribution_f64()?;
    let results = cells(cfg)?
        .into_par_iter()
        .map(|(family, n)| {
            let start = Instant::now();
            let p = protocol(cfg, n);
            let (mut c2, mut c3) = (Vec::new(), Vec::new());
            for trial in 0..cfg.trials {
                let clf = FittedClassifier::fit(family, p.training_set(&dist, trial)?)?;
                let k = clf.k().expect("k-NN or histogram");
                let t_n = knn_rate(clf.dim(), k, n);
                c2.push(estimate_condition2(&clf, &dist, cfg.condition_p, cfg.condition_grid)?.value);
                c3.push(estimate_condition3(&clf, &dist, t_n, cfg.condition_grid)?.value);
            }
            let wall = if cfg.record_wall_time { start.elapsed().as_millis() as u64 } else { 0 };
            let row = |measure, values: &[f64]| {
                let (mean, std) = mean_std(values);
                ResultRow {
                    experiment_id: cfg.experiment.id().into(),
                    classifier: family.to_string(),
                    n,
                    measure,
                    mean,
                    std,
                    trials: cfg.trials,
                    seed: cfg.seed,
                    wall_time_ms: wall,
                }
            };
            Ok(vec![row(Measure::Cond2 { p: cfg.condition_p }, &c2), row(Measure::Cond3, &c3)])
        })
        .collect::<Result<Vec<_>, ExperimentError>>()?;
    let mut rows: Vec<ResultRow> = results.into_iter().flatten().collect();
    sort_rows(&mut rows);
    Ok(ExperimentRun { rows, notes: Vec::new() })
}

pub fn run_experiment(cfg: &ExperimentConfig) -> Result<ExperimentRun, ExperimentError> {
    match cfg.experiment {
        ExperimentKind::Convergence => run_convergence(cfg),
        ExperimentKind::LowerBound => run_lower_bound(cfg),
        ExperimentKind::HistogramDemo => run_histogram_demo(cfg),
        ExperimentKind::Conditions => run_conditions(cfg),
    }
}

fn output_path(out_dir: Option<&Path>, configured: &str) -> PathBuf {
    match out_dir {
        Some(dir) => dir.join(Path::new(configured).file_name().unwrap_or(configured.as_ref())),
        None => PathBuf::from(configured),
    }
}

/// Writes the CSV and, when configured, the plot; returns the paths written.
pub fn write_outputs(
    cfg: &ExperimentConfig,
    run: &ExperimentRun,
    out_dir: Option<&Path>,
) -> Result<Vec<PathBuf>, ExperimentError> {
    let io = |p: &Path, e: std::io::Error| ExperimentError::Io(format!("{}: {e}", p.display()));
    let mut written = Vec::new();
    let csv_path = output_path(out_dir, &cfg.csv_path);
    if let Some(parent) = csv_path.parent().filter(|p| !p.as_os_str().is_empty()) {
        std::fs::create_dir_all(parent).map_err(|e| io(parent, e))?;
    }
    std::fs::write(&csv_path, write_csv(&run.rows)).map_err(|e| io(&csv_path, e))?;
    written.push(csv_path);
    if let Some(plot) = &cfg.plot_path {
        let layout = match cfg.experiment {
            ExperimentKind::Conditions => PlotLayout::conditions(cfg.experiment.id()),
            _ => PlotLayout::astuteness(cfg.experiment.id()),
        };
        let svg = emit_plot(&run.rows, &layout)?;
        let path = output_path(out_dir, plot);
        if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
            std::fs::create_dir_all(parent).map_err(|e| io(parent, e))?;
        }
        std::fs::write(&path, svg).map_err(|e| io(&path, e))?;
        written.push(path);
    }
    Ok(written)
}

/// Certifies one point against the first configured classifier, trained on
/// the trial-0 sample at the largest configured `n`. The label defaults to
/// the Bayes label.
pub fn certify_point(
    cfg: &ExperimentConfig,
    point: &[f64],
    kappa: f64,
    label: Option<Label>,
) -> Result<CertResult<f64>, ExperimentError> {
    cfg.validate()?;
    let dist = cfg.distribution_f64()?;
    let family = cfg.families()?[0];
    let n = *cfg.n_schedule.last().expect("non-empty schedule");
    let clf = FittedClassifier::fit(family, protocol(cfg, n).training_set(&dist, 0)?)?;
    let anchor = Point::from_f64(point)?;
    let label = match label {
        Some(l) => l,
        None => dist.bayes_label(anchor.coords())?,
    };
    let region = make_region(&dist, &anchor, kappa)?;
    Ok(certify_in_region(&clf, &region, label, cfg.grid_step)?)
}
