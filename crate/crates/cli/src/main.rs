use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use nbrobust::experiment::{self, ExperimentConfig, ExperimentError, ExperimentKind};
use nbrobust::Label;

#[derive(Parser)]
#[command(name = "nbrobust", version, about = "Astuteness experiments for non-parametric classifiers")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// Experiment config (TOML).
    #[arg(long)]
    config: PathBuf,
    /// Override the config seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Directory for output files; defaults to the paths in the config.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Worker threads (defaults to all cores).
    #[arg(long)]
    jobs: Option<usize>,
}

#[derive(Subcommand)]
enum Command {
    /// Astuteness and accuracy against n for several kappa values.
    Convergence(Common),
    /// k-NN schedules with and without a growing neighbor count.
    LowerBound(Common),
    /// Histogram against kernel astuteness on separated segments.
    HistogramDemo(Common),
    /// Weight-locality and weight-size condition estimates.
    Conditions(Common),
    /// Certify a single point with the config's first classifier.
    Certify {
        #[command(flatten)]
        common: Common,
        /// Comma-separated coordinates.
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true, required = true)]
        point: Vec<f64>,
        #[arg(long)]
        kappa: f64,
        /// +1 or -1; defaults to the Bayes label.
        #[arg(long, allow_hyphen_values = true)]
        label: Option<i32>,
    },
}

fn load(common: &Common) -> Result<ExperimentConfig, ExperimentError> {
    let mut cfg = ExperimentConfig::load(&common.config)?;
    if let Some(seed) = common.seed {
        cfg.seed = seed;
    }
    if let Some(jobs) = common.jobs {
        rayon::ThreadPoolBuilder::new()
            .num_threads(jobs.max(1))
            .build_global()
            .map_err(|e| ExperimentError::Config(format!("--jobs: {e}")))?;
    }
    Ok(cfg)
}

fn run_kind(common: &Common, kind: ExperimentKind) -> Result<(), ExperimentError> {
    let cfg = load(common)?;
    let run = match kind {
        ExperimentKind::Convergence => experiment::run_convergence(&cfg)?,
        ExperimentKind::LowerBound => experiment::run_lower_bound(&cfg)?,
        ExperimentKind::HistogramDemo => experiment::run_histogram_demo(&cfg)?,
        ExperimentKind::Conditions => experiment::run_conditions(&cfg)?,
    };
    for note in &run.notes {
        eprintln!("note: {note}");
    }
    for path in experiment::write_outputs(&cfg, &run, common.out.as_deref())? {
        eprintln!("wrote {}", path.display());
    }
    Ok(())
}

fn certify(common: &Common, point: &[f64], kappa: f64, label: Option<i32>) -> Result<(), ExperimentError> {
    let cfg = load(common)?;
    let label = match label {
        None => None,
        Some(1) => Some(Label::Positive),
        Some(-1) => Some(Label::Negative),
        Some(other) => return Err(ExperimentError::Config(format!("--label: expected +1 or -1, got {other}"))),
    };
    let r = experiment::certify_point(&cfg, point, kappa, label)?;
    println!("classifier: {}", cfg.classifiers[0]);
    println!("anchor: {:?}", r.anchor.coords());
    println!("label: {}", r.label);
    println!("method: {:?}", r.method);
    println!("accurate: {}", r.accurate_at_anchor);
    println!("robust: {}", r.robust);
    println!("astute: {}", r.astute);
    if let Some(c) = &r.counterexample {
        println!("counterexample: {:?}", c.coords());
    }
    if r.refinement_exhausted {
        println!("inconclusive after {} refinements", r.refined_steps);
    }
    println!("grid points checked: {}", r.grid_points_checked);
    Ok(())
}

fn main() -> ExitCode {
    // usage errors count as configuration errors
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    let result = match &cli.command {
        Command::Convergence(c) => run_kind(c, ExperimentKind::Convergence),
        Command::LowerBound(c) => run_kind(c, ExperimentKind::LowerBound),
        Command::HistogramDemo(c) => run_kind(c, ExperimentKind::HistogramDemo),
        Command::Conditions(c) => run_kind(c, ExperimentKind::Conditions),
        Command::Certify { common, point, kappa, label } => certify(common, point, *kappa, *label),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
