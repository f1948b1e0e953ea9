//! Experiment configuration files.
//!
//! A config is a flat TOML document. Unknown keys are rejected, and parse
//! errors carry the offending line and key.

use std::path::Path;

use serde::{Deserialize, Serialize};

use super::ExperimentError;
use crate::classifiers::ClassifierFamily;
use crate::distributions::{DataDistribution, EtaKind, Point, Primitive, SupportSet};

/// Which study to run.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ExperimentKind {
    Convergence,
    LowerBound,
    HistogramDemo,
    Conditions,
}

impl ExperimentKind {
    pub fn id(self) -> &'static str {
        match self {
            ExperimentKind::Convergence => "convergence",
            ExperimentKind::LowerBound => "lower-bound",
            ExperimentKind::HistogramDemo => "histogram-demo",
            ExperimentKind::Conditions => "conditions",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DistributionKind {
    Line,
    TwoCircles,
    TwoSegments,
    /// Built from the `*_primitives`, `pos_weight`, `label_noise` and `eta` keys.
    Custom,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EtaSetting {
    /// `eta(x) = x` on the line.
    Identity,
    /// `1 - noise` on the positive support, `noise` on the negative one.
    Noise,
}

/// One experiment, as read from a config file.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub experiment: ExperimentKind,
    pub distribution: DistributionKind,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub pos_primitives: Vec<String>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub neg_primitives: Vec<String>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub half_primitives: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub pos_weight: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub label_noise: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub eta: Option<EtaSetting>,
    /// Classifier strings such as `kernel:exponential:sqrt_log`.
    pub classifiers: Vec<String>,
    pub n_schedule: Vec<usize>,
    #[serde(default = "default_kappas")]
    pub kappas: Vec<f64>,
    #[serde(default = "default_test_points")]
    pub test_points: usize,
    #[serde(default = "default_trials")]
    pub trials: usize,
    #[serde(default = "default_grid_step")]
    pub grid_step: f64,
    pub seed: u64,
    pub csv_path: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub plot_path: Option<String>,
    /// Probability level of the weight-locality estimate.
    #[serde(default = "default_condition_p")]
    pub condition_p: f64,
    /// Query grid points per axis for condition estimates.
    #[serde(default = "default_condition_grid")]
    pub condition_grid: usize,
    /// Write measured wall time instead of 0 (makes the CSV non-reproducible).
    #[serde(default)]
    pub record_wall_time: bool,
}

fn default_kappas() -> Vec<f64> {
    vec![0.1, 0.3, 0.5]
}

fn default_test_points() -> usize {
    20
}

fn default_trials() -> usize {
    3
}

fn default_grid_step() -> f64 {
    0.01
}

fn default_condition_p() -> f64 {
    0.2
}

fn default_condition_grid() -> usize {
    201
}

fn config_err(field: &str, msg: impl std::fmt::Display) -> ExperimentError {
    ExperimentError::Config(format!("{field}: {msg}"))
}

fn strictly_increasing<V: PartialOrd>(v: &[V]) -> bool {
    v.windows(2).all(|w| w[0] < w[1])
}

impl ExperimentConfig {
    pub fn parse(text: &str) -> Result<Self, ExperimentError> {
        let cfg: Self = toml::from_str(text).map_err(|e| ExperimentError::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self, ExperimentError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| ExperimentError::Config(format!("{}: {e}", path.display())))?;
        Self::parse(&text).map_err(|e| match e {
            ExperimentError::Config(m) => ExperimentError::Config(format!("{}: {m}", path.display())),
            other => other,
        })
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    pub fn validate(&self) -> Result<(), ExperimentError> {
        if self.classifiers.is_empty() {
            return Err(config_err("classifiers", "at least one classifier is required"));
        }
        for c in &self.classifiers {
            c.parse::<ClassifierFamily>().map_err(|e| config_err("classifiers", e))?;
        }
        if self.n_schedule.is_empty() || !strictly_increasing(&self.n_schedule) {
            return Err(config_err("n_schedule", "must be non-empty and strictly increasing"));
        }
        if self.n_schedule[0] < 2 {
            return Err(config_err("n_schedule", "sample sizes must be at least 2"));
        }
        if self.experiment != ExperimentKind::Conditions {
            if self.kappas.is_empty() || !strictly_increasing(&self.kappas) {
                return Err(config_err("kappas", "must be non-empty and strictly increasing"));
            }
            if self.kappas.iter().any(|&k| !(k > 0.0 && k < 1.0)) {
                return Err(config_err("kappas", "values must lie in (0, 1)"));
            }
        }
        if self.test_points == 0 {
            return Err(config_err("test_points", "must be at least 1"));
        }
        if self.trials == 0 {
            return Err(config_err("trials", "must be at least 1"));
        }
        if !(self.grid_step > 0.0 && self.grid_step.is_finite()) {
            return Err(config_err("grid_step", "must be positive"));
        }
        if !(self.condition_p > 0.0 && self.condition_p < 1.0) {
            return Err(config_err("condition_p", "must lie in (0, 1)"));
        }
        if self.condition_grid < 2 {
            return Err(config_err("condition_grid", "must be at least 2"));
        }
        if self.experiment == ExperimentKind::Conditions {
            for c in self.families()? {
                if matches!(c, ClassifierFamily::Kernel(_)) {
                    return Err(config_err("classifiers", "condition estimates need k-NN or histogram classifiers"));
                }
            }
        }
        self.distribution_f64()?;
        Ok(())
    }

    pub fn families(&self) -> Result<Vec<ClassifierFamily>, ExperimentError> {
        self.classifiers
            .iter()
            .map(|c| c.parse().map_err(|e| config_err("classifiers", e)))
            .collect()
    }

    /// The configured distribution in double precision.
    pub fn distribution_f64(&self) -> Result<DataDistribution<f64>, ExperimentError> {
        let custom_keys = !self.pos_primitives.is_empty()
            || !self.neg_primitives.is_empty()
            || !self.half_primitives.is_empty()
            || self.pos_weight.is_some()
            || self.label_noise.is_some()
            || self.eta.is_some();
        match self.distribution {
            DistributionKind::Custom => {}
            _ if custom_keys => {
                return Err(config_err("distribution", "primitive and weight keys require `distribution = \"custom\"`"))
            }
            DistributionKind::Line => return Ok(DataDistribution::line()),
            DistributionKind::TwoCircles => return Ok(DataDistribution::two_circles()),
            DistributionKind::TwoSegments => return Ok(DataDistribution::two_segments()),
        }
        let set = |field: &str, specs: &[String]| -> Result<SupportSet<f64>, ExperimentError> {
            let prims = specs
                .iter()
                .map(|s| parse_primitive(s).map_err(|e| config_err(field, e)))
                .collect::<Result<Vec<_>, _>>()?;
            SupportSet::new(prims).map_err(|e| config_err(field, e))
        };
        let eta = match self.eta.unwrap_or(EtaSetting::Noise) {
            EtaSetting::Identity => EtaKind::Identity,
            EtaSetting::Noise => EtaKind::PiecewiseConstantFromNoise,
        };
        DataDistribution::new(
            set("pos_primitives", &self.pos_primitives)?,
            set("neg_primitives", &self.neg_primitives)?,
            set("half_primitives", &self.half_primitives)?,
            self.pos_weight.unwrap_or(0.5),
            self.label_noise.unwrap_or(0.0),
            eta,
        )
        .map_err(|e| config_err("distribution", e))
    }
}

/// Parses `point x [y]`, `segment a b` (1-d), `segment ax ay bx by` (2-d) or `circle cx cy r`.
pub fn parse_primitive(spec: &str) -> Result<Primitive<f64>, String> {
    let mut parts = spec.split_whitespace();
    let kind = parts.next().ok_or_else(|| "empty primitive".to_string())?;
    let nums = parts
        .map(|t| t.parse::<f64>().map_err(|_| format!("bad number `{t}` in `{spec}`")))
        .collect::<Result<Vec<f64>, _>>()?;
    let pt = |c: &[f64]| Point::from_f64(c).map_err(|e| e.to_string());
    match (kind, nums.len()) {
        ("point", 1 | 2) => Ok(Primitive::point(pt(&nums)?)),
        ("segment", 2) => Primitive::segment(pt(&nums[..1])?, pt(&nums[1..])?).map_err(|e| e.to_string()),
        ("segment", 4) => Primitive::segment(pt(&nums[..2])?, pt(&nums[2..])?).map_err(|e| e.to_string()),
        ("circle", 3) => Primitive::circle(pt(&nums[..2])?, nums[2]).map_err(|e| e.to_string()),
        _ => Err(format!("unrecognized primitive `{spec}`")),
    }
}
