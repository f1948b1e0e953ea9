//! Repeated-trial estimates of astuteness and accuracy.

use rayon::prelude::*;

use super::{certify_in_region, CertMethod, CertResult};
use crate::classifiers::{ClassifierFamily, FittedClassifier};
use crate::distributions::{DataDistribution, Dataset, Label};
use crate::error::{Error, Result};
use crate::regions::make_region;
use crate::rng::derive_seed;
use crate::scalar::Scalar;

const TRAIN_STREAM: u64 = 0x7472_6169;
const TEST_STREAM: u64 = 0x7465_7374;

/// Which labels the test points carry.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum TestLabels {
    /// Labels drawn from the distribution.
    #[default]
    Sampled,
    /// The Bayes label at each test point.
    Bayes,
}

/// Sizes and seed of an evaluation run.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Protocol<T> {
    pub n: usize,
    pub test_points: usize,
    pub trials: usize,
    pub seed: u64,
    pub step: T,
    pub test_labels: TestLabels,
}

impl<T: Scalar> Protocol<T> {
    pub fn new(n: usize, test_points: usize, trials: usize, seed: u64) -> Self {
        Self {
            n,
            test_points,
            trials,
            seed,
            step: T::lit(super::DEFAULT_GRID_STEP),
            test_labels: TestLabels::Sampled,
        }
    }

    fn validate(&self) -> Result<()> {
        if self.test_points == 0 || self.trials == 0 {
            return Err(Error::InvalidParameter("test_points and trials must be at least 1".into()));
        }
        if !(self.step > T::zero()) {
            return Err(Error::InvalidParameter("grid step must be positive".into()));
        }
        Ok(())
    }

    /// Training sample of trial `t`; shared by every classifier run with this protocol.
    pub fn training_set(&self, dist: &DataDistribution<T>, trial: usize) -> Result<Dataset<T>> {
        dist.sample(self.n, derive_seed(self.seed, &[TRAIN_STREAM, self.n as u64, trial as u64]))
    }

    /// Test sample of trial `t`, labeled per [`Protocol::test_labels`].
    pub fn test_set(&self, dist: &DataDistribution<T>, trial: usize) -> Result<Dataset<T>> {
        let test = dist.sample(
            self.test_points,
            derive_seed(self.seed, &[TEST_STREAM, self.n as u64, trial as u64]),
        )?;
        match self.test_labels {
            TestLabels::Sampled => Ok(test),
            TestLabels::Bayes => {
                let labels = test
                    .samples()
                    .iter()
                    .map(|s| dist.bayes_label(&s.point))
                    .collect::<Result<Vec<Label>>>()?;
                test.with_labels(&labels)
            }
        }
    }
}

/// Per-point results and trial statistics for one `(classifier, n, kappa)` cell.
#[derive(Clone, Debug, PartialEq)]
pub struct AstutenessReport<T> {
    /// `None` for accuracy-only reports.
    pub kappa: Option<T>,
    pub per_point: Vec<CertResult<T>>,
    pub astuteness: f64,
    pub accuracy: f64,
    pub trials: usize,
    pub per_trial_astuteness: Vec<f64>,
    pub per_trial_accuracy: Vec<f64>,
    pub astuteness_std: f64,
    pub accuracy_std: f64,
    pub seed: u64,
    /// Kernel queries that fell back to nearest-neighbor weights.
    pub kernel_fallbacks: u64,
    /// Histogram leaves that hit the depth cap.
    pub saturated_leaves: usize,
}

impl<T: Scalar> AstutenessReport<T> {
    fn from_trials(kappa: Option<T>, trials: Vec<Vec<CertResult<T>>>, seed: u64, fallbacks: u64, saturated: usize) -> Self {
        let frac = |rs: &[CertResult<T>], f: fn(&CertResult<T>) -> bool| {
            rs.iter().filter(|r| f(r)).count() as f64 / rs.len() as f64
        };
        let per_trial_astuteness: Vec<f64> = trials.iter().map(|t| frac(t, |r| r.astute)).collect();
        let per_trial_accuracy: Vec<f64> = trials.iter().map(|t| frac(t, |r| r.accurate_at_anchor)).collect();
        let (astuteness, astuteness_std) = mean_std(&per_trial_astuteness);
        let (accuracy, accuracy_std) = mean_std(&per_trial_accuracy);
        Self {
            kappa,
            per_point: trials.into_iter().flatten().collect(),
            astuteness,
            accuracy,
            trials: per_trial_accuracy.len(),
            per_trial_astuteness,
            per_trial_accuracy,
            astuteness_std,
            accuracy_std,
            seed,
            kernel_fallbacks: fallbacks,
            saturated_leaves: saturated,
        }
    }

    /// Points whose robustness check ran out of refinements.
    pub fn exhausted_points(&self) -> usize {
        self.per_point.iter().filter(|r| r.refinement_exhausted).count()
    }

    /// Points certified by grid evaluation alone.
    pub fn grid_only_points(&self) -> usize {
        self.per_point.iter().filter(|r| r.method == CertMethod::GridOnly).count()
    }
}

/// Mean and sample standard deviation (zero for a single value).
pub(crate) fn mean_std(values: &[f64]) -> (f64, f64) {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    if values.len() < 2 || values.iter().all(|&v| v == values[0]) {
        return (mean, 0.0);
    }
    let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (n - 1.0);
    (mean, var.sqrt())
}

/// Astuteness at several `kappa` values, sharing training and test draws
/// across them so that the estimates are paired.
pub fn empirical_astuteness_multi<T: Scalar>(
    family: ClassifierFamily,
    dist: &DataDistribution<T>,
    protocol: &Protocol<T>,
    kappas: &[T],
) -> Result<Vec<AstutenessReport<T>>> {
    protocol.validate()?;
    let mut per_kappa: Vec<Vec<Vec<CertResult<T>>>> = vec![Vec::with_capacity(protocol.trials); kappas.len()];
    let (mut fallbacks, mut saturated) = (0, 0);
    for trial in 0..protocol.trials {
        let clf = FittedClassifier::fit(family, protocol.training_set(dist, trial)?)?;
        let test = protocol.test_set(dist, trial)?;
        let rows: Vec<Vec<CertResult<T>>> = test
            .samples()
            .par_iter()
            .map(|s| {
                kappas
                    .iter()
                    .map(|&kappa| {
                        let region = make_region(dist, &s.point, kappa)?;
                        certify_in_region(&clf, &region, s.label, protocol.step)
                    })
                    .collect::<Result<Vec<_>>>()
            })
            .collect::<Result<_>>()?;
        for (k, slot) in per_kappa.iter_mut().enumerate() {
            slot.push(rows.iter().map(|r| r[k].clone()).collect());
        }
        fallbacks += clf.kernel_fallbacks();
        saturated += clf.saturated_leaves();
    }
    Ok(per_kappa
        .into_iter()
        .zip(kappas)
        .map(|(trials, &kappa)| AstutenessReport::from_trials(Some(kappa), trials, protocol.seed, fallbacks, saturated))
        .collect())
}

/// Astuteness with the default grid step and sampled test labels.
pub fn empirical_astuteness<T: Scalar>(
    family: ClassifierFamily,
    dist: &DataDistribution<T>,
    n: usize,
    kappa: T,
    test_points: usize,
    trials: usize,
    seed: u64,
) -> Result<AstutenessReport<T>> {
    let protocol = Protocol::new(n, test_points, trials, seed);
    Ok(empirical_astuteness_multi(family, dist, &protocol, &[kappa])?.remove(0))
}

/// Plain accuracy over the same draws; robustness fields are trivially true.
pub fn empirical_accuracy<T: Scalar>(
    family: ClassifierFamily,
    dist: &DataDistribution<T>,
    protocol: &Protocol<T>,
) -> Result<AstutenessReport<T>> {
    protocol.validate()?;
    let mut trials = Vec::with_capacity(protocol.trials);
    let (mut fallbacks, mut saturated) = (0, 0);
    for trial in 0..protocol.trials {
        let clf = FittedClassifier::fit(family, protocol.training_set(dist, trial)?)?;
        let test = protocol.test_set(dist, trial)?;
        let rows: Vec<CertResult<T>> = test
            .samples()
            .par_iter()
            .map(|s| {
                let mut r = CertResult::new(&s.point, s.label, clf.predict(&s.point), CertMethod::AccuracyOnly);
                r.astute = r.accurate_at_anchor;
                r
            })
            .collect();
        trials.push(rows);
        fallbacks += clf.kernel_fallbacks();
        saturated += clf.saturated_leaves();
    }
    Ok(AstutenessReport::from_trials(None, trials, protocol.seed, fallbacks, saturated))
}
