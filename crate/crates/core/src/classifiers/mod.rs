//! Weight-function classifiers: k-nearest neighbors, kernel similarity and
//! recursive histograms.
//!
//! Each classifier assigns the training points weights `w_i(x)` that depend
//! only on the sample locations and the query, and predicts `+1` iff
//! `sum_i w_i(x) y_i > 0`.

mod histogram;
mod kernel;
mod knn;
mod schedule;

use std::fmt;
use std::str::FromStr;

pub use histogram::{HistogramLeaf, HistogramRoot, MAX_DEPTH};
pub use kernel::FlipCheck;
pub use schedule::{bandwidth, k_schedule, BandwidthSchedule, KSchedule, KernelKind, KernelSpec};

pub(crate) use knn::SortedLine;

use crate::distributions::{Dataset, Label};
use crate::error::{Error, Result};
use crate::scalar::Scalar;
use histogram::HistogramModel;
use kernel::KernelModel;
use knn::KnnModel;

/// Anything that labels points.
pub trait Predictor<T>: Sync {
    fn predict(&self, x: &[T]) -> Label;
}

/// Classifier family plus hyperparameter schedule.
///
/// The string form is `knn:<k>`, `kernel:<kernel>:<bandwidth>` or
/// `histogram:<k>`, e.g. `knn:log_ceil:1`, `kernel:exponential:sqrt_log`,
/// `kernel:gaussian:fixed:0.05`, `histogram:power:0.5`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum ClassifierFamily {
    Knn(KSchedule),
    Kernel(KernelSpec),
    Histogram(KSchedule),
}

impl fmt::Display for ClassifierFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ClassifierFamily::Knn(k) => write!(f, "knn:{k}"),
            ClassifierFamily::Kernel(spec) => {
                write!(f, "kernel:{}:{}", spec.kernel.name(), spec.bandwidth)
            }
            ClassifierFamily::Histogram(k) => write!(f, "histogram:{k}"),
        }
    }
}

impl FromStr for ClassifierFamily {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::InvalidParameter(format!("unknown classifier `{s}`"));
        let (family, rest) = s.split_once(':').ok_or_else(bad)?;
        match family {
            "knn" => Ok(ClassifierFamily::Knn(rest.parse()?)),
            "histogram" => Ok(ClassifierFamily::Histogram(rest.parse()?)),
            "kernel" => {
                let (kernel, bw) = rest.split_once(':').ok_or_else(bad)?;
                Ok(ClassifierFamily::Kernel(KernelSpec::new(kernel.parse()?, bw.parse()?)))
            }
            _ => Err(bad()),
        }
    }
}

/// Weights over the training points, aligned with the dataset order.
#[derive(Clone, Debug, PartialEq)]
pub struct WeightVector<T> {
    pub weights: Vec<T>,
}

impl<T: Scalar> WeightVector<T> {
    pub fn sum(&self) -> T {
        self.weights.iter().copied().sum()
    }

    /// True for the all-zero histogram fallback.
    pub fn is_zero(&self) -> bool {
        self.weights.iter().all(|&w| w == T::zero())
    }

    /// Indices with non-zero weight.
    pub fn support(&self) -> Vec<usize> {
        (0..self.weights.len()).filter(|&i| self.weights[i] != T::zero()).collect()
    }

    /// `sum_i w_i y_i`.
    pub fn vote(&self, dataset: &Dataset<T>) -> T {
        self.weights
            .iter()
            .zip(dataset.labels())
            .map(|(&w, y)| w * y.as_scalar())
            .sum()
    }
}

#[derive(Clone, Debug)]
enum Model<T> {
    Knn(KnnModel<T>),
    Kernel(KernelModel<T>),
    Histogram(HistogramModel<T>),
}

/// A classifier fitted to a dataset. Immutable; queries are safe to run concurrently.
#[derive(Clone, Debug)]
pub struct FittedClassifier<T> {
    family: ClassifierFamily,
    dataset: Dataset<T>,
    labels: Vec<T>,
    model: Model<T>,
}

impl<T: Scalar> FittedClassifier<T> {
    pub fn fit(family: ClassifierFamily, dataset: Dataset<T>) -> Result<Self> {
        Self::fit_with_root(family, dataset, HistogramRoot::Auto)
    }

    /// Like [`FittedClassifier::fit`], with an explicit histogram root cube.
    pub fn fit_with_root(family: ClassifierFamily, dataset: Dataset<T>, root: HistogramRoot<T>) -> Result<Self> {
        let dim = dataset.dim().ok_or(Error::EmptyDataset)?;
        let n = dataset.len();
        let coords = dataset.flat_coords();
        let labels: Vec<T> = dataset.labels().map(Label::as_scalar).collect();
        let keys = dataset.tiebreak_keys().to_vec();
        let checked_k = |sched: KSchedule| {
            sched.validate()?;
            let k = sched.k_for(n);
            if k > n {
                Err(Error::KTooLarge { k, n })
            } else {
                Ok(k)
            }
        };
        let model = match family {
            ClassifierFamily::Knn(sched) => {
                let k = checked_k(sched)?;
                Model::Knn(KnnModel::new(dim, coords, keys, &labels, k))
            }
            ClassifierFamily::Kernel(spec) => {
                let h = bandwidth(&spec, n)
                    .or_else(|e| match spec.bandwidth {
                        BandwidthSchedule::Fixed(h) => Ok(T::lit(h)),
                        _ => Err(e),
                    })?;
                Model::Kernel(KernelModel::new(dim, coords, keys, spec.kernel, h))
            }
            ClassifierFamily::Histogram(sched) => {
                let k = checked_k(sched)?;
                if let HistogramRoot::Fixed { lo, side } = &root {
                    if lo.len() != dim {
                        return Err(Error::DimensionMismatch { expected: dim, got: lo.len() });
                    }
                    if !(*side > T::zero()) {
                        return Err(Error::InvalidParameter("histogram root side must be positive".into()));
                    }
                }
                Model::Histogram(HistogramModel::new(dim, &coords, &labels, k, &root))
            }
        };
        Ok(Self { family, dataset, labels, model })
    }

    pub fn family(&self) -> ClassifierFamily {
        self.family
    }

    pub fn dataset(&self) -> &Dataset<T> {
        &self.dataset
    }

    pub fn dim(&self) -> usize {
        self.dataset.dim().expect("fitted dataset is non-empty")
    }

    /// Neighbor count (k-NN) or leaf capacity (histogram).
    pub fn k(&self) -> Option<usize> {
        match &self.model {
            Model::Knn(m) => Some(m.k()),
            Model::Histogram(_) => match self.family {
                ClassifierFamily::Histogram(s) => Some(s.k_for(self.dataset.len())),
                _ => None,
            },
            Model::Kernel(_) => None,
        }
    }

    pub fn bandwidth(&self) -> Option<T> {
        match &self.model {
            Model::Kernel(m) => Some(m.bandwidth()),
            _ => None,
        }
    }

    pub fn kernel(&self) -> Option<KernelKind> {
        match &self.model {
            Model::Kernel(m) => Some(m.kernel()),
            _ => None,
        }
    }

    pub fn weights(&self, x: &[T]) -> WeightVector<T> {
        let weights = match &self.model {
            Model::Knn(m) => m.weights(x),
            Model::Kernel(m) => m.weights(x),
            Model::Histogram(m) => m.weights(x),
        };
        WeightVector { weights }
    }

    /// `sum_i w_i(x) y_i`.
    pub fn margin(&self, x: &[T]) -> T {
        match &self.model {
            Model::Knn(m) => m.margin(x, &self.labels),
            Model::Kernel(m) => m.margin(x, &self.labels),
            Model::Histogram(m) => m.margin(x),
        }
    }

    pub fn predict(&self, x: &[T]) -> Label {
        Label::from_vote(self.margin(x))
    }

    /// Margin and flip bound within `radius`; `None` for non-kernel classifiers.
    pub fn flip_check(&self, x: &[T], radius: T) -> Option<FlipCheck<T>> {
        match &self.model {
            Model::Kernel(m) => Some(m.flip_check(x, &self.labels, radius)),
            _ => None,
        }
    }

    /// Number of kernel queries that fell back to nearest-neighbor weighting
    /// because every kernel value was unusable.
    pub fn kernel_fallbacks(&self) -> u64 {
        match &self.model {
            Model::Kernel(m) => m.fallback_count(),
            _ => 0,
        }
    }

    /// Histogram leaves that hit the depth cap while still over capacity.
    pub fn saturated_leaves(&self) -> usize {
        match &self.model {
            Model::Histogram(m) => m.saturated_leaves(),
            _ => 0,
        }
    }

    pub fn histogram_leaves(&self) -> Option<Vec<HistogramLeaf<T>>> {
        match &self.model {
            Model::Histogram(m) => Some(m.leaves()),
            _ => None,
        }
    }

    /// Histogram leaves intersecting a box, with the root cube.
    pub(crate) fn histogram_leaves_in_box(&self, lo: &[T], hi: &[T]) -> Option<(Vec<HistogramLeaf<T>>, Vec<T>, T)> {
        match &self.model {
            Model::Histogram(m) => {
                let (root_lo, side) = m.root();
                Some((m.leaves_in_box(lo, hi), root_lo.to_vec(), side))
            }
            _ => None,
        }
    }

    pub(crate) fn sorted_line(&self) -> Option<&SortedLine<T>> {
        match &self.model {
            Model::Knn(m) => m.sorted_line(),
            _ => None,
        }
    }
}

impl<T: Scalar> Predictor<T> for FittedClassifier<T> {
    fn predict(&self, x: &[T]) -> Label {
        FittedClassifier::predict(self, x)
    }
}

/// Fits `family` to `dataset`.
pub fn fit<T: Scalar>(family: ClassifierFamily, dataset: Dataset<T>) -> Result<FittedClassifier<T>> {
    FittedClassifier::fit(family, dataset)
}
