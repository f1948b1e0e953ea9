//! Astuteness of non-parametric classifiers under neighborhood-preserving
//! robustness regions.

pub mod analysis;
pub mod certification;
pub mod classifiers;
pub mod distributions;
pub mod error;
pub mod experiment;
pub mod regions;
pub mod rng;
pub mod scalar;

pub use analysis::{
    estimate_condition2, estimate_condition3, probability_radius, splitting_number_bruteforce,
    ConditionEstimate, ConditionId, SplittingEnumeration,
};
pub use certification::{
    certify_astute, empirical_accuracy, empirical_astuteness, empirical_astuteness_multi,
    kernel_flip_bound, neighborhood_bayes_predict, AstutenessReport, CertMethod, CertResult,
    FlipVerdict, NeighborhoodBayes, Protocol, TestLabels,
};
pub use classifiers::{
    fit, BandwidthSchedule, ClassifierFamily, FittedClassifier, HistogramRoot, KSchedule,
    KernelKind, KernelSpec, Predictor, WeightVector,
};
pub use distributions::{
    DataDistribution, Dataset, EtaKind, Label, LabeledSample, Point, Primitive, SupportPart,
    SupportSelector, SupportSet,
};
pub use error::{Error, Result};
pub use regions::{make_region, BoundingBox, RobustnessRegion};
pub use scalar::Scalar;

pub type Point64 = Point<f64>;
pub type Point32 = Point<f32>;
pub type Dataset64 = Dataset<f64>;
pub type Dataset32 = Dataset<f32>;
pub type Distribution64 = DataDistribution<f64>;
pub type Distribution32 = DataDistribution<f32>;
pub type Region64 = RobustnessRegion<f64>;
pub type Region32 = RobustnessRegion<f32>;
pub type Classifier64 = FittedClassifier<f64>;
pub type Classifier32 = FittedClassifier<f32>;
