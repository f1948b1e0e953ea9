//! Analytic synthetic data distributions with exact support geometry.

mod distribution;
mod point;
mod support;

pub use distribution::{DataDistribution, EtaKind, SupportPart, SupportSelector};
pub use point::{Dataset, Label, LabeledSample, Point};
pub use support::{Primitive, SupportSet};
