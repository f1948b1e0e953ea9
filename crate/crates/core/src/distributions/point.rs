use std::ops::Deref;

use rand::Rng;

use crate::error::{Error, Result};
use crate::rng::{derive_seed, rng_from_seed};
use crate::scalar::Scalar;

/// A point of `R^d` with finite coordinates.
#[derive(Clone, Debug, PartialEq)]
pub struct Point<T> {
    coords: Vec<T>,
}

impl<T: Scalar> Point<T> {
    pub fn new(coords: Vec<T>) -> Result<Self> {
        if coords.is_empty() {
            return Err(Error::InvalidGeometry("point must have d >= 1".into()));
        }
        if coords.iter().any(|c| !c.is_finite()) {
            return Err(Error::InvalidGeometry("point coordinates must be finite".into()));
        }
        Ok(Self { coords })
    }

    pub fn from_f64(coords: &[f64]) -> Result<Self> {
        Self::new(coords.iter().map(|&c| T::lit(c)).collect())
    }

    /// Builds a point without validation; callers guarantee finiteness.
    pub(crate) fn from_vec_unchecked(coords: Vec<T>) -> Self {
        debug_assert!(!coords.is_empty());
        Self { coords }
    }

    pub fn dim(&self) -> usize {
        self.coords.len()
    }

    pub fn coords(&self) -> &[T] {
        &self.coords
    }

    pub fn into_coords(self) -> Vec<T> {
        self.coords
    }
}

impl<T> Deref for Point<T> {
    type Target = [T];

    fn deref(&self) -> &[T] {
        &self.coords
    }
}

/// Binary class label.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Label {
    Negative,
    Positive,
}

impl Label {
    /// `+1` or `-1`.
    pub fn sign(self) -> i32 {
        match self {
            Label::Positive => 1,
            Label::Negative => -1,
        }
    }

    pub fn as_scalar<T: Scalar>(self) -> T {
        match self {
            Label::Positive => T::one(),
            Label::Negative => -T::one(),
        }
    }

    pub fn flip(self) -> Self {
        match self {
            Label::Positive => Label::Negative,
            Label::Negative => Label::Positive,
        }
    }

    /// The weight-function output rule: `+1` iff the vote is strictly positive.
    pub fn from_vote<T: Scalar>(vote: T) -> Self {
        if vote > T::zero() {
            Label::Positive
        } else {
            Label::Negative
        }
    }
}

impl std::fmt::Display for Label {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{:+}", self.sign())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct LabeledSample<T> {
    pub point: Point<T>,
    pub label: Label,
}

// stream tag for tie-break keys
const KEY_STREAM: u64 = 0x6b65_7973;
const MAX_KEY_ATTEMPTS: u64 = 16;

/// An ordered training or test sample together with its tie-break keys.
///
/// Each sample carries a uniform key in `[0, 1)`; nearest-neighbor ties are
/// resolved in favor of the smaller key. Keys are pairwise distinct.
#[derive(Clone, Debug, PartialEq)]
pub struct Dataset<T> {
    samples: Vec<LabeledSample<T>>,
    seed: u64,
    tiebreak_keys: Vec<f64>,
}

impl<T: Scalar> Dataset<T> {
    /// Creates a dataset, drawing tie-break keys from a stream derived from `seed`.
    pub fn new(samples: Vec<LabeledSample<T>>, seed: u64) -> Result<Self> {
        let keys = draw_keys(samples.len(), seed)?;
        Self::with_keys(samples, keys, seed)
    }

    pub fn with_keys(samples: Vec<LabeledSample<T>>, keys: Vec<f64>, seed: u64) -> Result<Self> {
        if keys.len() != samples.len() {
            return Err(Error::InvalidParameter(format!(
                "{} tie-break keys for {} samples",
                keys.len(),
                samples.len()
            )));
        }
        if let Some(first) = samples.first() {
            let d = first.point.dim();
            if let Some(bad) = samples.iter().find(|s| s.point.dim() != d) {
                return Err(Error::DimensionMismatch {
                    expected: d,
                    got: bad.point.dim(),
                });
            }
        }
        if !keys_distinct(&keys) {
            return Err(Error::InvalidParameter("tie-break keys must be distinct".into()));
        }
        Ok(Self {
            samples,
            seed,
            tiebreak_keys: keys,
        })
    }

    /// Convenience constructor from raw coordinates and labels.
    pub fn from_points(points: &[&[f64]], labels: &[Label], seed: u64) -> Result<Self> {
        if points.len() != labels.len() {
            return Err(Error::InvalidParameter("points and labels differ in length".into()));
        }
        let samples = points
            .iter()
            .zip(labels)
            .map(|(p, &label)| Ok(LabeledSample { point: Point::from_f64(p)?, label }))
            .collect::<Result<Vec<_>>>()?;
        Self::new(samples, seed)
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    /// Dimension of the samples, `None` for an empty dataset.
    pub fn dim(&self) -> Option<usize> {
        self.samples.first().map(|s| s.point.dim())
    }

    pub fn samples(&self) -> &[LabeledSample<T>] {
        &self.samples
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn tiebreak_keys(&self) -> &[f64] {
        &self.tiebreak_keys
    }

    pub fn labels(&self) -> impl Iterator<Item = Label> + '_ {
        self.samples.iter().map(|s| s.label)
    }

    /// Same locations and keys with replaced labels.
    pub fn with_labels(&self, labels: &[Label]) -> Result<Self> {
        if labels.len() != self.len() {
            return Err(Error::InvalidParameter("label count mismatch".into()));
        }
        let mut out = self.clone();
        for (s, &l) in out.samples.iter_mut().zip(labels) {
            s.label = l;
        }
        Ok(out)
    }

    pub fn with_negated_labels(&self) -> Self {
        let mut out = self.clone();
        for s in &mut out.samples {
            s.label = s.label.flip();
        }
        out
    }

    /// Row-major coordinates, `n * d` entries.
    pub(crate) fn flat_coords(&self) -> Vec<T> {
        self.samples
            .iter()
            .flat_map(|s| s.point.coords().iter().copied())
            .collect()
    }
}

fn keys_distinct(keys: &[f64]) -> bool {
    let mut sorted = keys.to_vec();
    sorted.sort_by(|a, b| a.total_cmp(b));
    sorted.windows(2).all(|w| w[0] != w[1])
}

/// Draws `n` distinct uniform keys, regenerating the stream on collision.
pub(crate) fn draw_keys(n: usize, seed: u64) -> Result<Vec<f64>> {
    for attempt in 0..MAX_KEY_ATTEMPTS {
        let mut rng = rng_from_seed(derive_seed(seed, &[KEY_STREAM, attempt]));
        let keys: Vec<f64> = (0..n).map(|_| rng.random::<f64>()).collect();
        if keys_distinct(&keys) {
            return Ok(keys);
        }
    }
    Err(Error::InvalidParameter("could not draw distinct tie-break keys".into()))
}
