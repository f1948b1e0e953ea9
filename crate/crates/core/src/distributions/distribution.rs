use rand::Rng;

use crate::distributions::{Dataset, Label, LabeledSample, Point, Primitive, SupportSet};
use crate::error::{Error, Result};
use crate::regions::BoundingBox;
use crate::rng::{derive_seed, rng_from_seed};
use crate::scalar::Scalar;

/// How the conditional label probability `eta(x) = P(y = +1 | x)` is defined.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum EtaKind {
    /// `eta(x) = x` on the first coordinate (one-dimensional only).
    Identity,
    /// `1 - noise` on the positive support, `noise` on the negative one,
    /// `1/2` on the half support, undefined elsewhere.
    PiecewiseConstantFromNoise,
}

/// Selects a support set or union of support sets.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SupportSelector {
    Pos,
    Neg,
    Half,
    NegAndHalf,
    PosAndHalf,
}

/// Which part of the support a point belongs to.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SupportPart {
    Pos,
    Neg,
    Half,
}

/// A data distribution `D = (mu, eta)` with analytic supports.
///
/// `mu` puts mass `pos_weight` uniformly on the positive support and the rest
/// uniformly on the negative support. The half support (where `eta = 1/2`)
/// carries no mass; it only matters for region geometry.
#[derive(Clone, Debug, PartialEq)]
pub struct DataDistribution<T> {
    dim: usize,
    pos_support: SupportSet<T>,
    neg_support: SupportSet<T>,
    half_support: SupportSet<T>,
    pos_weight: T,
    label_noise: T,
    eta_kind: EtaKind,
}

fn on_support_tol<T: Scalar>() -> T {
    T::lit(1e-9).max(T::epsilon() * T::lit(64.0))
}

impl<T: Scalar> DataDistribution<T> {
    pub fn new(
        pos_support: SupportSet<T>,
        neg_support: SupportSet<T>,
        half_support: SupportSet<T>,
        pos_weight: T,
        label_noise: T,
        eta_kind: EtaKind,
    ) -> Result<Self> {
        // one-class distributions have no opposite support to build regions from
        let dim = match (pos_support.dim(), neg_support.dim()) {
            (Some(a), Some(b)) if a == b => a,
            (Some(a), Some(b)) => return Err(Error::DimensionMismatch { expected: a, got: b }),
            _ => return Err(Error::EmptySupportSet),
        };
        if let Some(h) = half_support.dim() {
            if h != dim {
                return Err(Error::DimensionMismatch { expected: dim, got: h });
            }
        }
        if !(pos_weight >= T::zero() && pos_weight <= T::one()) {
            return Err(Error::InvalidParameter("pos_weight must lie in [0, 1]".into()));
        }
        if !(label_noise >= T::zero() && label_noise < T::lit(0.5)) {
            return Err(Error::InvalidParameter("label_noise must lie in [0, 0.5)".into()));
        }
        if eta_kind == EtaKind::Identity && dim != 1 {
            return Err(Error::InvalidParameter("eta(x) = x requires d = 1".into()));
        }
        Ok(Self {
            dim,
            pos_support,
            neg_support,
            half_support,
            pos_weight,
            label_noise,
            eta_kind,
        })
    }

    /// Uniform on `[0, 1]` with `eta(x) = x`.
    pub fn line() -> Self {
        let pt = |v: f64| Point::from_f64(&[v]).expect("finite");
        let seg = |a: f64, b: f64| Primitive::segment(pt(a), pt(b)).expect("valid segment");
        Self::new(
            SupportSet::new(vec![seg(0.5, 1.0)]).expect("1-d"),
            SupportSet::new(vec![seg(0.0, 0.5)]).expect("1-d"),
            SupportSet::new(vec![Primitive::point(pt(0.5))]).expect("1-d"),
            T::lit(0.5),
            T::zero(),
            EtaKind::Identity,
        )
        .expect("line distribution is valid")
    }

    /// Unit circle (positive, weight 0.7) around a circle of radius 0.2 centered
    /// at `(0.5, 0)` (negative, weight 0.3), with label noise 0.2.
    pub fn two_circles() -> Self {
        let outer = Primitive::circle(Point::from_f64(&[0.0, 0.0]).expect("finite"), T::one())
            .expect("valid circle");
        let inner = Primitive::circle(Point::from_f64(&[0.5, 0.0]).expect("finite"), T::lit(0.2))
            .expect("valid circle");
        Self::new(
            SupportSet::new(vec![outer]).expect("2-d"),
            SupportSet::new(vec![inner]).expect("2-d"),
            SupportSet::empty(),
            T::lit(0.7),
            T::lit(0.2),
            EtaKind::PiecewiseConstantFromNoise,
        )
        .expect("two-circles distribution is valid")
    }

    /// Positive segment `[0, 0.3]` and negative segment `[0.7, 1]` with equal
    /// weight and label noise 0.1.
    pub fn two_segments() -> Self {
        let pt = |v: f64| Point::from_f64(&[v]).expect("finite");
        let seg = |a: f64, b: f64| Primitive::segment(pt(a), pt(b)).expect("valid segment");
        Self::new(
            SupportSet::new(vec![seg(0.0, 0.3)]).expect("1-d"),
            SupportSet::new(vec![seg(0.7, 1.0)]).expect("1-d"),
            SupportSet::empty(),
            T::lit(0.5),
            T::lit(0.1),
            EtaKind::PiecewiseConstantFromNoise,
        )
        .expect("two-segment distribution is valid")
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn pos_support(&self) -> &SupportSet<T> {
        &self.pos_support
    }

    pub fn neg_support(&self) -> &SupportSet<T> {
        &self.neg_support
    }

    pub fn half_support(&self) -> &SupportSet<T> {
        &self.half_support
    }

    pub fn pos_weight(&self) -> T {
        self.pos_weight
    }

    pub fn neg_weight(&self) -> T {
        T::one() - self.pos_weight
    }

    pub fn label_noise(&self) -> T {
        self.label_noise
    }

    pub fn eta_kind(&self) -> EtaKind {
        self.eta_kind
    }

    fn check_dim(&self, x: &[T]) -> Result<()> {
        if x.len() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                got: x.len(),
            });
        }
        Ok(())
    }

    /// Distance from `x` to the selected support union.
    pub fn support_distance(&self, which: SupportSelector, x: &[T]) -> Result<T> {
        self.check_dim(x)?;
        let sets: &[&SupportSet<T>] = match which {
            SupportSelector::Pos => &[&self.pos_support],
            SupportSelector::Neg => &[&self.neg_support],
            SupportSelector::Half => &[&self.half_support],
            SupportSelector::NegAndHalf => &[&self.neg_support, &self.half_support],
            SupportSelector::PosAndHalf => &[&self.pos_support, &self.half_support],
        };
        SupportSet::union_distance(sets, x)
    }

    pub fn selected_sets(&self, which: SupportSelector) -> Vec<&SupportSet<T>> {
        match which {
            SupportSelector::Pos => vec![&self.pos_support],
            SupportSelector::Neg => vec![&self.neg_support],
            SupportSelector::Half => vec![&self.half_support],
            SupportSelector::NegAndHalf => vec![&self.neg_support, &self.half_support],
            SupportSelector::PosAndHalf => vec![&self.pos_support, &self.half_support],
        }
    }

    fn on(&self, set: &SupportSet<T>, x: &[T]) -> bool {
        let scale = x.iter().fold(T::one(), |m, v| m.max(v.abs()));
        set.distance(x).is_ok_and(|d| d <= on_support_tol::<T>() * scale)
    }

    /// Whether `x` lies in `supp(mu)` (positive or negative support).
    pub fn in_support(&self, x: &[T]) -> bool {
        x.len() == self.dim && (self.on(&self.pos_support, x) || self.on(&self.neg_support, x))
    }

    /// Classifies a support point by the sign of `eta - 1/2`.
    pub fn support_part(&self, x: &[T]) -> Result<SupportPart> {
        self.check_dim(x)?;
        match self.eta_kind {
            EtaKind::Identity => {
                let eta = self.eta(x)?;
                let half = T::lit(0.5);
                Ok(if eta > half {
                    SupportPart::Pos
                } else if eta < half {
                    SupportPart::Neg
                } else {
                    SupportPart::Half
                })
            }
            EtaKind::PiecewiseConstantFromNoise => {
                if self.on(&self.half_support, x) {
                    Ok(SupportPart::Half)
                } else if self.on(&self.pos_support, x) {
                    Ok(SupportPart::Pos)
                } else if self.on(&self.neg_support, x) {
                    Ok(SupportPart::Neg)
                } else {
                    Err(Error::QueryOutsideSupport)
                }
            }
        }
    }

    /// `P(y = +1 | x)`.
    pub fn eta(&self, x: &[T]) -> Result<T> {
        self.check_dim(x)?;
        match self.eta_kind {
            EtaKind::Identity => {
                if !self.in_support(x) {
                    return Err(Error::QueryOutsideSupport);
                }
                Ok(x[0].max(T::zero()).min(T::one()))
            }
            EtaKind::PiecewiseConstantFromNoise => Ok(match self.support_part(x)? {
                SupportPart::Pos => T::one() - self.label_noise,
                SupportPart::Neg => self.label_noise,
                SupportPart::Half => T::lit(0.5),
            }),
        }
    }

    /// Bayes optimal label: `+1` iff `eta(x) >= 1/2`.
    pub fn bayes_label(&self, x: &[T]) -> Result<Label> {
        Ok(if self.eta(x)? >= T::lit(0.5) {
            Label::Positive
        } else {
            Label::Negative
        })
    }

    /// Accuracy of the Bayes optimal classifier, `E[max(eta, 1 - eta)]`.
    pub fn bayes_accuracy(&self) -> T {
        match self.eta_kind {
            EtaKind::PiecewiseConstantFromNoise => T::one() - self.label_noise,
            EtaKind::Identity => {
                let part = |set: &SupportSet<T>| -> T {
                    let total = set.total_length();
                    if total <= T::zero() {
                        return T::zero();
                    }
                    set.primitives()
                        .iter()
                        .map(|p| {
                            let f = |t: T| {
                                let e = p.at(t)[0];
                                e.max(T::one() - e)
                            };
                            p.length() / total * simpson(f, 2000)
                        })
                        .sum()
                };
                self.pos_weight * part(&self.pos_support) + self.neg_weight() * part(&self.neg_support)
            }
        }
    }

    /// `mu(B(x, r))` for the closed ball.
    pub fn ball_mass(&self, x: &[T], r: T) -> T {
        self.pos_weight * self.pos_support.ball_fraction(x, r)
            + self.neg_weight() * self.neg_support.ball_fraction(x, r)
    }

    /// Bounding box of `supp(mu)`.
    pub fn support_bounding_box(&self) -> BoundingBox<T> {
        let pos = self.pos_support.bounding_box().expect("non-empty");
        let neg = self.neg_support.bounding_box().expect("non-empty");
        pos.union(&neg)
    }

    fn draw(&self, rng: &mut impl Rng) -> Result<LabeledSample<T>> {
        let positive = T::lit(rng.random::<f64>()) < self.pos_weight;
        let set = if positive { &self.pos_support } else { &self.neg_support };
        let point = set.sample(rng)?;
        let u = T::lit(rng.random::<f64>());
        let label = match self.eta_kind {
            EtaKind::Identity => {
                if u < self.eta(&point)? {
                    Label::Positive
                } else {
                    Label::Negative
                }
            }
            EtaKind::PiecewiseConstantFromNoise => {
                let clean = if positive { Label::Positive } else { Label::Negative };
                if u < self.label_noise {
                    clean.flip()
                } else {
                    clean
                }
            }
        };
        Ok(LabeledSample { point, label })
    }

    /// Draws `n` i.i.d. labeled samples; identical `(n, seed)` give identical datasets.
    pub fn sample(&self, n: usize, seed: u64) -> Result<Dataset<T>> {
        let mut rng = rng_from_seed(derive_seed(seed, &[0x7361_6d70]));
        let samples = (0..n).map(|_| self.draw(&mut rng)).collect::<Result<Vec<_>>>()?;
        Dataset::new(samples, seed)
    }
}

/// Composite Simpson rule on `[0, 1]` with an even number of intervals.
fn simpson<T: Scalar>(f: impl Fn(T) -> T, intervals: usize) -> T {
    let m = intervals + intervals % 2;
    let h = T::one() / T::count(m);
    let mut acc = f(T::zero()) + f(T::one());
    for i in 1..m {
        let w = if i % 2 == 1 { T::lit(4.0) } else { T::lit(2.0) };
        acc = acc + w * f(T::count(i) * h);
    }
    acc * h / T::lit(3.0)
}
