use rand::Rng;

use crate::distributions::Point;
use crate::error::{Error, Result};
use crate::regions::BoundingBox;
use crate::scalar::{distance, squared_distance, Scalar};

/// One piece of a support set, carrying the uniform measure on itself.
#[derive(Clone, Debug, PartialEq)]
pub enum Primitive<T> {
    SinglePoint(Point<T>),
    /// Closed segment from `a` to `b`, `a != b`.
    Segment { a: Point<T>, b: Point<T> },
    /// Circle in the plane.
    Circle { center: Point<T>, radius: T },
}

impl<T: Scalar> Primitive<T> {
    pub fn point(p: Point<T>) -> Self {
        Primitive::SinglePoint(p)
    }

    pub fn segment(a: Point<T>, b: Point<T>) -> Result<Self> {
        if a.dim() != b.dim() {
            return Err(Error::DimensionMismatch {
                expected: a.dim(),
                got: b.dim(),
            });
        }
        if a == b {
            return Err(Error::InvalidGeometry("segment endpoints coincide".into()));
        }
        Ok(Primitive::Segment { a, b })
    }

    pub fn circle(center: Point<T>, radius: T) -> Result<Self> {
        if center.dim() != 2 {
            return Err(Error::InvalidGeometry("circles live in the plane".into()));
        }
        if !(radius > T::zero()) || !radius.is_finite() {
            return Err(Error::InvalidGeometry("circle radius must be positive".into()));
        }
        Ok(Primitive::Circle { center, radius })
    }

    pub fn dim(&self) -> usize {
        match self {
            Primitive::SinglePoint(p) => p.dim(),
            Primitive::Segment { a, .. } => a.dim(),
            Primitive::Circle { center, .. } => center.dim(),
        }
    }

    /// One-dimensional measure (length); zero for a single point.
    pub fn length(&self) -> T {
        match self {
            Primitive::SinglePoint(_) => T::zero(),
            Primitive::Segment { a, b } => distance(a, b),
            Primitive::Circle { radius, .. } => T::lit(std::f64::consts::TAU) * *radius,
        }
    }

    /// Exact Euclidean distance from `x` to the primitive.
    pub fn distance(&self, x: &[T]) -> T {
        match self {
            Primitive::SinglePoint(p) => distance(p, x),
            Primitive::Segment { a, b } => {
                let t = segment_parameter(a, b, x);
                a.iter()
                    .zip(b.iter())
                    .zip(x)
                    .fold(T::zero(), |acc, ((&ai, &bi), &xi)| {
                        let p = ai + t * (bi - ai);
                        acc + (p - xi) * (p - xi)
                    })
                    .sqrt()
            }
            Primitive::Circle { center, radius } => (distance(center, x) - *radius).abs(),
        }
    }

    /// Uniform draw from the primitive.
    pub fn sample(&self, rng: &mut impl Rng) -> Point<T> {
        match self {
            Primitive::SinglePoint(p) => p.clone(),
            Primitive::Segment { a, b } => {
                let t = T::lit(rng.random::<f64>());
                Point::from_vec_unchecked(
                    a.iter().zip(b.iter()).map(|(&ai, &bi)| ai + t * (bi - ai)).collect(),
                )
            }
            Primitive::Circle { center, radius } => {
                let theta = rng.random::<f64>() * std::f64::consts::TAU;
                let (s, c) = theta.sin_cos();
                Point::from_vec_unchecked(vec![
                    center[0] + *radius * T::lit(c),
                    center[1] + *radius * T::lit(s),
                ])
            }
        }
    }

    /// Point at parameter `t in [0, 1]` of the natural parameterization.
    pub fn at(&self, t: T) -> Point<T> {
        match self {
            Primitive::SinglePoint(p) => p.clone(),
            Primitive::Segment { a, b } => Point::from_vec_unchecked(
                a.iter().zip(b.iter()).map(|(&ai, &bi)| ai + t * (bi - ai)).collect(),
            ),
            Primitive::Circle { center, radius } => {
                let theta = t * T::lit(std::f64::consts::TAU);
                Point::from_vec_unchecked(vec![
                    center[0] + *radius * theta.cos(),
                    center[1] + *radius * theta.sin(),
                ])
            }
        }
    }

    /// Fraction of the primitive's uniform measure inside the closed ball `B(x, r)`.
    ///
    /// For a single point this is 1 when the point is in the ball and 0 otherwise.
    pub fn ball_fraction(&self, x: &[T], r: T) -> T {
        if r < T::zero() {
            return T::zero();
        }
        match self {
            Primitive::SinglePoint(p) => {
                if squared_distance(p, x) <= r * r {
                    T::one()
                } else {
                    T::zero()
                }
            }
            Primitive::Segment { a, b } => {
                // |a + t v - x|^2 <= r^2 with v = b - a
                let (mut vv, mut vw, mut ww) = (T::zero(), T::zero(), T::zero());
                for ((&ai, &bi), &xi) in a.iter().zip(b.iter()).zip(x) {
                    let v = bi - ai;
                    let w = ai - xi;
                    vv = vv + v * v;
                    vw = vw + v * w;
                    ww = ww + w * w;
                }
                let disc = vw * vw - vv * (ww - r * r);
                if disc < T::zero() {
                    return T::zero();
                }
                let root = disc.sqrt();
                let t0 = ((-vw - root) / vv).max(T::zero());
                let t1 = ((-vw + root) / vv).min(T::one());
                (t1 - t0).max(T::zero())
            }
            Primitive::Circle { center, radius } => {
                let d = distance(center, x);
                let big_r = *radius;
                if d == T::zero() {
                    return if r >= big_r { T::one() } else { T::zero() };
                }
                let cos_phi = (d * d + big_r * big_r - r * r) / (T::lit(2.0) * d * big_r);
                if cos_phi >= T::one() {
                    T::zero()
                } else if cos_phi <= -T::one() {
                    T::one()
                } else {
                    cos_phi.acos() / T::lit(std::f64::consts::PI)
                }
            }
        }
    }

    pub fn bounding_box(&self) -> BoundingBox<T> {
        match self {
            Primitive::SinglePoint(p) => BoundingBox::degenerate(p.coords()),
            Primitive::Segment { a, b } => BoundingBox::new(
                a.iter().zip(b.iter()).map(|(&x, &y)| x.min(y)).collect(),
                a.iter().zip(b.iter()).map(|(&x, &y)| x.max(y)).collect(),
            ),
            Primitive::Circle { center, radius } => BoundingBox::new(
                center.iter().map(|&c| c - *radius).collect(),
                center.iter().map(|&c| c + *radius).collect(),
            ),
        }
    }

    /// True when `x` lies strictly inside the convex hull of the primitive,
    /// which only happens for circles (the open disk).
    pub(crate) fn strictly_encloses(&self, x: &[T]) -> bool {
        match self {
            Primitive::Circle { center, radius } => distance(center, x) < *radius,
            _ => false,
        }
    }
}

fn segment_parameter<T: Scalar>(a: &[T], b: &[T], x: &[T]) -> T {
    let (mut num, mut den) = (T::zero(), T::zero());
    for ((&ai, &bi), &xi) in a.iter().zip(b).zip(x) {
        let v = bi - ai;
        num = num + (xi - ai) * v;
        den = den + v * v;
    }
    (num / den).max(T::zero()).min(T::one())
}

/// A finite union of primitives with the uniform (length) measure.
///
/// When the union has positive total length, single points carry no mass;
/// a union made only of points puts equal mass on each.
#[derive(Clone, Debug, PartialEq)]
pub struct SupportSet<T> {
    primitives: Vec<Primitive<T>>,
}

impl<T: Scalar> SupportSet<T> {
    pub fn new(primitives: Vec<Primitive<T>>) -> Result<Self> {
        if let Some(first) = primitives.first() {
            let d = first.dim();
            if let Some(bad) = primitives.iter().find(|p| p.dim() != d) {
                return Err(Error::DimensionMismatch {
                    expected: d,
                    got: bad.dim(),
                });
            }
        }
        Ok(Self { primitives })
    }

    pub fn empty() -> Self {
        Self { primitives: Vec::new() }
    }

    pub fn primitives(&self) -> &[Primitive<T>] {
        &self.primitives
    }

    pub fn is_empty(&self) -> bool {
        self.primitives.is_empty()
    }

    pub fn dim(&self) -> Option<usize> {
        self.primitives.first().map(Primitive::dim)
    }

    pub fn total_length(&self) -> T {
        self.primitives.iter().map(Primitive::length).sum()
    }

    pub fn distance(&self, x: &[T]) -> Result<T> {
        self.primitives
            .iter()
            .map(|p| p.distance(x))
            .reduce(T::min)
            .ok_or(Error::EmptySupportSet)
    }

    /// Distance to the union of several sets; empty sets are skipped.
    pub fn union_distance(sets: &[&SupportSet<T>], x: &[T]) -> Result<T> {
        sets.iter()
            .flat_map(|s| s.primitives.iter())
            .map(|p| p.distance(x))
            .reduce(T::min)
            .ok_or(Error::EmptySupportSet)
    }

    fn masses(&self) -> Vec<T> {
        let total = self.total_length();
        if total > T::zero() {
            self.primitives.iter().map(|p| p.length() / total).collect()
        } else {
            let w = T::one() / T::count(self.primitives.len());
            vec![w; self.primitives.len()]
        }
    }

    /// Uniform draw from the union.
    pub fn sample(&self, rng: &mut impl Rng) -> Result<Point<T>> {
        if self.is_empty() {
            return Err(Error::EmptySupportSet);
        }
        let masses = self.masses();
        let u = T::lit(rng.random::<f64>());
        let mut acc = T::zero();
        let mut chosen = self.primitives.len() - 1;
        for (i, &m) in masses.iter().enumerate() {
            acc = acc + m;
            if u < acc && m > T::zero() {
                chosen = i;
                break;
            }
        }
        Ok(self.primitives[chosen].sample(rng))
    }

    /// Fraction of the union's measure inside the closed ball `B(x, r)`.
    pub fn ball_fraction(&self, x: &[T], r: T) -> T {
        self.primitives
            .iter()
            .zip(self.masses())
            .map(|(p, m)| if m > T::zero() { m * p.ball_fraction(x, r) } else { T::zero() })
            .sum()
    }

    pub fn bounding_box(&self) -> Option<BoundingBox<T>> {
        self.primitives
            .iter()
            .map(Primitive::bounding_box)
            .reduce(|a, b| a.union(&b))
    }
}
