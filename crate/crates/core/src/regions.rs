//! Neighborhood-preserving robustness regions.
//!
//! For an anchor `x` on the positive support, the partial region with factor
//! `kappa` is `{x' : rho(x, x') < kappa * rho(opposite, x')}` where the opposite
//! set is the negative support together with the `eta = 1/2` set (and
//! symmetrically for negative anchors). `kappa = 1` gives the full region.
//! Anchors with `eta(x) = 1/2` get the degenerate region `{x}`.
//!
//! Each region is an intersection of Apollonius balls around the anchor, so it
//! is convex and contains the anchor. For `kappa < 1` it lies within the ball
//! of radius `kappa / (1 - kappa) * rho(x, opposite)` around the anchor.

use crate::distributions::{DataDistribution, Label, Point, Primitive, SupportPart, SupportSelector, SupportSet};
use crate::error::{Error, Result};
use crate::scalar::{distance, Scalar};

/// Relative slack applied to membership: points whose distance ratio is within
/// `BOUNDARY_TOL` of `kappa` count as outside.
pub const BOUNDARY_TOL: f64 = 1e-6;

/// Axis-aligned box with `lo <= hi` componentwise.
#[derive(Clone, Debug, PartialEq)]
pub struct BoundingBox<T> {
    pub lo: Vec<T>,
    pub hi: Vec<T>,
}

impl<T: Scalar> BoundingBox<T> {
    pub fn new(lo: Vec<T>, hi: Vec<T>) -> Self {
        debug_assert_eq!(lo.len(), hi.len());
        debug_assert!(lo.iter().zip(&hi).all(|(l, h)| l <= h));
        Self { lo, hi }
    }

    pub fn degenerate(p: &[T]) -> Self {
        Self::new(p.to_vec(), p.to_vec())
    }

    pub fn around(center: &[T], radius: T) -> Self {
        Self::new(
            center.iter().map(|&c| c - radius).collect(),
            center.iter().map(|&c| c + radius).collect(),
        )
    }

    pub fn dim(&self) -> usize {
        self.lo.len()
    }

    pub fn union(&self, other: &Self) -> Self {
        Self::new(
            self.lo.iter().zip(&other.lo).map(|(&a, &b)| a.min(b)).collect(),
            self.hi.iter().zip(&other.hi).map(|(&a, &b)| a.max(b)).collect(),
        )
    }

    /// Intersection, or `None` when empty.
    pub fn intersect(&self, other: &Self) -> Option<Self> {
        let lo: Vec<T> = self.lo.iter().zip(&other.lo).map(|(&a, &b)| a.max(b)).collect();
        let hi: Vec<T> = self.hi.iter().zip(&other.hi).map(|(&a, &b)| a.min(b)).collect();
        if lo.iter().zip(&hi).any(|(l, h)| l > h) {
            None
        } else {
            Some(Self::new(lo, hi))
        }
    }

    pub fn contains(&self, x: &[T]) -> bool {
        x.iter()
            .zip(self.lo.iter().zip(&self.hi))
            .all(|(&v, (&l, &h))| l <= v && v <= h)
    }

    pub fn volume(&self) -> T {
        self.lo
            .iter()
            .zip(&self.hi)
            .fold(T::one(), |acc, (&l, &h)| acc * (h - l))
    }

    /// Grows each side by `margin`.
    pub fn expanded(&self, margin: T) -> Self {
        Self::new(
            self.lo.iter().map(|&l| l - margin).collect(),
            self.hi.iter().map(|&h| h + margin).collect(),
        )
    }
}

/// The partial neighborhood-preserving robustness region of an anchor.
#[derive(Clone, Debug, PartialEq)]
pub struct RobustnessRegion<T> {
    anchor: Point<T>,
    kappa: T,
    opposite: SupportSet<T>,
    degenerate: bool,
    /// Bayes label of the anchor (positive for degenerate anchors).
    side: Label,
    anchor_gap: T,
}

/// Builds the region `V_x^kappa` of a support point `x`.
pub fn make_region<T: Scalar>(
    dist: &DataDistribution<T>,
    x: &Point<T>,
    kappa: T,
) -> Result<RobustnessRegion<T>> {
    if !(kappa > T::zero() && kappa <= T::one()) {
        return Err(Error::KappaOutOfRange(kappa.to_f64_lossy()));
    }
    let part = dist.support_part(x)?;
    let (selector, side, degenerate) = match part {
        SupportPart::Pos => (SupportSelector::NegAndHalf, Label::Positive, false),
        SupportPart::Neg => (SupportSelector::PosAndHalf, Label::Negative, false),
        SupportPart::Half => (SupportSelector::NegAndHalf, Label::Positive, true),
    };
    let primitives: Vec<Primitive<T>> = dist
        .selected_sets(selector)
        .into_iter()
        .flat_map(|s| s.primitives().iter().cloned())
        .collect();
    let opposite = SupportSet::new(primitives)?;
    let anchor_gap = opposite.distance(x)?;
    if !degenerate && anchor_gap <= T::zero() {
        return Err(Error::InvalidGeometry(
            "anchor touches the oppositely labeled support".into(),
        ));
    }
    Ok(RobustnessRegion {
        anchor: x.clone(),
        kappa,
        opposite,
        degenerate,
        side,
        anchor_gap,
    })
}

impl<T: Scalar> RobustnessRegion<T> {
    pub fn anchor(&self) -> &Point<T> {
        &self.anchor
    }

    pub fn kappa(&self) -> T {
        self.kappa
    }

    pub fn opposite(&self) -> &SupportSet<T> {
        &self.opposite
    }

    pub fn is_degenerate(&self) -> bool {
        self.degenerate
    }

    /// Bayes label at the anchor.
    pub fn side(&self) -> Label {
        self.side
    }

    /// `rho(anchor, opposite)`.
    pub fn anchor_gap(&self) -> T {
        self.anchor_gap
    }

    pub fn dim(&self) -> usize {
        self.anchor.dim()
    }

    /// `kappa * rho(opposite, xp) - rho(anchor, xp)`: positive inside the exact region.
    pub fn membership_gap(&self, xp: &[T]) -> T {
        let d = self.opposite.distance(xp).expect("opposite support is non-empty");
        self.kappa * d - distance(&self.anchor, xp)
    }

    /// Gap with the boundary slack applied; membership is `tolerant_gap > 0`.
    /// Like [`RobustnessRegion::membership_gap`] it is `(1 + kappa)`-Lipschitz.
    pub fn tolerant_gap(&self, xp: &[T]) -> T {
        let d = self.opposite.distance(xp).expect("opposite support is non-empty");
        self.kappa * (T::one() - T::lit(BOUNDARY_TOL)) * d - distance(&self.anchor, xp)
    }

    /// Strict membership with the relative boundary slack.
    pub fn contains(&self, xp: &[T]) -> bool {
        if xp.len() != self.dim() {
            return false;
        }
        if self.degenerate {
            return xp == self.anchor.coords();
        }
        self.tolerant_gap(xp) > T::zero()
    }

    /// Box enclosing the opposite support on every side of the anchor, when the
    /// anchor is strictly surrounded by it.
    fn enclosure(&self) -> Option<BoundingBox<T>> {
        if self.dim() == 1 {
            let x = self.anchor[0];
            let (mut left, mut right): (Option<T>, Option<T>) = (None, None);
            for p in self.opposite.primitives() {
                let b = p.bounding_box();
                if b.hi[0] <= x {
                    left = Some(left.map_or(b.hi[0], |l| l.max(b.hi[0])));
                } else if b.lo[0] >= x {
                    right = Some(right.map_or(b.lo[0], |r| r.min(b.lo[0])));
                }
            }
            match (left, right) {
                (Some(l), Some(r)) => Some(BoundingBox::new(vec![l], vec![r])),
                _ => None,
            }
        } else {
            // an open disk of the opposite support around the anchor confines the region
            self.opposite
                .primitives()
                .iter()
                .filter(|p| p.strictly_encloses(&self.anchor))
                .map(Primitive::bounding_box)
                .reduce(|a, b| a.intersect(&b).unwrap_or(a))
        }
    }

    /// One-sided 1-d bounds: the region cannot cross an opposite point.
    fn one_sided_clip(&self, b: BoundingBox<T>) -> BoundingBox<T> {
        if self.dim() != 1 {
            return b;
        }
        let x = self.anchor[0];
        let (mut lo, mut hi) = (b.lo[0], b.hi[0]);
        for p in self.opposite.primitives() {
            let pb = p.bounding_box();
            if pb.hi[0] <= x {
                lo = lo.max(pb.hi[0]);
            } else if pb.lo[0] >= x {
                hi = hi.min(pb.lo[0]);
            }
        }
        BoundingBox::new(vec![lo], vec![hi])
    }

    /// Axis-aligned box containing the region.
    pub fn bounding_box(&self) -> Result<BoundingBox<T>> {
        if self.degenerate {
            return Ok(BoundingBox::degenerate(&self.anchor));
        }
        let enclosure = self.enclosure();
        let boxed = if self.kappa < T::one() {
            let r = self.kappa / (T::one() - self.kappa) * self.anchor_gap;
            let slack = T::epsilon() * T::lit(8.0) * (r + self.anchor.iter().fold(T::one(), |m, v| m.max(v.abs())));
            let ball = BoundingBox::around(&self.anchor, r + slack);
            match enclosure {
                Some(e) => ball.intersect(&e).unwrap_or(ball),
                None => ball,
            }
        } else {
            enclosure.ok_or(Error::UnboundedRegion)?
        };
        Ok(self.one_sided_clip(boxed))
    }

    /// Lattice points with spacing `step`, anchored at the anchor, that lie in
    /// the region. Always contains the anchor.
    pub fn grid(&self, step: T) -> Result<Vec<Point<T>>> {
        if !(step > T::zero()) {
            return Err(Error::InvalidParameter("grid step must be positive".into()));
        }
        if self.degenerate {
            return Ok(vec![self.anchor.clone()]);
        }
        let bbox = self.bounding_box()?;
        Ok(Lattice::new(&self.anchor, &bbox, step)
            .filter(|p| self.contains(p))
            .map(Point::from_vec_unchecked)
            .collect())
    }

    /// For `d = 1`: an interval `[l, r]` whose interior contains the region.
    pub fn interval_hull(&self) -> Result<Option<(T, T)>> {
        Ok(self.interval_edges()?.map(|(l, r)| (l.1, r.1)))
    }

    /// For `d = 1`: an interval `[l, r]` of region points, within rounding of the full region.
    pub fn interval_core(&self) -> Result<Option<(T, T)>> {
        Ok(self.interval_edges()?.map(|(l, r)| (l.0, r.0)))
    }

    /// Left and right boundary brackets `(last member, first non-member)`.
    fn interval_edges(&self) -> Result<Option<((T, T), (T, T))>> {
        if self.dim() != 1 {
            return Ok(None);
        }
        let a = self.anchor[0];
        if self.degenerate {
            return Ok(Some(((a, a), (a, a))));
        }
        let bbox = self.bounding_box()?;
        let edge = |mut inside: T, mut outside: T| {
            if self.contains(&[outside]) {
                return (outside, outside);
            }
            for _ in 0..200 {
                let mid = (inside + outside) / T::lit(2.0);
                if mid == inside || mid == outside {
                    break;
                }
                if self.contains(&[mid]) {
                    inside = mid;
                } else {
                    outside = mid;
                }
            }
            (inside, outside)
        };
        Ok(Some((edge(a, bbox.lo[0]), edge(a, bbox.hi[0]))))
    }
}

/// Iterator over lattice points `anchor + step * i` inside a box, in
/// lexicographic index order (first axis outermost).
pub struct Lattice<T> {
    anchor: Vec<T>,
    step: T,
    lo_idx: Vec<i64>,
    hi_idx: Vec<i64>,
    cur: Vec<i64>,
    done: bool,
}

impl<T: Scalar> Lattice<T> {
    pub fn new(anchor: &[T], bbox: &BoundingBox<T>, step: T) -> Self {
        let mut lo_idx = Vec::with_capacity(anchor.len());
        let mut hi_idx = Vec::with_capacity(anchor.len());
        for ((&a, &l), &h) in anchor.iter().zip(&bbox.lo).zip(&bbox.hi) {
            let lo = ((l - a) / step).ceil().to_i64().unwrap_or(0).min(0);
            let hi = ((h - a) / step).floor().to_i64().unwrap_or(0).max(0);
            lo_idx.push(lo);
            hi_idx.push(hi);
        }
        Self {
            anchor: anchor.to_vec(),
            step,
            cur: lo_idx.clone(),
            lo_idx,
            hi_idx,
            done: false,
        }
    }

    /// Total number of lattice points in the box.
    pub fn len_in_box(&self) -> usize {
        self.lo_idx
            .iter()
            .zip(&self.hi_idx)
            .map(|(l, h)| (h - l + 1) as usize)
            .product()
    }
}

impl<T: Scalar> Iterator for Lattice<T> {
    type Item = Vec<T>;

    fn next(&mut self) -> Option<Vec<T>> {
        if self.done {
            return None;
        }
        let p = self
            .anchor
            .iter()
            .zip(&self.cur)
            .map(|(&a, &i)| if i == 0 { a } else { a + T::from_i64(i).expect("index") * self.step })
            .collect();
        // advance, last axis fastest
        let mut axis = self.cur.len();
        loop {
            if axis == 0 {
                self.done = true;
                break;
            }
            axis -= 1;
            if self.cur[axis] < self.hi_idx[axis] {
                self.cur[axis] += 1;
                break;
            }
            self.cur[axis] = self.lo_idx[axis];
        }
        Some(p)
    }
}
