//! Astuteness certification: checking that a classifier is correct at an
//! anchor and constant over its robustness region.
//!
//! Kernel classifiers are certified by covering the region with lattice cubes
//! and bounding the margin change inside each cube. One-dimensional k-NN and
//! histogram classifiers are piecewise constant with known break points, so
//! their regions are checked exactly. The remaining cases fall back to
//! evaluating the classifier on the region grid.

mod protocol;

pub use protocol::{
    empirical_accuracy, empirical_astuteness, empirical_astuteness_multi, AstutenessReport,
    Protocol, TestLabels,
};
pub(crate) use protocol::mean_std;

use crate::classifiers::{ClassifierFamily, FittedClassifier, Predictor};
use crate::distributions::{DataDistribution, Label, Point, SupportSelector};
use crate::error::{Error, Result};
use crate::regions::{make_region, Lattice, RobustnessRegion};
use crate::scalar::Scalar;

/// Grid spacing used when none is given.
pub const DEFAULT_GRID_STEP: f64 = 0.01;

/// Number of times an inconclusive cube is split before giving up.
pub const MAX_REFINEMENTS: usize = 4;

/// How robustness was established.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CertMethod {
    /// The region is the anchor alone.
    Degenerate,
    /// Lattice cubes covering the region, each settled by the kernel flip bound.
    FlipBound,
    /// Exact enumeration of the constant pieces met by a one-dimensional region.
    ExactInterval,
    /// Evaluation at the region grid points only.
    GridOnly,
    /// Robustness not examined.
    AccuracyOnly,
}

/// Outcome of certifying one anchor.
#[derive(Clone, Debug, PartialEq)]
pub struct CertResult<T> {
    pub anchor: Point<T>,
    pub label: Label,
    pub astute: bool,
    pub accurate_at_anchor: bool,
    pub robust: bool,
    /// A region point predicted differently from the anchor.
    pub counterexample: Option<Point<T>>,
    pub grid_points_checked: usize,
    pub flip_bound_used: bool,
    /// Deepest cube refinement level used.
    pub refined_steps: usize,
    /// Some cube stayed inconclusive after the last refinement; robustness is
    /// then reported false without a counterexample.
    pub refinement_exhausted: bool,
    pub method: CertMethod,
}

impl<T: Scalar> CertResult<T> {
    fn new(anchor: &Point<T>, label: Label, prediction: Label, method: CertMethod) -> Self {
        Self {
            anchor: anchor.clone(),
            label,
            astute: false,
            accurate_at_anchor: prediction == label,
            robust: true,
            counterexample: None,
            grid_points_checked: 0,
            flip_bound_used: false,
            refined_steps: 0,
            refinement_exhausted: false,
            method,
        }
    }

    fn finish(mut self, verdict: Verdict<T>) -> Self {
        match verdict {
            Verdict::Robust => self.robust = true,
            Verdict::Counterexample(p) => {
                self.robust = false;
                self.counterexample = Some(p);
            }
            Verdict::Inconclusive => {
                self.robust = false;
                self.refinement_exhausted = true;
            }
        }
        self.astute = self.accurate_at_anchor && self.robust;
        self
    }
}

enum Verdict<T> {
    Robust,
    Counterexample(Point<T>),
    Inconclusive,
}

/// Result of the kernel flip bound at a point.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum FlipVerdict {
    /// The prediction provably does not change within the radius.
    Certified,
    Inconclusive,
}

/// Checks whether the margin of a kernel classifier keeps its sign within `radius` of `x`.
pub fn kernel_flip_bound<T: Scalar>(clf: &FittedClassifier<T>, x: &[T], radius: T) -> Result<FlipVerdict> {
    if !(radius >= T::zero()) {
        return Err(Error::InvalidParameter("radius must be non-negative".into()));
    }
    let check = clf
        .flip_check(x, radius)
        .ok_or_else(|| Error::InvalidParameter("flip bound needs a kernel classifier".into()))?;
    Ok(if check.certified() { FlipVerdict::Certified } else { FlipVerdict::Inconclusive })
}

/// Certifies that `clf` is correct at `x` (true label `y`) and constant over
/// the region with factor `kappa`.
pub fn certify_astute<T: Scalar>(
    clf: &FittedClassifier<T>,
    dist: &DataDistribution<T>,
    x: &Point<T>,
    y: Label,
    kappa: T,
    step: T,
) -> Result<CertResult<T>> {
    if x.dim() != clf.dim() {
        return Err(Error::DimensionMismatch { expected: clf.dim(), got: x.dim() });
    }
    let region = make_region(dist, x, kappa)?;
    certify_in_region(clf, &region, y, step)
}

/// [`certify_astute`] for a prebuilt region.
pub fn certify_in_region<T: Scalar>(
    clf: &FittedClassifier<T>,
    region: &RobustnessRegion<T>,
    y: Label,
    step: T,
) -> Result<CertResult<T>> {
    if !(step > T::zero()) {
        return Err(Error::InvalidParameter("grid step must be positive".into()));
    }
    let anchor = region.anchor();
    let prediction = clf.predict(anchor);
    if region.is_degenerate() {
        let mut res = CertResult::new(anchor, y, prediction, CertMethod::Degenerate);
        res.grid_points_checked = 1;
        return Ok(res.finish(Verdict::Robust));
    }
    let one_dim = region.dim() == 1;
    match clf.family() {
        ClassifierFamily::Kernel(_) => cover_with_flip_bound(clf, region, y, prediction, step),
        ClassifierFamily::Knn(_) if one_dim && clf.sorted_line().is_some_and(|l| l.has_distinct_coords()) => {
            exact_knn_line(clf, region, y, prediction)
        }
        ClassifierFamily::Histogram(_) if one_dim => exact_histogram_line(clf, region, y, prediction),
        _ => grid_only(clf, region, y, prediction, step),
    }
}

/// Grid-only certification for an arbitrary predictor.
pub fn certify_on_grid<T: Scalar, P: Predictor<T> + ?Sized>(
    predictor: &P,
    dist: &DataDistribution<T>,
    x: &Point<T>,
    y: Label,
    kappa: T,
    step: T,
) -> Result<CertResult<T>> {
    if !(step > T::zero()) {
        return Err(Error::InvalidParameter("grid step must be positive".into()));
    }
    let region = make_region(dist, x, kappa)?;
    let prediction = predictor.predict(x);
    if region.is_degenerate() {
        let mut res = CertResult::new(x, y, prediction, CertMethod::Degenerate);
        res.grid_points_checked = 1;
        return Ok(res.finish(Verdict::Robust));
    }
    grid_only(predictor, &region, y, prediction, step)
}

fn grid_only<T: Scalar, P: Predictor<T> + ?Sized>(
    predictor: &P,
    region: &RobustnessRegion<T>,
    y: Label,
    prediction: Label,
    step: T,
) -> Result<CertResult<T>> {
    let mut res = CertResult::new(region.anchor(), y, prediction, CertMethod::GridOnly);
    let bbox = region.bounding_box()?;
    let mut verdict = Verdict::Robust;
    for q in Lattice::new(region.anchor(), &bbox, step) {
        if !region.contains(&q) {
            continue;
        }
        res.grid_points_checked += 1;
        if predictor.predict(&q) != prediction {
            verdict = Verdict::Counterexample(Point::from_vec_unchecked(q));
            break;
        }
    }
    Ok(res.finish(verdict))
}

/// Covers the region by lattice cubes of side `step` and settles each cube
/// with the flip bound, splitting inconclusive cubes up to [`MAX_REFINEMENTS`] times.
///
/// Lattice cubes are grouped into aligned blocks of `2^j` per axis; a block
/// is split only when the bound cannot settle it as a whole.
fn cover_with_flip_bound<T: Scalar>(
    clf: &FittedClassifier<T>,
    region: &RobustnessRegion<T>,
    y: Label,
    prediction: Label,
    step: T,
) -> Result<CertResult<T>> {
    let mut res = CertResult::new(region.anchor(), y, prediction, CertMethod::FlipBound);
    res.flip_bound_used = true;
    let d = region.dim();
    let root_d = T::count(d).sqrt();
    let lipschitz = T::one() + region.kappa();
    let half = step / T::lit(2.0);
    let anchor = region.anchor().coords();
    let bbox = region.bounding_box()?.expanded(half);

    // lattice index range of the box, and the coarsest level whose blocks are box-sized
    let idx = |v: T, a: T, up: bool| -> i64 {
        let t = (v - a) / step;
        (if up { t.ceil() } else { t.floor() }).to_f64_lossy() as i64
    };
    let i_lo: Vec<i64> = (0..d).map(|j| idx(bbox.lo[j], anchor[j], false)).collect();
    let i_hi: Vec<i64> = (0..d).map(|j| idx(bbox.hi[j], anchor[j], true)).collect();
    let span = (0..d).map(|j| i_hi[j] - i_lo[j] + 1).max().unwrap_or(1);
    let mut top = 0u32;
    while (1i64 << top) < span && top < 40 {
        top += 1;
    }
    let b_lo: Vec<i64> = i_lo.iter().map(|&i| i.div_euclid(1 << top)).collect();
    let b_hi: Vec<i64> = i_hi.iter().map(|&i| i.div_euclid(1 << top)).collect();
    let center_of = |block: &[i64], level: u32| -> Vec<T> {
        let size = (1i64 << level) as f64;
        block
            .iter()
            .zip(anchor)
            .map(|(&b, &a)| a + step * T::lit((b as f64 + 0.5) * size - 0.5))
            .collect()
    };

    // first pass: blocks from coarse to fine, collecting unsettled lattice cubes
    let mut stack: Vec<(Vec<i64>, u32)> = Vec::new();
    let mut block = b_lo.clone();
    loop {
        stack.push((block.clone(), top));
        let mut j = d;
        loop {
            if j == 0 {
                break;
            }
            j -= 1;
            if block[j] < b_hi[j] {
                block[j] += 1;
                break;
            }
            block[j] = b_lo[j];
        }
        if block == b_lo {
            break;
        }
    }
    stack.reverse();
    let mut pending = Vec::new();
    while let Some((block, level)) = stack.pop() {
        let c = center_of(&block, level);
        let h = half * T::lit((1i64 << level) as f64);
        let gap = region.tolerant_gap(&c);
        if gap <= -lipschitz * h * root_d {
            continue;
        }
        res.grid_points_checked += 1;
        let check = clf.flip_check(&c, h * root_d).expect("kernel classifier");
        let here = Label::from_vote(check.margin);
        if gap > T::zero() && here != prediction {
            return Ok(res.finish(Verdict::Counterexample(Point::from_vec_unchecked(c))));
        }
        if here == prediction && check.certified() {
            continue;
        }
        if level == 0 {
            pending.push(c);
            continue;
        }
        for corner in (0..1usize << d).rev() {
            let child: Vec<i64> = block
                .iter()
                .enumerate()
                .map(|(j, &b)| 2 * b + (corner >> (d - 1 - j) & 1) as i64)
                .collect();
            stack.push((child, level - 1));
        }
    }

    // second pass: refine the cubes the bound could not settle
    let mut exhausted = false;
    for q in pending {
        let mut stack = vec![(q, half, 0usize)];
        while let Some((center, h, level)) = stack.pop() {
            if level == MAX_REFINEMENTS {
                exhausted = true;
                continue;
            }
            let child_half = h / T::lit(2.0);
            res.refined_steps = res.refined_steps.max(level + 1);
            for corner in 0..1usize << d {
                let c: Vec<T> = center
                    .iter()
                    .enumerate()
                    .map(|(j, &v)| if corner >> j & 1 == 1 { v + child_half } else { v - child_half })
                    .collect();
                let gap = region.tolerant_gap(&c);
                if gap <= -lipschitz * child_half * root_d {
                    continue;
                }
                res.grid_points_checked += 1;
                let check = clf.flip_check(&c, child_half * root_d).expect("kernel classifier");
                let here = Label::from_vote(check.margin);
                if gap > T::zero() && here != prediction {
                    return Ok(res.finish(Verdict::Counterexample(Point::from_vec_unchecked(c))));
                }
                if !(here == prediction && check.certified()) {
                    stack.push((c, child_half, level + 1));
                }
            }
        }
    }
    Ok(res.finish(if exhausted { Verdict::Inconclusive } else { Verdict::Robust }))
}

/// Confirms a candidate counterexample against the region and classifier.
fn confirmed<T: Scalar>(
    clf: &FittedClassifier<T>,
    region: &RobustnessRegion<T>,
    prediction: Label,
    q: T,
) -> Option<Point<T>> {
    (region.contains(&[q]) && clf.predict(&[q]) != prediction).then(|| Point::from_vec_unchecked(vec![q]))
}

/// One-dimensional k-NN: the neighbor window moves monotonically with the
/// query, so the region meets exactly the windows between those of its endpoints.
fn exact_knn_line<T: Scalar>(
    clf: &FittedClassifier<T>,
    region: &RobustnessRegion<T>,
    y: Label,
    prediction: Label,
) -> Result<CertResult<T>> {
    let mut res = CertResult::new(region.anchor(), y, prediction, CertMethod::ExactInterval);
    let line = clf.sorted_line().expect("one-dimensional k-NN");
    let (l, r) = region.interval_core()?.expect("one-dimensional region");
    let (j0, j1) = (line.window_start(l), line.window_start(r));
    let mut verdict = Verdict::Robust;
    for j in j0..=j1 {
        res.grid_points_checked += 1;
        let window_label = if line.window_vote(j) > 0 { Label::Positive } else { Label::Negative };
        if window_label == prediction {
            continue;
        }
        let (lo, hi) = line.window_interval(j);
        let (lo, hi) = (lo.max(l), hi.min(r));
        let q = if lo < hi { (lo + hi) / T::lit(2.0) } else { lo };
        match confirmed(clf, region, prediction, q) {
            Some(p) => {
                verdict = Verdict::Counterexample(p);
                break;
            }
            // the window is only met at a key-resolved tie point
            None => continue,
        }
    }
    Ok(res.finish(verdict))
}

/// One-dimensional histogram: the region meets a known list of leaf cells
/// plus possibly the outside of the root cell.
fn exact_histogram_line<T: Scalar>(
    clf: &FittedClassifier<T>,
    region: &RobustnessRegion<T>,
    y: Label,
    prediction: Label,
) -> Result<CertResult<T>> {
    let mut res = CertResult::new(region.anchor(), y, prediction, CertMethod::ExactInterval);
    let (l, r) = region.interval_core()?.expect("one-dimensional region");
    let (leaves, root_lo, side) = clf.histogram_leaves_in_box(&[l], &[r]).expect("histogram classifier");
    let two = T::lit(2.0);
    let mut candidates = Vec::new();
    if prediction == Label::Positive {
        // outside the root everything is predicted -1
        let root_hi = root_lo[0] + side;
        if l < root_lo[0] {
            candidates.push((l + root_lo[0].min(r)) / two);
        }
        if r > root_hi {
            candidates.push((r + root_hi.max(l)) / two);
        }
    }
    for leaf in &leaves {
        let leaf_label = if leaf.count > 0 && leaf.vote > 0 { Label::Positive } else { Label::Negative };
        if leaf_label == prediction {
            continue;
        }
        let (lo, hi) = (leaf.lo[0].max(l), (leaf.lo[0] + leaf.side).min(r));
        candidates.push(if lo < hi { (lo + hi) / two } else { lo });
    }
    res.grid_points_checked = leaves.len() + 1;
    let verdict = candidates
        .into_iter()
        .find_map(|q| confirmed(clf, region, prediction, q))
        .map_or(Verdict::Robust, Verdict::Counterexample);
    Ok(res.finish(verdict))
}

/// The neighborhood-preserving Bayes optimal classifier: `+1` iff the query is
/// at least as close to the positive support as to the negative one.
#[derive(Clone, Copy, Debug)]
pub struct NeighborhoodBayes<'a, T> {
    dist: &'a DataDistribution<T>,
}

impl<'a, T: Scalar> NeighborhoodBayes<'a, T> {
    pub fn new(dist: &'a DataDistribution<T>) -> Self {
        Self { dist }
    }
}

impl<T: Scalar> Predictor<T> for NeighborhoodBayes<'_, T> {
    fn predict(&self, x: &[T]) -> Label {
        neighborhood_bayes_predict(self.dist, x).expect("supports are non-empty")
    }
}

/// Distances that agree up to rounding count as a tie, which goes to `+1`.
pub fn neighborhood_bayes_predict<T: Scalar>(dist: &DataDistribution<T>, x: &[T]) -> Result<Label> {
    let pos = dist.support_distance(SupportSelector::Pos, x)?;
    let neg = dist.support_distance(SupportSelector::Neg, x)?;
    let scale = x.iter().fold(T::one(), |m, v| m.max(v.abs()));
    let slack = T::epsilon() * T::lit(64.0) * scale;
    Ok(if pos <= neg + slack { Label::Positive } else { Label::Negative })
}
