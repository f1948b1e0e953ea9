//! Diagnostics for the consistency conditions: probability radii, splitting
//! numbers and grid estimates of the weight-concentration conditions.

mod splitting;

pub use splitting::{splitting_number_bruteforce, SplittingEnumeration, MAX_ENUMERATION_N};

use rayon::prelude::*;

use crate::classifiers::{ClassifierFamily, FittedClassifier};
use crate::distributions::{DataDistribution, Primitive};
use crate::error::{Error, Result};
use crate::scalar::{distance, Scalar};

// mass comparisons forgive rounding in the analytic ball measure
const MASS_SLACK: f64 = 1e-12;

/// `inf { r : mu(B(x, r)) >= p }`.
///
/// Exact for one-dimensional segment and point supports (the ball mass is
/// piecewise linear in `r`); otherwise bisection on the analytic ball mass,
/// returning the upper end of a bracket of width at most `1e-12`.
pub fn probability_radius<T: Scalar>(dist: &DataDistribution<T>, x: &[T], p: T) -> Result<T> {
    if !(p > T::zero() && p <= T::one()) {
        return Err(Error::InvalidParameter(format!("probability {p} outside (0, 1]")));
    }
    if x.len() != dist.dim() {
        return Err(Error::DimensionMismatch { expected: dist.dim(), got: x.len() });
    }
    let target = p - T::lit(MASS_SLACK);
    if dist.dim() == 1 {
        return Ok(piecewise_linear_radius(dist, x, p, target));
    }
    let bbox = dist.support_bounding_box();
    let mut hi = T::zero();
    for corner in 0..1usize << x.len() {
        let c: Vec<T> = (0..x.len())
            .map(|j| if corner >> j & 1 == 1 { bbox.hi[j] } else { bbox.lo[j] })
            .collect();
        hi = hi.max(distance(&c, x));
    }
    let mut lo = T::zero();
    if dist.ball_mass(x, lo) >= target {
        return Ok(lo);
    }
    let tol = T::lit(1e-12).max(T::epsilon() * T::lit(4.0) * hi);
    while hi - lo > tol {
        let mid = (lo + hi) / T::lit(2.0);
        if dist.ball_mass(x, mid) >= target {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(hi)
}

fn piecewise_linear_radius<T: Scalar>(dist: &DataDistribution<T>, x: &[T], p: T, target: T) -> T {
    let mut breaks = vec![T::zero()];
    for set in [dist.pos_support(), dist.neg_support()] {
        for prim in set.primitives() {
            match prim {
                Primitive::Segment { a, b } => {
                    breaks.push((a[0] - x[0]).abs());
                    breaks.push((b[0] - x[0]).abs());
                }
                Primitive::SinglePoint(q) => breaks.push((q[0] - x[0]).abs()),
                Primitive::Circle { .. } => unreachable!("circles need two dimensions"),
            }
        }
    }
    breaks.sort_by(|a, b| a.partial_cmp(b).expect("finite"));
    breaks.dedup();
    let (mut b0, mut m0) = (T::zero(), dist.ball_mass(x, T::zero()));
    if m0 >= target {
        return T::zero();
    }
    for &b in &breaks[1..] {
        let m = dist.ball_mass(x, b);
        if m >= target {
            // the mass is linear between breakpoints; a jump puts the radius at `b`
            let t = ((p - m0) / (m - m0)).min(T::one()).max(T::zero());
            return (b0 + t * (b - b0)).min(b);
        }
        (b0, m0) = (b, m);
    }
    *breaks.last().expect("at least one breakpoint")
}

/// Which condition an estimate refers to.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum ConditionId {
    /// Weight placed outside the probability-`p` ball.
    Cond2 { p: f64 },
    /// `t_n` times the largest single weight.
    Cond3,
}

/// A grid-based lower bound on a supremum over the query domain.
#[derive(Clone, Debug, PartialEq)]
pub struct ConditionEstimate {
    pub condition: ConditionId,
    pub n: usize,
    pub value: f64,
    /// Grid points per axis; zero when the value is exact.
    pub grid_resolution: usize,
    pub seed: u64,
}

/// Query grid with `grid` points per axis over the support bounding box.
fn query_grid<T: Scalar>(dist: &DataDistribution<T>, grid: usize) -> Vec<Vec<T>> {
    let bbox = dist.support_bounding_box();
    let grid = grid.max(2);
    let axes: Vec<Vec<T>> = (0..bbox.dim())
        .map(|j| {
            let (lo, hi) = (bbox.lo[j], bbox.hi[j]);
            (0..grid)
                .map(|i| lo + (hi - lo) * T::count(i) / T::count(grid - 1))
                .collect()
        })
        .collect();
    let mut out = vec![Vec::new()];
    for axis in &axes {
        out = out
            .into_iter()
            .flat_map(|prefix| {
                axis.iter().map(move |&v| {
                    let mut p = prefix.clone();
                    p.push(v);
                    p
                })
            })
            .collect();
    }
    out
}

/// Max over a query grid of `sum_i w_i(x) 1{rho(x, x_i) > r_p(x)}`.
pub fn estimate_condition2<T: Scalar>(
    clf: &FittedClassifier<T>,
    dist: &DataDistribution<T>,
    p: T,
    grid: usize,
) -> Result<ConditionEstimate> {
    if !(p > T::zero() && p < T::one()) {
        return Err(Error::InvalidParameter(format!("probability {p} outside (0, 1)")));
    }
    let samples = clf.dataset().samples();
    let values = query_grid(dist, grid)
        .par_iter()
        .map(|x| {
            let r = probability_radius(dist, x, p)?;
            let w = clf.weights(x);
            Ok(w.weights
                .iter()
                .zip(samples)
                .filter(|(_, s)| distance(&s.point, x) > r)
                .map(|(&w, _)| w)
                .sum::<T>())
        })
        .collect::<Result<Vec<T>>>()?;
    let value = values.into_iter().fold(T::zero(), T::max);
    Ok(ConditionEstimate {
        condition: ConditionId::Cond2 { p: p.to_f64_lossy() },
        n: samples.len(),
        value: value.to_f64_lossy(),
        grid_resolution: grid.max(2),
        seed: clf.dataset().seed(),
    })
}

/// `t_n` times the largest weight any training point receives.
///
/// Exact for k-NN (`t_n / k_n`) and histograms (`t_n` over the smallest
/// non-empty leaf count); kernels take the max over a query grid on the
/// support box plus the sample locations.
pub fn estimate_condition3<T: Scalar>(
    clf: &FittedClassifier<T>,
    dist: &DataDistribution<T>,
    t_n: f64,
    grid: usize,
) -> Result<ConditionEstimate> {
    if !(t_n >= 0.0 && t_n.is_finite()) {
        return Err(Error::InvalidParameter(format!("t_n must be non-negative, got {t_n}")));
    }
    let n = clf.dataset().len();
    let (value, resolution) = match clf.family() {
        ClassifierFamily::Knn(_) => (t_n / clf.k().expect("k-NN has k") as f64, 0),
        ClassifierFamily::Histogram(_) => {
            let smallest = clf
                .histogram_leaves()
                .expect("histogram leaves")
                .iter()
                .filter(|l| l.count > 0)
                .map(|l| l.count)
                .min()
                .expect("some leaf holds a sample");
            (t_n / smallest as f64, 0)
        }
        ClassifierFamily::Kernel(_) => {
            let mut queries = query_grid(dist, grid);
            queries.extend(clf.dataset().samples().iter().map(|s| s.point.coords().to_vec()));
            let best = queries
                .par_iter()
                .map(|x| clf.weights(x).weights.into_iter().fold(T::zero(), T::max))
                .reduce(T::zero, T::max);
            (t_n * best.to_f64_lossy(), grid.max(2))
        }
    };
    Ok(ConditionEstimate {
        condition: ConditionId::Cond3,
        n,
        value,
        grid_resolution: resolution,
        seed: clf.dataset().seed(),
    })
}

/// The rate `t_n = sqrt(d k_n ln n)` used with k-NN schedules.
pub fn knn_rate(d: usize, k: usize, n: usize) -> f64 {
    (d as f64 * k as f64 * (n as f64).ln()).sqrt()
}
