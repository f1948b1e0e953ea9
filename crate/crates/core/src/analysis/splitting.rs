//! Brute-force splitting numbers for small samples.

use std::collections::BTreeSet;

use crate::classifiers::FittedClassifier;
use crate::error::{Error, Result};
use crate::scalar::{distance, Scalar};

/// Largest sample size the enumeration accepts.
pub const MAX_ENUMERATION_N: usize = 12;

// relative slack when comparing distances and weights to thresholds
const TIE_SLACK: f64 = 1e-12;
const COARSE_GRID: usize = 64;

/// Distinct index sets `{i : rho(x, x_i) <= alpha, w_i(x) >= beta}`, as bitmasks.
#[derive(Clone, Debug, PartialEq)]
pub struct SplittingEnumeration {
    pub subsets: BTreeSet<u32>,
    pub count: usize,
    pub sample_size: usize,
    pub dimension: usize,
    /// Number of query points examined.
    pub candidates: usize,
    /// Exact in one dimension; in two dimensions, whether doubling the
    /// fallback grid left the count unchanged.
    pub stable: bool,
}

impl SplittingEnumeration {
    /// Members of a subset as sample indices.
    pub fn members(mask: u32) -> Vec<usize> {
        (0..32).filter(|&i| mask >> i & 1 == 1).collect()
    }
}

/// Enumerates every subset `W_{x, alpha, beta}` generated by the fitted weights.
///
/// Queries are taken from the critical arrangement of the sample (points,
/// pairwise midpoints, and in one dimension the midpoints between consecutive
/// critical points; in two dimensions bisector intersections plus small
/// perturbations and a fallback grid). For each query every distinct distance
/// and weight value is used as a threshold.
pub fn splitting_number_bruteforce<T: Scalar>(clf: &FittedClassifier<T>, max_n: usize) -> Result<SplittingEnumeration> {
    let n = clf.dataset().len();
    let d = clf.dim();
    if max_n > MAX_ENUMERATION_N || n > max_n || d > 2 {
        return Err(Error::TooLarge { n, d, max: max_n.min(MAX_ENUMERATION_N) });
    }
    let pts: Vec<Vec<T>> = clf.dataset().samples().iter().map(|s| s.point.coords().to_vec()).collect();
    let mut subsets = BTreeSet::from([0u32]);
    if d == 1 {
        let queries = line_candidates(clf, &pts);
        for q in &queries {
            collect_subsets(clf, &pts, q, &mut subsets);
        }
        return Ok(SplittingEnumeration {
            count: subsets.len(),
            subsets,
            sample_size: n,
            dimension: d,
            candidates: queries.len(),
            stable: true,
        });
    }
    let critical = plane_candidates(clf, &pts);
    let mut seen = critical.len();
    for q in &critical {
        collect_subsets(clf, &pts, q, &mut subsets);
    }
    for q in plane_grid(clf, &pts, COARSE_GRID) {
        collect_subsets(clf, &pts, &q, &mut subsets);
        seen += 1;
    }
    let coarse = subsets.len();
    for q in plane_grid(clf, &pts, 2 * COARSE_GRID) {
        collect_subsets(clf, &pts, &q, &mut subsets);
        seen += 1;
    }
    Ok(SplittingEnumeration {
        count: subsets.len(),
        stable: subsets.len() == coarse,
        subsets,
        sample_size: n,
        dimension: d,
        candidates: seen,
    })
}

fn collect_subsets<T: Scalar>(clf: &FittedClassifier<T>, pts: &[Vec<T>], x: &[T], out: &mut BTreeSet<u32>) {
    let rho: Vec<T> = pts.iter().map(|p| distance(p, x)).collect();
    let w = clf.weights(x).weights;
    let slack = T::lit(TIE_SLACK);
    let within = |a: T| -> u32 {
        (0..rho.len()).fold(0, |m, i| if rho[i] <= a * (T::one() + slack) + T::min_positive_value() { m | 1 << i } else { m })
    };
    let heavy = |b: T| -> u32 {
        (0..w.len()).fold(0, |m, i| if w[i] >= b * (T::one() - slack) { m | 1 << i } else { m })
    };
    let balls: BTreeSet<u32> = rho.iter().map(|&a| within(a)).collect();
    let mut levels: BTreeSet<u32> = w.iter().filter(|&&v| v > T::zero()).map(|&b| heavy(b)).collect();
    levels.insert(heavy(T::zero()));
    for &a in &balls {
        for &b in &levels {
            out.insert(a & b);
        }
    }
}

fn line_candidates<T: Scalar>(clf: &FittedClassifier<T>, pts: &[Vec<T>]) -> Vec<Vec<T>> {
    let two = T::lit(2.0);
    let mut breaks: Vec<T> = pts.iter().map(|p| p[0]).collect();
    for i in 0..pts.len() {
        for j in i + 1..pts.len() {
            breaks.push((pts[i][0] + pts[j][0]) / two);
        }
    }
    if let Some(leaves) = clf.histogram_leaves() {
        for leaf in leaves {
            breaks.push(leaf.lo[0]);
            breaks.push(leaf.lo[0] + leaf.side);
        }
    }
    breaks.sort_by(|a, b| a.partial_cmp(b).expect("finite"));
    breaks.dedup();
    let mut out: Vec<Vec<T>> = breaks.iter().map(|&b| vec![b]).collect();
    out.extend(breaks.windows(2).map(|w| vec![(w[0] + w[1]) / two]));
    out.push(vec![breaks[0] - T::one()]);
    out.push(vec![breaks[breaks.len() - 1] + T::one()]);
    out
}

fn plane_candidates<T: Scalar>(clf: &FittedClassifier<T>, pts: &[Vec<T>]) -> Vec<Vec<T>> {
    let two = T::lit(2.0);
    let mut crit: Vec<Vec<T>> = pts.to_vec();
    // perpendicular bisectors as a.x = c
    let mut lines = Vec::new();
    for i in 0..pts.len() {
        for j in i + 1..pts.len() {
            let a = [pts[j][0] - pts[i][0], pts[j][1] - pts[i][1]];
            let mid = [(pts[i][0] + pts[j][0]) / two, (pts[i][1] + pts[j][1]) / two];
            crit.push(mid.to_vec());
            lines.push((a, a[0] * mid[0] + a[1] * mid[1]));
        }
    }
    for (u, &(a, c)) in lines.iter().enumerate() {
        for &(b, e) in &lines[u + 1..] {
            let det = a[0] * b[1] - a[1] * b[0];
            if det.abs() > T::lit(1e-12) {
                crit.push(vec![(c * b[1] - e * a[1]) / det, (a[0] * e - b[0] * c) / det]);
            }
        }
    }
    if let Some(leaves) = clf.histogram_leaves() {
        for leaf in leaves {
            for corner in 0..4usize {
                crit.push(
                    (0..2)
                        .map(|j| if corner >> j & 1 == 1 { leaf.lo[j] + leaf.side } else { leaf.lo[j] })
                        .collect(),
                );
            }
        }
    }
    let scale = crit.iter().flatten().fold(T::one(), |m, v| m.max(v.abs()));
    let delta = T::lit(1e-7) * scale;
    let mut out = crit.clone();
    for c in &crit {
        for k in 0..8 {
            let angle = T::lit(std::f64::consts::FRAC_PI_4 * k as f64 + 0.1);
            out.push(vec![c[0] + delta * angle.cos(), c[1] + delta * angle.sin()]);
        }
    }
    out
}

/// `g x g` grid over the sample box padded by half its extent.
fn plane_grid<T: Scalar>(clf: &FittedClassifier<T>, pts: &[Vec<T>], g: usize) -> Vec<Vec<T>> {
    let mut lo = [T::infinity(); 2];
    let mut hi = [T::neg_infinity(); 2];
    for p in pts {
        for j in 0..2 {
            lo[j] = lo[j].min(p[j]);
            hi[j] = hi[j].max(p[j]);
        }
    }
    if let Some(leaves) = clf.histogram_leaves() {
        for leaf in leaves {
            for j in 0..2 {
                lo[j] = lo[j].min(leaf.lo[j]);
                hi[j] = hi[j].max(leaf.lo[j] + leaf.side);
            }
        }
    }
    let pad = (0..2).map(|j| hi[j] - lo[j]).fold(T::lit(0.5), T::max) / T::lit(2.0);
    let (lo, hi) = ([lo[0] - pad, lo[1] - pad], [hi[0] + pad, hi[1] + pad]);
    let at = |j: usize, i: usize| lo[j] + (hi[j] - lo[j]) * T::count(i) / T::count(g - 1);
    (0..g)
        .flat_map(|a| (0..g).map(move |b| vec![at(0, a), at(1, b)]))
        .collect()
}
