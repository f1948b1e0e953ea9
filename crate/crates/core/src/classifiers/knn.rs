//! k-nearest-neighbor weights.

use std::cmp::Ordering;

use crate::scalar::{squared_distance, Scalar};

#[derive(Clone, Debug)]
pub(crate) struct KnnModel<T> {
    dim: usize,
    coords: Vec<T>,
    keys: Vec<f64>,
    k: usize,
    sorted: Option<SortedLine<T>>,
}

impl<T: Scalar> KnnModel<T> {
    pub(crate) fn new(dim: usize, coords: Vec<T>, keys: Vec<f64>, labels: &[T], k: usize) -> Self {
        let sorted = (dim == 1).then(|| SortedLine::new(&coords, &keys, labels, k));
        Self { dim, coords, keys, k, sorted }
    }

    pub(crate) fn k(&self) -> usize {
        self.k
    }

    pub(crate) fn sorted_line(&self) -> Option<&SortedLine<T>> {
        self.sorted.as_ref()
    }

    /// Indices of the `k` nearest samples, ordered by (distance, key).
    pub(crate) fn neighbors(&self, x: &[T]) -> Vec<usize> {
        let mut cand: Vec<(T, f64, usize)> = self
            .coords
            .chunks_exact(self.dim)
            .zip(&self.keys)
            .enumerate()
            .map(|(i, (p, &key))| (squared_distance(p, x), key, i))
            .collect();
        let by_rank = |a: &(T, f64, usize), b: &(T, f64, usize)| {
            a.0.partial_cmp(&b.0)
                .unwrap_or(Ordering::Equal)
                .then_with(|| a.1.total_cmp(&b.1))
        };
        if self.k < cand.len() {
            cand.select_nth_unstable_by(self.k - 1, by_rank);
            cand.truncate(self.k);
        }
        cand.sort_unstable_by(by_rank);
        cand.into_iter().map(|c| c.2).collect()
    }

    pub(crate) fn weights(&self, x: &[T]) -> Vec<T> {
        let mut w = vec![T::zero(); self.keys.len()];
        let share = T::count(self.k).recip();
        for i in self.neighbors(x) {
            w[i] = share;
        }
        w
    }

    pub(crate) fn margin(&self, x: &[T], labels: &[T]) -> T {
        if let Some(line) = self.sorted.as_ref().filter(|l| l.has_distinct_coords()) {
            let vote = line.window_vote(line.window_start(x[0]));
            return T::from_i64(vote).expect("vote") / T::count(self.k);
        }
        let votes: T = self.neighbors(x).into_iter().map(|i| labels[i]).sum();
        votes / T::count(self.k)
    }
}

/// Sorted view of one-dimensional training data: the `k` nearest neighbors
/// of any query form a window of consecutive sorted samples.
#[derive(Clone, Debug)]
pub(crate) struct SortedLine<T> {
    xs: Vec<T>,
    keys: Vec<f64>,
    // prefix sums of +1/-1 labels in sorted order
    prefix: Vec<i64>,
    k: usize,
    distinct: bool,
}

impl<T: Scalar> SortedLine<T> {
    fn new(coords: &[T], keys: &[f64], labels: &[T], k: usize) -> Self {
        let mut order: Vec<usize> = (0..coords.len()).collect();
        order.sort_by(|&a, &b| {
            coords[a]
                .partial_cmp(&coords[b])
                .unwrap_or(Ordering::Equal)
                .then_with(|| keys[a].total_cmp(&keys[b]))
        });
        let xs: Vec<T> = order.iter().map(|&i| coords[i]).collect();
        let mut prefix = Vec::with_capacity(order.len() + 1);
        prefix.push(0i64);
        for &i in &order {
            let y = if labels[i] > T::zero() { 1 } else { -1 };
            prefix.push(prefix[prefix.len() - 1] + y);
        }
        let distinct = xs.windows(2).all(|w| w[0] < w[1]);
        Self {
            xs,
            keys: order.iter().map(|&i| keys[i]).collect(),
            prefix,
            k,
            distinct,
        }
    }

    pub(crate) fn has_distinct_coords(&self) -> bool {
        self.distinct
    }

    /// Number of windows, `n - k + 1`.
    pub(crate) fn window_count(&self) -> usize {
        self.xs.len() - self.k + 1
    }

    /// Whether window `j + 1` beats window `j` at query `q`.
    fn shifts_right(&self, j: usize, q: T) -> bool {
        let left = q - self.xs[j];
        let right = self.xs[j + self.k] - q;
        match left.partial_cmp(&right) {
            Some(Ordering::Greater) => true,
            Some(Ordering::Less) => false,
            _ => self.keys[j + self.k] < self.keys[j],
        }
    }

    /// Start of the nearest-neighbor window of `q`.
    pub(crate) fn window_start(&self, q: T) -> usize {
        let (mut lo, mut hi) = (0usize, self.window_count() - 1);
        while lo < hi {
            let mid = (lo + hi) / 2;
            if self.shifts_right(mid, q) {
                lo = mid + 1;
            } else {
                hi = mid;
            }
        }
        lo
    }

    /// Sum of labels over window `j`.
    pub(crate) fn window_vote(&self, j: usize) -> i64 {
        self.prefix[j + self.k] - self.prefix[j]
    }

    /// Open interval of queries whose window is `j` (distinct coordinates).
    pub(crate) fn window_interval(&self, j: usize) -> (T, T) {
        let two = T::lit(2.0);
        let lo = if j == 0 {
            T::neg_infinity()
        } else {
            (self.xs[j - 1] + self.xs[j + self.k - 1]) / two
        };
        let hi = if j + 1 == self.window_count() {
            T::infinity()
        } else {
            (self.xs[j] + self.xs[j + self.k]) / two
        };
        (lo, hi)
    }
}
