//! Recursive hypercube histogram weights.

use crate::scalar::Scalar;

/// Recursion depth at which a cell becomes a leaf regardless of its count.
pub const MAX_DEPTH: usize = 64;

/// Root cube of the histogram partition.
#[derive(Clone, Debug, PartialEq)]
pub enum HistogramRoot<T> {
    /// Smallest cube containing the samples (slightly padded), centered on
    /// their bounding box.
    Auto,
    Fixed { lo: Vec<T>, side: T },
}

/// A leaf cell `[lo, lo + side)` and its sample count.
#[derive(Clone, Debug, PartialEq)]
pub struct HistogramLeaf<T> {
    pub lo: Vec<T>,
    pub side: T,
    pub count: usize,
    /// Sum of the +1/-1 labels in the cell.
    pub vote: i64,
}

#[derive(Clone, Copy, Debug)]
enum Node {
    Internal { first_child: usize },
    Leaf { start: usize, len: usize, vote: i64 },
}

#[derive(Clone, Debug)]
pub(crate) struct HistogramModel<T> {
    dim: usize,
    root_lo: Vec<T>,
    root_side: T,
    nodes: Vec<Node>,
    members: Vec<usize>,
    n: usize,
    saturated: usize,
}

struct Pending<T> {
    node: usize,
    lo: Vec<T>,
    side: T,
    idx: Vec<usize>,
    depth: usize,
}

fn auto_root<T: Scalar>(dim: usize, coords: &[T]) -> (Vec<T>, T) {
    let mut lo = vec![T::infinity(); dim];
    let mut hi = vec![T::neg_infinity(); dim];
    for p in coords.chunks_exact(dim) {
        for j in 0..dim {
            lo[j] = lo[j].min(p[j]);
            hi[j] = hi[j].max(p[j]);
        }
    }
    let range = (0..dim).map(|j| hi[j] - lo[j]).fold(T::zero(), T::max);
    let pad = T::one() + T::lit(1e-9).max(T::epsilon() * T::lit(4.0));
    let mut side = if range > T::zero() { range * pad } else { T::one() };
    let two = T::lit(2.0);
    let root_lo: Vec<T> = (0..dim)
        .map(|j| ((lo[j] + hi[j]) / two - side / two).min(lo[j]))
        .collect();
    for j in 0..dim {
        while root_lo[j] + side < hi[j] {
            side = side * pad;
        }
    }
    (root_lo, side)
}

impl<T: Scalar> HistogramModel<T> {
    pub(crate) fn new(dim: usize, coords: &[T], labels: &[T], k: usize, root: &HistogramRoot<T>) -> Self {
        let (root_lo, root_side) = match root {
            HistogramRoot::Auto => auto_root(dim, coords),
            HistogramRoot::Fixed { lo, side } => (lo.clone(), *side),
        };
        let n = coords.len() / dim;
        let point = |i: usize| &coords[i * dim..(i + 1) * dim];
        let inside: Vec<usize> = (0..n)
            .filter(|&i| {
                point(i)
                    .iter()
                    .zip(&root_lo)
                    .all(|(&v, &l)| v >= l && v <= l + root_side)
            })
            .collect();
        let fanout = 1usize << dim;
        let two = T::lit(2.0);
        let mut nodes = vec![Node::Leaf { start: 0, len: 0, vote: 0 }];
        let mut members = Vec::with_capacity(n);
        let mut saturated = 0;
        let mut stack = vec![Pending { node: 0, lo: root_lo.clone(), side: root_side, idx: inside, depth: 0 }];
        while let Some(Pending { node, lo, side, idx, depth }) = stack.pop() {
            if idx.len() <= k || depth >= MAX_DEPTH {
                if idx.len() > k {
                    saturated += 1;
                }
                let vote = idx.iter().map(|&i| if labels[i] > T::zero() { 1 } else { -1 }).sum();
                nodes[node] = Node::Leaf { start: members.len(), len: idx.len(), vote };
                members.extend_from_slice(&idx);
                continue;
            }
            let half = side / two;
            let first_child = nodes.len();
            nodes[node] = Node::Internal { first_child };
            nodes.extend(std::iter::repeat_n(Node::Leaf { start: 0, len: 0, vote: 0 }, fanout));
            let mut buckets = vec![Vec::new(); fanout];
            for i in idx {
                buckets[child_slot(point(i), &lo, half)].push(i);
            }
            for (slot, bucket) in buckets.into_iter().enumerate().rev() {
                let child_lo = (0..dim)
                    .map(|j| if slot >> j & 1 == 1 { lo[j] + half } else { lo[j] })
                    .collect();
                stack.push(Pending { node: first_child + slot, lo: child_lo, side: half, idx: bucket, depth: depth + 1 });
            }
        }
        Self { dim, root_lo, root_side, nodes, members, n, saturated }
    }

    pub(crate) fn saturated_leaves(&self) -> usize {
        self.saturated
    }

    pub(crate) fn root(&self) -> (&[T], T) {
        (&self.root_lo, self.root_side)
    }

    fn in_root(&self, x: &[T]) -> bool {
        x.iter()
            .zip(&self.root_lo)
            .all(|(&v, &l)| v >= l && v <= l + self.root_side)
    }

    /// The leaf node containing `x`, if `x` lies in the root cube.
    fn locate(&self, x: &[T]) -> Option<Node> {
        if !self.in_root(x) {
            return None;
        }
        let mut lo = self.root_lo.clone();
        let mut half = self.root_side / T::lit(2.0);
        let mut node = self.nodes[0];
        while let Node::Internal { first_child } = node {
            let slot = child_slot(x, &lo, half);
            for (j, l) in lo.iter_mut().enumerate() {
                if slot >> j & 1 == 1 {
                    *l = *l + half;
                }
            }
            half = half / T::lit(2.0);
            node = self.nodes[first_child + slot];
        }
        Some(node)
    }

    pub(crate) fn weights(&self, x: &[T]) -> Vec<T> {
        let mut w = vec![T::zero(); self.n];
        if let Some(Node::Leaf { start, len, .. }) = self.locate(x) {
            if len > 0 {
                let share = T::count(len).recip();
                for &i in &self.members[start..start + len] {
                    w[i] = share;
                }
            }
        }
        w
    }

    pub(crate) fn margin(&self, x: &[T]) -> T {
        match self.locate(x) {
            Some(Node::Leaf { len, vote, .. }) if len > 0 => {
                T::from_i64(vote).expect("vote") / T::count(len)
            }
            _ => T::zero(),
        }
    }

    /// Leaves whose cells intersect the box `[lo, hi]`, in depth-first order.
    pub(crate) fn leaves_in_box(&self, lo: &[T], hi: &[T]) -> Vec<HistogramLeaf<T>> {
        let mut out = Vec::new();
        let mut stack = vec![(0usize, self.root_lo.clone(), self.root_side)];
        while let Some((id, cell_lo, side)) = stack.pop() {
            let overlaps = (0..self.dim).all(|j| cell_lo[j] <= hi[j] && cell_lo[j] + side >= lo[j]);
            if !overlaps {
                continue;
            }
            match self.nodes[id] {
                Node::Leaf { len, vote, .. } => out.push(HistogramLeaf { lo: cell_lo, side, count: len, vote }),
                Node::Internal { first_child } => {
                    let half = side / T::lit(2.0);
                    for slot in (0..1usize << self.dim).rev() {
                        let child_lo = (0..self.dim)
                            .map(|j| if slot >> j & 1 == 1 { cell_lo[j] + half } else { cell_lo[j] })
                            .collect();
                        stack.push((first_child + slot, child_lo, half));
                    }
                }
            }
        }
        out
    }

    pub(crate) fn leaves(&self) -> Vec<HistogramLeaf<T>> {
        let hi: Vec<T> = self.root_lo.iter().map(|&l| l + self.root_side).collect();
        self.leaves_in_box(&self.root_lo, &hi)
    }
}

fn child_slot<T: Scalar>(x: &[T], lo: &[T], half: T) -> usize {
    x.iter()
        .zip(lo)
        .enumerate()
        .fold(0, |slot, (j, (&v, &l))| if v >= l + half { slot | 1 << j } else { slot })
}
