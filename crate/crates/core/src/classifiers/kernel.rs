//! Kernel-similarity weights and the flip bound.

use std::sync::atomic::{AtomicU64, Ordering};

use super::schedule::KernelKind;
use crate::scalar::{distance, Scalar};

#[derive(Debug)]
pub(crate) struct KernelModel<T> {
    dim: usize,
    coords: Vec<T>,
    keys: Vec<f64>,
    kernel: KernelKind,
    h: T,
    fallbacks: AtomicU64,
}

impl<T: Clone> Clone for KernelModel<T> {
    fn clone(&self) -> Self {
        Self {
            dim: self.dim,
            coords: self.coords.clone(),
            keys: self.keys.clone(),
            kernel: self.kernel,
            h: self.h.clone(),
            fallbacks: AtomicU64::new(self.fallbacks.load(Ordering::Relaxed)),
        }
    }
}

/// Margin at a point together with a bound on how far it can move within a radius.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FlipCheck<T> {
    pub margin: T,
    pub bound: T,
}

impl<T: Scalar> FlipCheck<T> {
    /// The sign of the margin provably cannot change within the radius.
    pub fn certified(&self) -> bool {
        self.margin != T::zero() && self.margin.abs() > self.bound
    }
}

impl<T: Scalar> KernelModel<T> {
    pub(crate) fn new(dim: usize, coords: Vec<T>, keys: Vec<f64>, kernel: KernelKind, h: T) -> Self {
        Self {
            dim,
            coords,
            keys,
            kernel,
            h,
            fallbacks: AtomicU64::new(0),
        }
    }

    pub(crate) fn bandwidth(&self) -> T {
        self.h
    }

    pub(crate) fn kernel(&self) -> KernelKind {
        self.kernel
    }

    pub(crate) fn fallback_count(&self) -> u64 {
        self.fallbacks.load(Ordering::Relaxed)
    }

    fn distances(&self, x: &[T]) -> Vec<T> {
        self.coords
            .chunks_exact(self.dim)
            .map(|p| distance(p, x))
            .collect()
    }

    /// Unnormalized weights scaled so the largest is 1, or `None` when every
    /// kernel value is unusable.
    fn scaled(&self, rho: &[T]) -> Option<Vec<T>> {
        let logs: Vec<T> = rho.iter().map(|&r| self.kernel.log_eval(r / self.h)).collect();
        let max = logs.iter().copied().fold(T::neg_infinity(), T::max);
        if !max.is_finite() {
            return None;
        }
        Some(logs.into_iter().map(|l| (l - max).exp()).collect())
    }

    /// One-hot weights on the nearest sample (ties by key).
    fn nearest_fallback(&self, rho: &[T]) -> Vec<T> {
        self.fallbacks.fetch_add(1, Ordering::Relaxed);
        let best = (0..rho.len())
            .min_by(|&a, &b| {
                rho[a]
                    .partial_cmp(&rho[b])
                    .unwrap_or(std::cmp::Ordering::Equal)
                    .then_with(|| self.keys[a].total_cmp(&self.keys[b]))
            })
            .expect("non-empty training set");
        let mut w = vec![T::zero(); rho.len()];
        w[best] = T::one();
        w
    }

    pub(crate) fn weights(&self, x: &[T]) -> Vec<T> {
        let rho = self.distances(x);
        match self.scaled(&rho) {
            Some(u) => {
                let total: T = u.iter().copied().sum();
                u.into_iter().map(|v| v / total).collect()
            }
            None => self.nearest_fallback(&rho),
        }
    }

    pub(crate) fn margin(&self, x: &[T], labels: &[T]) -> T {
        let rho = self.distances(x);
        match self.scaled(&rho) {
            Some(u) => {
                let (num, den) = u
                    .iter()
                    .zip(labels)
                    .fold((T::zero(), T::zero()), |(n, d), (&w, &y)| (n + w * y, d + w));
                num / den
            }
            None => {
                let w = self.nearest_fallback(&rho);
                w.iter().zip(labels).map(|(&w, &y)| w * y).sum()
            }
        }
    }

    /// Margin at `x` and an upper bound on `|m(x') - m(x)|` over `rho(x, x') <= radius`.
    ///
    /// Each unnormalized weight moves by at most `sup|K'| * radius / h` over
    /// its reachable distance range, and the normalizer stays above
    /// `sum_i K((rho_i + radius) / h)`.
    pub(crate) fn flip_check(&self, x: &[T], labels: &[T], radius: T) -> FlipCheck<T> {
        let inconclusive = |margin| FlipCheck { margin, bound: T::infinity() };
        let rho = self.distances(x);
        let Some(u) = self.scaled(&rho) else {
            let w = self.nearest_fallback(&rho);
            return inconclusive(w.iter().zip(labels).map(|(&w, &y)| w * y).sum());
        };
        let (num, den) = u
            .iter()
            .zip(labels)
            .fold((T::zero(), T::zero()), |(n, d), (&w, &y)| (n + w * y, d + w));
        let margin = num / den;
        if radius == T::zero() {
            return FlipCheck { margin, bound: T::zero() };
        }
        let s = radius / self.h;
        let spread = |y: T| (y - margin).abs();
        let (change, floor) = match self.kernel {
            KernelKind::Exponential => {
                // the largest scaled weight is exp(-rho_min / h) before scaling
                let rho_min = rho.iter().copied().fold(T::infinity(), T::min);
                let grow = s.exp();
                let mut change = T::zero();
                for ((&r, &w), &y) in rho.iter().zip(&u).zip(labels) {
                    let steep = if r >= radius { w * grow } else { (rho_min / self.h).exp() };
                    change = change + steep * spread(y);
                }
                (change, den / grow)
            }
            KernelKind::Polynomial => {
                // linear domain; scaled weights are K(rho/h) / K(rho_min/h)
                let rho_min = rho.iter().copied().fold(T::infinity(), T::min);
                let scale = self.kernel.eval(rho_min / self.h);
                let mut change = T::zero();
                let mut floor = T::zero();
                for (&r, &y) in rho.iter().zip(labels) {
                    let a = ((r - radius) / self.h).max(T::zero());
                    let b = (r + radius) / self.h;
                    let t = self.kernel.steepest_in(a, b);
                    let d = T::lit(2.0) * t / ((T::one() + t * t) * (T::one() + t * t));
                    change = change + d * spread(y);
                    floor = floor + self.kernel.eval(b);
                }
                (change / scale, floor / scale)
            }
            KernelKind::Gaussian => {
                let mut log_change = Vec::with_capacity(rho.len());
                let mut log_floor = Vec::with_capacity(rho.len());
                for (&r, &y) in rho.iter().zip(labels) {
                    let a = ((r - radius) / self.h).max(T::zero());
                    let b = (r + radius) / self.h;
                    let t = self.kernel.steepest_in(a, b);
                    log_change.push(self.kernel.log_abs_derivative(t) + spread(y).ln());
                    log_floor.push(self.kernel.log_eval(b));
                }
                let shift = log_floor.iter().copied().fold(T::neg_infinity(), T::max);
                let change: T = log_change.iter().map(|&l| (l - shift).exp()).sum();
                let floor: T = log_floor.iter().map(|&l| (l - shift).exp()).sum();
                (change, floor)
            }
        };
        if !(floor > T::zero()) || !change.is_finite() {
            return inconclusive(margin);
        }
        FlipCheck { margin, bound: s * change / floor }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn two_point(kernel: KernelKind) -> (KernelModel<f64>, Vec<f64>) {
        (KernelModel::new(1, vec![0.0, 1.0], vec![0.3, 0.7], kernel, 1.0), vec![1.0, -1.0])
    }

    #[test]
    fn exponential_weights_example() {
        let (m, _) = two_point(KernelKind::Exponential);
        let w = m.weights(&[0.2]);
        let oracle = 1.0 / (1.0 + (-0.6f64).exp());
        assert!((w[0] - oracle).abs() < 1e-15);
        assert!((w[0] - 0.6457).abs() < 1e-4 && (w[1] - 0.3543).abs() < 1e-4);
    }

    #[test]
    fn far_queries_do_not_underflow() {
        let m = KernelModel::new(1, vec![0.0, 1.0], vec![0.3, 0.7], KernelKind::Gaussian, 1e-3);
        let w = m.weights(&[1e3]);
        assert!((w.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        assert_eq!(w, vec![0.0, 1.0]);
        assert_eq!(m.fallback_count(), 0);
    }

    #[test]
    fn flip_bound_two_point_example() {
        let (m, y) = two_point(KernelKind::Exponential);
        let c = m.flip_check(&[0.2], &y, 0.01);
        assert!((c.margin - 0.2913).abs() < 1e-4);
        // direct evaluation of the bound: L_i = exp(-(rho_i - r)), floor = sum exp(-(rho_i + r))
        let r = 0.01f64;
        let m0 = c.margin;
        let num = (-(0.2 - r)).exp() * (1.0 - m0) + (-(0.8 - r)).exp() * (1.0 + m0);
        let den = (-(0.2 + r)).exp() + (-(0.8 + r)).exp();
        assert!((c.bound - r * num / den).abs() < 1e-12);
        assert!(c.certified());
        // every point within the radius keeps the sign and stays within the bound
        for i in 0..=1000 {
            let q = 0.19 + 0.02 * i as f64 / 1000.0;
            let mq = m.margin(&[q], &y);
            assert!(mq > 0.0 && (mq - m0).abs() <= c.bound);
        }
    }

    #[test]
    fn zero_radius_and_single_point() {
        let (m, y) = two_point(KernelKind::Polynomial);
        let c = m.flip_check(&[0.3], &y, 0.0);
        assert_eq!(c.bound, 0.0);
        assert!(c.certified());
        let single = KernelModel::new(2, vec![0.5, 0.5], vec![0.1], KernelKind::Gaussian, 0.05);
        let c = single.flip_check(&[0.0, 0.0], &[-1.0], 5.0);
        assert_eq!(c.margin, -1.0);
        assert!(c.certified());
    }

    #[test]
    fn flip_bound_dominates_observed_change() {
        for kernel in [KernelKind::Exponential, KernelKind::Gaussian, KernelKind::Polynomial] {
            let xs: Vec<f64> = (0..30).map(|i| (i as f64 * 0.618).fract()).collect();
            let ys: Vec<f64> = (0..30).map(|i| if (i * 5) % 3 == 0 { 1.0 } else { -1.0 }).collect();
            let m = KernelModel::new(1, xs, vec![0.0; 30], kernel, 0.1);
            for q in 0..50 {
                let x = q as f64 / 50.0;
                let r = 0.02;
                let c = m.flip_check(&[x], &ys, r);
                for j in 0..=200 {
                    let xp = x - r + 2.0 * r * j as f64 / 200.0;
                    let d = (m.margin(&[xp], &ys) - c.margin).abs();
                    assert!(d <= c.bound * (1.0 + 1e-9) + 1e-15, "{kernel:?} x={x} xp={xp}");
                }
            }
        }
    }
}
