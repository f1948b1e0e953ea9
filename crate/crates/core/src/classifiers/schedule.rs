//! Neighbor-count and bandwidth schedules.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Rounds `v` up, treating values within floating-point noise of an integer as
/// that integer (so `1e5^0.4` gives 100, not 101).
fn snapped_ceil(v: f64) -> f64 {
    let r = v.round();
    if (v - r).abs() <= 1e-9 * r.abs().max(1.0) {
        r
    } else {
        v.ceil()
    }
}

/// How the neighbor count (or histogram leaf capacity) grows with `n`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum KSchedule {
    /// `ceil(c * log2 n)`, clamped to `[1, n]`.
    LogCeil(f64),
    /// `ceil(n^p)`, clamped to `[1, n]`.
    Power(f64),
    /// A constant `k`; fitting fails when `k > n`.
    Fixed(usize),
}

impl KSchedule {
    pub fn validate(&self) -> Result<()> {
        match *self {
            KSchedule::LogCeil(c) if !(c > 0.0 && c.is_finite()) => Err(Error::InvalidParameter(
                format!("log_ceil constant must be positive, got {c}"),
            )),
            KSchedule::Power(p) if !(p > 0.0 && p < 1.0) => Err(Error::InvalidParameter(
                format!("power exponent must lie in (0, 1), got {p}"),
            )),
            KSchedule::Fixed(0) => Err(Error::InvalidParameter("fixed k must be at least 1".into())),
            _ => Ok(()),
        }
    }

    /// The count for a sample of size `n`.
    pub fn k_for(&self, n: usize) -> usize {
        let clamp = |v: f64| (v.max(1.0) as usize).min(n.max(1));
        match *self {
            KSchedule::LogCeil(c) => clamp(snapped_ceil(c * (n as f64).log2())),
            KSchedule::Power(p) => clamp(snapped_ceil((n as f64).powf(p))),
            KSchedule::Fixed(k) => k,
        }
    }
}

/// `k_schedule(kind, n)`; requires `n >= 2`.
pub fn k_schedule(kind: KSchedule, n: usize) -> Result<usize> {
    if n < 2 {
        return Err(Error::NTooSmall(n));
    }
    kind.validate()?;
    Ok(kind.k_for(n))
}

impl fmt::Display for KSchedule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            KSchedule::LogCeil(c) => write!(f, "log_ceil:{c}"),
            KSchedule::Power(p) => write!(f, "power:{p}"),
            KSchedule::Fixed(k) => write!(f, "fixed:{k}"),
        }
    }
}

impl FromStr for KSchedule {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::InvalidParameter(format!("unknown k schedule `{s}`"));
        let (kind, arg) = s.split_once(':').ok_or_else(bad)?;
        let sched = match kind {
            "log_ceil" => KSchedule::LogCeil(arg.parse().map_err(|_| bad())?),
            "power" => KSchedule::Power(arg.parse().map_err(|_| bad())?),
            "fixed" => KSchedule::Fixed(arg.parse().map_err(|_| bad())?),
            _ => return Err(bad()),
        };
        sched.validate()?;
        Ok(sched)
    }
}

/// Decreasing kernel profiles `K(u)` on `u >= 0`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum KernelKind {
    /// `exp(-u)`
    Exponential,
    /// `exp(-u^2)`
    Gaussian,
    /// `1 / (1 + u^2)`
    Polynomial,
}

impl KernelKind {
    pub fn name(self) -> &'static str {
        match self {
            KernelKind::Exponential => "exponential",
            KernelKind::Gaussian => "gaussian",
            KernelKind::Polynomial => "polynomial",
        }
    }

    pub fn eval<T: Scalar>(self, u: T) -> T {
        self.log_eval(u).exp()
    }

    /// `ln K(u)`, finite for every finite `u`.
    pub fn log_eval<T: Scalar>(self, u: T) -> T {
        match self {
            KernelKind::Exponential => -u,
            KernelKind::Gaussian => -u * u,
            KernelKind::Polynomial => -log1p_sq(u),
        }
    }

    /// The point of `[a, b]` (with `0 <= a <= b`) where `|K'|` is largest.
    pub fn steepest_in<T: Scalar>(self, a: T, b: T) -> T {
        let peak = match self {
            KernelKind::Exponential => return a,
            KernelKind::Gaussian => T::lit(std::f64::consts::FRAC_1_SQRT_2),
            KernelKind::Polynomial => T::lit(1.0 / 3f64.sqrt()),
        };
        peak.max(a).min(b)
    }

    /// `ln |K'(u)|`; `-inf` where the derivative vanishes.
    pub fn log_abs_derivative<T: Scalar>(self, u: T) -> T {
        match self {
            KernelKind::Exponential => -u,
            KernelKind::Gaussian => T::lit(2.0).ln() + u.ln() - u * u,
            KernelKind::Polynomial => T::lit(2.0).ln() + u.ln() - T::lit(2.0) * log1p_sq(u),
        }
    }
}

/// `ln(1 + u^2)` without overflowing for large `u`.
fn log1p_sq<T: Scalar>(u: T) -> T {
    let u = u.abs();
    if u > T::one() {
        T::lit(2.0) * u.ln() + (u * u).recip().ln_1p()
    } else {
        (u * u).ln_1p()
    }
}

impl FromStr for KernelKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "exponential" => Ok(KernelKind::Exponential),
            "gaussian" => Ok(KernelKind::Gaussian),
            "polynomial" => Ok(KernelKind::Polynomial),
            _ => Err(Error::InvalidParameter(format!("unknown kernel `{s}`"))),
        }
    }
}

/// Bandwidth as a function of the training size.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum BandwidthSchedule {
    /// `1 / (10 sqrt(ln n))`
    SqrtLog,
    /// `1 / (10 n^(1/3))`
    CubeRoot,
    Fixed(f64),
}

impl fmt::Display for BandwidthSchedule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            BandwidthSchedule::SqrtLog => write!(f, "sqrt_log"),
            BandwidthSchedule::CubeRoot => write!(f, "cube_root"),
            BandwidthSchedule::Fixed(h) => write!(f, "fixed:{h}"),
        }
    }
}

impl FromStr for BandwidthSchedule {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "sqrt_log" => Ok(BandwidthSchedule::SqrtLog),
            "cube_root" => Ok(BandwidthSchedule::CubeRoot),
            _ => match s.split_once(':') {
                Some(("fixed", h)) => match h.parse::<f64>() {
                    Ok(h) if h > 0.0 && h.is_finite() => Ok(BandwidthSchedule::Fixed(h)),
                    _ => Err(Error::InvalidParameter(format!("bad fixed bandwidth `{h}`"))),
                },
                _ => Err(Error::InvalidParameter(format!("unknown bandwidth schedule `{s}`"))),
            },
        }
    }
}

/// Kernel profile plus bandwidth schedule.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct KernelSpec {
    pub kernel: KernelKind,
    pub bandwidth: BandwidthSchedule,
}

impl KernelSpec {
    pub fn new(kernel: KernelKind, bandwidth: BandwidthSchedule) -> Self {
        Self { kernel, bandwidth }
    }
}

/// The bandwidth `h_n`; requires `n >= 2`.
pub fn bandwidth<T: Scalar>(spec: &KernelSpec, n: usize) -> Result<T> {
    if n < 2 {
        return Err(Error::NTooSmall(n));
    }
    let n = n as f64;
    let h = match spec.bandwidth {
        BandwidthSchedule::SqrtLog => 1.0 / (10.0 * n.ln().sqrt()),
        BandwidthSchedule::CubeRoot => 1.0 / (10.0 * n.cbrt()),
        BandwidthSchedule::Fixed(h) => h,
    };
    Ok(T::lit(h))
}
