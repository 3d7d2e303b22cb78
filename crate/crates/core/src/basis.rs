//! Orthonormal basis families of `H(K)` with stable log-space evaluation.
//!
//! Three families are supported:
//!
//! * the sine basis of the iterated Brownian bridge kernel of order `s` on
//!   `[0, 1]`, `φ_n(t) = √2 (πn)^{-s/2} sin(πnt)` for `n ≥ 1`;
//! * the Gaussian-kernel basis `φ_n(t) = t^n exp(-t²/(2ℓ²)) / (ℓ^n √n!)` for
//!   `n ≥ 0`;
//! * power-series bases `φ_n(t) = t^n √w_n / n!` for `n ≥ 0`.
//!
//! Factorial-type magnitudes always go through log-gamma.

use std::f64::consts::{LN_2, PI};
use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::numeric::{ln_factorial, sin_pi};

/// Closed real interval `[lo, hi]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Interval {
    pub lo: f64,
    pub hi: f64,
}

impl Interval {
    pub fn new(lo: f64, hi: f64) -> Result<Self> {
        if !(lo.is_finite() && hi.is_finite() && lo < hi) {
            return Err(Error::InvalidParameter(format!(
                "interval [{lo}, {hi}] must be finite and non-degenerate"
            )));
        }
        Ok(Self { lo, hi })
    }

    pub fn unit() -> Self {
        Self { lo: 0.0, hi: 1.0 }
    }

    pub fn contains(&self, t: f64) -> bool {
        t >= self.lo && t <= self.hi
    }

    pub fn check(&self, t: f64) -> Result<()> {
        if self.contains(t) {
            Ok(())
        } else {
            Err(Error::Domain {
                t,
                lo: self.lo,
                hi: self.hi,
            })
        }
    }

    /// `count` equispaced points including both endpoints.
    pub fn grid(&self, count: usize) -> Vec<f64> {
        match count {
            0 => Vec::new(),
            1 => vec![self.lo],
            _ => {
                let last = (count - 1) as f64;
                (0..count)
                    .map(|i| {
                        if i + 1 == count {
                            self.hi
                        } else {
                            self.lo + (self.hi - self.lo) * i as f64 / last
                        }
                    })
                    .collect()
            }
        }
    }

    pub fn max_abs(&self) -> f64 {
        self.lo.abs().max(self.hi.abs())
    }
}

/// Weights `w_n` of a power-series kernel `Σ w_n (tt')^n / (n!)²`.
#[derive(Clone)]
pub enum WeightSequence {
    /// `w_n = (n!)²`, the Szegő kernel `1/(1 - tt')`.
    Szego,
    /// `w_n = n!`, the exponential kernel `exp(tt')`.
    Exponential,
    /// `w_0 = 1`, `w_n = n! n`, the kernel `1 + tt' exp(tt')`.
    SzegoCounter,
    /// User weights supplied directly as `n ↦ ln w_n`.
    Custom(Arc<dyn Fn(u64) -> f64 + Send + Sync>),
}

impl WeightSequence {
    /// `ln w_n`.
    pub fn ln_weight(&self, n: u64) -> f64 {
        match self {
            WeightSequence::Szego => 2.0 * ln_factorial(n),
            WeightSequence::Exponential => ln_factorial(n),
            WeightSequence::SzegoCounter => {
                if n == 0 {
                    0.0
                } else {
                    ln_factorial(n) + (n as f64).ln()
                }
            }
            WeightSequence::Custom(f) => f(n),
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            WeightSequence::Szego => "szego",
            WeightSequence::Exponential => "exp",
            WeightSequence::SzegoCounter => "szego-counter",
            WeightSequence::Custom(_) => "custom",
        }
    }

    /// Growth class `(k, p)` with `w_n ≍ (n!)^k n^p`, when known.
    pub(crate) fn growth(&self) -> Option<(i32, f64)> {
        match self {
            WeightSequence::Szego => Some((2, 0.0)),
            WeightSequence::Exponential => Some((1, 0.0)),
            WeightSequence::SzegoCounter => Some((1, 1.0)),
            WeightSequence::Custom(_) => None,
        }
    }

    /// Upper bound on `w_{n+1} / (w_n (n+1)²)` valid for all `n ≥ from`.
    pub(crate) fn step_ratio_bound(&self, from: u64) -> Option<f64> {
        let n = from as f64;
        match self {
            WeightSequence::Szego => Some(1.0),
            WeightSequence::Exponential => Some(1.0 / (n + 1.0)),
            // w_{n+1}/w_n = (n+1)²/n for n ≥ 1
            WeightSequence::SzegoCounter => Some(if from == 0 { 1.0 } else { 1.0 / n }),
            WeightSequence::Custom(_) => None,
        }
    }
}

impl fmt::Debug for WeightSequence {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl PartialEq for WeightSequence {
    fn eq(&self, other: &Self) -> bool {
        match (self, other) {
            (WeightSequence::Custom(a), WeightSequence::Custom(b)) => Arc::ptr_eq(a, b),
            _ => std::mem::discriminant(self) == std::mem::discriminant(other),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum BasisKind {
    SineIbb { order: u32 },
    GaussianExp { length_scale: f64 },
    PowerSeries { weights: WeightSequence },
}

/// An orthonormal basis `(φ_n)` of `H(K)` on a real interval.
#[derive(Debug, Clone, PartialEq)]
pub struct BasisFamily {
    kind: BasisKind,
    domain: Interval,
}

/// Sign and log-magnitude of a real number. `sign == 0` encodes an exact zero,
/// in which case `ln_mag` is `-inf`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LogAbs {
    pub sign: i8,
    pub ln_mag: f64,
}

impl LogAbs {
    pub const ZERO: LogAbs = LogAbs {
        sign: 0,
        ln_mag: f64::NEG_INFINITY,
    };

    pub fn value(&self) -> f64 {
        if self.sign == 0 {
            0.0
        } else {
            f64::from(self.sign) * self.ln_mag.exp()
        }
    }

    pub fn from_value(x: f64) -> Self {
        if x == 0.0 {
            Self::ZERO
        } else {
            LogAbs {
                sign: if x > 0.0 { 1 } else { -1 },
                ln_mag: x.abs().ln(),
            }
        }
    }
}

impl BasisFamily {
    /// Sine basis of the iterated Brownian bridge kernel of order `s ≥ 2` on `[0, 1]`.
    pub fn sine_ibb(order: u32) -> Result<Self> {
        if order < 2 {
            return Err(Error::InvalidParameter(format!(
                "iterated Brownian bridge order must be at least 2, got {order}"
            )));
        }
        Ok(Self {
            kind: BasisKind::SineIbb { order },
            domain: Interval::unit(),
        })
    }

    /// Gaussian-kernel basis with length-scale `ℓ` on a bounded interval.
    pub fn gaussian(length_scale: f64, domain: Interval) -> Result<Self> {
        if !(length_scale.is_finite() && length_scale > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "length-scale must be positive, got {length_scale}"
            )));
        }
        Ok(Self {
            kind: BasisKind::GaussianExp { length_scale },
            domain,
        })
    }

    /// Power-series basis `t^n √w_n / n!`. Szegő weights need `T ⊂ (-1, 1)`.
    pub fn power_series(weights: WeightSequence, domain: Interval) -> Result<Self> {
        if matches!(weights, WeightSequence::Szego) && !(domain.lo > -1.0 && domain.hi < 1.0) {
            return Err(Error::InvalidParameter(format!(
                "Szegő weights need a domain inside (-1, 1), got [{}, {}]",
                domain.lo, domain.hi
            )));
        }
        Ok(Self {
            kind: BasisKind::PowerSeries { weights },
            domain,
        })
    }

    pub fn kind(&self) -> &BasisKind {
        &self.kind
    }

    pub fn domain(&self) -> Interval {
        self.domain
    }

    /// First valid index: 1 for the sine family, 0 otherwise.
    pub fn index_origin(&self) -> u64 {
        match self.kind {
            BasisKind::SineIbb { .. } => 1,
            _ => 0,
        }
    }

    pub fn family_name(&self) -> &'static str {
        match self.kind {
            BasisKind::SineIbb { .. } => "sine-ibb",
            BasisKind::GaussianExp { .. } => "gaussian",
            BasisKind::PowerSeries { .. } => "power-series",
        }
    }

    /// Whether `d_K` is known to be a metric on the domain. This is recorded
    /// per family, not verified numerically.
    pub fn metric_flag(&self) -> bool {
        match &self.kind {
            BasisKind::SineIbb { .. } | BasisKind::GaussianExp { .. } => true,
            // φ_1(t) = t √w_1 separates points for every cataloged weight sequence
            BasisKind::PowerSeries { weights } => !matches!(weights, WeightSequence::Custom(_)),
        }
    }

    fn check(&self, n: u64, t: f64) -> Result<()> {
        let origin = self.index_origin();
        if n < origin {
            return Err(Error::Index { n, origin });
        }
        self.domain.check(t)
    }

    /// `φ_n(t)`.
    pub fn eval(&self, n: u64, t: f64) -> Result<f64> {
        self.check(n, t)?;
        Ok(self.eval_unchecked(n, t))
    }

    pub(crate) fn eval_unchecked(&self, n: u64, t: f64) -> f64 {
        match &self.kind {
            BasisKind::SineIbb { order } => {
                if t == 0.0 || t == 1.0 {
                    return 0.0;
                }
                let nf = n as f64;
                let amp = (2.0f64).sqrt() * (PI * nf).powf(-f64::from(*order) / 2.0);
                amp * sin_pi(nf * t)
            }
            _ => self.log_abs_unchecked(n, t).value(),
        }
    }

    /// `(sign, ln|φ_n(t)|)`.
    pub fn log_abs(&self, n: u64, t: f64) -> Result<LogAbs> {
        self.check(n, t)?;
        Ok(self.log_abs_unchecked(n, t))
    }

    pub(crate) fn log_abs_unchecked(&self, n: u64, t: f64) -> LogAbs {
        let nf = n as f64;
        match &self.kind {
            BasisKind::SineIbb { order } => {
                if t == 0.0 || t == 1.0 {
                    return LogAbs::ZERO;
                }
                let s = sin_pi(nf * t);
                if s == 0.0 {
                    return LogAbs::ZERO;
                }
                LogAbs {
                    sign: if s > 0.0 { 1 } else { -1 },
                    ln_mag: 0.5 * LN_2 - 0.5 * f64::from(*order) * (PI * nf).ln() + s.abs().ln(),
                }
            }
            BasisKind::GaussianExp { length_scale } => {
                let ell = *length_scale;
                let envelope = -t * t / (2.0 * ell * ell);
                monomial_log_abs(n, t).map_or(LogAbs::ZERO, |(sign, ln_pow)| LogAbs {
                    sign,
                    ln_mag: ln_pow + envelope - nf * ell.ln() - 0.5 * ln_factorial(n),
                })
            }
            BasisKind::PowerSeries { weights } => {
                monomial_log_abs(n, t).map_or(LogAbs::ZERO, |(sign, ln_pow)| LogAbs {
                    sign,
                    ln_mag: ln_pow + 0.5 * weights.ln_weight(n) - ln_factorial(n),
                })
            }
        }
    }

    /// Second derivative `φ_n''(t) = -(πn)² φ_n(t)`; sine family only.
    pub fn eval_d2(&self, n: u64, t: f64) -> Result<f64> {
        match self.kind {
            BasisKind::SineIbb { .. } => {
                let v = self.eval(n, t)?;
                let w = PI * n as f64;
                Ok(-(w * w) * v)
            }
            _ => Err(Error::UnsupportedFamily {
                family: self.family_name(),
            }),
        }
    }
}

/// `(sign(t^n), n ln|t|)`, or `None` when `t^n == 0`.
fn monomial_log_abs(n: u64, t: f64) -> Option<(i8, f64)> {
    if n == 0 {
        return Some((1, 0.0));
    }
    if t == 0.0 {
        return None;
    }
    let sign = if t < 0.0 && n % 2 == 1 { -1 } else { 1 };
    Some((sign, n as f64 * t.abs().ln()))
}
