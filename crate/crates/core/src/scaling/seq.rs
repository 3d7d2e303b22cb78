//! Positive sequences with certified tail brackets, the currency of the
//! constructive operations.

use std::fmt;
use std::sync::Arc;

use super::ScalingFamily;
use crate::error::{Error, Result};

/// Bracket `lower ≤ Σ_{l ≥ n} a_l ≤ upper`, stored as logarithms.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TailBracket {
    pub ln_lower: f64,
    pub ln_upper: f64,
}

impl TailBracket {
    pub fn lower(&self) -> f64 {
        self.ln_lower.exp()
    }

    pub fn upper(&self) -> f64 {
        self.ln_upper.exp()
    }
}

/// A positive sequence `(a_n)_{n ≥ origin}` evaluated in log space.
pub trait PositiveSeq: Send + Sync {
    fn origin(&self) -> u64;

    /// `ln a_n` for `n ≥ origin`.
    fn ln_term(&self, n: u64) -> f64;

    /// Certified bracket of `Σ_{l ≥ n} a_l`, or `None` when no tail rule is known.
    fn tail(&self, n: u64) -> Option<TailBracket>;

    fn label(&self) -> String;

    fn term(&self, n: u64) -> f64 {
        self.ln_term(n).exp()
    }

    /// Upper bound on the full sum.
    fn certified_sum_bound(&self) -> Option<f64> {
        self.tail(self.origin()).map(|b| b.upper())
    }
}

impl fmt::Debug for dyn PositiveSeq {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "PositiveSeq({})", self.label())
    }
}

pub type SeqHandle = Arc<dyn PositiveSeq>;

struct Reciprocals(ScalingFamily);

impl PositiveSeq for Reciprocals {
    fn origin(&self) -> u64 {
        self.0.index_origin()
    }

    fn ln_term(&self, n: u64) -> f64 {
        -self.0.ln_term_unchecked(n)
    }

    fn tail(&self, n: u64) -> Option<TailBracket> {
        self.0.reciprocal_tail(n)
    }

    fn label(&self) -> String {
        format!("1/({})", self.0)
    }
}

pub(super) fn reciprocal_seq(s: ScalingFamily) -> SeqHandle {
    Arc::new(Reciprocals(s))
}

struct Geometric {
    origin: u64,
    ln_first: f64,
    ln_ratio: f64,
}

impl PositiveSeq for Geometric {
    fn origin(&self) -> u64 {
        self.origin
    }

    fn ln_term(&self, n: u64) -> f64 {
        self.ln_first + (n - self.origin) as f64 * self.ln_ratio
    }

    fn tail(&self, n: u64) -> Option<TailBracket> {
        let v = self.ln_term(n) - (-self.ln_ratio.exp_m1()).ln();
        Some(TailBracket {
            ln_lower: v,
            ln_upper: v,
        })
    }

    fn label(&self) -> String {
        format!("{}·{}^(n-{})", self.ln_first.exp(), self.ln_ratio.exp(), self.origin)
    }
}

/// `a_n = first · ratio^{n - origin}` with `0 < ratio < 1`; tails are exact.
pub fn geometric_seq(origin: u64, first: f64, ratio: f64) -> Result<SeqHandle> {
    if !(first > 0.0 && first.is_finite() && ratio > 0.0 && ratio < 1.0) {
        return Err(Error::InvalidParameter(format!(
            "geometric sequence needs first > 0 and ratio in (0, 1), got {first}, {ratio}"
        )));
    }
    Ok(Arc::new(Geometric {
        origin,
        ln_first: first.ln(),
        ln_ratio: ratio.ln(),
    }))
}

/// `a_n = n^{-q}` for `n ≥ origin ≥ 1`, `q > 1`; tails bracketed by the integral test.
pub fn power_law_seq(origin: u64, q: f64) -> Result<SeqHandle> {
    if origin == 0 {
        return Err(Error::InvalidParameter("power law needs origin ≥ 1".into()));
    }
    if !(q > 1.0) {
        return Err(Error::NotSummable(format!("Σ n^-{q} diverges")));
    }
    ScalingFamily::hyperharmonic(q)?.with_origin(origin)?.reciprocals()
}

struct FnSeq {
    origin: u64,
    label: String,
    ln_term: Arc<dyn Fn(u64) -> f64 + Send + Sync>,
    tail: Option<Arc<dyn Fn(u64) -> TailBracket + Send + Sync>>,
}

impl PositiveSeq for FnSeq {
    fn origin(&self) -> u64 {
        self.origin
    }

    fn ln_term(&self, n: u64) -> f64 {
        (self.ln_term)(n)
    }

    fn tail(&self, n: u64) -> Option<TailBracket> {
        self.tail.as_ref().map(|f| f(n))
    }

    fn label(&self) -> String {
        self.label.clone()
    }
}

/// A user sequence given by `n ↦ ln a_n` and an optional declared tail rule.
pub fn seq_from_fn(
    origin: u64,
    label: impl Into<String>,
    ln_term: impl Fn(u64) -> f64 + Send + Sync + 'static,
    tail: Option<Arc<dyn Fn(u64) -> TailBracket + Send + Sync>>,
) -> SeqHandle {
    Arc::new(FnSeq {
        origin,
        label: label.into(),
        ln_term: Arc::new(ln_term),
        tail,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn geometric_tail_is_exact() {
        let s = geometric_seq(1, 0.5, 0.5).unwrap();
        let t = s.tail(3).unwrap();
        assert!((t.upper() - 0.25).abs() < 1e-15);
        assert_eq!(t.ln_lower, t.ln_upper);
        assert!((s.certified_sum_bound().unwrap() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn power_law_bracket() {
        let s = power_law_seq(1, 2.0).unwrap();
        let t = s.tail(10).unwrap();
        // Σ_{l≥10} l^-2 = ψ'(10) ≈ 0.105166
        assert!(t.lower() <= 0.105166 && 0.105167 <= t.upper());
        assert!((t.lower() - 0.1).abs() < 1e-14);
        assert!((t.upper() - 0.11).abs() < 1e-14);
        assert!(power_law_seq(1, 1.0).is_err());
    }
}
