//! Symbolic scaling sequences `(α_n)`, their growth descriptors and the
//! convergence classification of `Σ 1/α_n`.

mod condense;
mod construct;
mod seq;

pub use condense::{condensation_sequence, Condensation, IndexSequence};
pub use construct::{dini_refine, dominating_convergent, strictly_smaller_envelope, Dominating};
pub use seq::{geometric_seq, power_law_seq, seq_from_fn, PositiveSeq, SeqHandle, TailBracket};

use std::cmp::Ordering;
use std::fmt;

use crate::error::{Error, Result};
use crate::numeric::{ln_add_exp, NeumaierSum};

/// Number of terms summed when only numeric evidence is available.
pub const EVIDENCE_TERMS: u64 = 10_000;

/// Index pattern of a rule-based splice.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum IndexPattern {
    /// `n = base^k`, `k ≥ 0`.
    PowersOf { base: u64 },
    /// `n = first + k·step`, `k ≥ 0`.
    Arithmetic { first: u64, step: u64 },
}

impl IndexPattern {
    pub fn contains(&self, n: u64) -> bool {
        match *self {
            IndexPattern::PowersOf { base } => {
                if n == 0 {
                    return false;
                }
                let mut m = n;
                while m.is_multiple_of(base) {
                    m /= base;
                }
                m == 1
            }
            IndexPattern::Arithmetic { first, step } => n >= first && (n - first).is_multiple_of(step),
        }
    }

    pub(crate) fn complement_is_infinite(&self) -> bool {
        match *self {
            IndexPattern::PowersOf { .. } => true,
            IndexPattern::Arithmetic { step, .. } => step >= 2,
        }
    }

    /// Descriptor of `k ↦ α_{g(k)}` given the descriptor of `n ↦ α_n`, or the
    /// reciprocal verdict directly when the growth leaves the descriptor class.
    pub(crate) fn along(&self, d: &GrowthDescriptor) -> std::result::Result<GrowthDescriptor, Verdict> {
        match *self {
            IndexPattern::PowersOf { base } => {
                if d.geometric_rate > 0.0 {
                    return Err(Verdict::Converges);
                }
                if d.geometric_rate < 0.0 {
                    return Err(Verdict::Diverges);
                }
                let mut logs = d.log_exponents.iter().copied();
                let poly = logs.next().unwrap_or(0.0);
                Ok(GrowthDescriptor {
                    geometric_rate: d.poly_exponent * (base as f64).ln(),
                    poly_exponent: poly,
                    log_exponents: logs.collect(),
                })
            }
            IndexPattern::Arithmetic { step, .. } => Ok(GrowthDescriptor {
                geometric_rate: d.geometric_rate * step as f64,
                ..d.clone()
            }),
        }
    }
}

/// Values replacing the base sequence on part of the index set.
#[derive(Debug, Clone, PartialEq)]
pub enum SpliceRule {
    /// Finitely many `(index, α)` pairs, sorted by index.
    Finite(Vec<(u64, f64)>),
    /// On the pattern, `α_n` is taken from `rule` at the same index `n`.
    Pattern {
        pattern: IndexPattern,
        rule: Box<ScalingFamily>,
    },
}

#[derive(Clone)]
pub enum ScalingKind {
    /// `α_n = n^ρ`, with `0^ρ = 1`.
    Hyperharmonic {
        rho: f64,
    },
    /// `α_n = τ^{2n}`.
    Geometric {
        tau: f64,
    },
    /// `α_n = (n+q) log(n+q) ··· log_{p-1}(n+q) · log_p(n+q)^ρ`.
    IteratedLog {
        p: u32,
        q: f64,
        rho: f64,
    },
    /// `α_n = n log(n+1)^c`.
    LogPower {
        c: f64,
    },
    Spliced {
        base: Box<ScalingFamily>,
        rule: SpliceRule,
    },
    /// `α_n = 1/a_n` for a positive sequence `a` which may carry a certified tail.
    Explicit {
        reciprocals: SeqHandle,
    },
}

impl fmt::Debug for ScalingKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ScalingKind::Hyperharmonic { rho } => write!(f, "Hyperharmonic({rho})"),
            ScalingKind::Geometric { tau } => write!(f, "Geometric({tau})"),
            ScalingKind::IteratedLog { p, q, rho } => write!(f, "IteratedLog({p}, {q}, {rho})"),
            ScalingKind::LogPower { c } => write!(f, "LogPower({c})"),
            ScalingKind::Spliced { base, rule } => write!(f, "Spliced({base:?}, {rule:?})"),
            ScalingKind::Explicit { reciprocals } => write!(f, "Explicit(1/{})", reciprocals.label()),
        }
    }
}

impl PartialEq for ScalingKind {
    fn eq(&self, other: &Self) -> bool {
        use ScalingKind::*;
        match (self, other) {
            (Hyperharmonic { rho: a }, Hyperharmonic { rho: b }) => a == b,
            (Geometric { tau: a }, Geometric { tau: b }) => a == b,
            (IteratedLog { p, q, rho }, IteratedLog { p: p2, q: q2, rho: r2 }) => p == p2 && q == q2 && rho == r2,
            (LogPower { c: a }, LogPower { c: b }) => a == b,
            (Spliced { base, rule }, Spliced { base: b2, rule: r2 }) => base == b2 && rule == r2,
            (Explicit { reciprocals: a }, Explicit { reciprocals: b }) => std::sync::Arc::ptr_eq(a, b),
            _ => false,
        }
    }
}

/// A positive scaling sequence `(α_n)_{n ≥ origin}`.
#[derive(Debug, Clone, PartialEq)]
pub struct ScalingFamily {
    kind: ScalingKind,
    origin: u64,
}

/// Asymptotic growth `exp(g n) · n^p · Π_j log_j(n)^{e_j}`.
#[derive(Debug, Clone, PartialEq)]
pub struct GrowthDescriptor {
    pub geometric_rate: f64,
    pub poly_exponent: f64,
    pub log_exponents: Vec<f64>,
}

impl GrowthDescriptor {
    pub fn new(geometric_rate: f64, poly_exponent: f64, log_exponents: Vec<f64>) -> Self {
        Self {
            geometric_rate,
            poly_exponent,
            log_exponents,
        }
    }

    /// Descriptor of `1/α_n`.
    pub fn reciprocal(&self) -> Self {
        Self {
            geometric_rate: -self.geometric_rate,
            poly_exponent: -self.poly_exponent,
            log_exponents: self.log_exponents.iter().map(|e| -e).collect(),
        }
    }

    /// Descriptor of the termwise product.
    pub fn times(&self, other: &Self) -> Self {
        let len = self.log_exponents.len().max(other.log_exponents.len());
        let get = |v: &Vec<f64>, i: usize| v.get(i).copied().unwrap_or(0.0);
        Self {
            geometric_rate: self.geometric_rate + other.geometric_rate,
            poly_exponent: self.poly_exponent + other.poly_exponent,
            log_exponents: (0..len)
                .map(|i| get(&self.log_exponents, i) + get(&other.log_exponents, i))
                .collect(),
        }
    }

    /// Whether a positive series with this growth converges (Cauchy–Bertrand scale).
    pub fn is_summable(&self) -> bool {
        if self.geometric_rate != 0.0 {
            return self.geometric_rate < 0.0;
        }
        if self.poly_exponent != -1.0 {
            return self.poly_exponent < -1.0;
        }
        for &e in &self.log_exponents {
            if e != -1.0 {
                return e < -1.0;
            }
        }
        false
    }

    /// Lexicographic comparison, shorter log vectors padded with zeros.
    pub fn compare(&self, other: &Self) -> Ordering {
        let head = self
            .geometric_rate
            .total_cmp(&other.geometric_rate)
            .then(self.poly_exponent.total_cmp(&other.poly_exponent));
        if head != Ordering::Equal {
            return head;
        }
        let len = self.log_exponents.len().max(other.log_exponents.len());
        for i in 0..len {
            let a = self.log_exponents.get(i).copied().unwrap_or(0.0);
            let b = other.log_exponents.get(i).copied().unwrap_or(0.0);
            match a.total_cmp(&b) {
                Ordering::Equal => continue,
                o => return o,
            }
        }
        Ordering::Equal
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Verdict {
    Converges,
    Diverges,
    Inconclusive,
}

/// Numeric evidence attached to a verdict.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Evidence {
    pub partial_sum: f64,
    pub tail_bound: Option<f64>,
    pub n: u64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConvergenceVerdict {
    pub value: Verdict,
    pub evidence: Option<Evidence>,
}

impl ConvergenceVerdict {
    pub fn exact(converges: bool) -> Self {
        Self {
            value: if converges {
                Verdict::Converges
            } else {
                Verdict::Diverges
            },
            evidence: None,
        }
    }

    pub fn inconclusive(evidence: Evidence) -> Self {
        Self {
            value: Verdict::Inconclusive,
            evidence: Some(evidence),
        }
    }

    pub fn converges(&self) -> bool {
        self.value == Verdict::Converges
    }
}

/// Inclusion relation between `H(K_{A,Φ})` and `H(K_{B,Φ})`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Inclusion {
    EqualUpToNormEquivalence,
    AProperSubsetOfB,
    BProperSubsetOfA,
    Incomparable,
}

/// `log_j(y)` for `j = 0..=p`, with `log_0(y) = y`.
fn iterated_logs(p: u32, y: f64) -> Vec<f64> {
    let mut out = Vec::with_capacity(p as usize + 1);
    let mut v = y;
    out.push(v);
    for _ in 0..p {
        v = v.ln();
        out.push(v);
    }
    out
}

impl ScalingFamily {
    fn symbolic(kind: ScalingKind) -> Self {
        Self { kind, origin: 0 }
    }

    /// `α_n = n^ρ`, `ρ ≥ 0`.
    pub fn hyperharmonic(rho: f64) -> Result<Self> {
        if !(rho.is_finite() && rho >= 0.0) {
            return Err(Error::InvalidParameter(format!(
                "hyperharmonic exponent must be ≥ 0, got {rho}"
            )));
        }
        Ok(Self::symbolic(ScalingKind::Hyperharmonic { rho }))
    }

    /// `α_n ≡ 1`.
    pub fn identity() -> Self {
        Self::symbolic(ScalingKind::Hyperharmonic { rho: 0.0 })
    }

    /// `α_n = τ^{2n}`, `τ > 0`.
    pub fn geometric(tau: f64) -> Result<Self> {
        if !(tau.is_finite() && tau > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "geometric base must be positive, got {tau}"
            )));
        }
        Ok(Self::symbolic(ScalingKind::Geometric { tau }))
    }

    pub fn iterated_log(p: u32, q: f64, rho: f64) -> Result<Self> {
        if !(rho.is_finite() && rho > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "iterated-log exponent must be positive, got {rho}"
            )));
        }
        if !(q.is_finite() && q >= 0.0) {
            return Err(Error::InvalidParameter(format!(
                "iterated-log shift must be ≥ 0, got {q}"
            )));
        }
        let s = Self::symbolic(ScalingKind::IteratedLog { p, q, rho });
        s.validate_origin(0)?;
        Ok(s)
    }

    /// `α_n = n log(n+1)^c`.
    pub fn log_power(c: f64) -> Result<Self> {
        if !c.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "log-power exponent must be finite, got {c}"
            )));
        }
        Ok(Self::symbolic(ScalingKind::LogPower { c }))
    }

    /// Replace finitely many terms of `base`.
    pub fn spliced_finite(base: ScalingFamily, mut overrides: Vec<(u64, f64)>) -> Result<Self> {
        if matches!(base.kind, ScalingKind::Explicit { .. }) {
            return Err(Error::Unsupported("splicing an explicit family".into()));
        }
        overrides.sort_by_key(|&(n, _)| n);
        for w in overrides.windows(2) {
            if w[0].0 == w[1].0 {
                return Err(Error::InvalidParameter(format!("index {} overridden twice", w[0].0)));
            }
        }
        for &(n, v) in &overrides {
            if n < base.origin {
                return Err(Error::Index { n, origin: base.origin });
            }
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::InvalidParameter(format!(
                    "override α_{n} = {v} must be positive"
                )));
            }
        }
        let origin = base.origin;
        Ok(Self {
            kind: ScalingKind::Spliced {
                base: Box::new(base),
                rule: SpliceRule::Finite(overrides),
            },
            origin,
        })
    }

    /// On the indices of `pattern` take values from `rule`, elsewhere from `base`.
    pub fn spliced_pattern(base: ScalingFamily, pattern: IndexPattern, rule: ScalingFamily) -> Result<Self> {
        match pattern {
            IndexPattern::PowersOf { base: b } if b < 2 => {
                return Err(Error::InvalidParameter("power pattern needs base ≥ 2".into()))
            }
            IndexPattern::Arithmetic { step: 0, .. } => {
                return Err(Error::InvalidParameter("arithmetic pattern needs step ≥ 1".into()))
            }
            _ => {}
        }
        if rule.growth().is_none() || base.growth().is_none() && !matches!(base.kind, ScalingKind::Spliced { .. }) {
            return Err(Error::Unsupported("pattern splices need symbolic parts".into()));
        }
        let origin = base.origin;
        let rule = rule.with_origin(0)?;
        Ok(Self {
            kind: ScalingKind::Spliced {
                base: Box::new(base),
                rule: SpliceRule::Pattern {
                    pattern,
                    rule: Box::new(rule),
                },
            },
            origin,
        })
    }

    /// `α_n = 1/a_n`.
    pub fn explicit(reciprocals: SeqHandle) -> Self {
        let origin = reciprocals.origin();
        Self {
            kind: ScalingKind::Explicit { reciprocals },
            origin,
        }
    }

    pub fn kind(&self) -> &ScalingKind {
        &self.kind
    }

    pub fn index_origin(&self) -> u64 {
        self.origin
    }

    pub fn is_symbolic(&self) -> bool {
        !matches!(self.kind, ScalingKind::Explicit { .. })
    }

    pub fn is_identity(&self) -> bool {
        matches!(self.kind, ScalingKind::Hyperharmonic { rho } if rho == 0.0)
    }

    /// Same formula indexed from `origin`.
    pub fn with_origin(&self, origin: u64) -> Result<Self> {
        if origin == self.origin {
            return Ok(self.clone());
        }
        match &self.kind {
            ScalingKind::Explicit { .. } => Err(Error::IndexMismatch(format!(
                "explicit family starts at {}, requested {origin}",
                self.origin
            ))),
            ScalingKind::Spliced { base, rule } => {
                if let SpliceRule::Finite(ov) = rule {
                    if let Some(&(n, _)) = ov.first() {
                        if n < origin {
                            return Err(Error::Index { n, origin });
                        }
                    }
                }
                Ok(Self {
                    kind: ScalingKind::Spliced {
                        base: Box::new(base.with_origin(origin)?),
                        rule: rule.clone(),
                    },
                    origin,
                })
            }
            _ => {
                self.validate_origin(origin)?;
                Ok(Self {
                    kind: self.kind.clone(),
                    origin,
                })
            }
        }
    }

    fn validate_origin(&self, origin: u64) -> Result<()> {
        if let ScalingKind::IteratedLog { p, q, .. } = self.kind {
            if p >= 1 {
                let y = origin as f64 + q;
                let last = *iterated_logs(p, y).last().unwrap();
                if !(last > 0.0) {
                    return Err(Error::InvalidParameter(format!(
                        "log_{p}({y}) must be positive; increase the shift q"
                    )));
                }
            }
        }
        Ok(())
    }

    fn check_index(&self, n: u64) -> Result<()> {
        if n < self.origin {
            Err(Error::Index { n, origin: self.origin })
        } else {
            Ok(())
        }
    }

    /// `α_n`.
    pub fn term(&self, n: u64) -> Result<f64> {
        self.check_index(n)?;
        Ok(self.term_unchecked(n))
    }

    pub(crate) fn term_unchecked(&self, n: u64) -> f64 {
        let nf = n as f64;
        match &self.kind {
            ScalingKind::Hyperharmonic { rho } => {
                if n == 0 {
                    1.0
                } else {
                    nf.powf(*rho)
                }
            }
            ScalingKind::Geometric { tau } => tau.powf(2.0 * nf),
            ScalingKind::LogPower { c } => {
                if n == 0 {
                    1.0
                } else {
                    nf * (nf + 1.0).ln().powf(*c)
                }
            }
            ScalingKind::Spliced { base, rule } => match rule {
                SpliceRule::Finite(ov) => match ov.binary_search_by_key(&n, |&(k, _)| k) {
                    Ok(i) => ov[i].1,
                    Err(_) => base.term_unchecked(n),
                },
                SpliceRule::Pattern { pattern, rule } => {
                    if pattern.contains(n) {
                        rule.term_unchecked(n)
                    } else {
                        base.term_unchecked(n)
                    }
                }
            },
            _ => self.ln_term_unchecked(n).exp(),
        }
    }

    /// `ln α_n`.
    pub fn ln_term(&self, n: u64) -> Result<f64> {
        self.check_index(n)?;
        Ok(self.ln_term_unchecked(n))
    }

    pub(crate) fn ln_term_unchecked(&self, n: u64) -> f64 {
        let nf = n as f64;
        match &self.kind {
            ScalingKind::Hyperharmonic { rho } => {
                if n == 0 || *rho == 0.0 {
                    0.0
                } else {
                    rho * nf.ln()
                }
            }
            ScalingKind::Geometric { tau } => 2.0 * nf * tau.ln(),
            ScalingKind::LogPower { c } => {
                if n == 0 {
                    0.0
                } else {
                    nf.ln() + c * (nf + 1.0).ln().ln()
                }
            }
            ScalingKind::IteratedLog { p, q, rho } => {
                let y = nf + q;
                if *p == 0 {
                    return if y == 0.0 { 0.0 } else { rho * y.ln() };
                }
                let logs = iterated_logs(*p, y);
                let head: f64 = logs[..*p as usize].iter().map(|v| v.ln()).sum();
                head + rho * logs[*p as usize].ln()
            }
            ScalingKind::Spliced { base, rule } => match rule {
                SpliceRule::Finite(ov) => match ov.binary_search_by_key(&n, |&(k, _)| k) {
                    Ok(i) => ov[i].1.ln(),
                    Err(_) => base.ln_term_unchecked(n),
                },
                SpliceRule::Pattern { pattern, rule } => {
                    if pattern.contains(n) {
                        rule.ln_term_unchecked(n)
                    } else {
                        base.ln_term_unchecked(n)
                    }
                }
            },
            ScalingKind::Explicit { reciprocals } => -reciprocals.ln_term(n),
        }
    }

    /// Growth descriptor; `None` for explicit families and pattern splices.
    pub fn growth(&self) -> Option<GrowthDescriptor> {
        match &self.kind {
            ScalingKind::Hyperharmonic { rho } => Some(GrowthDescriptor::new(0.0, *rho, vec![])),
            ScalingKind::Geometric { tau } => Some(GrowthDescriptor::new(2.0 * tau.ln(), 0.0, vec![])),
            ScalingKind::IteratedLog { p, rho, .. } => {
                if *p == 0 {
                    Some(GrowthDescriptor::new(0.0, *rho, vec![]))
                } else {
                    let mut logs = vec![1.0; *p as usize];
                    logs[*p as usize - 1] = *rho;
                    Some(GrowthDescriptor::new(0.0, 1.0, logs))
                }
            }
            ScalingKind::LogPower { c } => Some(GrowthDescriptor::new(0.0, 1.0, vec![*c])),
            ScalingKind::Spliced { base, rule } => match rule {
                SpliceRule::Finite(_) => base.growth(),
                SpliceRule::Pattern { .. } => None,
            },
            ScalingKind::Explicit { .. } => None,
        }
    }

    /// Decide `Σ 1/α_n`. Exact for symbolic families, evidence only otherwise.
    pub fn classify_reciprocal_sum(&self) -> ConvergenceVerdict {
        match &self.kind {
            ScalingKind::Spliced {
                base,
                rule: SpliceRule::Pattern { pattern, rule },
            } => {
                let on_pattern = match pattern.along(&rule.growth().expect("symbolic rule")) {
                    Ok(d) => d.reciprocal().is_summable(),
                    Err(v) => v == Verdict::Converges,
                };
                let off_pattern = if pattern.complement_is_infinite() {
                    match base.classify_reciprocal_sum().value {
                        Verdict::Converges => true,
                        Verdict::Diverges => false,
                        Verdict::Inconclusive => return self.numeric_evidence(),
                    }
                } else {
                    true
                };
                ConvergenceVerdict::exact(on_pattern && off_pattern)
            }
            ScalingKind::Explicit { .. } => self.numeric_evidence(),
            _ => {
                let d = self.growth().expect("symbolic family");
                ConvergenceVerdict::exact(d.reciprocal().is_summable())
            }
        }
    }

    fn numeric_evidence(&self) -> ConvergenceVerdict {
        let end = self.origin + EVIDENCE_TERMS;
        let partial: NeumaierSum = (self.origin..end).map(|n| (-self.ln_term_unchecked(n)).exp()).collect();
        ConvergenceVerdict::inconclusive(Evidence {
            partial_sum: partial.value(),
            tail_bound: self.reciprocal_tail(end).map(|b| b.upper()),
            n: end - 1,
        })
    }

    /// Certified bracket of `Σ_{l ≥ n} 1/α_l`, when the family provides one.
    pub fn reciprocal_tail(&self, n: u64) -> Option<TailBracket> {
        if n < self.origin {
            return None;
        }
        let nf = n as f64;
        match &self.kind {
            ScalingKind::Explicit { reciprocals } => return reciprocals.tail(n),
            ScalingKind::Spliced { base, rule } => {
                return match rule {
                    SpliceRule::Pattern { .. } => None,
                    SpliceRule::Finite(ov) => {
                        let b = base.reciprocal_tail(n)?;
                        let delta: f64 = ov
                            .iter()
                            .filter(|&&(k, _)| k >= n)
                            .map(|&(k, v)| 1.0 / v - (-base.ln_term_unchecked(k)).exp())
                            .sum();
                        let upper = b.upper() + delta;
                        let lower = b.lower() + delta;
                        let single = -self.ln_term_unchecked(n);
                        Some(TailBracket {
                            ln_lower: if lower > 0.0 { lower.ln().max(single) } else { single },
                            ln_upper: upper.ln(),
                        })
                    }
                };
            }
            _ => {}
        }
        if !self.classify_reciprocal_sum().converges() {
            return None;
        }
        // α = 1 by convention at a zero base; peel that term off
        let zero_base = match self.kind {
            ScalingKind::Hyperharmonic { .. } | ScalingKind::LogPower { .. } => n == 0,
            ScalingKind::IteratedLog { p: 0, q, .. } => nf + q == 0.0,
            _ => false,
        };
        if zero_base {
            let rest = self.reciprocal_tail(n + 1)?;
            return Some(TailBracket {
                ln_lower: ln_add_exp(0.0, rest.ln_lower),
                ln_upper: ln_add_exp(0.0, rest.ln_upper),
            });
        }
        let ln_f = -self.ln_term_unchecked(n);
        let (ln_lower, ln_upper) = match self.kind {
            ScalingKind::Geometric { tau } => {
                let ln_ratio = -2.0 * tau.ln();
                let v = ln_f - (-ln_ratio.exp_m1()).ln();
                (v, v)
            }
            ScalingKind::Hyperharmonic { rho } => {
                let l = (1.0 - rho) * nf.ln() - (rho - 1.0).ln();
                (l, ln_add_exp(ln_f, l))
            }
            ScalingKind::LogPower { c } => {
                let l = (1.0 - c) * (nf + 1.0).ln().ln() - (c - 1.0).ln();
                (l, ln_add_exp(ln_f, l + (1.0 / nf).ln_1p()))
            }
            ScalingKind::IteratedLog { p, q, rho } => {
                let y = nf + q;
                let last = *iterated_logs(p, y).last().unwrap();
                let l = (1.0 - rho) * last.ln() - (rho - 1.0).ln();
                (l, ln_add_exp(ln_f, l))
            }
            _ => unreachable!(),
        };
        Some(TailBracket { ln_lower, ln_upper })
    }

    /// Upper bound on `sup_{x ≥ n} x α'(x)/α(x)` for `n ≥ 1`.
    pub(crate) fn elasticity_bound(&self, n: u64) -> Option<f64> {
        if n == 0 {
            return None;
        }
        let nf = n as f64;
        match &self.kind {
            ScalingKind::Hyperharmonic { rho } => Some(*rho),
            ScalingKind::LogPower { c } => Some(1.0 + c.max(0.0) / (nf + 1.0).ln()),
            ScalingKind::IteratedLog { p, q, rho } => {
                if *p == 0 {
                    return Some(*rho);
                }
                let logs = iterated_logs(*p, nf + q);
                let mut total = 0.0;
                let mut prod = 1.0;
                for (j, lj) in logs.iter().enumerate().take(*p as usize + 1) {
                    if j > 0 {
                        prod *= lj;
                    }
                    let weight = if j == *p as usize { *rho } else { 1.0 };
                    total += weight / prod;
                }
                Some(total)
            }
            ScalingKind::Spliced {
                base,
                rule: SpliceRule::Finite(ov),
            } => match ov.last() {
                Some(&(k, _)) if n <= k => None,
                _ => base.elasticity_bound(n),
            },
            _ => None,
        }
    }

    /// Upper bound on `sup_{m ≥ n} α_{m+1}/α_m`.
    pub(crate) fn ratio_bound(&self, n: u64) -> Option<f64> {
        if let ScalingKind::Geometric { tau } = self.kind {
            return Some(tau * tau);
        }
        if let ScalingKind::Spliced {
            base,
            rule: SpliceRule::Finite(ov),
        } = &self.kind
        {
            return match ov.last() {
                Some(&(k, _)) if n <= k => None,
                _ => base.ratio_bound(n),
            };
        }
        let e = self.elasticity_bound(n)?;
        let nf = n as f64;
        Some(((nf + 1.0) / nf).powf(e.max(0.0)))
    }

    /// Exponent ρ when `α_n = n^ρ` exactly for `n ≥ 1`.
    pub(crate) fn power_exponent(&self) -> Option<f64> {
        match self.kind {
            ScalingKind::Hyperharmonic { rho } => Some(rho),
            ScalingKind::IteratedLog { p: 0, q: 0.0, rho } => Some(rho),
            _ => None,
        }
    }

    /// The sequence `(1/α_n)`, provided its sum is certified.
    pub fn reciprocals(&self) -> Result<SeqHandle> {
        if let ScalingKind::Explicit { reciprocals } = &self.kind {
            return if reciprocals.tail(self.origin).is_some() {
                Ok(reciprocals.clone())
            } else {
                Err(Error::NotSummable(format!("{self} declares no tail bound")))
            };
        }
        if self.reciprocal_tail(self.origin).is_none() {
            return Err(Error::NotSummable(format!(
                "Σ 1/α_n diverges or is uncertified for {self}"
            )));
        }
        Ok(seq::reciprocal_seq(self.clone()))
    }
}

/// Inclusion between the RKHSs scaled by `a` and `b` over a common basis.
pub fn compare_scalings(a: &ScalingFamily, b: &ScalingFamily) -> Result<Inclusion> {
    let (da, db) = match (a.growth(), b.growth()) {
        (Some(x), Some(y)) => (x, y),
        _ => {
            return Err(Error::Unsupported(
                "inclusion is decided only for symbolic families".into(),
            ))
        }
    };
    Ok(match da.compare(&db) {
        Ordering::Equal => Inclusion::EqualUpToNormEquivalence,
        Ordering::Less => Inclusion::AProperSubsetOfB,
        Ordering::Greater => Inclusion::BProperSubsetOfA,
    })
}

/// Free-function form of [`ScalingFamily::term`].
pub fn scaling_term(a: &ScalingFamily, n: u64) -> Result<f64> {
    a.term(n)
}

/// Free-function form of [`ScalingFamily::classify_reciprocal_sum`].
pub fn classify_reciprocal_sum(a: &ScalingFamily) -> ConvergenceVerdict {
    a.classify_reciprocal_sum()
}

impl fmt::Display for ScalingFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.kind {
            ScalingKind::Hyperharmonic { rho } if *rho == 0.0 => write!(f, "id"),
            ScalingKind::Hyperharmonic { rho } => write!(f, "hyp:{rho}"),
            ScalingKind::Geometric { tau } => write!(f, "geo:{tau}"),
            ScalingKind::IteratedLog { p, q, rho } => write!(f, "itlog:{p},{q},{rho}"),
            ScalingKind::LogPower { c } => write!(f, "logpow:{c}"),
            ScalingKind::Spliced { base, rule } => match rule {
                SpliceRule::Finite(ov) => write!(f, "splice({base}; {} overrides)", ov.len()),
                SpliceRule::Pattern { pattern, rule } => write!(f, "splice({base}; {pattern:?} -> {rule})"),
            },
            ScalingKind::Explicit { reciprocals } => write!(f, "explicit(1/{})", reciprocals.label()),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn hyp(r: f64) -> ScalingFamily {
        ScalingFamily::hyperharmonic(r).unwrap().with_origin(1).unwrap()
    }

    #[test]
    fn term_examples() {
        assert_eq!(hyp(2.0).term(3).unwrap(), 9.0);
        assert_eq!(ScalingFamily::geometric(1.0).unwrap().term(7).unwrap(), 1.0);
        let lp = ScalingFamily::log_power(2.0).unwrap().with_origin(1).unwrap();
        assert!((lp.term(1).unwrap() - 0.480453).abs() < 1e-6);
        assert_eq!(ScalingFamily::hyperharmonic(1.5).unwrap().term(0).unwrap(), 1.0);
        assert!(matches!(hyp(1.0).term(0), Err(Error::Index { n: 0, origin: 1 })));
    }

    #[test]
    fn classification_examples() {
        assert_eq!(hyp(1.0).classify_reciprocal_sum().value, Verdict::Diverges);
        assert_eq!(hyp(1.0 + 1e-9).classify_reciprocal_sum().value, Verdict::Converges);
        let lp = |c| ScalingFamily::log_power(c).unwrap().classify_reciprocal_sum().value;
        assert_eq!(lp(2.0), Verdict::Converges);
        assert_eq!(lp(1.0), Verdict::Diverges);
        let geo = |t| ScalingFamily::geometric(t).unwrap().classify_reciprocal_sum().value;
        assert_eq!(geo(1.0), Verdict::Diverges);
        assert_eq!(geo(1.1), Verdict::Converges);
        assert_eq!(geo(0.9), Verdict::Diverges);
        let il = |p, r| {
            ScalingFamily::iterated_log(p, 20.0, r)
                .unwrap()
                .classify_reciprocal_sum()
                .value
        };
        for p in 0..4 {
            assert_eq!(il(p, 1.0), Verdict::Diverges, "p={p}");
            assert_eq!(il(p, 1.2), Verdict::Converges, "p={p}");
        }
    }

    #[test]
    fn spliced_verdicts() {
        let finite = ScalingFamily::spliced_finite(hyp(2.0), vec![(3, 1e-9), (10, 5.0)]).unwrap();
        assert_eq!(finite.classify_reciprocal_sum().value, Verdict::Converges);
        assert!((finite.term(3).unwrap() - 1e-9).abs() < 1e-20);
        // α = n² off the powers of two, α_{2^k} = 1 on them: Σ 1 diverges
        let pat =
            ScalingFamily::spliced_pattern(hyp(2.0), IndexPattern::PowersOf { base: 2 }, ScalingFamily::identity())
                .unwrap();
        assert_eq!(pat.classify_reciprocal_sum().value, Verdict::Diverges);
        // α_{2^k} = 2^k along the pattern converges
        let pat2 = ScalingFamily::spliced_pattern(hyp(2.0), IndexPattern::PowersOf { base: 2 }, hyp(1.0)).unwrap();
        assert_eq!(pat2.classify_reciprocal_sum().value, Verdict::Converges);
        assert_eq!(pat2.term(8).unwrap(), 8.0);
        assert_eq!(pat2.term(6).unwrap(), 36.0);
    }

    #[test]
    fn explicit_is_inconclusive() {
        let s = ScalingFamily::explicit(power_law_seq(1, 2.0).unwrap());
        let v = s.classify_reciprocal_sum();
        assert_eq!(v.value, Verdict::Inconclusive);
        let e = v.evidence.unwrap();
        assert!(e.tail_bound.is_some());
        assert!((e.partial_sum - std::f64::consts::PI.powi(2) / 6.0).abs() < 2e-4);
        assert!(compare_scalings(&s, &hyp(1.0)).is_err());
    }

    #[test]
    fn comparison_examples() {
        assert_eq!(
            compare_scalings(&hyp(1.0), &hyp(2.0)).unwrap(),
            Inclusion::AProperSubsetOfB
        );
        let lp = ScalingFamily::log_power(1.0).unwrap();
        assert_eq!(compare_scalings(&lp, &hyp(1.1)).unwrap(), Inclusion::AProperSubsetOfB);
        assert_eq!(
            compare_scalings(&hyp(2.0), &hyp(2.0)).unwrap(),
            Inclusion::EqualUpToNormEquivalence
        );
        assert_eq!(
            compare_scalings(&ScalingFamily::geometric(1.0).unwrap(), &ScalingFamily::identity()).unwrap(),
            Inclusion::EqualUpToNormEquivalence
        );
        let il = ScalingFamily::iterated_log(1, 3.0, 2.0).unwrap();
        assert_eq!(
            compare_scalings(&il, &ScalingFamily::log_power(2.0).unwrap()).unwrap(),
            Inclusion::EqualUpToNormEquivalence
        );
        assert_eq!(compare_scalings(&hyp(1.0), &lp).unwrap(), Inclusion::AProperSubsetOfB);
    }

    #[test]
    fn tails_bracket_direct_sums() {
        let fams = [
            hyp(2.0),
            hyp(1.5),
            ScalingFamily::log_power(2.0).unwrap().with_origin(1).unwrap(),
            ScalingFamily::iterated_log(1, 3.0, 2.0).unwrap(),
            ScalingFamily::iterated_log(2, 16.0, 1.5).unwrap(),
            ScalingFamily::geometric(1.3).unwrap(),
            ScalingFamily::hyperharmonic(3.0).unwrap(),
        ];
        for f in &fams {
            for n in [f.index_origin(), 5, 40] {
                let b = f.reciprocal_tail(n).unwrap();
                // direct head up to 10^6 plus the bracket beyond
                let end = 1_000_000u64;
                let head: NeumaierSum = (n..end).map(|k| 1.0 / f.term(k).unwrap()).collect();
                let beyond = f.reciprocal_tail(end).unwrap();
                let lo = head.value() + beyond.lower();
                let hi = head.value() + beyond.upper();
                assert!(b.lower() <= hi * (1.0 + 1e-12), "{f} n={n}: {} > {hi}", b.lower());
                assert!(b.upper() >= lo * (1.0 - 1e-12), "{f} n={n}: {} < {lo}", b.upper());
            }
        }
    }

    #[test]
    fn iterated_log_rejects_small_shift() {
        assert!(ScalingFamily::iterated_log(2, 0.0, 2.0).is_err());
        assert!(ScalingFamily::iterated_log(2, 3.0, 2.0).is_ok());
    }

    #[test]
    fn classifier_consistent_with_partial_sums() {
        let cases = [(hyp(2.0), true), (hyp(1.0), false), (hyp(0.5), false)];
        for (f, conv) in cases {
            let s = |n: u64| -> f64 { (1..=n).map(|k| 1.0 / f.term(k).unwrap()).sum() };
            let (a, b, c) = (s(10_000), s(100_000), s(1_000_000));
            if conv {
                assert!(c - b < b - a, "{f}");
                assert!(c < 2.0);
            } else {
                assert!(c - b >= 0.9 * (b - a), "{f}");
            }
            assert_eq!(f.classify_reciprocal_sum().converges(), conv);
        }
    }

    fn arb_family() -> impl Strategy<Value = ScalingFamily> {
        prop_oneof![
            (0.0f64..4.0).prop_map(|r| ScalingFamily::hyperharmonic(r).unwrap()),
            (0.5f64..2.0).prop_map(|t| ScalingFamily::geometric(t).unwrap()),
            (-2.0f64..3.0).prop_map(|c| ScalingFamily::log_power(c).unwrap()),
            (0u32..3, 0.5f64..3.0).prop_map(|(p, r)| ScalingFamily::iterated_log(p, 20.0, r).unwrap()),
        ]
    }

    proptest! {
        #[test]
        fn comparison_is_antisymmetric(a in arb_family(), b in arb_family()) {
            let ab = compare_scalings(&a, &b).unwrap();
            let ba = compare_scalings(&b, &a).unwrap();
            let flipped = match ab {
                Inclusion::AProperSubsetOfB => Inclusion::BProperSubsetOfA,
                Inclusion::BProperSubsetOfA => Inclusion::AProperSubsetOfB,
                o => o,
            };
            prop_assert_eq!(ba, flipped);
        }

        #[test]
        fn comparison_is_transitive(a in arb_family(), b in arb_family(), c in arb_family()) {
            let ab = compare_scalings(&a, &b).unwrap();
            let bc = compare_scalings(&b, &c).unwrap();
            if ab == Inclusion::AProperSubsetOfB && bc == Inclusion::AProperSubsetOfB {
                prop_assert_eq!(compare_scalings(&a, &c).unwrap(), Inclusion::AProperSubsetOfB);
            }
        }

        #[test]
        fn larger_scaling_keeps_convergence(a in arb_family(), b in arb_family()) {
            if compare_scalings(&a, &b).unwrap() == Inclusion::AProperSubsetOfB
                && a.classify_reciprocal_sum().converges()
            {
                prop_assert!(b.classify_reciprocal_sum().converges());
            }
        }
    }
}
