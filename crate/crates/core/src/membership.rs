//! Sample-path membership, norms in scaled spaces, the support-set classifier
//! and the monomial expansion in the Gaussian basis.

use std::f64::consts::{LN_2, PI};
use std::fmt;
use std::sync::Arc;

use crate::basis::{BasisFamily, BasisKind, WeightSequence};
use crate::error::{Error, Result};
use crate::kernel::ScaledKernelSpec;
use crate::numeric::{ln_factorial, NeumaierSum};
use crate::scaling::{
    ConvergenceVerdict, Evidence, GrowthDescriptor, IndexPattern, ScalingFamily, Verdict, EVIDENCE_TERMS,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Probability {
    Zero,
    One,
    Undetermined,
}

impl fmt::Display for Probability {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Probability::Zero => "0",
            Probability::One => "1",
            Probability::Undetermined => "undetermined",
        })
    }
}

/// Probability that a sample path lies in a scaled space, with the verdict on
/// `Σ 1/α_n` that decides it.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MembershipVerdict {
    pub probability: Probability,
    pub reason: ConvergenceVerdict,
}

impl MembershipVerdict {
    pub fn from_reason(reason: ConvergenceVerdict) -> Self {
        let probability = match reason.value {
            Verdict::Converges => Probability::One,
            Verdict::Diverges => Probability::Zero,
            Verdict::Inconclusive => Probability::Undetermined,
        };
        Self { probability, reason }
    }
}

/// Whether a single function lies in a space.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Belonging {
    Member,
    NotMember,
    Undetermined,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FunctionMembership {
    pub status: Belonging,
    /// Verdict on the squared norm series.
    pub reason: ConvergenceVerdict,
}

impl FunctionMembership {
    fn from_reason(reason: ConvergenceVerdict) -> Self {
        let status = match reason.value {
            Verdict::Converges => Belonging::Member,
            Verdict::Diverges => Belonging::NotMember,
            Verdict::Inconclusive => Belonging::Undetermined,
        };
        Self { status, reason }
    }
}

/// Ordering of an orthonormal basis `Φ = (φ_n)_{n ≥ 1}`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BasisOrdering {
    Natural,
    /// `ψ_{2k+1} = φ_{2^k}`; even positions list the remaining `φ_n` in
    /// increasing order: `(φ_1, φ_3, φ_2, φ_5, φ_4, φ_6, φ_8, φ_7, φ_16, …)`.
    PowersOfTwoInterleaved,
}

impl BasisOrdering {
    /// Natural index of the basis element at `position ≥ 1`, or `None` when
    /// it does not fit in a `u64`.
    pub fn basis_index(&self, position: u64) -> Option<u64> {
        match self {
            BasisOrdering::Natural => Some(position),
            BasisOrdering::PowersOfTwoInterleaved => {
                if position % 2 == 1 {
                    let k = (position - 1) / 2;
                    (k < 64).then(|| 1u64 << k)
                } else {
                    Some(nth_non_power_of_two(position / 2))
                }
            }
        }
    }
}

/// Number of powers of two in `1..=x`.
fn powers_of_two_up_to(x: u64) -> u64 {
    if x == 0 {
        0
    } else {
        u64::from(64 - x.leading_zeros())
    }
}

/// The `k`-th (1-based) positive integer that is not a power of two.
fn nth_non_power_of_two(k: u64) -> u64 {
    let mut x = k + 1;
    loop {
        let below = x - powers_of_two_up_to(x);
        if below >= k && !x.is_power_of_two() {
            return x;
        }
        x += (k - below.min(k)).max(1);
    }
}

/// Basis coefficients `(f_n)_{n ≥ origin}` of a function.
#[derive(Clone)]
pub enum CoefficientKind {
    Constant(f64),
    /// `f_n = n^ρ` with `0^ρ = 1`; `ρ` may be negative.
    Hyperharmonic(f64),
    /// `f_n = 1` on the pattern, `0` elsewhere.
    SubsequenceIndicator(IndexPattern),
    /// Gaussian-basis coefficients of `t^p`.
    Monomial {
        p: u32,
        ell: f64,
    },
    Explicit {
        label: String,
        coeff: Arc<dyn Fn(u64) -> f64 + Send + Sync>,
    },
    /// `inner` re-expanded in another ordering of the same basis.
    Reordered {
        inner: Box<CoefficientFamily>,
        ordering: BasisOrdering,
    },
}

impl fmt::Debug for CoefficientKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CoefficientKind::Constant(c) => write!(f, "Constant({c})"),
            CoefficientKind::Hyperharmonic(r) => write!(f, "Hyperharmonic({r})"),
            CoefficientKind::SubsequenceIndicator(p) => write!(f, "SubsequenceIndicator({p:?})"),
            CoefficientKind::Monomial { p, ell } => write!(f, "Monomial({p}, {ell})"),
            CoefficientKind::Explicit { label, .. } => write!(f, "Explicit({label})"),
            CoefficientKind::Reordered { inner, ordering } => write!(f, "Reordered({inner:?}, {ordering:?})"),
        }
    }
}

#[derive(Debug, Clone)]
pub struct CoefficientFamily {
    kind: CoefficientKind,
    origin: u64,
}

impl CoefficientFamily {
    pub fn constant(c: f64, origin: u64) -> Result<Self> {
        if !c.is_finite() {
            return Err(Error::InvalidParameter(format!("constant must be finite, got {c}")));
        }
        Ok(Self {
            kind: CoefficientKind::Constant(c),
            origin,
        })
    }

    pub fn hyperharmonic(rho: f64, origin: u64) -> Result<Self> {
        if !rho.is_finite() {
            return Err(Error::InvalidParameter(format!("exponent must be finite, got {rho}")));
        }
        Ok(Self {
            kind: CoefficientKind::Hyperharmonic(rho),
            origin,
        })
    }

    pub fn indicator(pattern: IndexPattern, origin: u64) -> Result<Self> {
        match pattern {
            IndexPattern::PowersOf { base } if base < 2 => {
                return Err(Error::BadIndexSequence(format!(
                    "powers of {base} do not form a sequence"
                )))
            }
            IndexPattern::Arithmetic { step: 0, .. } => {
                return Err(Error::BadIndexSequence("arithmetic step must be positive".into()))
            }
            _ => {}
        }
        Ok(Self {
            kind: CoefficientKind::SubsequenceIndicator(pattern),
            origin,
        })
    }

    /// Coefficients of `t^p` in the Gaussian basis of length-scale `ell`.
    pub fn monomial(p: u32, ell: f64) -> Result<Self> {
        if !(ell > 0.0 && ell.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "length-scale must be positive, got {ell}"
            )));
        }
        Ok(Self {
            kind: CoefficientKind::Monomial { p, ell },
            origin: 0,
        })
    }

    pub fn explicit(origin: u64, label: impl Into<String>, coeff: impl Fn(u64) -> f64 + Send + Sync + 'static) -> Self {
        Self {
            kind: CoefficientKind::Explicit {
                label: label.into(),
                coeff: Arc::new(coeff),
            },
            origin,
        }
    }

    pub fn kind(&self) -> &CoefficientKind {
        &self.kind
    }

    pub fn index_origin(&self) -> u64 {
        self.origin
    }

    /// The same function expanded in `ordering` of the basis. Positions start
    /// at 1, so the family must be indexed from 1.
    pub fn reordered(&self, ordering: BasisOrdering) -> Result<Self> {
        if self.origin != 1 {
            return Err(Error::IndexMismatch(format!(
                "reordering acts on bases indexed from 1, family starts at {}",
                self.origin
            )));
        }
        let kind = match (&self.kind, ordering) {
            (_, BasisOrdering::Natural) | (CoefficientKind::Constant(_), _) => return Ok(self.clone()),
            (CoefficientKind::SubsequenceIndicator(IndexPattern::PowersOf { base: 2 }), _) => {
                CoefficientKind::SubsequenceIndicator(IndexPattern::Arithmetic { first: 1, step: 2 })
            }
            _ => CoefficientKind::Reordered {
                inner: Box::new(self.clone()),
                ordering,
            },
        };
        Ok(Self { kind, origin: 1 })
    }

    /// `f_n`.
    pub fn coefficient(&self, n: u64) -> Result<f64> {
        if n < self.origin {
            return Err(Error::Index { n, origin: self.origin });
        }
        let v = self.coefficient_unchecked(n);
        if v.is_nan() {
            return Err(Error::Unsupported(format!(
                "position {n} maps beyond the representable indices"
            )));
        }
        Ok(v)
    }

    /// NaN when a reordered position maps past `u64::MAX`.
    fn coefficient_unchecked(&self, n: u64) -> f64 {
        match &self.kind {
            CoefficientKind::Constant(c) => *c,
            CoefficientKind::Hyperharmonic(rho) => {
                if n == 0 {
                    1.0
                } else {
                    (n as f64).powf(*rho)
                }
            }
            CoefficientKind::SubsequenceIndicator(p) => {
                if p.contains(n) {
                    1.0
                } else {
                    0.0
                }
            }
            CoefficientKind::Monomial { p, ell } => {
                let p = u64::from(*p);
                if n < p || (n - p) % 2 == 1 {
                    0.0
                } else {
                    ln_monomial_coefficient(p, *ell, (n - p) / 2).exp()
                }
            }
            CoefficientKind::Explicit { coeff, .. } => coeff(n),
            CoefficientKind::Reordered { inner, ordering } => ordering
                .basis_index(n)
                .map_or(f64::NAN, |m| inner.coefficient_unchecked(m)),
        }
    }

    /// `ln f_n²`, `-∞` where the coefficient vanishes.
    fn ln_square(&self, n: u64) -> f64 {
        match &self.kind {
            CoefficientKind::Monomial { p, ell } => {
                let p = u64::from(*p);
                if n < p || (n - p) % 2 == 1 {
                    f64::NEG_INFINITY
                } else {
                    2.0 * ln_monomial_coefficient(p, *ell, (n - p) / 2)
                }
            }
            _ => {
                let c = self.coefficient_unchecked(n);
                2.0 * c.abs().ln()
            }
        }
    }

    /// Indices in `from..=to` that can carry a nonzero coefficient.
    fn support_indices(&self, from: u64, to: u64) -> Box<dyn Iterator<Item = u64> + '_> {
        match &self.kind {
            CoefficientKind::Constant(c) if *c == 0.0 => Box::new(std::iter::empty()),
            CoefficientKind::SubsequenceIndicator(p) => Box::new(pattern_indices(*p, from, to)),
            CoefficientKind::Monomial { p, .. } => Box::new(pattern_indices(
                IndexPattern::Arithmetic {
                    first: u64::from(*p),
                    step: 2,
                },
                from,
                to,
            )),
            _ => Box::new(from..=to),
        }
    }

    /// Growth of `n ↦ f_n²` along the indices where it is nonzero.
    fn square_growth(&self) -> Option<(Option<IndexPattern>, GrowthDescriptor)> {
        match &self.kind {
            CoefficientKind::Hyperharmonic(rho) => Some((None, GrowthDescriptor::new(0.0, 2.0 * rho, vec![]))),
            CoefficientKind::Constant(_) => Some((None, GrowthDescriptor::new(0.0, 0.0, vec![]))),
            CoefficientKind::SubsequenceIndicator(p) => Some((Some(*p), GrowthDescriptor::new(0.0, 0.0, vec![]))),
            // f_{2k+p}² ~ ℓ^{2p} 2^p/√π k^{p-1/2}
            CoefficientKind::Monomial { p, .. } => Some((
                Some(IndexPattern::Arithmetic {
                    first: u64::from(*p),
                    step: 2,
                }),
                GrowthDescriptor::new(0.0, f64::from(*p) - 0.5, vec![]),
            )),
            _ => None,
        }
    }
}

/// Elements of `pattern` in `from..=to`, increasing.
fn pattern_indices(pattern: IndexPattern, from: u64, to: u64) -> impl Iterator<Item = u64> {
    let mut next = match pattern {
        IndexPattern::PowersOf { .. } => Some(1u64),
        IndexPattern::Arithmetic { first, .. } => Some(first),
    };
    std::iter::from_fn(move || loop {
        let cur = next?;
        if cur > to {
            return None;
        }
        next = match pattern {
            IndexPattern::PowersOf { base } => cur.checked_mul(base),
            IndexPattern::Arithmetic { step, .. } => cur.checked_add(step),
        };
        if cur >= from {
            return Some(cur);
        }
    })
}

/// `ln` of the coefficient of `φ_{2n+p}` in `t^p`: `ℓ^p √((2n+p)!) / (2^n n!)`.
fn ln_monomial_coefficient(p: u64, ell: f64, n: u64) -> f64 {
    p as f64 * ell.ln() + 0.5 * ln_factorial(2 * n + p) - n as f64 * LN_2 - ln_factorial(n)
}

/// Coefficient of `φ_m` in `t^p` under the Gaussian basis; nonzero only for `m = 2n + p`.
pub fn monomial_coefficients(p: u32, ell: f64, n: u64) -> f64 {
    ln_monomial_coefficient(u64::from(p), ell, n).exp()
}

/// `Σ_{n=from}^{to} f_n²/α_n` over the indices carrying nonzero coefficients.
fn norm_partial(f: &CoefficientFamily, a: &ScalingFamily, from: u64, to: u64) -> Result<f64> {
    let mut acc = NeumaierSum::new();
    for n in f.support_indices(from, to) {
        let ln_sq = f.ln_square(n);
        if ln_sq.is_nan() {
            return Err(Error::Unsupported(format!(
                "position {n} maps beyond the representable indices"
            )));
        }
        if ln_sq == f64::NEG_INFINITY {
            continue;
        }
        acc.add((ln_sq - a.ln_term(n)?).exp());
    }
    Ok(acc.value())
}

/// Exact verdict on `Σ f_n²/α_n` from the growth catalog, when available.
fn symbolic_norm_verdict(f: &CoefficientFamily, a: &ScalingFamily) -> Option<ConvergenceVerdict> {
    if let CoefficientKind::Constant(c) = f.kind {
        if c == 0.0 {
            return Some(ConvergenceVerdict::exact(true));
        }
        let v = a.classify_reciprocal_sum();
        return (v.value != Verdict::Inconclusive).then_some(v);
    }
    let (pattern, f_sq) = f.square_growth()?;
    let alpha = a.growth()?;
    let alpha_along = match pattern {
        None => alpha,
        Some(p) => match p.along(&alpha) {
            Ok(d) => d,
            Err(v) => return Some(ConvergenceVerdict::exact(v == Verdict::Converges)),
        },
    };
    Some(ConvergenceVerdict::exact(
        f_sq.times(&alpha_along.reciprocal()).is_summable(),
    ))
}

/// Truncated squared norm `Σ_{n ≤ N} f_n²/α_n` in `H(K_{A,Φ})` with a verdict
/// on the full series.
pub fn rkhs_norm_sq(f: &CoefficientFamily, a: &ScalingFamily, n_max: u64) -> Result<(f64, ConvergenceVerdict)> {
    if f.origin != a.index_origin() {
        return Err(Error::IndexMismatch(format!(
            "coefficients start at {}, scaling starts at {}",
            f.origin,
            a.index_origin()
        )));
    }
    if n_max < 1 {
        return Err(Error::InvalidParameter("truncation must be at least 1".into()));
    }
    let partial = norm_partial(f, a, f.origin, n_max)?;
    let verdict = symbolic_norm_verdict(f, a).unwrap_or_else(|| {
        let tail_bound = match f.kind {
            CoefficientKind::Constant(c) => a.reciprocal_tail(n_max + 1).map(|b| c * c * b.upper()),
            _ => None,
        };
        ConvergenceVerdict::inconclusive(Evidence {
            partial_sum: partial,
            tail_bound,
            n: n_max,
        })
    });
    Ok((partial, verdict))
}

/// Probability that a sample path of the process with covariance `K` lies in
/// the scaled space `H(K_{A,Φ})`.
pub fn sample_membership(k: &ScaledKernelSpec) -> Result<MembershipVerdict> {
    if !k.metric_flag() {
        return Err(Error::MetricAssumptionUnmet {
            family: k.basis().family_name(),
        });
    }
    Ok(MembershipVerdict::from_reason(k.scaling().classify_reciprocal_sum()))
}

/// Same as [`sample_membership`] for a basis and scaling given separately.
pub fn sample_membership_of(basis: &BasisFamily, scaling: &ScalingFamily) -> Result<MembershipVerdict> {
    if !basis.metric_flag() {
        return Err(Error::MetricAssumptionUnmet {
            family: basis.family_name(),
        });
    }
    Ok(MembershipVerdict::from_reason(scaling.classify_reciprocal_sum()))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NotMemberReason {
    LiminfZero,
    SupInfinite,
}

/// `min` and `max` of `f_n²` over `start..end`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WindowStat {
    pub start: u64,
    pub end: u64,
    pub min_sq: f64,
    pub max_sq: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub enum SupportClass {
    Member,
    NotMember(NotMemberReason),
    Undetermined(Vec<WindowStat>),
}

/// Whether `f = Σ f_n φ_n` lies in the sample support set, i.e. whether
/// `liminf f_n² > 0` and `sup f_n² < ∞`.
pub fn support_set_classify(f: &CoefficientFamily) -> SupportClass {
    match &f.kind {
        CoefficientKind::Constant(c) => {
            if *c == 0.0 {
                SupportClass::NotMember(NotMemberReason::LiminfZero)
            } else {
                SupportClass::Member
            }
        }
        CoefficientKind::Hyperharmonic(rho) => {
            if *rho < 0.0 {
                SupportClass::NotMember(NotMemberReason::LiminfZero)
            } else if *rho > 0.0 {
                SupportClass::NotMember(NotMemberReason::SupInfinite)
            } else {
                SupportClass::Member
            }
        }
        CoefficientKind::SubsequenceIndicator(p) => {
            if p.complement_is_infinite() {
                SupportClass::NotMember(NotMemberReason::LiminfZero)
            } else {
                SupportClass::Member
            }
        }
        CoefficientKind::Monomial { .. } => SupportClass::NotMember(NotMemberReason::LiminfZero),
        // liminf and sup do not see the ordering
        CoefficientKind::Reordered { inner, .. } => support_set_classify(inner),
        CoefficientKind::Explicit { .. } => SupportClass::Undetermined(window_stats(f)),
    }
}

fn window_stats(f: &CoefficientFamily) -> Vec<WindowStat> {
    let mut out = Vec::new();
    let mut start = f.origin;
    let mut width = 16u64;
    while start < f.origin + EVIDENCE_TERMS {
        let end = start + width;
        let (min_sq, max_sq) = (start..end)
            .map(|n| f.coefficient_unchecked(n).powi(2))
            .fold((f64::INFINITY, 0.0f64), |(lo, hi), v| (lo.min(v), hi.max(v)));
        out.push(WindowStat {
            start,
            end,
            min_sq,
            max_sq,
        });
        start = end;
        width *= 2;
    }
    out
}

/// Whether samples of the power-series process with weights `w` lie in the
/// space of the power-series kernel with weights `w_bar`: probability one iff
/// `Σ w_n / w̄_n < ∞`.
pub fn power_series_membership(w: &WeightSequence, w_bar: &WeightSequence) -> MembershipVerdict {
    let reason = match (w.growth(), w_bar.growth()) {
        (Some((k, e)), Some((k_bar, e_bar))) => {
            // (n!)^{k - k̄} n^{e - ē}
            let converges = match k.cmp(&k_bar) {
                std::cmp::Ordering::Less => true,
                std::cmp::Ordering::Greater => false,
                std::cmp::Ordering::Equal => e - e_bar < -1.0,
            };
            ConvergenceVerdict::exact(converges)
        }
        _ => {
            let partial: NeumaierSum = (0..EVIDENCE_TERMS)
                .map(|n| (w.ln_weight(n) - w_bar.ln_weight(n)).exp())
                .collect();
            ConvergenceVerdict::inconclusive(Evidence {
                partial_sum: partial.value(),
                tail_bound: None,
                n: EVIDENCE_TERMS - 1,
            })
        }
    };
    MembershipVerdict::from_reason(reason)
}

/// Whether `t^p` lies in `H(K_{A,Φ})` for the Gaussian basis `Φ`.
pub fn monomial_membership(p: u32, a: &ScalingFamily) -> FunctionMembership {
    let f = CoefficientFamily::monomial(p, 1.0).expect("unit length-scale");
    if let Some(v) = symbolic_norm_verdict(&f, a) {
        return FunctionMembership::from_reason(v);
    }
    let from = a.index_origin();
    let to = from + EVIDENCE_TERMS;
    let partial = norm_partial(&f, a, from, to).unwrap_or(f64::NAN);
    FunctionMembership::from_reason(ConvergenceVerdict::inconclusive(Evidence {
        partial_sum: partial,
        tail_bound: None,
        n: to,
    }))
}

/// `[(2n+p)!/(2^{2n}(n!)²)] / [(2^p/√π) n^{p-1/2}]`, which tends to 1.
pub fn stirling_ratio(p: u32, n: u64) -> Result<f64> {
    if n < 1 {
        return Err(Error::Index { n, origin: 1 });
    }
    let (pf, nf) = (f64::from(p), n as f64);
    let exact = ln_factorial(2 * n + u64::from(p)) - 2.0 * nf * LN_2 - 2.0 * ln_factorial(n);
    let asymptotic = pf * LN_2 - 0.5 * PI.ln() + (pf - 0.5) * nf.ln();
    Ok((exact - asymptotic).exp())
}

/// Truncated expansion `Σ_n c_{2n+p} φ_{2n+p}(t)` of `t^p`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MonomialReconstruction {
    pub value: f64,
    pub terms_used: u64,
    pub tail_bound: f64,
}

/// Rebuild `t^p` from its Gaussian-basis expansion, summing until the
/// geometric tail bound falls below `tol · max(1, |t^p|)`.
pub fn monomial_reconstruct(p: u32, basis: &BasisFamily, t: f64, tol: f64) -> Result<MonomialReconstruction> {
    let ell = match basis.kind() {
        BasisKind::GaussianExp { length_scale } => *length_scale,
        _ => {
            return Err(Error::UnsupportedFamily {
                family: basis.family_name(),
            })
        }
    };
    basis.domain().check(t)?;
    let pu = u64::from(p);
    // consecutive terms have ratio x/(n+1), x = t²/(2ℓ²)
    let x = t * t / (2.0 * ell * ell);
    let scale = t.abs().powi(p as i32).max(1.0);
    let mut acc = NeumaierSum::new();
    let mut n = 0u64;
    loop {
        let m = 2 * n + pu;
        let phi = basis.log_abs(m, t)?;
        let term = if phi.sign == 0 {
            0.0
        } else {
            f64::from(phi.sign) * (ln_monomial_coefficient(pu, ell, n) + phi.ln_mag).exp()
        };
        acc.add(term);
        n += 1;
        let r = x / (n as f64 + 1.0);
        let tail = if r < 1.0 {
            term.abs() * r / (1.0 - r)
        } else {
            f64::INFINITY
        };
        if tail <= tol * scale || term == 0.0 && n > 1 {
            return Ok(MonomialReconstruction {
                value: acc.value(),
                terms_used: n,
                tail_bound: if term == 0.0 { 0.0 } else { tail },
            });
        }
        if n > 100_000 {
            return Err(Error::TruncationFailure {
                n_max: 100_000,
                tail_bound: tail,
            });
        }
    }
}
