//! Scaled kernels `K_{A,Φ}(t,t') = Σ α_n φ_n(t) φ_n(t')` evaluated by truncated
//! series with certified tail bounds.

mod closed;
mod profile;

pub use profile::fmt_f64;

pub use closed::ClosedFormKernel;
pub use profile::{translate_profile, KernelSource, Profile, ProfileRow};

use std::f64::consts::PI;

use crate::basis::{BasisFamily, BasisKind, WeightSequence};
use crate::error::{Error, Result};
use crate::numeric::{hurwitz_zeta, sin_pi, NeumaierSum};
use crate::scaling::{GrowthDescriptor, ScalingFamily, ScalingKind, SpliceRule};

/// How many terms of the series to keep.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TruncationPolicy {
    pub rel_tol: f64,
    pub abs_floor: f64,
    pub n_max: u64,
    /// Keep exactly this many terms instead of truncating adaptively.
    pub fixed_n: Option<u64>,
}

impl Default for TruncationPolicy {
    fn default() -> Self {
        Self {
            rel_tol: 1e-12,
            abs_floor: 1e-300,
            n_max: 100_000,
            fixed_n: None,
        }
    }
}

impl TruncationPolicy {
    pub fn fixed(n: u64) -> Self {
        Self {
            fixed_n: Some(n),
            ..Self::default()
        }
    }

    fn validate(&self) -> Result<()> {
        if !(self.rel_tol > 0.0) || self.abs_floor < 0.0 || self.n_max == 0 || self.fixed_n == Some(0) {
            return Err(Error::InvalidSpec(format!("bad truncation policy {self:?}")));
        }
        Ok(())
    }
}

/// Truncation diagnostics of one kernel evaluation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KernelDiagnostics {
    pub terms_used: u64,
    pub tail_bound: f64,
}

/// Basis, scaling and truncation policy of a computable scaled kernel.
#[derive(Debug, Clone, PartialEq)]
pub struct ScaledKernelSpec {
    basis: BasisFamily,
    scaling: ScalingFamily,
    truncation: TruncationPolicy,
    validity_rule: String,
}

const CHECK_GROWTH: f64 = 1.25;

impl ScaledKernelSpec {
    /// Build a spec, re-indexing the scaling to the basis origin and checking
    /// `Σ α_n φ_n(t)² < ∞` by the family's analytic criterion.
    pub fn new(basis: BasisFamily, scaling: ScalingFamily) -> Result<Self> {
        Self::with_truncation(basis, scaling, TruncationPolicy::default())
    }

    pub fn with_truncation(basis: BasisFamily, scaling: ScalingFamily, truncation: TruncationPolicy) -> Result<Self> {
        truncation.validate()?;
        let growth = match scaling.kind() {
            ScalingKind::Explicit { .. } => None,
            ScalingKind::Spliced {
                rule: SpliceRule::Pattern { .. },
                ..
            } => None,
            _ => scaling.growth(),
        }
        .ok_or_else(|| Error::InvalidSpec(format!("scaling {scaling} has no certified kernel tail")))?;
        let scaling = scaling
            .with_origin(basis.index_origin())
            .map_err(|e| Error::InvalidSpec(e.to_string()))?;
        let validity_rule = match basis.kind() {
            BasisKind::SineIbb { order } => {
                let s = f64::from(*order);
                if !growth.times(&GrowthDescriptor::new(0.0, -s, vec![])).is_summable() {
                    return Err(Error::InvalidSpec(format!(
                        "Σ α_n (πn)^-{order} diverges for {scaling}"
                    )));
                }
                format!("Σ α_n (πn)^-{order} < ∞")
            }
            BasisKind::GaussianExp { .. } => "ratio test: α_{n+1}/α_n bounded".to_string(),
            BasisKind::PowerSeries { weights } => match weights {
                WeightSequence::Szego => {
                    let r = basis.domain().max_abs();
                    if growth.geometric_rate + 2.0 * r.ln() >= 0.0 {
                        return Err(Error::InvalidSpec(format!(
                            "Σ α_n t^(2n) diverges on the domain for {scaling}"
                        )));
                    }
                    "ratio test: α_{n+1}/α_n · max t² < 1".to_string()
                }
                WeightSequence::Exponential | WeightSequence::SzegoCounter => {
                    "ratio test: α_{n+1}/α_n bounded".to_string()
                }
                WeightSequence::Custom(_) => {
                    return Err(Error::InvalidSpec("custom weights carry no certified tail".into()))
                }
            },
        };
        Ok(Self {
            basis,
            scaling,
            truncation,
            validity_rule,
        })
    }

    pub fn basis(&self) -> &BasisFamily {
        &self.basis
    }

    pub fn scaling(&self) -> &ScalingFamily {
        &self.scaling
    }

    pub fn truncation(&self) -> TruncationPolicy {
        self.truncation
    }

    pub fn validity_rule(&self) -> &str {
        &self.validity_rule
    }

    /// Continuity of the kernel is assumed for every cataloged family.
    pub fn continuity_flag(&self) -> bool {
        true
    }

    /// Whether `d_K` is known to be a metric for this basis family.
    pub fn metric_flag(&self) -> bool {
        self.basis.metric_flag()
    }

    pub fn with_policy(&self, truncation: TruncationPolicy) -> Result<Self> {
        truncation.validate()?;
        Ok(Self {
            truncation,
            ..self.clone()
        })
    }

    /// `K_{A,Φ}(t, t')` with truncation diagnostics.
    pub fn eval(&self, t: f64, t_prime: f64) -> Result<(f64, KernelDiagnostics)> {
        let dom = self.basis.domain();
        dom.check(t)?;
        dom.check(t_prime)?;
        match self.basis.kind() {
            BasisKind::SineIbb { order } => self.sine_sum(*order, false, t, t_prime),
            _ => self.log_space_sum(t, t_prime),
        }
    }

    /// `∂²/∂t² K_{A,Φ}(t, t')`; sine family only.
    pub fn eval_d2(&self, t: f64, t_prime: f64) -> Result<(f64, KernelDiagnostics)> {
        let BasisKind::SineIbb { order } = self.basis.kind() else {
            return Err(Error::UnsupportedFamily {
                family: self.basis.family_name(),
            });
        };
        let dom = self.basis.domain();
        dom.check(t)?;
        dom.check(t_prime)?;
        self.sine_sum(*order, true, t, t_prime)
    }

    /// `d_K(t, t') = √(K(t,t) − 2K(t,t') + K(t',t'))`.
    pub fn d_k(&self, t: f64, t_prime: f64) -> Result<f64> {
        let (a, _) = self.eval(t, t)?;
        let (b, _) = self.eval(t, t_prime)?;
        let (c, _) = self.eval(t_prime, t_prime)?;
        Ok((a - 2.0 * b + c).max(0.0).sqrt())
    }

    fn done(&self, bound: f64, value: f64) -> bool {
        bound <= self.truncation.rel_tol * value.abs() + self.truncation.abs_floor
    }

    /// `c_n = 2 α_n (πn)^{-s}` for the sine family.
    fn sine_coeff(&self, s: f64, n: u64) -> f64 {
        2.0 * (self.scaling.ln_term_unchecked(n) - s * (PI * n as f64).ln()).exp()
    }

    /// Bound on `Σ_{m>n} c_m`.
    fn sine_tail_sum(&self, s: f64, n: u64) -> f64 {
        if let Some(rho) = self.scaling.power_exponent() {
            let k = s - rho;
            if k <= 1.0 {
                return f64::INFINITY;
            }
            let (z, err) = hurwitz_zeta(k, n as f64 + 1.0);
            return 2.0 * PI.powf(-s) * (z + err);
        }
        match self.scaling.elasticity_bound(n) {
            Some(e) if s - e - 1.0 > 0.0 => self.sine_coeff(s, n) * n as f64 / (s - e - 1.0),
            _ => f64::INFINITY,
        }
    }

    /// Abel-summation bound on `|Σ_{m>n} c_m cos(mπx)|`.
    fn sine_abel(&self, s: f64, n: u64, x: f64) -> f64 {
        let h = sin_pi(x / 2.0).abs();
        if h == 0.0 {
            return f64::INFINITY;
        }
        match self.scaling.elasticity_bound(n + 1) {
            Some(e) if e < s => self.sine_coeff(s, n + 1) / h,
            _ => f64::INFINITY,
        }
    }

    /// Exact value of `Σ_{m>n} c_m cos(mπx)` at resonant `x` for pure power
    /// scalings, as `(value, error)`.
    fn sine_resonant(&self, s: f64, n: u64, x: f64) -> Option<(f64, f64)> {
        let rho = self.scaling.power_exponent()?;
        let k = s - rho;
        if k <= 1.0 {
            return None;
        }
        let r = x.rem_euclid(2.0);
        let scale = 2.0 * PI.powf(-s);
        if r == 0.0 {
            let (z, e) = hurwitz_zeta(k, n as f64 + 1.0);
            Some((scale * z, scale * e))
        } else if r == 1.0 {
            let half = 2f64.powf(-k);
            let (even, e1) = hurwitz_zeta(k, (n / 2 + 1) as f64);
            let (odd, e2) = hurwitz_zeta(k, n.div_ceil(2) as f64 + 0.5);
            Some((scale * half * (even - odd), scale * half * (e1 + e2)))
        } else {
            None
        }
    }

    /// Tail correction and remaining bound for the sine series truncated at `n`.
    fn sine_tail(&self, s: f64, n: u64, t: f64, t_prime: f64, correct: bool) -> (f64, f64) {
        let mut correction = 0.0;
        let mut bound = 0.0;
        let total = self.sine_tail_sum(s, n);
        for (x, sign) in [((t - t_prime).abs(), 0.5), (t + t_prime, -0.5)] {
            if correct {
                if let Some((v, e)) = self.sine_resonant(s, n, x) {
                    correction += sign * v;
                    bound += 0.5 * e;
                    continue;
                }
            }
            bound += 0.5 * self.sine_abel(s, n, x).min(total);
        }
        (correction, bound)
    }

    fn sine_sum(&self, order: u32, deriv: bool, t: f64, t_prime: f64) -> Result<(f64, KernelDiagnostics)> {
        let s = f64::from(order) - if deriv { 2.0 } else { 0.0 };
        let fixed = self.truncation.fixed_n;
        if deriv && fixed.is_none() {
            let g = self.scaling.growth().expect("checked at construction");
            if !g.times(&GrowthDescriptor::new(0.0, -s, vec![])).is_summable() {
                return Err(Error::InvalidSpec(format!(
                    "second-derivative series Σ α_n (πn)^-{s} diverges; use a fixed truncation"
                )));
            }
        }
        if sin_pi(t) == 0.0 || sin_pi(t_prime) == 0.0 {
            return Ok((
                0.0,
                KernelDiagnostics {
                    terms_used: 0,
                    tail_bound: 0.0,
                },
            ));
        }
        let term = |n: u64| {
            let prod = self.basis.eval_unchecked(n, t) * self.basis.eval_unchecked(n, t_prime);
            let v = self.scaling.term_unchecked(n) * prod;
            if deriv {
                let w = PI * n as f64;
                -(w * w) * v
            } else {
                v
            }
        };
        let sign = if deriv { -1.0 } else { 1.0 };
        let mut acc = NeumaierSum::new();
        if let Some(big_n) = fixed {
            for n in 1..=big_n {
                acc.add(term(n));
            }
            let (_, bound) = self.sine_tail(s, big_n, t, t_prime, false);
            return Ok((
                acc.value(),
                KernelDiagnostics {
                    terms_used: big_n,
                    tail_bound: bound,
                },
            ));
        }
        let n_max = self.truncation.n_max;
        let mut next_check = 8u64.min(n_max);
        let mut last_bound = f64::INFINITY;
        for n in 1..=n_max {
            acc.add(term(n));
            if n == next_check || n == n_max {
                let (corr, bound) = self.sine_tail(s, n, t, t_prime, true);
                let value = acc.value() + sign * corr;
                last_bound = bound;
                if self.done(bound, value) {
                    return Ok((
                        value,
                        KernelDiagnostics {
                            terms_used: n,
                            tail_bound: bound,
                        },
                    ));
                }
                next_check = ((n as f64 * CHECK_GROWTH) as u64).max(n + 1).min(n_max);
            }
        }
        Err(Error::TruncationFailure {
            n_max,
            tail_bound: last_bound,
        })
    }

    /// Upper bound on `c_{m+1}(x)/c_m(x)` for all `m ≥ n ≥ 1`, where
    /// `c_m(x) = α_m φ_m(x)²`.
    fn term_ratio_bound(&self, n: u64, x: f64) -> Option<f64> {
        let alpha = self.scaling.ratio_bound(n)?;
        let x2 = x * x;
        let basis = match self.basis.kind() {
            BasisKind::GaussianExp { length_scale } => x2 / (length_scale * length_scale * (n as f64 + 1.0)),
            BasisKind::PowerSeries { weights } => x2 * weights.step_ratio_bound(n)?,
            BasisKind::SineIbb { .. } => return None,
        };
        Some(alpha * basis)
    }

    /// Bound on `Σ_{m>n} α_m φ_m(x)²` given `ln c_n(x)`.
    fn ratio_tail(&self, n: u64, x: f64, ln_c: f64) -> f64 {
        if ln_c == f64::NEG_INFINITY {
            return 0.0;
        }
        match self.term_ratio_bound(n, x) {
            Some(r) if r < 1.0 => (ln_c + (r / (1.0 - r)).ln()).exp(),
            _ => f64::INFINITY,
        }
    }

    fn log_space_sum(&self, t: f64, t_prime: f64) -> Result<(f64, KernelDiagnostics)> {
        let origin = self.basis.index_origin();
        let mut acc = NeumaierSum::new();
        let fixed = self.truncation.fixed_n;
        let n_max = fixed.unwrap_or(self.truncation.n_max);
        let mut last_bound = f64::INFINITY;
        for i in 0..n_max {
            let n = origin + i;
            let la = self.basis.log_abs_unchecked(n, t);
            let lb = self.basis.log_abs_unchecked(n, t_prime);
            let ln_alpha = self.scaling.ln_term_unchecked(n);
            if la.sign != 0 && lb.sign != 0 {
                let mag = (ln_alpha + (la.ln_mag + lb.ln_mag)).exp();
                acc.add(f64::from(la.sign * lb.sign) * mag);
            }
            if n == 0 {
                continue;
            }
            let tail_t = self.ratio_tail(n, t, ln_alpha + 2.0 * la.ln_mag);
            let tail_tp = self.ratio_tail(n, t_prime, ln_alpha + 2.0 * lb.ln_mag);
            let bound = if tail_t == 0.0 || tail_tp == 0.0 {
                0.0
            } else {
                tail_t.sqrt() * tail_tp.sqrt()
            };
            last_bound = bound;
            if fixed.is_none() && self.done(bound, acc.value()) {
                return Ok((
                    acc.value(),
                    KernelDiagnostics {
                        terms_used: i + 1,
                        tail_bound: bound,
                    },
                ));
            }
        }
        if fixed.is_some() {
            return Ok((
                acc.value(),
                KernelDiagnostics {
                    terms_used: n_max,
                    tail_bound: last_bound,
                },
            ));
        }
        Err(Error::TruncationFailure {
            n_max,
            tail_bound: last_bound,
        })
    }
}

/// Free-function form of [`ScaledKernelSpec::eval`].
pub fn eval_kernel(k: &ScaledKernelSpec, t: f64, t_prime: f64) -> Result<(f64, KernelDiagnostics)> {
    k.eval(t, t_prime)
}

/// Free-function form of [`ScaledKernelSpec::d_k`].
pub fn d_k(k: &ScaledKernelSpec, t: f64, t_prime: f64) -> Result<f64> {
    k.d_k(t, t_prime)
}
