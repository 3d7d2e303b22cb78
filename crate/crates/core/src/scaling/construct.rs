//! Constructive sequence operations: Dini refinement, a convergent series
//! dominating a given list, and the strictly smaller scaling envelope.

use std::f64::consts::LN_2;
use std::sync::Arc;

use super::seq::{PositiveSeq, SeqHandle, TailBracket};
use super::ScalingFamily;
use crate::error::{Error, Result};
use crate::numeric::{ln_add_exp, ln_sum_exp};

/// Largest index the knot search may reach.
const KNOT_SEARCH_CAP: u64 = 1 << 60;
/// Largest prefix table the splice may tabulate.
const TABLE_CAP: u64 = 50_000_000;

struct Dini {
    inner: SeqHandle,
    c: f64,
}

impl Dini {
    fn inner_upper(&self, n: u64) -> f64 {
        self.inner.tail(n).map_or(f64::NAN, |b| b.ln_upper)
    }
}

impl PositiveSeq for Dini {
    fn origin(&self) -> u64 {
        self.inner.origin()
    }

    fn ln_term(&self, n: u64) -> f64 {
        self.inner.ln_term(n) - self.c * self.inner_upper(n)
    }

    fn tail(&self, n: u64) -> Option<TailBracket> {
        let up = self.inner.tail(n)?.ln_upper;
        Some(TailBracket {
            ln_lower: self.ln_term(n),
            ln_upper: (1.0 - self.c) * up - (1.0 - self.c).ln(),
        })
    }

    fn label(&self) -> String {
        format!("dini({}, {})", self.inner.label(), self.c)
    }
}

/// `a_n = a'_n / U_n^c` where `U_n` is the certified upper tail of `a'`.
///
/// The result is summable with `Σ_{l≥n} a_l ≤ U_n^{1-c}/(1-c)` and
/// `a_n/a'_n = U_n^{-c} → ∞` for `c > 0`.
pub fn dini_refine(a_prime: SeqHandle, c: f64) -> Result<SeqHandle> {
    if !(0.0..1.0).contains(&c) {
        return Err(Error::BadExponent(c));
    }
    if a_prime.tail(a_prime.origin()).is_none() {
        return Err(Error::NotSummable(format!(
            "{} carries no certified tail",
            a_prime.label()
        )));
    }
    if c == 0.0 {
        return Ok(a_prime);
    }
    Ok(Arc::new(Dini { inner: a_prime, c }))
}

/// The spliced sequence `a'` of the domination construction.
struct Splice {
    inputs: Vec<SeqHandle>,
    origin: u64,
    /// `knots[m-1] = n_m`; `knots[0]` is the origin.
    knots: Vec<u64>,
    /// `Σ_{l=n}^{n_M - 1} a'_l` for `origin ≤ n < n_M`.
    suffix: Vec<f64>,
}

/// Bracket of `Σ_{l≥n} Σ_{k<m} a_{k,l}`.
fn partial_bracket(inputs: &[SeqHandle], m: usize, n: u64) -> TailBracket {
    let (lo, hi): (Vec<f64>, Vec<f64>) = inputs[..m]
        .iter()
        .map(|s| {
            let b = s.tail(n).expect("certified input");
            (b.ln_lower, b.ln_upper)
        })
        .unzip();
    TailBracket {
        ln_lower: ln_sum_exp(lo),
        ln_upper: ln_sum_exp(hi),
    }
}

impl Splice {
    fn block(&self, n: u64) -> usize {
        self.knots.partition_point(|&k| k <= n).max(1)
    }

    fn ln_partial(&self, m: usize, n: u64) -> f64 {
        ln_sum_exp(self.inputs[..m].iter().map(|s| s.ln_term(n)))
    }

    fn last_knot(&self) -> u64 {
        *self.knots.last().unwrap()
    }
}

impl PositiveSeq for Splice {
    fn origin(&self) -> u64 {
        self.origin
    }

    fn ln_term(&self, n: u64) -> f64 {
        self.ln_partial(self.block(n), n)
    }

    fn tail(&self, n: u64) -> Option<TailBracket> {
        let last = self.last_knot();
        let all = self.inputs.len();
        if n >= last {
            return Some(partial_bracket(&self.inputs, all, n));
        }
        let head = self.suffix[(n - self.origin) as usize];
        let rest = partial_bracket(&self.inputs, all, last);
        let ln_head = head.ln();
        Some(TailBracket {
            ln_lower: ln_add_exp(ln_head, rest.ln_lower),
            // allow for rounding in the tabulated suffix
            ln_upper: ln_add_exp(ln_head + 1e-12, rest.ln_upper),
        })
    }

    fn label(&self) -> String {
        let names: Vec<String> = self.inputs.iter().map(|s| s.label()).collect();
        format!("splice[{}]", names.join(", "))
    }
}

/// Output of [`dominating_convergent`].
pub struct Dominating {
    /// The dominating summable sequence.
    pub sequence: SeqHandle,
    /// Splice knots `n_1 = origin < n_2 < ... < n_M`.
    pub knots: Vec<u64>,
}

/// Smallest `n ≥ start` with `ln U(n) ≤ budget`, assuming `U` non-increasing.
fn first_below(start: u64, budget: f64, ln_upper: impl Fn(u64) -> f64) -> Result<u64> {
    if ln_upper(start) <= budget {
        return Ok(start);
    }
    let mut bad = start;
    let mut step = 1u64;
    let good = loop {
        let probe = start.saturating_add(step);
        if probe > KNOT_SEARCH_CAP {
            return Err(Error::NotSummable(format!(
                "tail budget e^{budget} not reached below index {KNOT_SEARCH_CAP}"
            )));
        }
        if ln_upper(probe) <= budget {
            break probe;
        }
        bad = probe;
        step *= 2;
    };
    let (mut lo, mut hi) = (bad, good);
    while hi - lo > 1 {
        let mid = lo + (hi - lo) / 2;
        if ln_upper(mid) <= budget {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(hi)
}

/// A summable sequence `a` with `a_n / a_{m,n} → ∞` for every input `m`.
///
/// Partial sums `ā_m = Σ_{k≤m} a_k` are spliced at knots `n_m` chosen as the
/// smallest indices with `Σ_{n≥n_m} ā_{m,n} ≤ 2^{-m}`, and the splice is then
/// refined with exponent 1/2.
pub fn dominating_convergent(inputs: &[SeqHandle]) -> Result<Dominating> {
    let first = inputs
        .first()
        .ok_or_else(|| Error::NotSummable("empty input list".into()))?;
    let origin = first.origin();
    for s in inputs {
        if s.origin() != origin {
            return Err(Error::IndexMismatch(format!(
                "{} starts at {}, expected {origin}",
                s.label(),
                s.origin()
            )));
        }
        if s.tail(origin).is_none() {
            return Err(Error::NotSummable(format!("{} carries no certified tail", s.label())));
        }
    }
    let mut knots = vec![origin];
    for m in 2..=inputs.len() {
        let prev = *knots.last().unwrap();
        let budget = -(m as f64) * LN_2;
        let n_m = first_below(prev + 1, budget, |n| partial_bracket(inputs, m, n).ln_upper)?;
        knots.push(n_m);
    }
    let last = *knots.last().unwrap();
    if last - origin > TABLE_CAP {
        return Err(Error::Unsupported(format!("splice knot {last} exceeds the table cap")));
    }
    let mut splice = Splice {
        inputs: inputs.to_vec(),
        origin,
        knots: knots.clone(),
        suffix: Vec::new(),
    };
    let len = (last - origin) as usize;
    let mut suffix = vec![0.0; len];
    let mut acc = 0.0;
    for i in (0..len).rev() {
        acc += splice.ln_term(origin + i as u64).exp();
        suffix[i] = acc;
    }
    splice.suffix = suffix;
    let sequence = dini_refine(Arc::new(splice), 0.5)?;
    Ok(Dominating { sequence, knots })
}

/// A scaling `A` with `Σ 1/α_n < ∞` certified and `α_n / α_{m,n} → 0` for every
/// input, so that `H(K_{A,Φ}) ⊊ H(K_{A_m,Φ})` for all `m`.
pub fn strictly_smaller_envelope(convergent_scalings: &[ScalingFamily]) -> Result<ScalingFamily> {
    if convergent_scalings.is_empty() {
        return Err(Error::NotSummable("empty input list".into()));
    }
    let recips = convergent_scalings
        .iter()
        .map(|s| s.reciprocals())
        .collect::<Result<Vec<_>>>()?;
    let dominating = dominating_convergent(&recips)?;
    let refined = dini_refine(dominating.sequence, 0.5)?;
    Ok(ScalingFamily::explicit(refined))
}
