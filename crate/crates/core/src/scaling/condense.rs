//! Condensation sequences: `a_{g_m} = g_{m+1} - g_m` and zero elsewhere.

use crate::error::{Error, Result};

/// A strictly increasing positive integer sequence `(g_m)_{m ≥ 0}`.
#[derive(Debug, Clone, PartialEq)]
pub enum IndexSequence {
    /// `g_m = base^m`.
    PowersOf { base: u64 },
    /// `g_m = first + m·step`.
    Arithmetic { first: u64, step: u64 },
    /// Finitely many listed terms with a declared gap-growth constant.
    Listed { terms: Vec<u64>, growth_constant: f64 },
}

/// The condensation sequence built from `g`, with its gap-growth constant `C`
/// satisfying `g_{m+1} - g_m ≤ C (g_m - g_{m-1})`.
#[derive(Debug, Clone, PartialEq)]
pub struct Condensation {
    g: IndexSequence,
    constant: f64,
}

/// Validate `g` and build its condensation sequence.
pub fn condensation_sequence(g: IndexSequence) -> Result<Condensation> {
    let constant = match &g {
        IndexSequence::PowersOf { base } => {
            if *base < 2 {
                return Err(Error::BadIndexSequence(format!("base {base} does not increase")));
            }
            *base as f64
        }
        IndexSequence::Arithmetic { first, step } => {
            if *step == 0 || *first == 0 {
                return Err(Error::BadIndexSequence(
                    "arithmetic sequence needs positive first term and step".into(),
                ));
            }
            1.0
        }
        IndexSequence::Listed { terms, growth_constant } => {
            if terms.len() < 2 || terms[0] == 0 {
                return Err(Error::BadIndexSequence("need at least two positive terms".into()));
            }
            if terms.windows(2).any(|w| w[1] <= w[0]) {
                return Err(Error::BadIndexSequence("terms are not strictly increasing".into()));
            }
            for w in terms.windows(3) {
                let (a, b) = ((w[1] - w[0]) as f64, (w[2] - w[1]) as f64);
                if b > growth_constant * a {
                    return Err(Error::BadIndexSequence(format!(
                        "gap {b} exceeds {growth_constant} times the previous gap {a}"
                    )));
                }
            }
            *growth_constant
        }
    };
    Ok(Condensation { g, constant })
}

impl Condensation {
    pub fn growth_constant(&self) -> f64 {
        self.constant
    }

    /// `g_m`, if known.
    pub fn knot(&self, m: u64) -> Option<u64> {
        match &self.g {
            IndexSequence::PowersOf { base } => base.checked_pow(u32::try_from(m).ok()?),
            IndexSequence::Arithmetic { first, step } => first.checked_add(step.checked_mul(m)?),
            IndexSequence::Listed { terms, .. } => terms.get(m as usize).copied(),
        }
    }

    /// Position `m` with `g_m = n`, if `n` is a knot.
    fn position(&self, n: u64) -> Option<u64> {
        match &self.g {
            IndexSequence::PowersOf { base } => {
                let mut m = 0;
                let mut v = 1u64;
                while v < n {
                    v = v.checked_mul(*base)?;
                    m += 1;
                }
                (v == n).then_some(m)
            }
            IndexSequence::Arithmetic { first, step } => {
                (n >= *first && (n - first).is_multiple_of(*step)).then(|| (n - first) / step)
            }
            IndexSequence::Listed { terms, .. } => terms.binary_search(&n).ok().map(|i| i as u64),
        }
    }

    /// `a_n` for `n ≥ 1`; `None` past the last listed gap.
    pub fn term(&self, n: u64) -> Option<u64> {
        match self.position(n) {
            Some(m) => {
                let next = self.knot(m + 1)?;
                Some(next - n)
            }
            None => Some(0),
        }
    }

    /// `Σ_{n ≤ N} a_n`, computed from the telescoping knots.
    pub fn partial_sum(&self, big_n: u64) -> Option<u64> {
        let mut total = 0u64;
        let mut m = 0u64;
        loop {
            let g = self.knot(m)?;
            if g > big_n {
                return Some(total);
            }
            total += self.knot(m + 1)? - g;
            m += 1;
        }
    }

    /// `(1/N) Σ_{n ≤ N} a_n`.
    pub fn average(&self, big_n: u64) -> Option<f64> {
        Some(self.partial_sum(big_n)? as f64 / big_n as f64)
    }

    /// `Σ_{m < terms} a_{g_m} b_{g_m}` for a weight function `b`.
    pub fn weighted_sum(&self, b: impl Fn(u64) -> f64, terms: u64) -> Option<f64> {
        let mut acc = 0.0;
        for m in 0..terms {
            let g = self.knot(m)?;
            acc += (self.knot(m + 1)? - g) as f64 * b(g);
        }
        Some(acc)
    }
}
