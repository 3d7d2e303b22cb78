//! Kernel translates `t ↦ K(t, t')` on a grid, optionally with the second
//! derivative in `t`.

use std::fmt::Write as _;

use rayon::prelude::*;

use super::{ClosedFormKernel, ScaledKernelSpec};
use crate::error::{Error, Result};

/// A kernel given either as a truncated series or in closed form.
#[derive(Debug, Clone, PartialEq)]
pub enum KernelSource {
    Series(ScaledKernelSpec),
    Closed(ClosedFormKernel),
}

impl KernelSource {
    pub fn eval(&self, t: f64, t_prime: f64) -> Result<f64> {
        match self {
            KernelSource::Series(k) => k.eval(t, t_prime).map(|(v, _)| v),
            KernelSource::Closed(c) => c.eval(t, t_prime),
        }
    }

    pub fn d_k(&self, t: f64, t_prime: f64) -> Result<f64> {
        match self {
            KernelSource::Series(k) => k.d_k(t, t_prime),
            KernelSource::Closed(c) => c.d_k(t, t_prime),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProfileRow {
    pub t: f64,
    pub k: f64,
    pub k_d2: Option<f64>,
}

/// Rows of a translate table.
#[derive(Debug, Clone, PartialEq)]
pub struct Profile {
    pub t_prime: f64,
    pub rows: Vec<ProfileRow>,
}

/// 17 significant digits.
pub fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

impl Profile {
    pub fn has_d2(&self) -> bool {
        self.rows.first().is_some_and(|r| r.k_d2.is_some())
    }

    /// CSV with header `t,K` or `t,K,K_d2`.
    pub fn to_csv(&self) -> String {
        let d2 = self.has_d2();
        let mut out = String::from(if d2 { "t,K,K_d2\n" } else { "t,K\n" });
        for r in &self.rows {
            let _ = write!(out, "{},{}", fmt_f64(r.t), fmt_f64(r.k));
            if let Some(v) = r.k_d2 {
                let _ = write!(out, ",{}", fmt_f64(v));
            }
            out.push('\n');
        }
        out
    }

    pub fn min_d2(&self) -> Option<f64> {
        self.rows.iter().filter_map(|r| r.k_d2).reduce(f64::min)
    }
}

/// Evaluate `K(·, t')` and optionally `∂²_t K(·, t')` on `grid`. With
/// `normalize_d2_min` the second-derivative column is divided by the
/// magnitude of its minimum so that the minimum is −1.
pub fn translate_profile(
    source: &KernelSource,
    t_prime: f64,
    grid: &[f64],
    with_d2: bool,
    normalize_d2_min: bool,
) -> Result<Profile> {
    if with_d2 {
        if let KernelSource::Closed(_) = source {
            return Err(Error::UnsupportedFamily { family: "closed-form" });
        }
    }
    let mut rows = grid
        .par_iter()
        .map(|&t| {
            let k = source.eval(t, t_prime)?;
            let k_d2 = match (with_d2, source) {
                (true, KernelSource::Series(spec)) => Some(spec.eval_d2(t, t_prime)?.0),
                _ => None,
            };
            Ok(ProfileRow { t, k, k_d2 })
        })
        .collect::<Result<Vec<_>>>()?;
    if with_d2 && normalize_d2_min {
        let min = rows.iter().filter_map(|r| r.k_d2).fold(f64::INFINITY, f64::min);
        if min.is_finite() && min != 0.0 {
            let scale = min.abs();
            for r in &mut rows {
                r.k_d2 = r.k_d2.map(|v| v / scale);
            }
        }
    }
    Ok(Profile { t_prime, rows })
}
