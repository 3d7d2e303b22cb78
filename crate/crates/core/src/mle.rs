//! Maximum-likelihood scale estimate `σ̂ = √(fᵀK⁻¹f/N)` in extended
//! precision and the monomial rate experiment under the Gaussian kernel.

use std::fmt::Write as _;

use rayon::prelude::*;
use rug::ops::Pow;
use rug::Float;

use crate::error::{Error, Result};
use crate::kernel::{fmt_f64, ClosedFormKernel, KernelSource};

/// Working precision schedule for the Cholesky factorisation.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PrecisionPolicy {
    pub initial_bits: u32,
    pub max_bits: u32,
}

impl Default for PrecisionPolicy {
    fn default() -> Self {
        Self {
            initial_bits: 512,
            max_bits: 8192,
        }
    }
}

impl PrecisionPolicy {
    pub fn new(initial_bits: u32, max_bits: u32) -> Result<Self> {
        let p = Self { initial_bits, max_bits };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if self.initial_bits < 128 || self.max_bits < self.initial_bits {
            return Err(Error::InvalidParameter(format!(
                "need 128 ≤ initial_bits ≤ max_bits, got {} and {}",
                self.initial_bits, self.max_bits
            )));
        }
        Ok(())
    }

    /// `initial, 2·initial, …` capped at `max_bits`.
    fn schedule(&self) -> impl Iterator<Item = u32> {
        let max = self.max_bits;
        std::iter::successors(Some(self.initial_bits), move |&b| {
            (b < max).then(|| b.saturating_mul(2).min(max))
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SigmaHat {
    pub sigma: f64,
    pub sigma2: f64,
    pub bits_used: u32,
}

/// Kernel entries, data and size of one estimation problem at a given precision.
trait Problem: Sync {
    fn size(&self) -> usize;
    fn entry(&self, i: usize, j: usize, bits: u32) -> Float;
    fn data(&self, i: usize, bits: u32) -> Float;
}

/// Outcome of one attempt at a fixed precision.
enum Attempt {
    Accepted(Float),
    Breakdown,
}

#[allow(clippy::needless_range_loop)]
fn attempt(problem: &dyn Problem, bits: u32) -> Attempt {
    let n = problem.size();
    let k: Vec<Vec<Float>> = (0..n)
        .map(|i| (0..=i).map(|j| problem.entry(i, j, bits)).collect())
        .collect();
    let f: Vec<Float> = (0..n).map(|i| problem.data(i, bits)).collect();

    // K = LLᵀ, lower triangle by rows
    let mut l: Vec<Vec<Float>> = Vec::with_capacity(n);
    for i in 0..n {
        let mut row: Vec<Float> = Vec::with_capacity(i + 1);
        for j in 0..=i {
            let mut s = k[i][j].clone();
            for m in 0..j {
                let other = if j == i { &row[m] } else { &l[j][m] };
                s -= Float::with_val(bits, &row[m] * other);
            }
            if i == j {
                if s <= 0 {
                    return Attempt::Breakdown;
                }
                row.push(s.sqrt());
            } else {
                s /= &l[j][j];
                row.push(s);
            }
        }
        l.push(row);
    }

    // L y = f
    let mut y: Vec<Float> = Vec::with_capacity(n);
    for i in 0..n {
        let mut s = f[i].clone();
        for m in 0..i {
            s -= Float::with_val(bits, &l[i][m] * &y[m]);
        }
        s /= &l[i][i];
        y.push(s);
    }
    // Lᵀ x = y
    let mut x = vec![Float::new(bits); n];
    for i in (0..n).rev() {
        let mut s = y[i].clone();
        for m in i + 1..n {
            s -= Float::with_val(bits, &l[m][i] * &x[m]);
        }
        s /= &l[i][i];
        x[i] = s;
    }

    let sym = |i: usize, j: usize| if j <= i { &k[i][j] } else { &k[j][i] };
    let mut residual = Float::new(bits);
    let mut f_norm = Float::new(bits);
    for i in 0..n {
        let mut r = Float::with_val(bits, -&f[i]);
        for (j, xj) in x.iter().enumerate() {
            r += Float::with_val(bits, sym(i, j) * xj);
        }
        residual.max_mut(&Float::with_val(bits, r.abs_ref()));
        f_norm.max_mut(&Float::with_val(bits, f[i].abs_ref()));
    }
    let threshold = f_norm * Float::with_val(bits, 2).pow(-(i64::from(bits) / 4));
    if residual > threshold {
        return Attempt::Breakdown;
    }

    let mut q = Float::new(bits);
    for yi in &y {
        q += Float::with_val(bits, yi.square_ref());
    }
    Attempt::Accepted(q)
}

fn solve(problem: &dyn Problem, prec: PrecisionPolicy) -> Result<SigmaHat> {
    prec.validate()?;
    let n = problem.size();
    if n == 0 {
        return Err(Error::InvalidParameter("need at least one observation".into()));
    }
    for bits in prec.schedule() {
        if let Attempt::Accepted(q) = attempt(problem, bits) {
            let sigma2 = (q / n as u32).to_f64();
            return Ok(SigmaHat {
                sigma: sigma2.sqrt(),
                sigma2,
                bits_used: bits,
            });
        }
    }
    Err(Error::PrecisionExhausted {
        max_bits: prec.max_bits,
    })
}

/// Kernel value at extended precision for closed forms built from
/// elementary functions.
fn mp_closed(k: &ClosedFormKernel, a: &Float, b: &Float, bits: u32) -> Option<Float> {
    let f = |x: f64| Float::with_val(bits, x);
    let p = Float::with_val(bits, a * b);
    Some(match *k {
        ClosedFormKernel::BrownianBridge => Float::with_val(bits, a.min_ref(b)) - p,
        ClosedFormKernel::Gauss { ell } => {
            let d = Float::with_val(bits, a - b);
            let two_l2 = f(ell).square() * 2u32;
            (-(d.square() / two_l2)).exp()
        }
        ClosedFormKernel::GaussGeo { tau, ell } => {
            let l2 = f(ell).square();
            let env = Float::with_val(bits, a.square_ref()) + Float::with_val(bits, b.square_ref());
            let env = env / Float::with_val(bits, &l2 * 2u32);
            (f(tau).square() * p / l2 - env).exp()
        }
        ClosedFormKernel::GaussHyp { .. } | ClosedFormKernel::IbbEven { .. } => return None,
        ClosedFormKernel::Mehler { r } => {
            let r = f(r);
            let q = Float::with_val(bits, 1 - Float::with_val(bits, r.square_ref()));
            let sq = Float::with_val(bits, a.square_ref()) + Float::with_val(bits, b.square_ref());
            let num = Float::with_val(bits, r.square_ref()) * sq - Float::with_val(bits, &r * &p) * 2u32;
            (-(num / (q * 2u32))).exp()
        }
        ClosedFormKernel::Szego => Float::with_val(bits, 1 - p).recip(),
        ClosedFormKernel::Exponential => p.exp(),
        ClosedFormKernel::SzegoCounter => {
            let e = Float::with_val(bits, p.exp_ref());
            p * e + 1u32
        }
    })
}

struct PointProblem<'a> {
    kernel: &'a KernelSource,
    points: &'a [f64],
    f: &'a [f64],
    /// Kernel values in double precision, used for kernels without an
    /// extended-precision formula.
    fallback: Vec<Vec<f64>>,
}

impl Problem for PointProblem<'_> {
    fn size(&self) -> usize {
        self.points.len()
    }

    fn entry(&self, i: usize, j: usize, bits: u32) -> Float {
        if let KernelSource::Closed(c) = self.kernel {
            let a = Float::with_val(bits, self.points[i]);
            let b = Float::with_val(bits, self.points[j]);
            if let Some(v) = mp_closed(c, &a, &b, bits) {
                return v;
            }
        }
        Float::with_val(bits, self.fallback[i][j])
    }

    fn data(&self, i: usize, bits: u32) -> Float {
        Float::with_val(bits, self.f[i])
    }
}

/// `σ̂ = √(fᵀK⁻¹f/N)` for data `f_values` observed at `points`.
///
/// Closed forms built from elementary functions are evaluated at the working
/// precision; other kernels enter through their double-precision values.
pub fn sigma_hat(f_values: &[f64], kernel: &KernelSource, points: &[f64], prec: PrecisionPolicy) -> Result<SigmaHat> {
    if f_values.len() != points.len() {
        return Err(Error::InvalidParameter(format!(
            "{} data values for {} points",
            f_values.len(),
            points.len()
        )));
    }
    let mut order: Vec<usize> = (0..points.len()).collect();
    order.sort_by(|&a, &b| points[a].total_cmp(&points[b]));
    for w in order.windows(2) {
        if points[w[0]] == points[w[1]] {
            return Err(Error::DuplicatePoints {
                i: w[0].min(w[1]),
                j: w[0].max(w[1]),
            });
        }
    }
    let fallback = points
        .iter()
        .enumerate()
        .map(|(i, &t)| (0..=i).map(|j| kernel.eval(t, points[j])).collect::<Result<Vec<_>>>())
        .collect::<Result<Vec<_>>>()?;
    let problem = PointProblem {
        kernel,
        points,
        f: f_values,
        fallback,
    };
    solve(&problem, prec)
}

/// `f(t) = t^p` at `t_i = i/N`, `i = 1..N`, under the Gaussian kernel; the
/// design points are formed at the working precision.
struct MonomialProblem {
    n: usize,
    p: u32,
    ell: f64,
}

impl MonomialProblem {
    fn point(&self, i: usize, bits: u32) -> Float {
        Float::with_val(bits, i as u32 + 1) / self.n as u32
    }
}

impl Problem for MonomialProblem {
    fn size(&self) -> usize {
        self.n
    }

    fn entry(&self, i: usize, j: usize, bits: u32) -> Float {
        let kernel = ClosedFormKernel::Gauss { ell: self.ell };
        mp_closed(&kernel, &self.point(i, bits), &self.point(j, bits), bits).expect("Gaussian closed form")
    }

    fn data(&self, i: usize, bits: u32) -> Float {
        self.point(i, bits).pow(self.p)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RateRow {
    pub n: usize,
    pub sigma2: f64,
    pub bits: u32,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RateExperimentResult {
    pub p: u32,
    pub ell: f64,
    pub per_n: Vec<RateRow>,
    /// Least-squares slope of `log σ̂²` against `log N`; `None` with fewer than two sizes.
    pub slope: Option<f64>,
    /// Mean of `σ̂² N^{1/2 - p}`.
    pub constant: f64,
    /// `2^p ℓ^{2p} / (√π (p + 1/2))`, a conjectured value.
    pub conjectured_constant: f64,
}

/// Ordinary least-squares slope of `y` on `x`.
pub fn ols_slope(x: &[f64], y: &[f64]) -> Option<f64> {
    if x.len() < 2 || x.len() != y.len() {
        return None;
    }
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = x.iter().map(|a| (a - mx).powi(2)).sum();
    (sxx > 0.0).then(|| sxy / sxx)
}

pub fn conjectured_constant(p: u32, ell: f64) -> f64 {
    let pf = f64::from(p);
    2f64.powf(pf) * ell.powf(2.0 * pf) / (std::f64::consts::PI.sqrt() * (pf + 0.5))
}

/// Run `σ̂²` for `t^p` on the uniform grids `i/N` for every `N` in `sizes`.
pub fn rate_experiment(p: u32, ell: f64, sizes: &[usize], prec: PrecisionPolicy) -> Result<RateExperimentResult> {
    if !(ell > 0.0 && ell.is_finite()) {
        return Err(Error::InvalidParameter(format!(
            "length-scale must be positive, got {ell}"
        )));
    }
    if sizes.is_empty() || sizes.iter().any(|&n| n < 4) || sizes.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::InvalidParameter(format!(
            "sizes must be strictly increasing and at least 4, got {sizes:?}"
        )));
    }
    prec.validate()?;
    let per_n = sizes
        .par_iter()
        .map(|&n| {
            let s = solve(&MonomialProblem { n, p, ell }, prec)?;
            Ok(RateRow {
                n,
                sigma2: s.sigma2,
                bits: s.bits_used,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let slope = running_slopes(&per_n).last().copied().flatten();
    let pf = f64::from(p);
    let constant = per_n
        .iter()
        .map(|r| r.sigma2 * (r.n as f64).powf(0.5 - pf))
        .sum::<f64>()
        / per_n.len() as f64;
    Ok(RateExperimentResult {
        p,
        ell,
        per_n,
        slope,
        constant,
        conjectured_constant: conjectured_constant(p, ell),
    })
}

/// Slope fitted to the first `k` rows, for each `k`.
fn running_slopes(rows: &[RateRow]) -> Vec<Option<f64>> {
    let x: Vec<f64> = rows.iter().map(|r| (r.n as f64).ln()).collect();
    let y: Vec<f64> = rows.iter().map(|r| r.sigma2.ln()).collect();
    (1..=rows.len()).map(|k| ols_slope(&x[..k], &y[..k])).collect()
}

/// Marker printed where a slope cannot be fitted.
pub const NOT_AVAILABLE: &str = "NA";

impl RateExperimentResult {
    /// CSV with header `N,sigma2,bits,slope_running`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("N,sigma2,bits,slope_running\n");
        for (r, s) in self.per_n.iter().zip(running_slopes(&self.per_n)) {
            let slope = s.map_or_else(|| NOT_AVAILABLE.to_string(), fmt_f64);
            let _ = writeln!(out, "{},{},{},{}", r.n, fmt_f64(r.sigma2), r.bits, slope);
        }
        out
    }

    /// Summary lines `key=value`.
    pub fn summary(&self) -> String {
        let pf = f64::from(self.p);
        let slope = self.slope.map_or_else(|| NOT_AVAILABLE.to_string(), fmt_f64);
        let ratio = self.constant / self.conjectured_constant;
        let mut out = String::new();
        let _ = writeln!(out, "slope={slope}");
        let _ = writeln!(out, "expected_slope={}", fmt_f64(pf - 0.5));
        let _ = writeln!(out, "constant={}", fmt_f64(self.constant));
        let _ = writeln!(
            out,
            "conjectured_constant={} (conjecture)",
            fmt_f64(self.conjectured_constant)
        );
        let _ = writeln!(
            out,
            "constant_within_15pct={} (informational)",
            (ratio - 1.0).abs() <= 0.15
        );
        if self.p >= 2 {
            let _ = writeln!(out, "note=rate for p >= 2 is conjectural");
        }
        out
    }
}
