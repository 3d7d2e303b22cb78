//! Gaussian-process sample paths by truncated Karhunen–Loève expansion
//! `X(t) ≈ Σ_{n ≤ N} ζ_n φ_n(t)` with independent standard normal `ζ_n`.

use std::fmt;
use std::fmt::Write as _;
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;

use crate::basis::BasisFamily;
use crate::error::{Error, Result};
use crate::kernel::fmt_f64;
use crate::numeric::NeumaierSum;
use crate::scaling::ScalingFamily;

pub const DEFAULT_TRUNCATION: u64 = 1000;

/// Each path reads its normals from its own block of the ChaCha keystream,
/// `2^40` words long.
const PATH_BLOCK_WORDS: u32 = 40;

/// Replaces the random draws: `(path, k) ↦ ζ_k` with `k = 0..N`.
pub type CoefficientHook = Arc<dyn Fn(u64, u64) -> f64 + Send + Sync>;

#[derive(Clone)]
pub struct KLSampler {
    basis: BasisFamily,
    truncation: u64,
    seed: u64,
    stream: u64,
    next_path: u64,
    hook: Option<CoefficientHook>,
}

impl fmt::Debug for KLSampler {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("KLSampler")
            .field("basis", &self.basis)
            .field("truncation", &self.truncation)
            .field("seed", &self.seed)
            .field("stream", &self.stream)
            .field("next_path", &self.next_path)
            .field("hooked", &self.hook.is_some())
            .finish()
    }
}

/// One realised path: the coefficients `ζ` and the values on the grid.
#[derive(Debug, Clone, PartialEq)]
pub struct SamplePath {
    pub index: u64,
    pub coefficients: Vec<f64>,
    pub values: Vec<f64>,
}

impl KLSampler {
    pub fn new(basis: BasisFamily, truncation: u64, seed: u64) -> Result<Self> {
        if truncation < 1 {
            return Err(Error::InvalidParameter("truncation must be at least 1".into()));
        }
        Ok(Self {
            basis,
            truncation,
            seed,
            stream: 0,
            next_path: 0,
            hook: None,
        })
    }

    /// Independent samplers with the same seed use distinct streams.
    pub fn with_stream(mut self, stream: u64) -> Self {
        self.stream = stream;
        self
    }

    pub fn with_coefficient_hook(mut self, hook: impl Fn(u64, u64) -> f64 + Send + Sync + 'static) -> Self {
        self.hook = Some(Arc::new(hook));
        self
    }

    pub fn basis(&self) -> &BasisFamily {
        &self.basis
    }

    pub fn truncation(&self) -> u64 {
        self.truncation
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn stream(&self) -> u64 {
        self.stream
    }

    /// `ζ_1, …, ζ_N` of path `path`, independent of any other path.
    pub fn coefficients(&self, path: u64) -> Vec<f64> {
        if let Some(h) = &self.hook {
            return (0..self.truncation).map(|k| h(path, k)).collect();
        }
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(self.stream);
        rng.set_word_pos(u128::from(path) << PATH_BLOCK_WORDS);
        (0..self.truncation).map(|_| rng.sample(StandardNormal)).collect()
    }

    /// `φ_n(t)` for every grid point (rows) and `n` in the truncation (columns).
    pub fn basis_matrix(&self, grid: &[f64]) -> Result<Vec<Vec<f64>>> {
        let origin = self.basis.index_origin();
        grid.par_iter()
            .map(|&t| {
                self.basis.domain().check(t)?;
                Ok((origin..origin + self.truncation)
                    .map(|n| self.basis.eval_unchecked(n, t))
                    .collect())
            })
            .collect()
    }

    /// Draw the next `count` paths.
    pub fn sample_paths(&mut self, grid: &[f64], count: u64) -> Result<Vec<SamplePath>> {
        let phi = self.basis_matrix(grid)?;
        let first = self.next_path;
        let paths = (first..first + count)
            .into_par_iter()
            .map(|index| {
                let coefficients = self.coefficients(index);
                let values = phi
                    .iter()
                    .map(|row| {
                        row.iter()
                            .zip(&coefficients)
                            .map(|(p, z)| p * z)
                            .collect::<NeumaierSum>()
                            .value()
                    })
                    .collect();
                SamplePath {
                    index,
                    coefficients,
                    values,
                }
            })
            .collect();
        self.next_path += count;
        Ok(paths)
    }
}

/// Draw one path on `grid`.
pub fn kl_sample_path(s: &mut KLSampler, grid: &[f64]) -> Result<SamplePath> {
    Ok(s.sample_paths(grid, 1)?.remove(0))
}

/// `Σ_{n ≤ N} ζ_n²/α_n`, the scaled norm of a truncated path. `zeta[k]`
/// multiplies `φ_{origin + k}`.
pub fn kl_norm_partial(s: &KLSampler, zeta: &[f64], a: &ScalingFamily) -> Result<f64> {
    let origin = s.basis.index_origin();
    if a.index_origin() > origin {
        return Err(Error::IndexMismatch(format!(
            "scaling starts at {}, basis at {origin}",
            a.index_origin()
        )));
    }
    let mut acc = NeumaierSum::new();
    for (k, z) in zeta.iter().enumerate() {
        if *z != 0.0 {
            acc.add(z * z * (-a.ln_term(origin + k as u64)?).exp());
        }
    }
    Ok(acc.value())
}

/// CSV with header `t,path_0,…,path_{M-1}`; header only when there are no paths.
pub fn paths_to_csv(grid: &[f64], paths: &[SamplePath]) -> String {
    let mut out = String::from("t");
    if paths.is_empty() {
        out.push('\n');
        return out;
    }
    for k in 0..paths.len() {
        let _ = write!(out, ",path_{k}");
    }
    out.push('\n');
    for (i, t) in grid.iter().enumerate() {
        out.push_str(&fmt_f64(*t));
        for p in paths {
            out.push(',');
            out.push_str(&fmt_f64(p.values[i]));
        }
        out.push('\n');
    }
    out
}
