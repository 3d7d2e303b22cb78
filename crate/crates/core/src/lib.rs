//! Scaled reproducing kernel Hilbert spaces: kernels `Σ α_n φ_n(t)φ_n(t')`
//! built from an orthonormal basis and a positive scaling sequence, the
//! probability-zero/one membership of Gaussian-process sample paths, the
//! constructive sequence lemmas behind it, Karhunen–Loève sampling and the
//! maximum-likelihood scale experiment for monomial data.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod basis;
pub mod dsl;
pub mod error;
pub mod gp;
pub mod kernel;
pub mod membership;
pub mod mle;
pub mod numeric;
pub mod scaling;

pub use basis::{BasisFamily, BasisKind, Interval, LogAbs, WeightSequence};
pub use error::{Error, Result};
pub use gp::KLSampler;
pub use kernel::{ClosedFormKernel, KernelSource, ScaledKernelSpec, TruncationPolicy};
pub use membership::{CoefficientFamily, MembershipVerdict, Probability};
pub use mle::{PrecisionPolicy, RateExperimentResult};
pub use scaling::{
    compare_scalings, ConvergenceVerdict, GrowthDescriptor, Inclusion, ScalingFamily, ScalingKind, Verdict,
};

/// Library version, echoed into output headers.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
