//! Closed-form kernels used as oracles for the truncated series.

use crate::basis::{BasisKind, WeightSequence};
use crate::error::{Error, Result};
use crate::numeric::{bernoulli_poly, ln_factorial};

use super::ScaledKernelSpec;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ClosedFormKernel {
    /// `min(t, t') − tt'` on `[0, 1]`.
    BrownianBridge,
    /// Iterated Brownian bridge of even order 2, 4, 6 or 8 via Bernoulli polynomials.
    IbbEven { order: u32 },
    /// `exp(−(t − t')²/(2ℓ²))`.
    Gauss { ell: f64 },
    /// Gaussian basis scaled by `α_n = n^ρ`, `ρ ∈ {1, 2, 3, 4}`.
    GaussHyp { rho: u32, ell: f64 },
    /// Gaussian basis scaled by `α_n = τ^{2n}`.
    GaussGeo { tau: f64, ell: f64 },
    /// Mehler kernel with parameter `0 < r < 1`.
    Mehler { r: f64 },
    /// `1/(1 − tt')` on `(−1, 1)`.
    Szego,
    /// `exp(tt')`.
    Exponential,
    /// `1 + tt' exp(tt')`.
    SzegoCounter,
}

/// Touchard polynomial coefficients, `Σ_{n≥1} n^ρ a^n/n! = e^a T_ρ(a)`.
const TOUCHARD: [&[f64]; 4] = [
    &[0.0, 1.0],
    &[0.0, 1.0, 1.0],
    &[0.0, 1.0, 3.0, 1.0],
    &[0.0, 1.0, 7.0, 6.0, 1.0],
];

impl ClosedFormKernel {
    pub fn name(&self) -> String {
        match self {
            ClosedFormKernel::BrownianBridge => "brownian-bridge".into(),
            ClosedFormKernel::IbbEven { order } => format!("ibb-even:{order}"),
            ClosedFormKernel::Gauss { ell } => format!("gauss:{ell}"),
            ClosedFormKernel::GaussHyp { rho, ell } => format!("gauss-hyp{rho}:{ell}"),
            ClosedFormKernel::GaussGeo { tau, ell } => format!("gauss-geo:{tau},{ell}"),
            ClosedFormKernel::Mehler { r } => format!("mehler:{r}"),
            ClosedFormKernel::Szego => "szego".into(),
            ClosedFormKernel::Exponential => "exponential".into(),
            ClosedFormKernel::SzegoCounter => "szego-counter".into(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidParameter(m));
        match *self {
            ClosedFormKernel::IbbEven { order } if !matches!(order, 2 | 4 | 6 | 8) => {
                bad(format!("closed form only for orders 2, 4, 6, 8; got {order}"))
            }
            ClosedFormKernel::GaussHyp { rho, .. } if !(1..=4).contains(&rho) => {
                bad(format!("closed form only for ρ = 1..4; got {rho}"))
            }
            ClosedFormKernel::Gauss { ell } | ClosedFormKernel::GaussHyp { ell, .. } if !(ell > 0.0) => {
                bad(format!("length-scale must be positive, got {ell}"))
            }
            ClosedFormKernel::GaussGeo { tau, ell } if !(tau > 0.0 && ell > 0.0) => {
                bad(format!("need τ > 0 and ℓ > 0, got {tau}, {ell}"))
            }
            ClosedFormKernel::Mehler { r } if !(r > 0.0 && r < 1.0) => bad(format!("need 0 < r < 1, got {r}")),
            _ => Ok(()),
        }
    }

    fn check_domain(&self, t: f64) -> Result<()> {
        let (lo, hi, open) = match self {
            ClosedFormKernel::BrownianBridge | ClosedFormKernel::IbbEven { .. } => (0.0, 1.0, false),
            ClosedFormKernel::Szego => (-1.0, 1.0, true),
            _ => (f64::NEG_INFINITY, f64::INFINITY, false),
        };
        let inside = if open {
            t > lo && t < hi
        } else {
            t >= lo && t <= hi && t.is_finite()
        };
        if inside {
            Ok(())
        } else {
            Err(Error::Domain { t, lo, hi })
        }
    }

    /// Closed-form value `K(t, t')`.
    pub fn eval(&self, t: f64, t_prime: f64) -> Result<f64> {
        self.validate()?;
        self.check_domain(t)?;
        self.check_domain(t_prime)?;
        let p = t * t_prime;
        Ok(match *self {
            ClosedFormKernel::BrownianBridge => t.min(t_prime) - p,
            ClosedFormKernel::IbbEven { order } => {
                let sign = if (order / 2) % 2 == 1 { 1.0 } else { -1.0 };
                let coeff = sign * 2f64.powi(order as i32 - 1) / ln_factorial(u64::from(order)).exp();
                let d = bernoulli_poly(order, (t - t_prime).abs() / 2.0).unwrap();
                let s = bernoulli_poly(order, (t + t_prime) / 2.0).unwrap();
                coeff * (d - s)
            }
            ClosedFormKernel::Gauss { ell } => {
                let d = t - t_prime;
                (-d * d / (2.0 * ell * ell)).exp()
            }
            ClosedFormKernel::GaussHyp { rho, ell } => {
                let a = p / (ell * ell);
                let poly = TOUCHARD[rho as usize - 1].iter().rev().fold(0.0, |acc, &c| acc * a + c);
                let env = -(t * t + t_prime * t_prime) / (2.0 * ell * ell);
                env.exp() + poly * (env + a).exp()
            }
            ClosedFormKernel::GaussGeo { tau, ell } => {
                let l2 = ell * ell;
                (-(t * t + t_prime * t_prime) / (2.0 * l2) + tau * tau * p / l2).exp()
            }
            ClosedFormKernel::Mehler { r } => {
                let q = 1.0 - r * r;
                (-(r * r * (t * t + t_prime * t_prime) - 2.0 * r * p) / (2.0 * q)).exp()
            }
            ClosedFormKernel::Szego => 1.0 / (1.0 - p),
            ClosedFormKernel::Exponential => p.exp(),
            ClosedFormKernel::SzegoCounter => 1.0 + p * p.exp(),
        })
    }

    /// `d_K(t, t')` computed from the closed form.
    pub fn d_k(&self, t: f64, t_prime: f64) -> Result<f64> {
        let a = self.eval(t, t)?;
        let b = self.eval(t, t_prime)?;
        let c = self.eval(t_prime, t_prime)?;
        Ok((a - 2.0 * b + c).max(0.0).sqrt())
    }

    /// The closed form equal to a series spec, when one is registered.
    pub fn matching(spec: &ScaledKernelSpec) -> Option<ClosedFormKernel> {
        let scaling = spec.scaling();
        match spec.basis().kind() {
            BasisKind::SineIbb { order } if scaling.is_identity() => match order {
                2 => Some(ClosedFormKernel::BrownianBridge),
                4 | 6 | 8 => Some(ClosedFormKernel::IbbEven { order: *order }),
                _ => None,
            },
            BasisKind::GaussianExp { length_scale } => {
                let ell = *length_scale;
                if scaling.is_identity() {
                    return Some(ClosedFormKernel::Gauss { ell });
                }
                match scaling.kind() {
                    crate::scaling::ScalingKind::Hyperharmonic { rho }
                        if rho.fract() == 0.0 && (1.0..=4.0).contains(rho) =>
                    {
                        Some(ClosedFormKernel::GaussHyp { rho: *rho as u32, ell })
                    }
                    crate::scaling::ScalingKind::Geometric { tau } => {
                        Some(ClosedFormKernel::GaussGeo { tau: *tau, ell })
                    }
                    _ => None,
                }
            }
            BasisKind::PowerSeries { weights } if scaling.is_identity() => match weights {
                WeightSequence::Szego => Some(ClosedFormKernel::Szego),
                WeightSequence::Exponential => Some(ClosedFormKernel::Exponential),
                WeightSequence::SzegoCounter => Some(ClosedFormKernel::SzegoCounter),
                WeightSequence::Custom(_) => None,
            },
            _ => None,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn examples() {
        assert!((ClosedFormKernel::BrownianBridge.eval(0.3, 0.7).unwrap() - 0.09).abs() < 1e-16);
        assert!((ClosedFormKernel::Szego.eval(0.5, 0.5).unwrap() - 4.0 / 3.0).abs() < 1e-15);
        let g = ClosedFormKernel::GaussGeo {
            tau: 2f64.sqrt(),
            ell: 1.0,
        };
        assert!((g.eval(1.0, 1.0).unwrap() - std::f64::consts::E).abs() < 1e-14);
        assert!(ClosedFormKernel::Szego.eval(1.0, 0.2).is_err());
        assert!(ClosedFormKernel::BrownianBridge.eval(1.2, 0.2).is_err());
        assert_eq!(ClosedFormKernel::BrownianBridge.d_k(0.0, 0.0).unwrap(), 0.0);
        assert_eq!(ClosedFormKernel::BrownianBridge.eval(0.0, 0.0).unwrap(), 0.0);
    }

    #[test]
    fn ibb_order_two_is_brownian_bridge() {
        let ibb = ClosedFormKernel::IbbEven { order: 2 };
        for i in 0..=20 {
            for j in 0..=20 {
                let (t, s) = (i as f64 / 20.0, j as f64 / 20.0);
                let a = ibb.eval(t, s).unwrap();
                let b = ClosedFormKernel::BrownianBridge.eval(t, s).unwrap();
                assert!((a - b).abs() < 1e-15);
            }
        }
    }

    #[test]
    fn mehler_is_rescaled_geometric() {
        for r in [0.2f64, 0.5, 0.9] {
            let ell = ((1.0 - r * r) / (r * r)).sqrt();
            let geo = ClosedFormKernel::GaussGeo {
                tau: (1.0 / r).sqrt(),
                ell,
            };
            let m = ClosedFormKernel::Mehler { r };
            for i in -8..=8 {
                for j in -8..=8 {
                    let (t, s) = (i as f64 / 4.0, j as f64 / 4.0);
                    let (a, b) = (geo.eval(t, s).unwrap(), m.eval(t, s).unwrap());
                    assert!((a - b).abs() <= 1e-9 * a.abs().max(1.0), "r={r} t={t} s={s}");
                }
            }
        }
    }

    #[test]
    fn mehler_matches_hermite_series() {
        // √(1−r²) Σ r^n/n! He_n(t) He_n(t')
        let r: f64 = 0.4;
        for &(t, s) in &[(0.3, -0.5), (1.0, 1.2), (-1.5, 0.7)] {
            let (mut h0t, mut h1t) = (1.0, t);
            let (mut h0s, mut h1s) = (1.0, s);
            let mut sum = 1.0 + r * t * s;
            let mut coef = r;
            for n in 1..200 {
                let (h2t, h2s) = (t * h1t - n as f64 * h0t, s * h1s - n as f64 * h0s);
                coef *= r / (n as f64 + 1.0);
                sum += coef * h2t * h2s;
                (h0t, h1t, h0s, h1s) = (h1t, h2t, h1s, h2s);
            }
            let series = (1.0 - r * r).sqrt() * sum;
            let closed = ClosedFormKernel::Mehler { r }.eval(t, s).unwrap();
            assert!((series - closed).abs() < 1e-12, "{series} {closed}");
        }
    }

    #[test]
    fn bernoulli_quartic_table() {
        // B₄(x) = x⁴ − 2x³ + x² − 1/30
        for x in [0.0, 0.2, 0.5, 0.9] {
            let direct = x * x * x * x - 2.0 * x * x * x + x * x - 1.0 / 30.0;
            assert!((bernoulli_poly(4, x).unwrap() - direct).abs() < 1e-16);
        }
    }
}
