//! Small numerical building blocks shared by the series code: log-factorials,
//! compensated accumulation, `sin(pi x)` with exact argument reduction,
//! Bernoulli polynomials and the Hurwitz zeta function.

use std::f64::consts::PI;

/// `ln(n!)`, exact to double precision for `n <= 170` (table lookup) and
/// Lanczos log-gamma above.
pub fn ln_factorial(n: u64) -> f64 {
    statrs::function::factorial::ln_factorial(n)
}

/// `ln Γ(x)` for `x > 0`.
pub fn ln_gamma(x: f64) -> f64 {
    statrs::function::gamma::ln_gamma(x)
}

/// `sin(pi * x)` with the argument reduced modulo 2 before multiplying by pi,
/// so integer arguments give an exact zero.
pub fn sin_pi(x: f64) -> f64 {
    let mut r = x.rem_euclid(2.0);
    let mut sign = 1.0;
    if r >= 1.0 {
        r -= 1.0;
        sign = -1.0;
    }
    // r in [0, 1): sin(pi r) = sin(pi (1 - r))
    if r > 0.5 {
        r = 1.0 - r;
    }
    if r == 0.0 {
        return 0.0;
    }
    sign * (PI * r).sin()
}

/// `cos(pi * x)` with the same reduction as [`sin_pi`].
pub fn cos_pi(x: f64) -> f64 {
    sin_pi(x + 0.5)
}

/// `ln(e^a + e^b)` without overflow; `-inf` inputs are absorbed.
pub fn ln_add_exp(a: f64, b: f64) -> f64 {
    if a == f64::NEG_INFINITY {
        return b;
    }
    if b == f64::NEG_INFINITY {
        return a;
    }
    let (hi, lo) = if a >= b { (a, b) } else { (b, a) };
    hi + (lo - hi).exp().ln_1p()
}

/// `ln Σ e^{x_i}`.
pub fn ln_sum_exp(xs: impl IntoIterator<Item = f64>) -> f64 {
    xs.into_iter().fold(f64::NEG_INFINITY, ln_add_exp)
}

/// Neumaier (improved Kahan–Babuška) compensated accumulator.
#[derive(Debug, Clone, Copy, Default)]
pub struct NeumaierSum {
    sum: f64,
    comp: f64,
}

impl NeumaierSum {
    pub fn new() -> Self {
        Self::default()
    }

    #[inline]
    pub fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.comp += (self.sum - t) + x;
        } else {
            self.comp += (x - t) + self.sum;
        }
        self.sum = t;
    }

    #[inline]
    pub fn value(&self) -> f64 {
        self.sum + self.comp
    }
}

impl FromIterator<f64> for NeumaierSum {
    fn from_iter<I: IntoIterator<Item = f64>>(iter: I) -> Self {
        let mut acc = NeumaierSum::new();
        for x in iter {
            acc.add(x);
        }
        acc
    }
}

/// Coefficients (constant term first) of the even Bernoulli polynomials
/// `B_2`, `B_4`, `B_6`, `B_8`.
const BERNOULLI_POLY: [&[f64]; 4] = [
    &[1.0 / 6.0, -1.0, 1.0],
    &[-1.0 / 30.0, 0.0, 1.0, -2.0, 1.0],
    &[1.0 / 42.0, 0.0, -0.5, 0.0, 2.5, -3.0, 1.0],
    &[-1.0 / 30.0, 0.0, 2.0 / 3.0, 0.0, -7.0 / 3.0, 0.0, 14.0 / 3.0, -4.0, 1.0],
];

/// Even Bernoulli polynomial `B_degree(x)` for `degree` in {2, 4, 6, 8}.
pub fn bernoulli_poly(degree: u32, x: f64) -> Option<f64> {
    if degree == 0 || !degree.is_multiple_of(2) || degree > 8 {
        return None;
    }
    let coeffs = BERNOULLI_POLY[(degree / 2 - 1) as usize];
    Some(coeffs.iter().rev().fold(0.0, |acc, &c| acc * x + c))
}

/// Polynomial coefficients of `B_degree`, constant term first.
pub fn bernoulli_poly_coeffs(degree: u32) -> Option<&'static [f64]> {
    if degree == 0 || !degree.is_multiple_of(2) || degree > 8 {
        return None;
    }
    Some(BERNOULLI_POLY[(degree / 2 - 1) as usize])
}

/// `B_{2j} / (2j)!` for j = 1..=8.
const EM_COEFFS: [f64; 8] = [
    1.0 / 12.0,
    -1.0 / 720.0,
    1.0 / 30240.0,
    -1.0 / 1209600.0,
    1.0 / 47900160.0,
    -691.0 / 1307674368000.0,
    1.0 / 74724249600.0,
    -3617.0 / 10670622842880000.0,
];

/// Hurwitz zeta `ζ(s, a) = Σ_{k≥0} (a + k)^{-s}` for `s > 1`, `a > 0`.
///
/// Euler–Maclaurin with the direct part extended until `a + M ≥ 16`. Returns
/// the value and a bound on the truncation error of the asymptotic part (the
/// first neglected correction term, which dominates the remainder for this
/// completely monotone summand).
pub fn hurwitz_zeta(s: f64, a: f64) -> (f64, f64) {
    assert!(s > 1.0 && a > 0.0, "hurwitz_zeta needs s > 1, a > 0");
    let mut direct = NeumaierSum::new();
    let mut x = a;
    while x < 16.0 {
        direct.add(x.powf(-s));
        x += 1.0;
    }
    let mut acc = NeumaierSum::new();
    acc.add(x.powf(1.0 - s) / (s - 1.0));
    acc.add(0.5 * x.powf(-s));
    // rising factorial s (s+1) ... (s + 2j - 2) times x^{-s-2j+1}
    let mut rising = s;
    let mut xpow = x.powf(-s - 1.0);
    let inv_x2 = 1.0 / (x * x);
    let mut last = 0.0;
    for (j, c) in EM_COEFFS.iter().enumerate() {
        let term = c * rising * xpow;
        if j + 1 == EM_COEFFS.len() {
            last = term.abs();
            break;
        }
        acc.add(term);
        let k = 2.0 * (j as f64 + 1.0);
        rising *= (s + k - 1.0) * (s + k);
        xpow *= inv_x2;
    }
    (direct.value() + acc.value(), last)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sin_pi_is_exact_at_integers() {
        for k in -5..=5 {
            assert_eq!(sin_pi(k as f64), 0.0);
        }
        assert!((sin_pi(0.5) - 1.0).abs() < 1e-16);
        assert!((sin_pi(1.5) + 1.0).abs() < 1e-16);
        assert!((sin_pi(0.3) - (PI * 0.3).sin()).abs() < 1e-15);
        assert!((cos_pi(1.0) + 1.0).abs() < 1e-16);
    }

    #[test]
    fn bernoulli_values() {
        assert!((bernoulli_poly(2, 0.0).unwrap() - 1.0 / 6.0).abs() < 1e-16);
        assert!((bernoulli_poly(4, 0.0).unwrap() + 1.0 / 30.0).abs() < 1e-16);
        assert!((bernoulli_poly(6, 0.0).unwrap() - 1.0 / 42.0).abs() < 1e-16);
        assert!((bernoulli_poly(8, 0.0).unwrap() + 1.0 / 30.0).abs() < 1e-16);
        // B_n(1 - x) = B_n(x) for even n
        for d in [2, 4, 6, 8] {
            let a = bernoulli_poly(d, 0.3).unwrap();
            let b = bernoulli_poly(d, 0.7).unwrap();
            assert!((a - b).abs() < 1e-15, "degree {d}");
        }
        assert!(bernoulli_poly(3, 0.1).is_none());
    }

    #[test]
    fn hurwitz_matches_basel_and_direct_sums() {
        let (z2, err) = hurwitz_zeta(2.0, 1.0);
        assert!((z2 - PI * PI / 6.0).abs() < 1e-14, "{z2}");
        assert!(err < 1e-15);
        let (z4, _) = hurwitz_zeta(4.0, 1.0);
        assert!((z4 - PI.powi(4) / 90.0).abs() < 1e-14);
        // tail identity: ζ(2, N+1) = ζ(2) - Σ_{n≤N} n^{-2}
        let n = 1000u64;
        let head: NeumaierSum = (1..=n).map(|k| (k as f64).powi(-2)).collect();
        let (tail, _) = hurwitz_zeta(2.0, n as f64 + 1.0);
        assert!((tail - (PI * PI / 6.0 - head.value())).abs() < 1e-15);
    }

    #[test]
    fn neumaier_recovers_cancellation() {
        let acc: NeumaierSum = [1.0, 1e100, 1.0, -1e100].into_iter().collect();
        assert_eq!(acc.value(), 2.0);
    }
}
