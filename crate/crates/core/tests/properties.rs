//! Cross-module properties on random inputs.

use approx::assert_relative_eq;
use nalgebra::DMatrix;
use proptest::prelude::*;
use rkhs_scale::dsl::{parse_basis, parse_scaling};
use rkhs_scale::membership::{rkhs_norm_sq, sample_membership};
use rkhs_scale::{
    compare_scalings, ClosedFormKernel, CoefficientFamily, Inclusion, KLSampler, Probability, ScaledKernelSpec,
    ScalingFamily, TruncationPolicy,
};

fn series_kernels() -> Vec<ScaledKernelSpec> {
    let policy = TruncationPolicy {
        abs_floor: 1e-10,
        ..TruncationPolicy::default()
    };
    [
        ("ibb:s=4", "hyp:1"),
        ("ibb:s=4", "logpow:2"),
        ("ibb:s=6", "hyp:2.5"),
        ("gauss:ell=0.8", "hyp:1.5"),
        ("gauss:ell=0.8", "itlog:1,3,2"),
        ("power:exp", "hyp:2"),
        ("power:szego", "geo:1.1"),
    ]
    .iter()
    .map(|(b, s)| {
        ScaledKernelSpec::with_truncation(parse_basis(b).unwrap(), parse_scaling(s).unwrap(), policy).unwrap()
    })
    .collect()
}

fn unit_points(max: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(0.0..=1.0f64, 1..=max)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn series_kernels_are_psd(u in unit_points(6)) {
        for k in series_kernels() {
            let d = k.basis().domain();
            let pts: Vec<f64> = u.iter().map(|x| d.lo + (d.hi - d.lo) * x).collect();
            let m = DMatrix::from_fn(pts.len(), pts.len(), |i, j| k.eval(pts[i], pts[j]).unwrap().0);
            let scale = m.diagonal().max().max(1.0);
            prop_assert!(m.symmetric_eigenvalues().min() >= -1e-9 * scale);
        }
    }

    #[test]
    fn kernels_are_symmetric_and_cauchy_schwarz(x in 0.0..=1.0f64, y in 0.0..=1.0f64) {
        for k in series_kernels() {
            let d = k.basis().domain();
            let (t, u) = (d.lo + (d.hi - d.lo) * x, d.lo + (d.hi - d.lo) * y);
            let a = k.eval(t, u).unwrap().0;
            prop_assert_eq!(a, k.eval(u, t).unwrap().0);
            let bound = (k.eval(t, t).unwrap().0 * k.eval(u, u).unwrap().0).sqrt();
            prop_assert!(a.abs() <= bound * (1.0 + 1e-10) + 1e-14);
        }
    }

    #[test]
    fn pseudometric_triangle(x in 0.0..=1.0f64, y in 0.0..=1.0f64, z in 0.0..=1.0f64) {
        let k = ClosedFormKernel::Gauss { ell: 0.8 };
        let (a, b, c) = (8.0 * x - 4.0, 8.0 * y - 4.0, 8.0 * z - 4.0);
        let (ab, bc, ac) = (k.d_k(a, b).unwrap(), k.d_k(b, c).unwrap(), k.d_k(a, c).unwrap());
        prop_assert!(ac <= ab + bc + 1e-12);
    }

    #[test]
    fn larger_hyperharmonic_scaling_is_larger_space(r1 in 0.0..4.0f64, dr in 0.01..2.0f64) {
        let small = ScalingFamily::hyperharmonic(r1).unwrap();
        let large = ScalingFamily::hyperharmonic(r1 + dr).unwrap();
        prop_assert_eq!(compare_scalings(&small, &large).unwrap(), Inclusion::AProperSubsetOfB);
        let p_large = sample_membership(
            &ScaledKernelSpec::new(parse_basis("gauss:ell=1").unwrap(), large).unwrap(),
        ).unwrap().probability;
        prop_assert_eq!(p_large, if r1 + dr > 1.0 { Probability::One } else { Probability::Zero });
    }
}

#[test]
fn unscaled_norm_of_hyperharmonic_coefficients() {
    // Σ_{n≥1} n^{-2} with identity scaling is ζ(2).
    let f = CoefficientFamily::hyperharmonic(-1.0, 1).unwrap();
    let a = ScalingFamily::identity().with_origin(1).unwrap();
    let (partial, verdict) = rkhs_norm_sq(&f, &a, 1_000_000).unwrap();
    assert!(verdict.converges());
    assert_relative_eq!(partial, std::f64::consts::PI.powi(2) / 6.0, max_relative = 2e-6);
}

#[test]
fn kl_paths_reproduce_kernel_at_a_point() {
    let basis = parse_basis("ibb:s=2").unwrap();
    let mut s = KLSampler::new(basis, 400, 77).unwrap();
    let paths = s.sample_paths(&[0.5], 40_000).unwrap();
    let var = paths.iter().map(|p| p.values[0].powi(2)).sum::<f64>() / paths.len() as f64;
    // Brownian bridge variance at 1/2 is 1/4; standard error √2·0.25/√M.
    assert_relative_eq!(var, 0.25, epsilon = 4.0 * 2f64.sqrt() * 0.25 / 200.0);
}

#[test]
fn series_and_closed_form_agree_through_the_dsl() {
    let spec = ScaledKernelSpec::new(parse_basis("gauss:ell=0.8").unwrap(), parse_scaling("hyp:2").unwrap()).unwrap();
    let closed = ClosedFormKernel::matching(&spec).unwrap();
    for (t, u) in [(0.0, 0.0), (0.3, -1.2), (1.0, 1.0), (2.5, 2.0)] {
        assert_relative_eq!(
            spec.eval(t, u).unwrap().0,
            closed.eval(t, u).unwrap(),
            max_relative = 1e-11
        );
    }
}
