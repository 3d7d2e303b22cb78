//! Acceptance suite: one PASS/FAIL line per criterion. Informational lines
//! are prefixed `INFO` and never affect the exit status.

use std::time::Instant;

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rkhs_scale::dsl::{parse_basis, parse_scaling};
use rkhs_scale::kernel::translate_profile;
use rkhs_scale::membership::{
    monomial_reconstruct, power_series_membership, rkhs_norm_sq, sample_membership, stirling_ratio, BasisOrdering,
};
use rkhs_scale::mle::rate_experiment;
use rkhs_scale::scaling::{
    dini_refine, dominating_convergent, geometric_seq, power_law_seq, strictly_smaller_envelope, IndexPattern,
    SeqHandle,
};
use rkhs_scale::{
    ClosedFormKernel, CoefficientFamily, KLSampler, KernelSource, PrecisionPolicy, Probability, ScaledKernelSpec,
    ScalingFamily, TruncationPolicy, Verdict, WeightSequence,
};

type Outcome = Result<String, String>;

fn ensure(ok: bool, detail: String) -> Outcome {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn spec(basis: &str, scaling: &str, policy: TruncationPolicy) -> ScaledKernelSpec {
    ScaledKernelSpec::with_truncation(parse_basis(basis).unwrap(), parse_scaling(scaling).unwrap(), policy).unwrap()
}

/// Series against closed forms on 33×33 grids.
fn closed_form_oracles() -> Outcome {
    let start = Instant::now();
    let bridge = TruncationPolicy {
        abs_floor: 5e-10,
        n_max: 1_000_000,
        ..TruncationPolicy::default()
    };
    let tight = TruncationPolicy {
        rel_tol: 1e-16,
        abs_floor: 1e-10,
        ..TruncationPolicy::default()
    };
    let cases = [
        ("ibb:s=2", "id", bridge),
        ("ibb:s=4", "id", tight),
        ("gauss:ell=1,lo=-2,hi=2", "id", tight),
        ("gauss:ell=1,lo=-2,hi=2", "hyp:1", tight),
        ("gauss:ell=1,lo=-2,hi=2", "hyp:2", tight),
        ("gauss:ell=1,lo=-2,hi=2", "hyp:3", tight),
        ("gauss:ell=1,lo=-2,hi=2", "hyp:4", tight),
        ("gauss:ell=1,lo=-2,hi=2", "geo:0.5", tight),
        ("gauss:ell=1,lo=-2,hi=2", "geo:1.1", tight),
        ("gauss:ell=1,lo=-2,hi=2", "geo:2", tight),
        ("power:szego", "id", tight),
        ("power:exp", "id", tight),
        ("power:szego-counter", "id", tight),
    ];
    let mut worst = (0.0f64, String::new());
    for (basis, scaling, policy) in cases {
        let k = spec(basis, scaling, policy);
        let closed = ClosedFormKernel::matching(&k).ok_or_else(|| format!("no closed form for {basis} {scaling}"))?;
        let grid = k.basis().domain().grid(33);
        for &t in &grid {
            for &u in &grid {
                let series = k
                    .eval(t, u)
                    .map_err(|e| format!("{basis} {scaling} at ({t}, {u}): {e}"))?
                    .0;
                let err = (series - closed.eval(t, u).unwrap()).abs();
                if err > worst.0 {
                    worst = (err, format!("{basis} {scaling} at ({t}, {u})"));
                }
            }
        }
    }
    let secs = start.elapsed().as_secs_f64();
    ensure(
        worst.0 <= 1e-9 && secs < 30.0,
        format!(
            "{} kernels, max |series - closed| = {:.3e} ({}), {secs:.1} s",
            cases.len(),
            worst.0,
            worst.1
        ),
    )
}

fn odd_square_midpoint() -> Outcome {
    let k = spec("ibb:s=2", "id", TruncationPolicy::default());
    let (v, diag) = k.eval(0.5, 0.5).map_err(|e| e.to_string())?;
    ensure(
        (v - 0.25).abs() <= 1e-10,
        format!(
            "K(0.5, 0.5) = {v:.17} with {} terms, tail bound {:.2e}",
            diag.terms_used, diag.tail_bound
        ),
    )
}

fn dichotomy_table() -> Outcome {
    let classify = |basis: &str, scaling: &str| -> Probability {
        sample_membership(&spec(basis, scaling, TruncationPolicy::default()))
            .unwrap()
            .probability
    };
    let table: Vec<(String, Probability, Probability)> = vec![
        (
            "gauss hyp:0.5".into(),
            classify("gauss:ell=0.8", "hyp:0.5"),
            Probability::Zero,
        ),
        (
            "gauss hyp:1".into(),
            classify("gauss:ell=0.8", "hyp:1"),
            Probability::Zero,
        ),
        (
            "gauss hyp:1.01".into(),
            classify("gauss:ell=0.8", "hyp:1.01"),
            Probability::One,
        ),
        (
            "gauss hyp:2".into(),
            classify("gauss:ell=0.8", "hyp:2"),
            Probability::One,
        ),
        (
            "ibb4 logpow:1".into(),
            classify("ibb:s=4", "logpow:1"),
            Probability::Zero,
        ),
        (
            "ibb4 logpow:2".into(),
            classify("ibb:s=4", "logpow:2"),
            Probability::One,
        ),
        (
            "exp vs szego".into(),
            power_series_membership(&WeightSequence::Exponential, &WeightSequence::Szego).probability,
            Probability::One,
        ),
        (
            "exp vs 1+tt'e^{tt'}".into(),
            power_series_membership(&WeightSequence::Exponential, &WeightSequence::SzegoCounter).probability,
            Probability::Zero,
        ),
        (
            "itlog p=1 ρ=2".into(),
            classify("ibb:s=4", "itlog:1,3,2"),
            Probability::One,
        ),
        (
            "itlog p=1 ρ=1".into(),
            classify("ibb:s=4", "itlog:1,3,1"),
            Probability::Zero,
        ),
        (
            "itlog p=2 ρ=1.5".into(),
            classify("ibb:s=4", "itlog:2,20,1.5"),
            Probability::One,
        ),
        (
            "itlog p=2 ρ=1".into(),
            classify("ibb:s=4", "itlog:2,20,1"),
            Probability::Zero,
        ),
    ];
    let wrong: Vec<String> = table
        .iter()
        .filter(|(_, got, want)| got != want)
        .map(|(name, got, want)| format!("{name}: got {got}, want {want}"))
        .collect();
    ensure(
        wrong.is_empty(),
        format!("{} verdicts; mismatches: {:?}", table.len(), wrong),
    )
}

fn basis_reordering() -> Outcome {
    let a = ScalingFamily::hyperharmonic(1.0).unwrap().with_origin(1).unwrap();
    let f = CoefficientFamily::indicator(IndexPattern::PowersOf { base: 2 }, 1).unwrap();
    let (natural, v1) = rkhs_norm_sq(&f, &a, 1 << 40).map_err(|e| e.to_string())?;
    let g = f
        .reordered(BasisOrdering::PowersOfTwoInterleaved)
        .map_err(|e| e.to_string())?;
    let (interleaved, v2) = rkhs_norm_sq(&g, &a, 100_000).map_err(|e| e.to_string())?;
    ensure(
        v1.value == Verdict::Converges
            && (natural - 2.0).abs() <= 1e-9
            && v2.value == Verdict::Diverges
            && interleaved > 5.0,
        format!(
            "natural: {:?}, partial {natural:.12}; interleaved: {:?}, partial at N = 1e5 {interleaved:.4}",
            v1.value, v2.value
        ),
    )
}

fn monomial_expansion() -> Outcome {
    let mut worst = 0.0f64;
    for ell in [0.5, 1.0] {
        let basis = parse_basis(&format!("gauss:ell={ell}")).unwrap();
        for p in 0..=3u32 {
            for t in [0.25, 0.5, 1.0] {
                let r = monomial_reconstruct(p, &basis, t, 1e-14).map_err(|e| e.to_string())?;
                worst = worst.max((r.value - t.powi(p as i32)).abs());
            }
        }
    }
    let mut stirling = 0.0f64;
    for p in 0..=2 {
        stirling = stirling.max((stirling_ratio(p, 1_000_000).map_err(|e| e.to_string())? - 1.0).abs());
    }
    ensure(
        worst <= 1e-8 && stirling <= 1e-4,
        format!("max reconstruction error {worst:.3e}; max |Stirling ratio - 1| at n = 1e6 {stirling:.3e}"),
    )
}

fn mle_rates(info: &mut Vec<String>) -> Outcome {
    let start = Instant::now();
    let mut parts = Vec::new();
    let mut ok = true;
    for p in 0..=2u32 {
        let r = rate_experiment(p, 0.8, &[20, 40, 80, 160], PrecisionPolicy::default()).map_err(|e| e.to_string())?;
        let slope = r.slope.ok_or("no slope")?;
        let target = f64::from(p) - 0.5;
        ok &= (slope - target).abs() <= 0.1;
        let bits: Vec<u32> = r.per_n.iter().map(|row| row.bits).collect();
        parts.push(format!("p={p} slope {slope:.5} (target {target}), bits {bits:?}"));
        let ratio = r.constant / r.conjectured_constant;
        info.push(format!(
            "[6] p={p}: constant {:.4} vs conjectured {:.4}, ratio {ratio:.3}, within 15%: {}",
            r.constant,
            r.conjectured_constant,
            (ratio - 1.0).abs() <= 0.15
        ));
    }
    let secs = start.elapsed().as_secs_f64();
    ensure(ok && secs < 600.0, format!("{}; {secs:.1} s", parts.join("; ")))
}

fn kl_statistics() -> Outcome {
    let ell = 0.8;
    let basis = parse_basis(&format!("gauss:ell={ell}")).unwrap();
    let grid = [-1.0, 0.0, 0.5, 1.5];
    let pairs = [(1, 1), (1, 2), (0, 3), (2, 3), (3, 3)];
    let m = 20_000u64;
    let mut sampler = KLSampler::new(basis, 200, 2024).map_err(|e| e.to_string())?;
    let paths = sampler.sample_paths(&grid, m).map_err(|e| e.to_string())?;
    let closed = ClosedFormKernel::Gauss { ell };
    let k = |i: usize, j: usize| closed.eval(grid[i], grid[j]).unwrap();
    let mut worst = 0.0f64;
    for (i, j) in pairs {
        let emp = paths.iter().map(|p| p.values[i] * p.values[j]).sum::<f64>() / m as f64;
        let band = 4.0 * ((k(i, i) * k(j, j) + k(i, j).powi(2)) / m as f64).sqrt();
        worst = worst.max((emp - k(i, j)).abs() / band);
    }
    ensure(
        worst <= 1.0,
        format!("M = {m}, truncation 200; max |emp - K| / band = {worst:.3}"),
    )
}

fn geometric_or_power(i: usize) -> SeqHandle {
    match i {
        0 => geometric_seq(1, 0.5, 0.5).unwrap(),
        1 => geometric_seq(1, 0.9, 0.9).unwrap(),
        2 => power_law_seq(1, 2.0).unwrap(),
        _ => power_law_seq(1, 1.5).unwrap(),
    }
}

/// Log-spaced indices in `[lo, hi]`.
fn log_window(lo: u64, hi: u64) -> Vec<u64> {
    let mut out = Vec::new();
    let mut n = lo.max(1) as f64;
    while (n as u64) <= hi {
        out.push(n as u64);
        n *= 1.25;
        n = n.ceil();
    }
    out.push(hi);
    out
}

fn partial_sum(s: &SeqHandle, upto: u64) -> f64 {
    let mut acc = rkhs_scale::numeric::NeumaierSum::new();
    for n in s.origin()..=upto {
        acc.add(s.term(n));
    }
    acc.value()
}

fn constructive_lemmas() -> Outcome {
    const WINDOW: u64 = 1_000_000;
    let mut notes = Vec::new();
    // Dini refinement: bounded partial sums, ratio diverges past knots where it exceeds 10^k.
    for i in 0..4 {
        let a = geometric_or_power(i);
        let d = dini_refine(a.clone(), 0.5).map_err(|e| e.to_string())?;
        let bound = d.certified_sum_bound().ok_or("refinement carries no tail")?;
        let upto = if i < 2 { 500 } else { WINDOW };
        let total = partial_sum(&d, upto);
        if total > bound {
            return Err(format!("{}: partial sum {total} exceeds bound {bound}", d.label()));
        }
        let ratio = |n: u64| d.term(n) / a.term(n);
        let mut knots = Vec::new();
        let grid = log_window(1, upto);
        for level in [2.0, 10.0] {
            let Some(knot) = grid.iter().copied().find(|&n| ratio(n) >= level) else {
                return Err(format!("{}: ratio never reaches {level} below {upto}", d.label()));
            };
            if grid.iter().filter(|&&n| n >= knot).any(|&n| ratio(n) < level) {
                return Err(format!("{}: ratio drops below {level} past knot {knot}", d.label()));
            }
            knots.push(knot);
        }
        notes.push(format!(
            "dini[{}] knots {knots:?}, ratio at {upto} {:.3e}",
            a.label(),
            ratio(upto)
        ));
    }
    // Dominating series over mixed inputs.
    let inputs: Vec<SeqHandle> = (0..4).map(geometric_or_power).collect();
    let dom = dominating_convergent(&inputs).map_err(|e| e.to_string())?;
    let last = *dom.knots.last().unwrap();
    for (i, a) in inputs.iter().enumerate() {
        let r = |n: u64| dom.sequence.term(n) / a.term(n);
        let window = log_window(last, WINDOW);
        let tail_ok = window.iter().all(|&n| {
            let t = a.term(n);
            t == 0.0 || r(n) >= 1.0
        });
        if !tail_ok {
            return Err(format!("dominating sequence falls below input {i} past knot {last}"));
        }
    }
    let ratio_slowest = dom.sequence.term(WINDOW) / inputs[3].term(WINDOW);
    let bound = dom
        .sequence
        .certified_sum_bound()
        .ok_or("dominating sequence carries no tail")?;
    let total = partial_sum(&dom.sequence, WINDOW);
    if total > bound || ratio_slowest < 10.0 {
        return Err(format!(
            "dominating: partial {total} bound {bound} ratio at 1e6 {ratio_slowest}"
        ));
    }
    notes.push(format!(
        "dominating knots {:?}, ratio to n^-1.5 at 1e6 {ratio_slowest:.1}, partial {total:.4} <= {bound:.4}",
        dom.knots
    ));
    // Envelope below hyp(1 + 1/k), k = 1..3.
    let scalings: Vec<ScalingFamily> = (1..=3)
        .map(|k| ScalingFamily::hyperharmonic(1.0 + 1.0 / k as f64).unwrap())
        .collect();
    let env = strictly_smaller_envelope(&scalings).map_err(|e| e.to_string())?;
    let recip_bound = env.reciprocals().ok().and_then(|r| r.certified_sum_bound());
    let Some(recip_bound) = recip_bound.filter(|b| b.is_finite()) else {
        return Err("envelope reciprocal sum is not certified".into());
    };
    let recips: Vec<SeqHandle> = scalings.iter().map(|s| s.reciprocals().unwrap()).collect();
    let env_knot = *dominating_convergent(&recips)
        .map_err(|e| e.to_string())?
        .knots
        .last()
        .unwrap();
    let window = log_window(env_knot, WINDOW);
    for s in &scalings {
        let r: Vec<f64> = window
            .iter()
            .map(|&n| env.term(n).unwrap() / s.term(n).unwrap())
            .collect();
        let (first, last) = (r[0], r[r.len() - 1]);
        if r.windows(2).any(|w| w[1] > w[0]) || last > 0.6 * first {
            return Err(format!(
                "envelope ratio to {s} does not decrease past knot {env_knot}: {first:.3e} .. {last:.3e}"
            ));
        }
        notes.push(format!(
            "envelope/{s} decreasing from {first:.3e} at n = {env_knot} to {last:.3e} at 1e6"
        ));
    }
    notes.push(format!("envelope Σ 1/α_n <= {recip_bound:.4}"));
    Ok(notes.join("; "))
}

fn psd_property() -> Outcome {
    let kernels: Vec<(ClosedFormKernel, (f64, f64))> = vec![
        (ClosedFormKernel::BrownianBridge, (0.0, 1.0)),
        (ClosedFormKernel::IbbEven { order: 4 }, (0.0, 1.0)),
        (ClosedFormKernel::IbbEven { order: 6 }, (0.0, 1.0)),
        (ClosedFormKernel::IbbEven { order: 8 }, (0.0, 1.0)),
        (ClosedFormKernel::Gauss { ell: 0.8 }, (-4.0, 4.0)),
        (ClosedFormKernel::GaussHyp { rho: 1, ell: 0.8 }, (-3.0, 3.0)),
        (ClosedFormKernel::GaussHyp { rho: 2, ell: 0.8 }, (-3.0, 3.0)),
        (ClosedFormKernel::GaussHyp { rho: 3, ell: 0.8 }, (-3.0, 3.0)),
        (ClosedFormKernel::GaussHyp { rho: 4, ell: 0.8 }, (-3.0, 3.0)),
        (ClosedFormKernel::GaussGeo { tau: 0.5, ell: 0.8 }, (-3.0, 3.0)),
        (ClosedFormKernel::GaussGeo { tau: 1.1, ell: 0.8 }, (-3.0, 3.0)),
        (ClosedFormKernel::Mehler { r: 0.5 }, (-3.0, 3.0)),
        (ClosedFormKernel::Szego, (-0.9, 0.9)),
        (ClosedFormKernel::Exponential, (-2.0, 2.0)),
        (ClosedFormKernel::SzegoCounter, (-2.0, 2.0)),
    ];
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let mut worst = (f64::INFINITY, String::new());
    for (k, (lo, hi)) in &kernels {
        for _ in 0..50 {
            let size = rng.random_range(1..=8usize);
            let pts: Vec<f64> = (0..size).map(|_| rng.random_range(*lo..=*hi)).collect();
            let m = DMatrix::from_fn(size, size, |i, j| k.eval(pts[i], pts[j]).unwrap());
            let min = m.symmetric_eigenvalues().min();
            if min < worst.0 {
                worst = (min, k.name());
            }
        }
    }
    ensure(
        worst.0 >= -1e-9,
        format!(
            "{} kernels × 50 matrices; smallest eigenvalue {:.3e} ({})",
            kernels.len(),
            worst.0,
            worst.1
        ),
    )
}

fn figure_data(info: &mut Vec<String>) -> Outcome {
    let fig1_grid: Vec<f64> = rkhs_scale::Interval::new(0.0, 1.0).unwrap().grid(201);
    let labels = ["id", "hyp:1", "logpow:1", "logpow:2"];
    let fixed = TruncationPolicy::fixed(5000);
    let mut problems = Vec::new();
    let mut diag = Vec::new();
    for l in labels {
        let k = spec("ibb:s=4", l, fixed);
        let prof = translate_profile(&KernelSource::Series(k.clone()), 0.3, &fig1_grid, true, true)
            .map_err(|e| e.to_string())?;
        let (first, last) = (prof.rows[0].k, prof.rows[200].k);
        if first != 0.0 || last.abs() > 1e-15 {
            problems.push(format!("{l}: endpoints {first:e}, {last:e}"));
        }
        let min = prof.min_d2().unwrap();
        if (min + 1.0).abs() > 1e-12 {
            problems.push(format!("{l}: d2 min {min}"));
        }
        diag.push(k.eval(0.3, 0.3).map_err(|e| e.to_string())?.0);
    }
    let fig2_grid = rkhs_scale::Interval::new(-1.0, 3.0).unwrap().grid(401);
    let k = spec("gauss:ell=0.8,lo=-1,hi=3", "id", TruncationPolicy::default());
    let source = KernelSource::Closed(ClosedFormKernel::matching(&k).unwrap());
    let prof = translate_profile(&source, 1.0, &fig2_grid, false, false).map_err(|e| e.to_string())?;
    let at_one = prof.rows.iter().find(|r| r.t == 1.0).ok_or("fig2 grid misses t = 1")?.k;
    if (at_one - 1.0).abs() > 1e-12 {
        problems.push(format!("fig2 K(1, 1) = {at_one}"));
    }
    let ordered = diag.windows(2).all(|w| w[0] < w[1]);
    if !ordered {
        problems.push(format!(
            "diagonal at t = t' = 0.3 along id, hyp:1, logpow:1, logpow:2 is {diag:.6?}, not increasing"
        ));
    }
    let embed = 1.0 / std::f64::consts::LN_2;
    let rescaled = [diag[0], diag[1], embed * diag[2], embed * diag[3]];
    info.push(format!(
        "[10] with the log-power kernels multiplied by the embedding constant 1/log 2: {rescaled:.6?}, increasing: {}",
        rescaled.windows(2).all(|w| w[0] < w[1])
    ));
    ensure(
        problems.is_empty(),
        if problems.is_empty() {
            format!("endpoints zero, d2 minima -1, fig2 K(1,1) = {at_one}, diagonal {diag:.6?}")
        } else {
            problems.join("; ")
        },
    )
}

fn main() {
    let mut info = Vec::new();
    let results: Vec<(&str, Outcome)> = vec![
        ("closed-form oracle suite", closed_form_oracles()),
        ("odd-square midpoint", odd_square_midpoint()),
        ("dichotomy table", dichotomy_table()),
        ("basis reordering", basis_reordering()),
        ("monomial expansion", monomial_expansion()),
        ("MLE rates", mle_rates(&mut info)),
        ("KL sampler statistics", kl_statistics()),
        ("constructive lemmas", constructive_lemmas()),
        ("PSD property", psd_property()),
        ("figure data", figure_data(&mut info)),
    ];
    let mut failed = 0;
    for (i, (name, outcome)) in results.iter().enumerate() {
        match outcome {
            Ok(detail) => println!("PASS [{}] {name}: {detail}", i + 1),
            Err(detail) => {
                failed += 1;
                println!("FAIL [{}] {name}: {detail}", i + 1);
            }
        }
    }
    for line in &info {
        println!("INFO {line}");
    }
    println!("acceptance: {} passed, {failed} failed", results.len() - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
