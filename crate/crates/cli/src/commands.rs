use std::fmt::{self, Write as _};
use std::io::Write as _;
use std::path::Path;

use rkhs_scale::dsl::{parse_basis, parse_coefficients, parse_scaling, BasisText};
use rkhs_scale::gp::paths_to_csv;
use rkhs_scale::kernel::{fmt_f64, translate_profile, Profile};
use rkhs_scale::membership::{
    rkhs_norm_sq, sample_membership, support_set_classify, BasisOrdering, NotMemberReason, SupportClass,
};
use rkhs_scale::mle::rate_experiment;
use rkhs_scale::scaling::{dini_refine, dominating_convergent, strictly_smaller_envelope, SeqHandle};
use rkhs_scale::{
    ClosedFormKernel, ConvergenceVerdict, Error, KLSampler, KernelSource, PrecisionPolicy, ScaledKernelSpec,
    ScalingFamily, TruncationPolicy, Verdict,
};

use crate::config::header;
use crate::{
    ClassifyArgs, Command, DiniArgs, DiniMode, MleArgs, OrderingArg, Preset, SampleArgs, SupportArgs, TranslatesArgs,
    EXIT_ASSUMPTION, EXIT_IO, EXIT_NUMERIC, EXIT_USAGE,
};

#[derive(Debug)]
pub enum CliError {
    Lib(Error),
    Io(String),
    Usage(String),
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        CliError::Lib(e)
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Lib(e) => write!(f, "{e}"),
            CliError::Io(m) | CliError::Usage(m) => f.write_str(m),
        }
    }
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Io(_) => EXIT_IO,
            CliError::Usage(_) => EXIT_USAGE,
            CliError::Lib(e) => match e {
                Error::MetricAssumptionUnmet { .. } => EXIT_ASSUMPTION,
                Error::PrecisionExhausted { .. }
                | Error::TruncationFailure { .. }
                | Error::NotSummable(_)
                | Error::Unsupported(_) => EXIT_NUMERIC,
                _ => EXIT_USAGE,
            },
        }
    }
}

type CliResult<T = ()> = Result<T, CliError>;

pub fn run(cmd: &Command) -> CliResult {
    match cmd {
        Command::Classify(a) => classify(a),
        Command::Translates(a) => translates(a),
        Command::Sample(a) => sample(a),
        Command::Mle(a) => mle(a),
        Command::Dini(a) => dini(a),
        Command::Support(a) => support(a),
    }
}

/// Write to `out`, or to stdout when no path is given.
fn emit(out: Option<&Path>, text: &str) -> CliResult {
    match out {
        Some(path) => std::fs::write(path, text).map_err(|e| CliError::Io(format!("{}: {e}", path.display()))),
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout
                .write_all(text.as_bytes())
                .and_then(|_| stdout.flush())
                .map_err(|e| CliError::Io(format!("stdout: {e}")))
        }
    }
}

/// Ordered key/value report rendered as `key=value` lines or as one JSON object.
struct Report(Vec<(&'static str, String)>);

impl Report {
    fn new() -> Self {
        Report(Vec::new())
    }

    fn push(&mut self, key: &'static str, value: impl Into<String>) {
        self.0.push((key, value.into()));
    }

    fn render(&self, machine: bool) -> String {
        if machine {
            let map: serde_json::Map<String, serde_json::Value> = self
                .0
                .iter()
                .map(|(k, v)| (k.to_string(), serde_json::Value::String(v.clone())))
                .collect();
            format!("{}\n", serde_json::Value::Object(map))
        } else {
            self.0.iter().map(|(k, v)| format!("{k}={v}\n")).collect()
        }
    }
}

fn verdict_name(v: Verdict) -> &'static str {
    match v {
        Verdict::Converges => "converges",
        Verdict::Diverges => "diverges",
        Verdict::Inconclusive => "inconclusive",
    }
}

fn push_evidence(r: &mut Report, v: &ConvergenceVerdict) {
    let na = || "NA".to_string();
    let ev = v.evidence;
    r.push("partial_sum", ev.map_or_else(na, |e| fmt_f64(e.partial_sum)));
    r.push("tail_bound", ev.and_then(|e| e.tail_bound).map_or_else(na, fmt_f64));
    r.push("evidence_n", ev.map_or_else(na, |e| e.n.to_string()));
}

fn classify(a: &ClassifyArgs) -> CliResult {
    let basis = parse_basis(&a.basis)?;
    let scaling = parse_scaling(&a.scaling)?;
    let spec = ScaledKernelSpec::new(basis, scaling)?;
    let verdict = sample_membership(&spec)?;
    let mut r = Report::new();
    r.push("basis", BasisText(spec.basis()).to_string());
    r.push("scaling", spec.scaling().to_string());
    r.push("validity", spec.validity_rule());
    r.push("reciprocal_sum", verdict_name(verdict.reason.value));
    r.push("probability", verdict.probability.to_string());
    push_evidence(&mut r, &verdict.reason);
    let reason = match verdict.reason.value {
        Verdict::Converges => "sum of 1/alpha_n is finite, so sample paths lie in the scaled space almost surely",
        Verdict::Diverges => "sum of 1/alpha_n is infinite, so sample paths lie outside the scaled space almost surely",
        Verdict::Inconclusive => "summability of 1/alpha_n could not be decided from the partial sums",
    };
    r.push("reason", reason);
    emit(None, &r.render(a.machine))
}

fn parse_grid(text: &str) -> CliResult<Vec<f64>> {
    let bad = || CliError::Usage(format!("grid `{text}`: expected lo:hi:count"));
    let parts: Vec<&str> = text.split(':').collect();
    let [lo, hi, count] = parts[..] else { return Err(bad()) };
    let lo: f64 = lo.trim().parse().map_err(|_| bad())?;
    let hi: f64 = hi.trim().parse().map_err(|_| bad())?;
    let count: usize = count.trim().parse().map_err(|_| bad())?;
    if !lo.is_finite() || !hi.is_finite() || count == 0 || (count > 1 && lo >= hi) {
        return Err(bad());
    }
    if count == 1 {
        return Ok(vec![lo]);
    }
    Ok(rkhs_scale::Interval::new(lo, hi)?.grid(count))
}

fn grid_text(lo: f64, hi: f64, count: usize) -> String {
    format!("{lo}:{hi}:{count}")
}

/// Default grid size for translate tables.
const TRANSLATE_POINTS: usize = 201;
/// Default grid size for sample paths.
const SAMPLE_POINTS: usize = 101;

fn resolve_translates(a: &TranslatesArgs) -> CliResult<TranslatesArgs> {
    let mut r = a.clone();
    match a.preset {
        Some(Preset::Fig1) => {
            r.basis = Some("ibb:s=4".into());
            r.scalings = Some("id;hyp:1;logpow:1;logpow:2".into());
            r.t_prime = Some(a.t_prime.unwrap_or(0.3));
            r.grid = Some(a.grid.clone().unwrap_or_else(|| grid_text(0.0, 1.0, 201)));
            r.d2 = true;
            r.normalize = true;
            r.fixed_n = Some(a.fixed_n.unwrap_or(5000));
        }
        Some(Preset::Fig2) => {
            r.basis = Some("gauss:ell=0.8,lo=-1,hi=3".into());
            r.scalings = Some("id;hyp:1;hyp:1.1;hyp:2;geo:1.1".into());
            r.t_prime = Some(a.t_prime.unwrap_or(1.0));
            r.grid = Some(a.grid.clone().unwrap_or_else(|| grid_text(-1.0, 3.0, 401)));
        }
        None => {
            let basis = parse_basis(
                a.basis
                    .as_deref()
                    .ok_or_else(|| CliError::Usage("translates needs --preset or --basis with --scalings".into()))?,
            )?;
            let d = basis.domain();
            r.basis = Some(BasisText(&basis).to_string());
            r.t_prime = Some(a.t_prime.unwrap_or(0.5 * (d.lo + d.hi)));
            r.grid = Some(
                a.grid
                    .clone()
                    .unwrap_or_else(|| grid_text(d.lo, d.hi, TRANSLATE_POINTS)),
            );
        }
    }
    r.preset = None;
    Ok(r)
}

fn translates(a: &TranslatesArgs) -> CliResult {
    let r = resolve_translates(a)?;
    let basis = parse_basis(r.basis.as_deref().unwrap_or_default())?;
    let labels: Vec<String> = r
        .scalings
        .as_deref()
        .unwrap_or_default()
        .split(';')
        .map(|s| s.trim().to_string())
        .filter(|s| !s.is_empty())
        .collect();
    if labels.is_empty() {
        return Err(CliError::Usage("--scalings lists no scaling".into()));
    }
    let grid = parse_grid(r.grid.as_deref().unwrap_or_default())?;
    let t_prime = r.t_prime.unwrap_or_default();
    let policy = r
        .fixed_n
        .map_or_else(TruncationPolicy::default, TruncationPolicy::fixed);
    let profiles = labels
        .iter()
        .map(|label| {
            let spec = ScaledKernelSpec::with_truncation(basis.clone(), parse_scaling(label)?, policy)?;
            let source = match ClosedFormKernel::matching(&spec) {
                Some(closed) if !r.d2 && r.fixed_n.is_none() => KernelSource::Closed(closed),
                _ => KernelSource::Series(spec),
            };
            Ok(translate_profile(&source, t_prime, &grid, r.d2, r.normalize)?)
        })
        .collect::<CliResult<Vec<Profile>>>()?;
    let mut out = header("translates", &r);
    let names: Vec<String> = labels.iter().map(|l| l.replace(',', ";")).collect();
    out.push('t');
    for n in &names {
        let _ = write!(out, ",K[{n}]");
    }
    if r.d2 {
        for n in &names {
            let _ = write!(out, ",K_d2[{n}]");
        }
    }
    out.push('\n');
    for (i, t) in grid.iter().enumerate() {
        out.push_str(&fmt_f64(*t));
        for p in &profiles {
            let _ = write!(out, ",{}", fmt_f64(p.rows[i].k));
        }
        if r.d2 {
            for p in &profiles {
                let _ = write!(out, ",{}", fmt_f64(p.rows[i].k_d2.unwrap_or(f64::NAN)));
            }
        }
        out.push('\n');
    }
    emit(r.out.as_deref(), &out)
}

fn sample(a: &SampleArgs) -> CliResult {
    let basis = parse_basis(&a.basis)?;
    let mut r = a.clone();
    let d = basis.domain();
    r.basis = BasisText(&basis).to_string();
    r.grid = Some(a.grid.clone().unwrap_or_else(|| grid_text(d.lo, d.hi, SAMPLE_POINTS)));
    let grid = parse_grid(r.grid.as_deref().unwrap_or_default())?;
    let mut sampler = KLSampler::new(basis, a.truncation, a.seed)?.with_stream(a.stream);
    sampler.basis_matrix(&grid)?;
    let paths = sampler.sample_paths(&grid, a.paths)?;
    let mut out = header("sample", &r);
    out.push_str(&paths_to_csv(&grid, &paths));
    emit(r.out.as_deref(), &out)
}

fn mle(a: &MleArgs) -> CliResult {
    let prec = PrecisionPolicy::new(a.initial_bits, a.max_bits)?;
    let result = rate_experiment(a.p, a.ell, &a.sizes, prec)?;
    let summary = result.summary();
    let mut table = header("mle", a);
    table.push_str(&result.to_csv());
    match &a.out {
        Some(path) => {
            for line in summary.lines() {
                let _ = writeln!(table, "# {line}");
            }
            emit(Some(path), &table)?;
            emit(None, &summary)
        }
        None => emit(None, &(table + &summary)),
    }
}

fn parse_scaling_list(text: &str) -> CliResult<Vec<ScalingFamily>> {
    let list = text
        .split(';')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(parse_scaling)
        .collect::<Result<Vec<_>, _>>()?;
    if list.is_empty() {
        return Err(CliError::Usage("--scalings lists no scaling".into()));
    }
    Ok(list)
}

fn knot_rows(origin: u64, max_log2: u32) -> Vec<u64> {
    (0..=max_log2.min(62))
        .map(|k| 1u64 << k)
        .filter(|&n| n >= origin)
        .collect()
}

fn dini(a: &DiniArgs) -> CliResult {
    let scalings = parse_scaling_list(&a.scalings)?;
    let recips = scalings
        .iter()
        .map(|s| s.reciprocals())
        .collect::<Result<Vec<SeqHandle>, _>>()?;
    let origin = recips[0].origin();
    let mut out = header("dini", a);
    match a.mode {
        DiniMode::Refine => {
            let input = &recips[0];
            let refined = dini_refine(input.clone(), a.c)?;
            let _ = writeln!(out, "# refined = {}", refined.label());
            out.push_str("n,a_n,refined_n,ratio,refined_tail_upper\n");
            for n in knot_rows(origin, a.max_log2) {
                let (x, y) = (input.term(n), refined.term(n));
                let tail = refined.tail(n).map_or_else(|| "NA".into(), |b| fmt_f64(b.upper()));
                let _ = writeln!(out, "{n},{},{},{},{tail}", fmt_f64(x), fmt_f64(y), fmt_f64(y / x));
            }
        }
        DiniMode::Dominate => {
            let dom = dominating_convergent(&recips)?;
            let knots: Vec<String> = dom.knots.iter().map(u64::to_string).collect();
            let _ = writeln!(out, "# knots = [{}]", knots.join(", "));
            if let Some(bound) = dom.sequence.certified_sum_bound() {
                let _ = writeln!(out, "# sum_upper = {}", fmt_f64(bound));
            }
            out.push_str("n,dominating_n");
            for s in &scalings {
                let _ = write!(out, ",ratio[{}]", s.to_string().replace(',', ";"));
            }
            out.push('\n');
            for n in knot_rows(origin, a.max_log2) {
                let d = dom.sequence.term(n);
                let _ = write!(out, "{n},{}", fmt_f64(d));
                for r in &recips {
                    let _ = write!(out, ",{}", fmt_f64(d / r.term(n)));
                }
                out.push('\n');
            }
        }
        DiniMode::Envelope => {
            let env = strictly_smaller_envelope(&scalings)?;
            out.push_str("n,envelope_alpha_n");
            for s in &scalings {
                let _ = write!(out, ",ratio[{}]", s.to_string().replace(',', ";"));
            }
            out.push('\n');
            for n in knot_rows(origin, a.max_log2) {
                let e = env.term(n)?;
                let _ = write!(out, "{n},{}", fmt_f64(e));
                for s in &scalings {
                    let _ = write!(out, ",{}", fmt_f64(e / s.term(n)?));
                }
                out.push('\n');
            }
        }
    }
    emit(a.out.as_deref(), &out)
}

fn support(a: &SupportArgs) -> CliResult {
    let mut f = parse_coefficients(&a.coeffs, a.origin)?;
    if a.ordering == OrderingArg::Interleaved {
        f = f.reordered(BasisOrdering::PowersOfTwoInterleaved)?;
    }
    let mut r = Report::new();
    r.push("coeffs", a.coeffs.clone());
    r.push("origin", f.index_origin().to_string());
    r.push(
        "ordering",
        match a.ordering {
            OrderingArg::Natural => "natural",
            OrderingArg::Interleaved => "interleaved",
        },
    );
    let (class, why) = match support_set_classify(&f) {
        SupportClass::Member => ("member", "liminf f_n^2 > 0 and sup f_n^2 < inf".to_string()),
        SupportClass::NotMember(NotMemberReason::LiminfZero) => ("not_member", "liminf f_n^2 = 0".to_string()),
        SupportClass::NotMember(NotMemberReason::SupInfinite) => ("not_member", "sup f_n^2 = inf".to_string()),
        SupportClass::Undetermined(windows) => {
            let w: Vec<String> = windows
                .iter()
                .map(|w| format!("[{},{}):{}..{}", w.start, w.end, fmt_f64(w.min_sq), fmt_f64(w.max_sq)))
                .collect();
            ("undetermined", format!("window min/max of f_n^2: {}", w.join(" ")))
        }
    };
    r.push("support_set", class);
    r.push("reason", why);
    if let Some(text) = &a.scaling {
        let scaling = parse_scaling(text)?.with_origin(f.index_origin())?;
        let (norm, verdict) = rkhs_norm_sq(&f, &scaling, a.norm_terms)?;
        r.push("scaling", scaling.to_string());
        r.push("norm_sq_partial", fmt_f64(norm));
        r.push("norm_sq", verdict_name(verdict.value));
        push_evidence(&mut r, &verdict);
    }
    emit(None, &r.render(a.machine))
}
