//! Text forms of basis and scaling families, shared by the command line and
//! config files.
//!
//! Scalings: `id`, `hyp:ρ`, `geo:τ`, `itlog:p,q,ρ`, `logpow:c`.
//!
//! Bases: `gauss:ell=ℓ[,lo=a,hi=b]`, `ibb:s=k`,
//! `power:szego|exp|szego-counter[,lo=a,hi=b]`.
//!
//! Coefficients: `const:c`, `hyp:ρ`, `powers:b`, `arith:first,step`,
//! `monomial:p,ℓ`.

use std::fmt;

use crate::basis::{BasisFamily, BasisKind, Interval, WeightSequence};
use crate::error::{Error, Result};
use crate::membership::CoefficientFamily;
use crate::scaling::{IndexPattern, ScalingFamily};

pub const GAUSSIAN_DOMAIN: (f64, f64) = (-4.0, 4.0);
pub const SZEGO_DOMAIN: (f64, f64) = (-0.9, 0.9);
pub const POWER_DOMAIN: (f64, f64) = (-2.0, 2.0);

fn parse_err(input: &str, why: impl fmt::Display) -> Error {
    Error::Parse(format!("`{input}`: {why}"))
}

fn number<T: std::str::FromStr>(input: &str, field: &str, raw: &str) -> Result<T> {
    raw.trim()
        .parse()
        .map_err(|_| parse_err(input, format!("{field} is not a number: `{raw}`")))
}

fn split_head(input: &str) -> (&str, &str) {
    match input.split_once(':') {
        Some((h, rest)) => (h.trim(), rest.trim()),
        None => (input.trim(), ""),
    }
}

pub fn parse_scaling(input: &str) -> Result<ScalingFamily> {
    let (head, rest) = split_head(input);
    let one = |field: &str| -> Result<f64> {
        if rest.is_empty() {
            return Err(parse_err(input, format!("missing {field}")));
        }
        number(input, field, rest)
    };
    match head {
        "id" if rest.is_empty() => Ok(ScalingFamily::identity()),
        "hyp" => ScalingFamily::hyperharmonic(one("ρ")?),
        "geo" => ScalingFamily::geometric(one("τ")?),
        "logpow" => ScalingFamily::log_power(one("c")?),
        "itlog" => {
            let parts: Vec<&str> = rest.split(',').collect();
            if parts.len() != 3 {
                return Err(parse_err(input, "expected itlog:p,q,ρ"));
            }
            ScalingFamily::iterated_log(
                number(input, "p", parts[0])?,
                number(input, "q", parts[1])?,
                number(input, "ρ", parts[2])?,
            )
        }
        _ => Err(parse_err(
            input,
            "unknown scaling; expected id, hyp:ρ, geo:τ, itlog:p,q,ρ or logpow:c",
        )),
    }
}

/// `key=value` pairs after the head; bare words are returned with an empty value.
fn fields(input: &str, rest: &str) -> Result<Vec<(String, String)>> {
    if rest.is_empty() {
        return Ok(vec![]);
    }
    rest.split(',')
        .map(|part| {
            let part = part.trim();
            if part.is_empty() {
                return Err(parse_err(input, "empty field"));
            }
            Ok(match part.split_once('=') {
                Some((k, v)) => (k.trim().to_string(), v.trim().to_string()),
                None => (part.to_string(), String::new()),
            })
        })
        .collect()
}

fn interval(input: &str, fs: &[(String, String)], default: (f64, f64)) -> Result<Interval> {
    let mut lo = default.0;
    let mut hi = default.1;
    for (k, v) in fs {
        match k.as_str() {
            "lo" => lo = number(input, "lo", v)?,
            "hi" => hi = number(input, "hi", v)?,
            _ => {}
        }
    }
    Interval::new(lo, hi)
}

fn reject_unknown(input: &str, fs: &[(String, String)], allowed: &[&str]) -> Result<()> {
    match fs.iter().find(|(k, _)| !allowed.contains(&k.as_str())) {
        Some((k, _)) => Err(parse_err(input, format!("unknown field `{k}`"))),
        None => Ok(()),
    }
}

pub fn parse_basis(input: &str) -> Result<BasisFamily> {
    let (head, rest) = split_head(input);
    let fs = fields(input, rest)?;
    let get = |key: &str| fs.iter().find(|(k, _)| k == key).map(|(_, v)| v.as_str());
    match head {
        "gauss" => {
            reject_unknown(input, &fs, &["ell", "lo", "hi"])?;
            let ell = get("ell").ok_or_else(|| parse_err(input, "missing ell"))?;
            BasisFamily::gaussian(number(input, "ell", ell)?, interval(input, &fs, GAUSSIAN_DOMAIN)?)
        }
        "ibb" => {
            reject_unknown(input, &fs, &["s"])?;
            let s = get("s").ok_or_else(|| parse_err(input, "missing s"))?;
            BasisFamily::sine_ibb(number(input, "s", s)?)
        }
        "power" => {
            let (name, _) = fs.first().ok_or_else(|| parse_err(input, "missing weight name"))?;
            let (weights, default) = match name.as_str() {
                "szego" => (WeightSequence::Szego, SZEGO_DOMAIN),
                "exp" => (WeightSequence::Exponential, POWER_DOMAIN),
                "szego-counter" => (WeightSequence::SzegoCounter, POWER_DOMAIN),
                other => return Err(parse_err(input, format!("unknown weights `{other}`"))),
            };
            reject_unknown(input, &fs[1..], &["lo", "hi"])?;
            BasisFamily::power_series(weights, interval(input, &fs[1..], default)?)
        }
        _ => Err(parse_err(
            input,
            "unknown basis; expected gauss:ell=.., ibb:s=.. or power:<weights>",
        )),
    }
}

/// Coefficient family indexed from `origin`; monomials are always indexed from 0.
pub fn parse_coefficients(input: &str, origin: u64) -> Result<CoefficientFamily> {
    let (head, rest) = split_head(input);
    let parts: Vec<&str> = if rest.is_empty() {
        vec![]
    } else {
        rest.split(',').collect()
    };
    let arity = |k: usize| -> Result<()> {
        if parts.len() == k {
            Ok(())
        } else {
            Err(parse_err(input, format!("expected {k} parameter(s)")))
        }
    };
    match head {
        "const" => {
            arity(1)?;
            CoefficientFamily::constant(number(input, "c", parts[0])?, origin)
        }
        "hyp" => {
            arity(1)?;
            CoefficientFamily::hyperharmonic(number(input, "ρ", parts[0])?, origin)
        }
        "powers" => {
            arity(1)?;
            CoefficientFamily::indicator(
                IndexPattern::PowersOf {
                    base: number(input, "base", parts[0])?,
                },
                origin,
            )
        }
        "arith" => {
            arity(2)?;
            let pattern = IndexPattern::Arithmetic {
                first: number(input, "first", parts[0])?,
                step: number(input, "step", parts[1])?,
            };
            CoefficientFamily::indicator(pattern, origin)
        }
        "monomial" => {
            arity(2)?;
            CoefficientFamily::monomial(number(input, "p", parts[0])?, number(input, "ℓ", parts[1])?)
        }
        _ => Err(parse_err(
            input,
            "unknown coefficients; expected const:c, hyp:ρ, powers:b, arith:first,step or monomial:p,ℓ",
        )),
    }
}

/// Basis in its text form, always with an explicit domain where one applies.
pub struct BasisText<'a>(pub &'a BasisFamily);

impl fmt::Display for BasisText<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let d = self.0.domain();
        match self.0.kind() {
            BasisKind::SineIbb { order } => write!(f, "ibb:s={order}"),
            BasisKind::GaussianExp { length_scale } => write!(f, "gauss:ell={length_scale},lo={},hi={}", d.lo, d.hi),
            BasisKind::PowerSeries { weights } => write!(f, "power:{},lo={},hi={}", weights.name(), d.lo, d.hi),
        }
    }
}
