//! Config files and the run header echoed into every output.

use std::ffi::OsString;
use std::path::PathBuf;

use serde::Serialize;

/// Read `--config FILE` from `argv` and append its keys as flags, skipping
/// any flag already present on the command line.
pub fn merge_config(argv: Vec<OsString>) -> Result<Vec<OsString>, String> {
    let mut path: Option<PathBuf> = None;
    let mut rest: Vec<OsString> = Vec::with_capacity(argv.len());
    let mut iter = argv.into_iter();
    while let Some(arg) = iter.next() {
        let s = arg.to_string_lossy().into_owned();
        if s == "--config" {
            let v = iter.next().ok_or("--config needs a file")?;
            path = Some(PathBuf::from(v));
        } else if let Some(v) = s.strip_prefix("--config=") {
            path = Some(PathBuf::from(v));
        } else {
            rest.push(arg);
        }
    }
    let Some(path) = path else { return Ok(rest) };
    let text = std::fs::read_to_string(&path).map_err(|e| format!("{}: {e}", path.display()))?;
    let table: toml::Table = text.parse().map_err(|e| format!("{}: {e}", path.display()))?;
    let present: Vec<String> = rest
        .iter()
        .filter_map(|a| a.to_str())
        .filter_map(|a| a.strip_prefix("--"))
        .map(|a| a.split('=').next().unwrap_or(a).to_string())
        .collect();
    for (key, value) in table {
        if present.contains(&key) {
            continue;
        }
        let flag = format!("--{key}");
        match value {
            toml::Value::Boolean(true) => rest.push(flag.into()),
            toml::Value::Boolean(false) => {}
            toml::Value::Array(items) => {
                let joined = items.iter().map(scalar).collect::<Result<Vec<_>, _>>()?.join(",");
                rest.push(format!("{flag}={joined}").into());
            }
            other => rest.push(format!("{flag}={}", scalar(&other)?).into()),
        }
    }
    Ok(rest)
}

fn scalar(v: &toml::Value) -> Result<String, String> {
    match v {
        toml::Value::String(s) => Ok(s.clone()),
        toml::Value::Integer(i) => Ok(i.to_string()),
        toml::Value::Float(f) => Ok(f.to_string()),
        other => Err(format!("unsupported config value {other}")),
    }
}

/// `#` lines naming the version and the fully resolved arguments. Stripping
/// the `# ` prefixes from the argument lines gives a config file that
/// reproduces the run.
pub fn header(command: &str, args: &impl Serialize) -> String {
    let body = toml::to_string(args).unwrap_or_default();
    let mut out = format!("# rkhs-scale {}\n# command = \"{command}\"\n", rkhs_scale::VERSION);
    for line in body.lines().filter(|l| !l.is_empty()) {
        out.push_str("# ");
        out.push_str(line);
        out.push('\n');
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn os(v: &[&str]) -> Vec<OsString> {
        v.iter().map(OsString::from).collect()
    }

    #[test]
    fn config_fills_missing_flags_only() {
        let dir = tempfile::tempdir().unwrap();
        let file = dir.path().join("run.toml");
        std::fs::write(&file, "basis = \"gauss:ell=1\"\nscaling = \"hyp:2\"\nmachine = true\n").unwrap();
        let merged = merge_config(os(&[
            "rkhs-scale",
            "classify",
            "--config",
            file.to_str().unwrap(),
            "--scaling=hyp:1",
        ]))
        .unwrap();
        let merged: Vec<String> = merged.into_iter().map(|s| s.into_string().unwrap()).collect();
        assert_eq!(
            merged,
            [
                "rkhs-scale",
                "classify",
                "--scaling=hyp:1",
                "--basis=gauss:ell=1",
                "--machine"
            ]
        );
    }

    #[test]
    fn arrays_join_with_commas() {
        let dir = tempfile::tempdir().unwrap();
        let file = dir.path().join("mle.toml");
        std::fs::write(&file, "p = 0\nN = [20, 40]\nell = 0.8\n").unwrap();
        let merged = merge_config(os(&["x", "mle", &format!("--config={}", file.display())])).unwrap();
        let merged: Vec<String> = merged.into_iter().map(|s| s.into_string().unwrap()).collect();
        assert_eq!(merged, ["x", "mle", "--N=20,40", "--ell=0.8", "--p=0"]);
    }

    #[test]
    fn header_lines_are_comments() {
        #[derive(Serialize)]
        struct A {
            basis: String,
            n: u64,
        }
        let h = header(
            "sample",
            &A {
                basis: "ibb:s=2".into(),
                n: 3,
            },
        );
        assert!(h.lines().all(|l| l.starts_with("# ")));
        assert!(h.contains("# basis = \"ibb:s=2\"\n# n = 3\n"));
    }
}
