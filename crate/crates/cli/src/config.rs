//! `--config file.json` support. The file holds an object of long flag names
//! to values; they are spliced into the argument list right after the
//! subcommand, ahead of the user's own flags, so explicit flags win.

use std::ffi::OsString;
use std::path::Path;

use anyhow::{bail, Context, Result};
use serde_json::Value;

const SUBCOMMANDS: [&str; 5] = ["generate", "train", "predict", "estimate-prior", "bench"];

fn config_path(args: &[OsString]) -> Option<OsString> {
    let mut it = args.iter();
    while let Some(a) = it.next() {
        let s = a.to_string_lossy();
        if s == "--config" {
            return it.next().cloned();
        }
        if let Some(p) = s.strip_prefix("--config=") {
            return Some(p.into());
        }
    }
    None
}

fn scalar(key: &str, v: &Value) -> Result<String> {
    Ok(match v {
        Value::String(s) => s.clone(),
        Value::Number(n) => n.to_string(),
        _ => bail!("config key '{key}': expected a string, number, boolean or list"),
    })
}

/// Converts a config object into `--key value` arguments.
pub fn config_args(json: &str, origin: &Path) -> Result<Vec<OsString>> {
    let value: Value = serde_json::from_str(json).with_context(|| format!("parsing config {}", origin.display()))?;
    let Value::Object(map) = value else {
        bail!("config {} must contain a JSON object", origin.display());
    };
    let mut out = Vec::new();
    for (key, v) in map {
        let flag = format!("--{}", key.replace('_', "-"));
        match v {
            Value::Bool(true) => out.push(flag.into()),
            Value::Bool(false) | Value::Null => {}
            Value::Array(items) => {
                let parts = items.iter().map(|i| scalar(&key, i)).collect::<Result<Vec<_>>>()?;
                out.push(flag.into());
                out.push(parts.join(",").into());
            }
            other => {
                out.push(flag.into());
                out.push(scalar(&key, &other)?.into());
            }
        }
    }
    Ok(out)
}

/// Returns the argument list with config-file flags spliced in.
pub fn merge_config(args: Vec<OsString>) -> Result<Vec<OsString>> {
    let Some(path) = config_path(&args) else {
        return Ok(args);
    };
    let path = Path::new(&path);
    let text = std::fs::read_to_string(path).with_context(|| format!("reading config {}", path.display()))?;
    let extra = config_args(&text, path)?;
    let Some(pos) = args.iter().position(|a| SUBCOMMANDS.contains(&a.to_string_lossy().as_ref())) else {
        return Ok(args);
    };
    let mut merged = args[..=pos].to_vec();
    merged.extend(extra);
    merged.extend_from_slice(&args[pos + 1..]);
    Ok(merged)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn values_become_flags() {
        let args = config_args(r#"{"gamma_grid": [1, 0.5], "seed": 3, "estimate-prior": true, "refit_full": false, "method": "dh"}"#, Path::new("c.json")).unwrap();
        let args: Vec<String> = args.into_iter().map(|a| a.into_string().unwrap()).collect();
        assert_eq!(args, ["--estimate-prior", "--gamma-grid", "1,0.5", "--method", "dh", "--seed", "3"]);
    }

    #[test]
    fn non_object_rejected() {
        assert!(config_args("[1]", Path::new("c.json")).is_err());
        assert!(config_args(r#"{"x": {"y": 1}}"#, Path::new("c.json")).is_err());
    }
}
