//! `--config FILE`: a JSON object whose keys are flag names.
//!
//! Entries are spliced in right after the subcommand, so flags given on
//! the command line come later and win.

use std::path::Path;

use anyhow::{bail, Context, Result};
use serde_json::{Map, Value};

/// Removes `--config PATH` (or `--config=PATH`) from `args` and splices in
/// the flags the file supplies.
pub fn expand(args: Vec<String>) -> Result<Vec<String>> {
    let mut rest = Vec::with_capacity(args.len());
    let mut path = None;
    let mut it = args.into_iter();
    while let Some(a) = it.next() {
        if a == "--config" {
            path = Some(it.next().context("--config needs a path")?);
        } else if let Some(p) = a.strip_prefix("--config=") {
            path = Some(p.to_string());
        } else {
            rest.push(a);
        }
    }
    let Some(path) = path else {
        return Ok(rest);
    };
    let flags = read(Path::new(&path))?;
    // The first bare word after the program name is the subcommand.
    let at = rest
        .iter()
        .skip(1)
        .position(|a| !a.starts_with('-'))
        .map_or(rest.len(), |i| i + 2);
    rest.splice(at..at, flags);
    Ok(rest)
}

fn read(path: &Path) -> Result<Vec<String>> {
    let text = std::fs::read_to_string(path).with_context(|| format!("reading config {}", path.display()))?;
    let value: Value = serde_json::from_str(&text).with_context(|| format!("parsing config {}", path.display()))?;
    let Value::Object(map) = value else {
        bail!("config {} must be a JSON object", path.display());
    };
    to_flags(&map)
}

fn to_flags(map: &Map<String, Value>) -> Result<Vec<String>> {
    let mut out = Vec::new();
    for (key, value) in map {
        let flag = format!("--{}", key.trim_start_matches('-').replace('_', "-"));
        match value {
            Value::Bool(true) => out.push(flag),
            Value::Bool(false) | Value::Null => {}
            Value::Array(items) => {
                let items = items.iter().map(scalar).collect::<Result<Vec<_>>>()?;
                out.push(flag);
                out.push(items.join(","));
            }
            other => {
                out.push(flag);
                out.push(scalar(other)?);
            }
        }
    }
    Ok(out)
}

fn scalar(v: &Value) -> Result<String> {
    Ok(match v {
        Value::String(s) => s.clone(),
        Value::Number(n) => n.to_string(),
        Value::Bool(b) => b.to_string(),
        other => bail!("config values must be scalars or lists of scalars, got {other}"),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde_json::json;

    fn strings(v: &[&str]) -> Vec<String> {
        v.iter().map(|s| s.to_string()).collect()
    }

    #[test]
    fn flags_from_object() {
        let Value::Object(map) = json!({"splits": 5, "timing": true, "methods": ["reuse", "robust-flat"], "quiet": false})
        else {
            unreachable!()
        };
        assert_eq!(
            to_flags(&map).unwrap(),
            strings(&["--methods", "reuse,robust-flat", "--splits", "5", "--timing"])
        );
    }

    #[test]
    fn spliced_after_subcommand() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("c.json");
        std::fs::write(&path, r#"{"side": "lower"}"#).unwrap();
        let args = strings(&["lpbound", "--config", path.to_str().unwrap(), "bound", "--side", "upper"]);
        assert_eq!(
            expand(args).unwrap(),
            strings(&["lpbound", "bound", "--side", "lower", "--side", "upper"])
        );
    }

    #[test]
    fn without_config_unchanged() {
        let args = strings(&["lpbound", "bench", "--seed", "3"]);
        assert_eq!(expand(args.clone()).unwrap(), args);
    }
}
