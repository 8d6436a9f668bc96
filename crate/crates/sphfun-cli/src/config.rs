//! `--config FILE`: a JSON object whose keys are flag names. The pairs are
//! spliced in right after the subcommand, so flags on the command line win.

use std::ffi::OsString;
use std::path::PathBuf;

use serde_json::Value;

use crate::error::CliError;

const SUBCOMMANDS: [&str; 5] = ["eigen", "eval", "verify", "ring", "roots"];

/// Path given to `--config`, if any.
fn config_path(argv: &[OsString]) -> Option<PathBuf> {
    let mut it = argv.iter().skip(1);
    while let Some(arg) = it.next() {
        let s = arg.to_string_lossy();
        if s == "--" {
            break;
        }
        if s == "--config" {
            return it.next().map(PathBuf::from);
        }
        if let Some(rest) = s.strip_prefix("--config=") {
            return Some(PathBuf::from(rest));
        }
    }
    None
}

fn subcommand_index(argv: &[OsString]) -> Option<usize> {
    let mut i = 1;
    while i < argv.len() {
        let s = argv[i].to_string_lossy();
        if s == "--config" {
            i += 2;
            continue;
        }
        if SUBCOMMANDS.contains(&s.as_ref()) {
            return Some(i);
        }
        i += 1;
    }
    None
}

/// Flag arguments for one config entry.
fn flag_args(key: &str, value: &Value) -> Result<Vec<String>, CliError> {
    let name = key.trim_start_matches("--").replace('_', "-");
    if name.is_empty() || name == "config" {
        return Err(CliError::input(format!("config key `{key}` is not allowed")));
    }
    let flag = format!("--{name}");
    Ok(match value {
        Value::Null | Value::Bool(false) => Vec::new(),
        Value::Bool(true) => vec![flag],
        Value::Number(n) => vec![flag, n.to_string()],
        Value::String(s) => vec![flag, s.clone()],
        Value::Array(_) | Value::Object(_) => {
            return Err(CliError::input(format!("config key `{key}` must be a scalar")));
        }
    })
}

/// Splice the entries of the config file into `argv`.
pub fn expand(argv: Vec<OsString>) -> Result<Vec<OsString>, CliError> {
    let Some(path) = config_path(&argv) else {
        return Ok(argv);
    };
    let text = std::fs::read_to_string(&path)
        .map_err(|e| CliError::input(format!("cannot read config {}: {e}", path.display())))?;
    let value: Value = serde_json::from_str(&text)
        .map_err(|e| CliError::input(format!("malformed config {}: {e}", path.display())))?;
    let Value::Object(map) = value else {
        return Err(CliError::input("config must be a JSON object"));
    };
    let mut extra = Vec::new();
    for (key, value) in &map {
        extra.extend(flag_args(key, value)?);
    }
    let at = subcommand_index(&argv).map_or(argv.len(), |i| i + 1);
    let mut out = argv;
    out.splice(at..at, extra.into_iter().map(OsString::from));
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn os(v: &[&str]) -> Vec<OsString> {
        v.iter().map(OsString::from).collect()
    }

    #[test]
    fn scalar_entries() {
        assert_eq!(flag_args("m", &Value::from(2)).unwrap(), ["--m", "2"]);
        assert_eq!(flag_args("E_min", &Value::from(-3.5)).unwrap(), ["--E-min", "-3.5"]);
        assert_eq!(flag_args("with-grids", &Value::Bool(true)).unwrap(), ["--with-grids"]);
        assert!(flag_args("json_errors", &Value::Bool(false)).unwrap().is_empty());
        assert!(flag_args("grid", &serde_json::json!([1, 2])).is_err());
    }

    #[test]
    fn locates_subcommand_after_globals() {
        assert_eq!(subcommand_index(&os(&["sphfun", "--config", "ring", "ring"])), Some(3));
        assert_eq!(subcommand_index(&os(&["sphfun", "--json-errors", "eigen"])), Some(2));
        assert_eq!(
            config_path(&os(&["sphfun", "eigen", "--config=c.json"])),
            Some("c.json".into())
        );
    }
}
