//! `key = value` config files whose keys mirror long flags.

use std::ffi::OsString;
use std::path::Path;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConfigError(pub String);

impl std::fmt::Display for ConfigError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

/// Parses `key = value` lines; blank lines and `#` comments are skipped.
pub fn parse(text: &str) -> Result<Vec<(String, String)>, ConfigError> {
    let mut entries = Vec::new();
    for (number, line) in text.lines().enumerate() {
        let line = line.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| ConfigError(format!("line {}: expected `key = value`", number + 1)))?;
        let key = key.trim().trim_start_matches("--");
        if key.is_empty() || key.contains(char::is_whitespace) {
            return Err(ConfigError(format!("line {}: bad key {key:?}", number + 1)));
        }
        entries.push((key.to_string(), value.trim().to_string()));
    }
    Ok(entries)
}

/// The `--config` value in `argv`, if any.
pub fn config_path(argv: &[OsString]) -> Option<OsString> {
    let mut iter = argv.iter();
    while let Some(arg) = iter.next() {
        let text = arg.to_string_lossy();
        if text == "--" {
            break;
        }
        if text == "--config" {
            return iter.next().cloned();
        }
        if let Some(path) = text.strip_prefix("--config=") {
            return Some(path.into());
        }
    }
    None
}

fn has_flag(argv: &[OsString], key: &str) -> bool {
    let long = format!("--{key}");
    let prefix = format!("--{key}=");
    argv.iter().any(|a| {
        let a = a.to_string_lossy();
        a == long || a.starts_with(&prefix)
    })
}

/// Appends config entries to `argv` for every flag not given explicitly.
/// `true` adds a bare switch and `false` leaves it out.
pub fn merge(mut argv: Vec<OsString>, entries: &[(String, String)]) -> Vec<OsString> {
    let explicit = argv.clone();
    for (key, value) in entries {
        if key == "config" || has_flag(&explicit, key) {
            continue;
        }
        match value.as_str() {
            "true" => argv.push(format!("--{key}").into()),
            "false" => {}
            _ => {
                argv.push(format!("--{key}").into());
                argv.push(value.into());
            }
        }
    }
    argv
}

/// Reads the config named in `argv` and merges it in.
pub fn apply(argv: Vec<OsString>) -> Result<Vec<OsString>, ConfigError> {
    let Some(path) = config_path(&argv) else {
        return Ok(argv);
    };
    let path = Path::new(&path);
    let text = std::fs::read_to_string(path).map_err(|e| ConfigError(format!("{}: {e}", path.display())))?;
    Ok(merge(argv, &parse(&text)?))
}
