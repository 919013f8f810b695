//! `--config` files: `key=value` lines supplying flags absent from argv.

use std::path::Path;

use clap::{Arg, ArgAction, Command};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}:{line}: {reason}")]
    Invalid { path: String, line: usize, reason: String },
}

fn config_path(argv: &[String]) -> Option<String> {
    let mut it = argv.iter().skip(1);
    while let Some(a) = it.next() {
        if a == "--" {
            break;
        }
        if a == "--config" {
            return it.next().cloned();
        }
        if let Some(v) = a.strip_prefix("--config=") {
            return Some(v.to_string());
        }
    }
    None
}

fn given_on_command_line(argv: &[String], long: &str) -> bool {
    let flag = format!("--{long}");
    let prefix = format!("--{long}=");
    argv.iter().skip(1).any(|a| *a == flag || a.starts_with(&prefix))
}

fn find_arg<'a>(cmd: &'a Command, sub: Option<&'a Command>, key: &str) -> Option<&'a Arg> {
    let matches = |a: &&Arg| a.get_long() == Some(key);
    sub.and_then(|s| s.get_arguments().find(matches))
        .or_else(|| cmd.get_arguments().find(matches))
}

/// Expands argv with the entries of its `--config` file. Flags already on the
/// command line win; unknown keys are rejected.
pub fn expand(argv: Vec<String>, cmd: &Command) -> Result<Vec<String>, ConfigError> {
    let Some(path) = config_path(&argv) else {
        return Ok(argv);
    };
    let content = std::fs::read_to_string(Path::new(&path)).map_err(|source| ConfigError::Io {
        path: path.clone(),
        source,
    })?;
    let sub = argv
        .iter()
        .skip(1)
        .find_map(|a| cmd.get_subcommands().find(|s| s.get_name() == a));

    let invalid = |line: usize, reason: String| ConfigError::Invalid {
        path: path.clone(),
        line,
        reason,
    };
    let mut extra = Vec::new();
    let mut seen = std::collections::HashSet::new();
    for (i, raw) in content.lines().enumerate() {
        let line = i + 1;
        let raw = raw.trim();
        if raw.is_empty() || raw.starts_with('#') {
            continue;
        }
        let (key, value) = raw
            .split_once('=')
            .ok_or_else(|| invalid(line, format!("expected key=value, found {raw:?}")))?;
        let (key, value) = (key.trim(), value.trim());
        if key == "config" || key == "help" || key == "version" {
            return Err(invalid(line, format!("key {key:?} cannot be set from a config file")));
        }
        let arg = find_arg(cmd, sub, key).ok_or_else(|| {
            let scope = sub.map(|s| format!(" for `{}`", s.get_name())).unwrap_or_default();
            invalid(line, format!("unknown key {key:?}{scope}"))
        })?;
        if given_on_command_line(&argv, key) {
            continue;
        }
        let repeatable = matches!(arg.get_action(), ArgAction::Append);
        if !seen.insert(key.to_string()) && !repeatable {
            return Err(invalid(line, format!("key {key:?} given more than once")));
        }
        match arg.get_action() {
            ArgAction::SetTrue => match value {
                "true" | "1" | "yes" => extra.push(format!("--{key}")),
                "false" | "0" | "no" => {}
                other => return Err(invalid(line, format!("{key}: expected true or false, found {other:?}"))),
            },
            _ => {
                extra.push(format!("--{key}"));
                extra.push(value.to_string());
            }
        }
    }
    let mut out = argv;
    if sub.is_some() {
        out.extend(extra);
    }
    Ok(out)
}
