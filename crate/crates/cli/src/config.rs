//! `key = value` config files, spliced into the argument list ahead of the
//! command-line flags so that flags win.

use std::collections::BTreeSet;
use std::path::Path;

use clap::{ArgAction, Command};

#[derive(Debug)]
pub struct ConfigError(pub String);

pub fn parse_config(text: &str) -> Result<Vec<(String, String)>, ConfigError> {
    let mut out = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| ConfigError(format!("config line {}: expected `key = value`, got `{line}`", i + 1)))?;
        let key = k.trim().replace('_', "-");
        if key.is_empty() {
            return Err(ConfigError(format!("config line {}: empty key", i + 1)));
        }
        out.push((key, v.trim().to_string()));
    }
    Ok(out)
}

/// The value of `--config` in `args`, if any.
pub fn config_path(args: &[String]) -> Option<String> {
    let mut it = args.iter();
    while let Some(a) = it.next() {
        if a == "--config" {
            return it.next().cloned();
        }
        if let Some(v) = a.strip_prefix("--config=") {
            return Some(v.to_string());
        }
    }
    None
}

struct Flag {
    long: String,
    takes_value: bool,
}

fn flags(cmd: &Command) -> Vec<Flag> {
    cmd.get_arguments()
        .filter_map(|a| {
            a.get_long().map(|l| Flag {
                long: l.to_string(),
                takes_value: !matches!(a.get_action(), ArgAction::SetTrue | ArgAction::SetFalse | ArgAction::Count),
            })
        })
        .collect()
}

fn resolve<'a>(key: &str, candidates: &'a [Flag]) -> Option<&'a Flag> {
    candidates.iter().find(|f| f.long == key).or_else(|| {
        let folded: Vec<&Flag> = candidates.iter().filter(|f| f.long.eq_ignore_ascii_case(key)).collect();
        (folded.len() == 1).then(|| folded[0])
    })
}

/// Inserts config entries as flags right after the subcommand. Keys that
/// belong to a different subcommand are skipped; keys no command knows are
/// an error.
pub fn splice(cli: &Command, args: Vec<String>, path: &Path) -> Result<Vec<String>, ConfigError> {
    let text = std::fs::read_to_string(path).map_err(|e| ConfigError(format!("cannot read config {}: {e}", path.display())))?;
    let entries = parse_config(&text)?;
    let names: BTreeSet<String> = cli.get_subcommands().map(|c| c.get_name().to_string()).collect();
    let Some(pos) = args.iter().skip(1).position(|a| names.contains(a)).map(|p| p + 1) else {
        return Ok(args);
    };
    let sub = cli.find_subcommand(&args[pos]).expect("known subcommand");
    let mut own = flags(sub);
    own.extend(flags(cli));
    let others: Vec<Flag> = cli.get_subcommands().flat_map(flags).collect();
    let mut inserted = Vec::new();
    for (key, value) in entries {
        if key == "config" {
            continue;
        }
        if let Some(f) = resolve(&key, &own) {
            if f.takes_value {
                inserted.push(format!("--{}", f.long));
                inserted.push(value);
            } else if matches!(value.as_str(), "true" | "1" | "yes") {
                inserted.push(format!("--{}", f.long));
            } else if !matches!(value.as_str(), "false" | "0" | "no") {
                return Err(ConfigError(format!("config key `{key}` expects true or false, got `{value}`")));
            }
        } else if resolve(&key, &others).is_none() {
            return Err(ConfigError(format!("unknown config key `{key}`")));
        }
    }
    let mut out = args[..=pos].to_vec();
    out.extend(inserted);
    out.extend_from_slice(&args[pos + 1..]);
    Ok(out)
}
