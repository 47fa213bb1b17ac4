//! `key = value` defaults files.
//!
//! Unscoped keys apply to every subcommand that has a flag of that name;
//! `subcmd.key` applies to one subcommand only and must name a real flag.
//! Values from the file are spliced into argv ahead of parsing, and only
//! for flags the user did not pass, so flags always win.

use std::collections::BTreeMap;
use std::path::Path;

use clap::Command;

#[derive(Debug, Default, Clone, PartialEq)]
pub struct ConfigFile {
    pub global: BTreeMap<String, String>,
    pub scoped: BTreeMap<String, BTreeMap<String, String>>,
}

pub fn parse(text: &str) -> Result<ConfigFile, String> {
    let mut cfg = ConfigFile::default();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| format!("line {}: expected key = value", i + 1))?;
        let key = key.trim().replace('_', "-");
        let value = value.trim().to_string();
        if key.is_empty() {
            return Err(format!("line {}: empty key", i + 1));
        }
        match key.split_once('.') {
            Some((scope, k)) => {
                cfg.scoped
                    .entry(scope.to_string())
                    .or_default()
                    .insert(k.to_string(), value);
            }
            None => {
                cfg.global.insert(key, value);
            }
        }
    }
    Ok(cfg)
}

pub fn load(path: &Path) -> Result<ConfigFile, std::io::Error> {
    let text = std::fs::read_to_string(path)?;
    parse(&text).map_err(|e| {
        std::io::Error::new(
            std::io::ErrorKind::InvalidData,
            format!("{}: {e}", path.display()),
        )
    })
}

fn truthy(v: &str) -> Option<bool> {
    match v.to_ascii_lowercase().as_str() {
        "true" | "yes" | "1" | "on" => Some(true),
        "false" | "no" | "0" | "off" => Some(false),
        _ => None,
    }
}

/// Position of the subcommand in argv and its name.
fn find_subcommand(args: &[String], cmd: &Command) -> Option<(usize, String)> {
    let mut skip = false;
    for (i, a) in args.iter().enumerate().skip(1) {
        if skip {
            skip = false;
            continue;
        }
        if a == "--config" {
            skip = true;
            continue;
        }
        if a.starts_with('-') {
            continue;
        }
        return cmd.find_subcommand(a).map(|_| (i, a.clone()));
    }
    None
}

/// Splice config defaults into `args` for the chosen subcommand.
pub fn apply(args: &[String], cmd: &Command, cfg: &ConfigFile) -> Result<Vec<String>, String> {
    let Some((pos, name)) = find_subcommand(args, cmd) else {
        return Ok(args.to_vec());
    };
    let sub = cmd.find_subcommand(&name).expect("subcommand exists");
    let given: Vec<&str> = args[pos + 1..]
        .iter()
        .filter_map(|a| a.strip_prefix("--"))
        .map(|a| a.split('=').next().unwrap_or(a))
        .collect();

    for scope in cfg.scoped.keys() {
        if cmd.find_subcommand(scope).is_none() {
            return Err(format!("config: unknown subcommand scope `{scope}`"));
        }
    }
    for key in cfg.global.keys() {
        let known = cmd.get_subcommands().any(|sc| {
            sc.get_arguments()
                .any(|a| a.get_long() == Some(key.as_str()))
        });
        if !known {
            return Err(format!("config: no subcommand has an option `--{key}`"));
        }
    }
    let mut merged: BTreeMap<&str, (&str, bool)> = BTreeMap::new();
    for (k, v) in &cfg.global {
        merged.insert(k, (v, false));
    }
    if let Some(scoped) = cfg.scoped.get(&name) {
        for (k, v) in scoped {
            merged.insert(k, (v, true));
        }
    }

    let mut extra = Vec::new();
    for (key, (value, scoped)) in merged {
        let arg = sub.get_arguments().find(|a| a.get_long() == Some(key));
        let Some(arg) = arg else {
            if scoped {
                return Err(format!("config: `{name}` has no option `--{key}`"));
            }
            continue;
        };
        if given.contains(&key) {
            continue;
        }
        let takes_value = arg.get_num_args().is_none_or(|r| r.takes_values());
        if takes_value {
            extra.push(format!("--{key}"));
            extra.push(value.to_string());
        } else {
            match truthy(value) {
                Some(true) => extra.push(format!("--{key}")),
                Some(false) => {}
                None => {
                    return Err(format!(
                        "config: `{key}` expects true or false, got `{value}`"
                    ))
                }
            }
        }
    }
    let mut out = args[..=pos].to_vec();
    out.extend(extra);
    out.extend_from_slice(&args[pos + 1..]);
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_scoped_and_global_keys() {
        let cfg = parse("# defaults\nseed = 7\npdf.n = 40 # steps\nfit.n_model=2000\n").unwrap();
        assert_eq!(cfg.global["seed"], "7");
        assert_eq!(cfg.scoped["pdf"]["n"], "40");
        assert_eq!(cfg.scoped["fit"]["n-model"], "2000");
    }

    #[test]
    fn rejects_lines_without_equals() {
        assert!(parse("seed 7").unwrap_err().contains("line 1"));
    }
}
