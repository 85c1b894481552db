//! `--config` files: one `key = value` per line, `#` starts a comment.
//!
//! Each key becomes `--key value` (`--key` alone for `true`, nothing for
//! `false`). The keys `command` and `preset` supply the subcommand and the
//! `repro` preset. Options given on the command line take precedence.

use std::ffi::OsString;

fn parse(text: &str) -> Result<Vec<(String, String)>, String> {
    let mut out = Vec::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| format!("config line {}: expected key = value", lineno + 1))?;
        let k = k.trim().replace('_', "-");
        let v = v.trim().trim_matches('"').to_string();
        if k.is_empty() {
            return Err(format!("config line {}: empty key", lineno + 1));
        }
        out.push((k, v));
    }
    Ok(out)
}

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

/// Expands a `--config` file into explicit arguments.
pub fn expand_config(mut args: Vec<OsString>) -> Result<Vec<OsString>, String> {
    let Some(path) = config_path(&args) else {
        return Ok(args);
    };
    let text = std::fs::read_to_string(&path)
        .map_err(|e| format!("cannot read config {}: {e}", path.to_string_lossy()))?;
    let entries = parse(&text)?;
    let given = |key: &str, args: &[OsString]| {
        let flag = format!("--{key}");
        args.iter().any(|a| {
            let s = a.to_string_lossy();
            s == flag || s.starts_with(&format!("{flag}="))
        })
    };
    let names: Vec<String> = <super::Cli as clap::CommandFactory>::command()
        .get_subcommands()
        .map(|c| c.get_name().to_string())
        .collect();
    let has_subcommand = args.iter().skip(1).any(|a| names.iter().any(|n| *n == *a.to_string_lossy()));
    let mut tail: Vec<OsString> = Vec::new();
    for (k, v) in entries {
        match k.as_str() {
            "command" => {
                if !has_subcommand {
                    args.insert(1.min(args.len()), v.into());
                }
            }
            "preset" => tail.push(v.into()),
            _ if given(&k, &args) => {}
            _ => match v.as_str() {
                "true" => tail.push(format!("--{k}").into()),
                "false" => {}
                _ => {
                    tail.push(format!("--{k}").into());
                    tail.push(v.into());
                }
            },
        }
    }
    args.extend(tail);
    Ok(args)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn os(v: &[&str]) -> Vec<OsString> {
        v.iter().map(|s| OsString::from(*s)).collect()
    }

    #[test]
    fn expands_keys() {
        let dir = std::env::temp_dir().join(format!("epforge-config-{}", std::process::id()));
        std::fs::create_dir_all(&dir).unwrap();
        let path = dir.join("run.cfg");
        std::fs::write(&path, "# spectrum run\ncommand = spectrum\nn = 6\nparams = 0,0\nkinetic_shift = true\n").unwrap();
        let args = os(&["epforge", "--config", path.to_str().unwrap(), "--n", "4"]);
        let out = expand_config(args).unwrap();
        let s: Vec<String> = out.iter().map(|a| a.to_string_lossy().into_owned()).collect();
        assert_eq!(s[1], "spectrum");
        assert!(s.windows(2).any(|w| w == ["--params", "0,0"]));
        assert!(s.contains(&"--kinetic-shift".to_string()));
        assert_eq!(s.iter().filter(|a| *a == "--n").count(), 1);
    }

    #[test]
    fn rejects_malformed_lines() {
        assert!(parse("n 6").is_err());
        assert!(parse(" = 3").is_err());
        assert_eq!(parse("a = 1 # note\n\n").unwrap(), vec![("a".into(), "1".into())]);
    }
}
