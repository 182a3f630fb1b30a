//! TOML configuration files. A file is a flat table whose keys are the
//! long flag names of the subcommand being run; it is turned into flag
//! tokens placed before the command-line flags, so flags win.

use std::path::{Path, PathBuf};

use crate::error::CliError;

/// Flag tokens equivalent to the table in `text`.
pub fn tokens_from_toml(text: &str) -> Result<Vec<String>, CliError> {
    let table: toml::Table = text
        .parse()
        .map_err(|e: toml::de::Error| CliError::Validation(format!("config: {}", e.message())))?;
    let mut out = Vec::new();
    for (key, value) in table {
        let flag = format!("--{}", key.replace('_', "-"));
        match value {
            toml::Value::Boolean(true) => out.push(flag),
            toml::Value::Boolean(false) => {}
            toml::Value::Array(items) => {
                out.push(flag);
                for item in items {
                    out.push(scalar(&key, item)?);
                }
            }
            other => {
                out.push(flag);
                out.push(scalar(&key, other)?);
            }
        }
    }
    Ok(out)
}

fn scalar(key: &str, value: toml::Value) -> Result<String, CliError> {
    match value {
        toml::Value::String(s) => Ok(s),
        toml::Value::Integer(i) => Ok(i.to_string()),
        toml::Value::Float(f) => Ok(f.to_string()),
        toml::Value::Boolean(b) => Ok(b.to_string()),
        _ => Err(CliError::Validation(format!("config: key `{key}` must hold a scalar or a list of scalars"))),
    }
}

/// Reads `path` and converts it with [`tokens_from_toml`].
pub fn tokens_from_file(path: &Path) -> Result<Vec<String>, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Validation(format!("cannot read config {}: {e}", path.display())))?;
    tokens_from_toml(&text)
}

/// Path given with `--config` anywhere on the command line, if any.
pub fn config_path(argv: &[String]) -> Option<PathBuf> {
    let mut it = argv.iter().skip(1);
    while let Some(a) = it.next() {
        if a == "--config" {
            return it.next().map(PathBuf::from);
        }
        if let Some(p) = a.strip_prefix("--config=") {
            return Some(PathBuf::from(p));
        }
    }
    None
}

/// Re-orders `argv` so that `config` tokens follow the subcommand name and
/// precede every flag from the command line.
pub fn splice(argv: &[String], command: &str, config: Vec<String>) -> Vec<String> {
    let at = argv.iter().skip(1).position(|a| a == command).map(|p| p + 1);
    let Some(at) = at else {
        return argv.to_vec();
    };
    let mut out = vec![argv[0].clone(), command.to_string()];
    out.extend(config);
    out.extend(argv[1..at].iter().cloned());
    out.extend(argv[at + 1..].iter().cloned());
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tables_become_flags() {
        let t = tokens_from_toml("delta = 0.25\nt_max = 40\nregular = \"3,6\"\nthreshold = true\nrelay = [\"d2=0.5\", \"co=0.9\"]\n")
            .unwrap();
        assert_eq!(
            t,
            ["--delta", "0.25", "--regular", "3,6", "--relay", "d2=0.5", "co=0.9", "--t-max", "40", "--threshold"]
        );
        assert!(tokens_from_toml("x = { y = 1 }").is_err());
        assert!(tokens_from_toml("not toml").is_err());
        let argv: Vec<String> = ["bin", "de-bec", "--config=a.toml"].map(String::from).to_vec();
        assert_eq!(config_path(&argv), Some(PathBuf::from("a.toml")));
        let argv: Vec<String> = ["bin", "--config", "b.toml", "rates"].map(String::from).to_vec();
        assert_eq!(config_path(&argv), Some(PathBuf::from("b.toml")));
        assert_eq!(config_path(&argv[..1]), None);
    }

    #[test]
    fn config_goes_between_command_and_flags() {
        let argv: Vec<String> = ["bin", "--threads", "2", "de-bec", "--delta", "0.3"].map(String::from).into();
        let out = splice(&argv, "de-bec", vec!["--delta".into(), "0.1".into()]);
        assert_eq!(out, ["bin", "de-bec", "--delta", "0.1", "--threads", "2", "--delta", "0.3"]);
    }
}
