//! Run parameters: a flat key-value table read from a toml config section and
//! overridden by `--set key=value`.

use std::collections::BTreeMap;
use std::path::Path;

use roughpower::{Error, Result};

fn bad<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Precondition(msg.into()))
}

/// parameter values kept as text and parsed on access
#[derive(Clone, Debug, Default)]
pub struct Params {
    values: BTreeMap<String, String>,
}

fn render(value: &toml::Value) -> Result<String> {
    Ok(match value {
        toml::Value::String(s) => s.clone(),
        toml::Value::Integer(i) => i.to_string(),
        toml::Value::Float(f) => f.to_string(),
        toml::Value::Boolean(b) => b.to_string(),
        toml::Value::Array(items) => items.iter().map(render).collect::<Result<Vec<_>>>()?.join(","),
        other => return bad(format!("unsupported config value {other}")),
    })
}

impl Params {
    /// top-level scalars first, then the table named after the command
    pub fn from_config(path: &Path, command: &str) -> Result<Params> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Precondition(format!("cannot read config {}: {e}", path.display())))?;
        let table: toml::Table =
            text.parse().map_err(|e| Error::Precondition(format!("config {}: {e}", path.display())))?;
        let mut out = Params::default();
        for (k, v) in &table {
            if !v.is_table() {
                out.values.insert(k.clone(), render(v)?);
            }
        }
        if let Some(section) = table.get(command).and_then(|v| v.as_table()) {
            for (k, v) in section {
                out.values.insert(k.clone(), render(v)?);
            }
        }
        Ok(out)
    }

    /// apply one `key=value` override
    pub fn set(&mut self, assignment: &str) -> Result<()> {
        let Some((k, v)) = assignment.split_once('=') else {
            return bad(format!("override `{assignment}` is not of the form key=value"));
        };
        let v = v.trim().trim_start_matches('[').trim_end_matches(']');
        self.values.insert(k.trim().to_string(), v.trim().to_string());
        Ok(())
    }

    /// reject keys the command does not read
    pub fn check_known(&self, command: &str, known: &[&str]) -> Result<()> {
        for k in self.values.keys() {
            if !known.contains(&k.as_str()) {
                return bad(format!("unknown parameter `{k}` for {command}; expected one of {}", known.join(", ")));
            }
        }
        Ok(())
    }

    pub fn raw(&self, key: &str) -> Option<&str> {
        self.values.get(key).map(|s| s.as_str())
    }

    pub fn text(&self, key: &str, default: &str) -> String {
        self.raw(key).unwrap_or(default).to_string()
    }

    pub fn f64(&self, key: &str, default: f64) -> Result<f64> {
        match self.raw(key) {
            None => Ok(default),
            Some(v) => parse_f64(key, v),
        }
    }

    pub fn usize(&self, key: &str, default: usize) -> Result<usize> {
        match self.raw(key) {
            None => Ok(default),
            Some(v) => parse_size(key, v),
        }
    }

    pub fn f64_list(&self, key: &str, default: &[f64]) -> Result<Vec<f64>> {
        match self.raw(key) {
            None => Ok(default.to_vec()),
            Some(v) => items(v).map(|item| parse_f64(key, item)).collect(),
        }
    }

    /// sizes; accepts `4096`, `2^12` and the range `2^12..2^15`
    pub fn size_list(&self, key: &str, default: &[usize]) -> Result<Vec<usize>> {
        let Some(v) = self.raw(key) else {
            return Ok(default.to_vec());
        };
        let mut out = Vec::new();
        for item in items(v) {
            if let Some((a, b)) = item.split_once("..") {
                let (a, b) = (parse_size(key, a)?, parse_size(key, b)?);
                if !(a.is_power_of_two() && b.is_power_of_two() && a <= b) {
                    return bad(format!("{key}: range {item} needs powers of two in increasing order"));
                }
                let mut n = a;
                while n <= b {
                    out.push(n);
                    n *= 2;
                }
            } else {
                out.push(parse_size(key, item)?);
            }
        }
        Ok(out)
    }
}

fn items(v: &str) -> impl Iterator<Item = &str> {
    v.split(',').map(str::trim).filter(|s| !s.is_empty())
}

fn parse_f64(key: &str, v: &str) -> Result<f64> {
    let v = v.trim();
    let parsed = match v {
        "inf" => Ok(f64::INFINITY),
        _ => v.parse::<f64>(),
    };
    parsed.or_else(|_| bad(format!("{key}: `{v}` is not a number")))
}

fn parse_size(key: &str, v: &str) -> Result<usize> {
    let v = v.trim();
    if let Some((base, exp)) = v.split_once('^') {
        let base: usize = base.trim().parse().or_else(|_| bad(format!("{key}: `{v}` is not a size")))?;
        let exp: u32 = exp.trim().parse().or_else(|_| bad(format!("{key}: `{v}` is not a size")))?;
        return base.checked_pow(exp).map_or_else(|| bad(format!("{key}: `{v}` overflows")), Ok);
    }
    v.parse().or_else(|_| bad(format!("{key}: `{v}` is not a size")))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn overrides_and_lists() {
        let mut p = Params::default();
        p.set("s=1.25,1.75").unwrap();
        p.set("n=2^12..2^14,100").unwrap();
        p.set("q = 3").unwrap();
        assert_eq!(p.f64_list("s", &[]).unwrap(), vec![1.25, 1.75]);
        assert_eq!(p.size_list("n", &[]).unwrap(), vec![4096, 8192, 16384, 100]);
        assert_eq!(p.f64("q", 2.0).unwrap(), 3.0);
        assert_eq!(p.f64("p", 2.5).unwrap(), 2.5);
        assert!(p.set("novalue").is_err());
        assert!(p.check_known("scan-abs", &["s", "n"]).is_err());
        assert!(p.check_known("scan-abs", &["s", "n", "q"]).is_ok());
    }

    #[test]
    fn malformed_numbers_are_preconditions() {
        let mut p = Params::default();
        p.set("q=two").unwrap();
        assert!(matches!(p.f64("q", 2.0), Err(Error::Precondition(_))));
        p.set("n=2^x").unwrap();
        assert!(p.size_list("n", &[]).is_err());
    }

    #[test]
    fn config_sections() {
        let dir = std::env::temp_dir().join(format!("roughpower-params-{}", std::process::id()));
        std::fs::create_dir_all(&dir).unwrap();
        let path = dir.join("run.toml");
        std::fs::write(&path, "q = 3\n[scan-abs]\ns = [1.25, 1.75]\nn = \"2^12..2^13\"\n[scan-heat]\np = 1.5\n").unwrap();
        let p = Params::from_config(&path, "scan-abs").unwrap();
        assert_eq!(p.f64("q", 2.0).unwrap(), 3.0);
        assert_eq!(p.f64_list("s", &[]).unwrap(), vec![1.25, 1.75]);
        assert_eq!(p.size_list("n", &[]).unwrap(), vec![4096, 8192]);
        assert!(p.raw("p").is_none());
        std::fs::remove_dir_all(&dir).unwrap();
    }
}
