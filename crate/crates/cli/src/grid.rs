//! Grid specifications: explicit lists, `a:b:n` (linear) and `log:a:b:n`.

use mu_audit::numeric::{lin_grid, log_grid};
use serde::Deserialize;

use crate::error::CliError;

/// A grid as written in a parameter file: either a TOML array or a range
/// string.
#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(untagged)]
pub enum GridSpec {
    List(Vec<f64>),
    Range(String),
}

impl GridSpec {
    pub fn resolve(&self, name: &str) -> Result<Vec<f64>, CliError> {
        match self {
            GridSpec::List(v) => {
                if v.is_empty() {
                    return Err(CliError::validation(format!("grid `{name}` is empty")));
                }
                Ok(v.clone())
            }
            GridSpec::Range(s) => parse_grid(name, s),
        }
    }
}

/// Parses `v1,v2,...`, `a:b:n` or `log:a:b:n`.
pub fn parse_grid(name: &str, text: &str) -> Result<Vec<f64>, CliError> {
    let bad = |why: &str| CliError::validation(format!("grid `{name}` = `{text}`: {why}"));
    let num = |s: &str| s.trim().parse::<f64>().map_err(|_| bad("not a number"));
    let text = text.trim();
    let (log, body) = match text.strip_prefix("log:") {
        Some(rest) => (true, rest),
        None => (false, text),
    };
    if body.contains(':') {
        let parts: Vec<&str> = body.split(':').collect();
        let [a, b, n] = parts[..] else {
            return Err(bad("expected a:b:n or log:a:b:n"));
        };
        let (a, b) = (num(a)?, num(b)?);
        let n: usize = n.trim().parse().map_err(|_| bad("point count must be an integer"))?;
        if !(a.is_finite() && b.is_finite()) {
            return Err(bad("bounds must be finite"));
        }
        if n == 0 {
            return Err(bad("point count must be positive"));
        }
        if n == 1 {
            return Ok(vec![a]);
        }
        if log {
            if a <= 0.0 || b <= 0.0 {
                return Err(bad("log grid bounds must be positive"));
            }
            Ok(log_grid(a, b, n))
        } else {
            Ok(lin_grid(a, b, n))
        }
    } else if log {
        Err(bad("expected log:a:b:n"))
    } else {
        let vals = body.split(',').map(num).collect::<Result<Vec<_>, _>>()?;
        if vals.is_empty() {
            return Err(bad("empty grid"));
        }
        Ok(vals)
    }
}
