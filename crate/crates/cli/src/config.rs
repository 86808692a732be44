//! Run specification and its resolution from defaults, a TOML parameter
//! file and command-line overrides (flags win over the file, the file wins
//! over defaults).

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use mu_audit::{CertLevel, GameParams, SimConfig, SimMode};
use serde::{Deserialize, Serialize};

use crate::error::CliError;
use crate::grid::{parse_grid, GridSpec};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Player {
    Auditor,
    Operator,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", tag = "name")]
pub enum Command {
    BestResponse { player: Player },
    SolveNe,
    SolveSpe,
    Regimes,
    SweepEta,
    SweepP,
    CompareMechanisms { belief: Option<f64> },
    /// Simulates the given profile, or the Nash profile when absent.
    Simulate { profile: Option<(f64, f64)> },
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::BestResponse { .. } => "best-response",
            Command::SolveNe => "solve-ne",
            Command::SolveSpe => "solve-spe",
            Command::Regimes => "regimes",
            Command::SweepEta => "sweep-eta",
            Command::SweepP => "sweep-p",
            Command::CompareMechanisms { .. } => "compare-mechanisms",
            Command::Simulate { .. } => "simulate",
        }
    }

    /// Grid names the command sweeps, outermost first, with the default
    /// used when a grid is not given. `None` marks an optional grid.
    pub fn grid_axes(&self) -> &'static [(&'static str, Option<&'static str>)] {
        match self {
            Command::BestResponse { player: Player::Auditor } => &[("eps", Some("log:0.01:10:100"))],
            Command::BestResponse { player: Player::Operator } => &[("m", Some("log:0.01:100:100"))],
            Command::SolveNe | Command::Simulate { .. } => &[],
            Command::SolveSpe => &[("gamma_ratio", None)],
            Command::Regimes => &[("eta", Some("0.005:0.25:50")), ("p", Some("2:100:50"))],
            Command::SweepEta => &[("eta", Some("0.01:0.25:25"))],
            Command::SweepP => &[("eta", Some("0.05,0.15,0.25")), ("p", Some("5:100:20"))],
            Command::CompareMechanisms { .. } => &[("eta", Some("0.01:0.25:25"))],
        }
    }
}

/// Every grid name understood by some command.
pub const GRID_NAMES: &[&str] = &["eps", "m", "eta", "p", "gamma_ratio"];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Jsonl,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OutputSpec {
    /// `None` writes to standard output.
    pub path: Option<PathBuf>,
    pub format: Format,
}

/// A fully resolved run.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunSpec {
    pub command: Command,
    pub params: GameParams,
    /// Sweep axes in the command's column order.
    pub grids: Vec<(String, Vec<f64>)>,
    pub sim: Option<SimConfig>,
    #[serde(skip)]
    pub output: OutputSpec,
}

impl RunSpec {
    pub fn grid(&self, name: &str) -> Option<&[f64]> {
        self.grids.iter().find(|(n, _)| n == name).map(|(_, v)| v.as_slice())
    }
}

/// The on-disk parameter file. Unknown keys are rejected.
#[derive(Debug, Clone, Default, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ParamFile {
    #[serde(rename = "G")]
    pub g: Option<f64>,
    pub eta: Option<f64>,
    pub eta_max: Option<f64>,
    pub p: Option<f64>,
    pub c: Option<f64>,
    pub eps0: Option<f64>,
    pub xi: Option<f64>,
    pub delta: Option<f64>,
    pub pfa: Option<f64>,
    pub gamma1: Option<f64>,
    pub gamma2: Option<f64>,
    #[serde(default)]
    pub grids: BTreeMap<String, GridSpec>,
    pub sim: Option<SimSection>,
}

#[derive(Debug, Clone, Default, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimSection {
    pub seed: Option<u64>,
    pub trials: Option<u64>,
    pub mode: Option<String>,
    pub eps: Option<f64>,
    pub m: Option<f64>,
}

impl ParamFile {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::validation(format!("cannot read {}: {e}", path.display())))?;
        Self::parse(&text)
    }

    pub fn parse(text: &str) -> Result<Self, CliError> {
        toml::from_str(text).map_err(|e| CliError::validation(format!("parameter file: {}", e.message())))
    }

    fn slot(&mut self, key: &str) -> Option<&mut Option<f64>> {
        Some(match key {
            "G" => &mut self.g,
            "eta" => &mut self.eta,
            "eta_max" => &mut self.eta_max,
            "p" => &mut self.p,
            "c" => &mut self.c,
            "eps0" => &mut self.eps0,
            "xi" => &mut self.xi,
            "delta" => &mut self.delta,
            "pfa" => &mut self.pfa,
            "gamma1" => &mut self.gamma1,
            "gamma2" => &mut self.gamma2,
            _ => return None,
        })
    }

    /// Applies one `key=value` override.
    pub fn set(&mut self, assignment: &str) -> Result<(), CliError> {
        let (key, value) = assignment
            .split_once('=')
            .ok_or_else(|| CliError::validation(format!("--set expects key=value, got `{assignment}`")))?;
        let key = key.trim();
        let value: f64 = value
            .trim()
            .parse()
            .map_err(|_| CliError::validation(format!("--set {key}: `{value}` is not a number")))?;
        let slot = self
            .slot(key)
            .ok_or_else(|| CliError::validation(format!("--set: unknown parameter `{key}`")))?;
        *slot = Some(value);
        Ok(())
    }

    /// Parameters with every unset field taken from the defaults. When
    /// `delta` and `pfa` are both given and `xi` is not, `xi` is derived.
    pub fn resolve_params(&self) -> Result<GameParams, CliError> {
        let d = GameParams::default();
        let mut params = GameParams {
            g: self.g.unwrap_or(d.g),
            eta: self.eta.unwrap_or(d.eta),
            eta_max: self.eta_max.unwrap_or(d.eta_max),
            p: self.p.unwrap_or(d.p),
            c: self.c.unwrap_or(d.c),
            eps0: self.eps0.unwrap_or(d.eps0),
            xi: self.xi.unwrap_or(d.xi),
            delta: self.delta,
            pfa: self.pfa,
            gamma1: self.gamma1.unwrap_or(d.gamma1),
            gamma2: self.gamma2.unwrap_or(d.gamma2),
        };
        if let (None, Some(delta), Some(pfa)) = (self.xi, self.delta, self.pfa) {
            params = params.with_hypothesis_test(delta, pfa);
        }
        params.xi = params.resolved_xi();
        params.validate()?;
        Ok(params)
    }
}

/// Raw inputs gathered from the command line.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub params_file: Option<PathBuf>,
    pub sets: Vec<String>,
    pub grids: Vec<String>,
    pub out: Option<PathBuf>,
    pub format: Option<Format>,
    pub seed: Option<u64>,
    pub trials: Option<u64>,
    pub mode: Option<String>,
}

pub fn parse_mode(s: &str) -> Result<SimMode, CliError> {
    match s {
        "continuous" | "continuous_formula" => Ok(SimMode::ContinuousFormula),
        "integer" | "integer_randomized" => Ok(SimMode::IntegerRandomized),
        other => Err(CliError::validation(format!(
            "unknown simulation mode `{other}` (expected continuous or integer)"
        ))),
    }
}

fn check_grid(name: &str, values: &[f64], params: &GameParams) -> Result<(), CliError> {
    let bad = |v: f64, why: &str| Err(CliError::validation(format!("grid `{name}` value {v}: {why}")));
    for &v in values {
        if !v.is_finite() {
            return bad(v, "must be finite");
        }
        match name {
            "eta" if !(v > 0.0 && v <= params.eta_max) => return bad(v, "must lie in (0, eta_max]"),
            "p" if v <= 0.0 => return bad(v, "must be positive"),
            "eps" if v <= 0.0 => return bad(v, "must be positive"),
            "m" if v < 0.0 => return bad(v, "must be nonnegative"),
            "gamma_ratio" if v <= 0.0 => return bad(v, "must be positive"),
            _ => {}
        }
    }
    Ok(())
}

/// Resolves a run from defaults, the optional file and the overrides.
pub fn resolve(command: Command, ov: &Overrides) -> Result<RunSpec, CliError> {
    let mut file = match &ov.params_file {
        Some(path) => ParamFile::load(path)?,
        None => ParamFile::default(),
    };
    for s in &ov.sets {
        file.set(s)?;
    }
    let params = file.resolve_params()?;
    let command = match (command, &file.sim) {
        (Command::Simulate { profile: None }, Some(section)) => match (section.eps, section.m) {
            (Some(e), Some(m)) => Command::Simulate { profile: Some((e, m)) },
            (None, None) => command,
            _ => return Err(CliError::validation("[sim] needs both eps and m, or neither")),
        },
        _ => command,
    };

    let mut named: BTreeMap<String, Vec<f64>> = BTreeMap::new();
    for (name, spec) in &file.grids {
        if !GRID_NAMES.contains(&name.as_str()) {
            return Err(CliError::validation(format!("parameter file: unknown grid `{name}`")));
        }
        named.insert(name.clone(), spec.resolve(name)?);
    }
    let axes = command.grid_axes();
    for g in &ov.grids {
        let (name, text) = g
            .split_once('=')
            .ok_or_else(|| CliError::validation(format!("--grid expects name=values, got `{g}`")))?;
        let name = name.trim();
        if !axes.iter().any(|(n, _)| *n == name) {
            return Err(CliError::validation(format!(
                "{} does not sweep `{name}`",
                command.name()
            )));
        }
        named.insert(name.to_string(), parse_grid(name, text)?);
    }
    let mut grids = Vec::new();
    for &(name, default) in axes {
        let values = match (named.remove(name), default) {
            (Some(v), _) => v,
            (None, Some(d)) => parse_grid(name, d)?,
            (None, None) => continue,
        };
        check_grid(name, &values, &params)?;
        grids.push((name.to_string(), values));
    }

    if let Command::Simulate { profile: Some((eps, m)) } = command {
        CertLevel::new(eps)?;
        if !(m >= 0.0 && m.is_finite()) {
            return Err(CliError::validation(format!("simulation intensity {m} must be finite and nonnegative")));
        }
    }
    if let Command::CompareMechanisms { belief: Some(b) } = command {
        if !(b > 0.0 && b.is_finite()) {
            return Err(CliError::validation(format!("belief {b} must be finite and positive")));
        }
    }

    let sim = match command {
        Command::Simulate { .. } => {
            let section = file.sim.clone().unwrap_or_default();
            let d = SimConfig::default();
            let mode = match ov.mode.as_deref().or(section.mode.as_deref()) {
                Some(m) => parse_mode(m)?,
                None => d.mode,
            };
            let trials = ov.trials.or(section.trials).unwrap_or(d.trials);
            if trials == 0 {
                return Err(CliError::validation("trials must be at least 1"));
            }
            Some(SimConfig {
                seed: ov.seed.or(section.seed).unwrap_or(d.seed),
                trials,
                mode,
            })
        }
        _ => None,
    };

    let format = match ov.format {
        Some(f) => f,
        None => match ov.out.as_ref().and_then(|p| p.extension()).and_then(|e| e.to_str()) {
            Some("jsonl") | Some("json") => Format::Jsonl,
            _ => Format::Csv,
        },
    };
    Ok(RunSpec {
        command,
        params,
        grids,
        sim,
        output: OutputSpec {
            path: ov.out.clone(),
            format,
        },
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_when_nothing_given() {
        let spec = resolve(Command::SolveNe, &Overrides::default()).unwrap();
        assert_eq!(spec.params, GameParams::default());
        assert!(spec.grids.is_empty());
        assert_eq!(spec.output.format, Format::Csv);
    }

    #[test]
    fn flags_beat_file() {
        let mut file = ParamFile::parse("p = 30\neta = 0.1\n[grids]\neta = [0.05, 0.1]\n").unwrap();
        file.set("p=40").unwrap();
        let params = file.resolve_params().unwrap();
        assert_eq!(params.p, 40.0);
        assert_eq!(params.eta, 0.1);
        assert_eq!(params.g, 2000.0);
    }

    #[test]
    fn strict_schema() {
        assert!(ParamFile::parse("q = 1").is_err());
        assert!(ParamFile::parse("[sim]\nseeds = 1").is_err());
        assert!(ParamFile::parse("p = \"x\"").is_err());
        let mut f = ParamFile::default();
        assert!(f.set("zeta=1").is_err());
        assert!(f.set("p").is_err());
        assert!(f.set("p=abc").is_err());
    }

    #[test]
    fn xi_derived_from_hypothesis_test() {
        let f = ParamFile::parse("delta = 0.005\npfa = 0.005").unwrap();
        let p = f.resolve_params().unwrap();
        assert!((p.xi - 0.99).abs() < 1e-15);
        let f = ParamFile::parse("delta = 0.01\npfa = 0.04\nxi = 1.0").unwrap();
        assert_eq!(f.resolve_params().unwrap().xi, 1.0);
    }

    #[test]
    fn grid_checks() {
        let ov = Overrides {
            grids: vec!["eta=0.1,0.3".into()],
            ..Default::default()
        };
        assert!(resolve(Command::SweepEta, &ov).is_err());
        let ov = Overrides {
            grids: vec!["p=1,2".into()],
            ..Default::default()
        };
        assert!(resolve(Command::SweepEta, &ov).is_err());
        let spec = resolve(Command::SweepP, &Overrides::default()).unwrap();
        assert_eq!(spec.grids[0].0, "eta");
        assert_eq!(spec.grids[1].1.len(), 20);
    }
}
