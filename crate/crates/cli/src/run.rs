//! Executes a resolved [`RunSpec`] and emits its table.

use std::io::Write;

use mu_audit::{
    auditor_best_response, auditor_payoff, classify_regime, compare_mechanisms, detect_prob,
    mixture_detect_prob, model_utility, operator_best_response, operator_payoff,
    regulatory_surplus, simulate_audit, solve_ne, solve_spe, sweep_eta, with_gamma_ratio,
    AuditError, CertLevel, EquilibriumOutcome, GameParams, Improvement, SimMode, SpeOutcome,
    StrategyProfile, TraConfig,
};
use rayon::prelude::*;
use serde_json::json;

use crate::config::{Command, Format, Player, RunSpec};
use crate::error::CliError;
use crate::table::{Cell, OutcomeRow, Table};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

/// Everything about a run that determines its output.
pub fn meta(spec: &RunSpec) -> serde_json::Value {
    json!({
        "tool": "mu-audit",
        "version": VERSION,
        "command": spec.command,
        "params": spec.params,
        "grids": spec.grids,
        "sim": spec.sim,
    })
}

fn header_line(spec: &RunSpec) -> String {
    format!(
        "mu-audit {VERSION} command={} params={} grids={} sim={}",
        spec.command.name(),
        json!(spec.params),
        json!(spec.grids),
        json!(spec.sim),
    )
}

/// Renders the table for `spec` in its output format.
pub fn render(spec: &RunSpec, table: &Table) -> Result<Vec<u8>, CliError> {
    let mut buf = Vec::new();
    match spec.output.format {
        Format::Csv => table.write_csv(&header_line(spec), &mut buf)?,
        Format::Jsonl => table.write_jsonl(&meta(spec), &mut buf)?,
    }
    Ok(buf)
}

/// Runs `spec`, writes its output, and reports failed rows as a solver
/// error after the completed rows have been written.
pub fn run(spec: &RunSpec) -> Result<Table, CliError> {
    let table = build_table(spec);
    let bytes = render(spec, &table)?;
    match &spec.output.path {
        Some(path) => std::fs::write(path, &bytes)?,
        None => {
            let mut out = std::io::stdout().lock();
            out.write_all(&bytes)?;
            out.flush()?;
        }
    }
    let errors = table.errors();
    if let Some(first) = errors.first() {
        return Err(CliError::Solver {
            failed_rows: errors.len(),
            first: first.to_string(),
        });
    }
    Ok(table)
}

pub fn build_table(spec: &RunSpec) -> Table {
    let p = &spec.params;
    match spec.command {
        Command::BestResponse { player } => best_response_table(spec, player),
        Command::SolveNe => outcome_table(&[], vec![ne_row(vec![], solve_ne(p))]),
        Command::SolveSpe => spe_table(spec),
        Command::Regimes => regimes_table(spec),
        Command::SweepEta => {
            let rows = sweep_eta(p, grid(spec, "eta"))
                .into_iter()
                .map(|r| ne_row(vec![("eta".into(), r.eta)], r.outcome))
                .collect();
            outcome_table(&["eta"], rows)
        }
        Command::SweepP => {
            let rows = lattice(grid(spec, "eta"), grid(spec, "p"))
                .into_par_iter()
                .map(|(eta, fine)| {
                    let local = GameParams { eta, p: fine, ..*p };
                    ne_row(vec![("eta".into(), eta), ("p".into(), fine)], solve_ne(&local))
                })
                .collect();
            outcome_table(&["eta", "p"], rows)
        }
        Command::CompareMechanisms { belief } => mechanisms_table(spec, belief),
        Command::Simulate { profile } => simulate_table(spec, profile),
    }
}

fn grid<'a>(spec: &'a RunSpec, name: &str) -> &'a [f64] {
    spec.grid(name).unwrap_or_default()
}

/// Outer-major product of two axes.
fn lattice(outer: &[f64], inner: &[f64]) -> Vec<(f64, f64)> {
    outer.iter().flat_map(|&a| inner.iter().map(move |&b| (a, b))).collect()
}

fn outcome_table(keys: &[&str], rows: Vec<OutcomeRow>) -> Table {
    let mut t = Table::new(OutcomeRow::columns(keys));
    t.rows = rows.iter().map(OutcomeRow::cells).collect();
    t
}

fn ne_row(keys: Vec<(String, f64)>, outcome: mu_audit::Result<EquilibriumOutcome>) -> OutcomeRow {
    match outcome {
        Ok(o) => OutcomeRow {
            keys,
            eps_star: Some(o.eps_star.value()),
            m_star: Some(o.m_star),
            detect: Some(o.detect),
            surplus: Some(o.surplus),
            auditor_payoff: Some(o.auditor_payoff),
            operator_payoff: Some(o.operator_payoff),
            residual: Some(o.diagnostics.residual),
            method: Some(o.diagnostics.method.as_str().into()),
            error: None,
        }
        .normalized(),
        Err(e) => OutcomeRow::failed(keys, e.to_string()).normalized(),
    }
}

/// Detection, surplus and both payoffs at an arbitrary profile.
fn profile_row(
    params: &GameParams,
    keys: Vec<(String, f64)>,
    eps: CertLevel,
    m: f64,
    method: &str,
) -> OutcomeRow {
    let eval = || -> mu_audit::Result<OutcomeRow> {
        let profile = StrategyProfile::new(eps, m)?;
        let aud = match auditor_payoff(params, profile) {
            Err(AuditError::UnboundedSocialCost) => f64::NEG_INFINITY,
            other => other?,
        };
        Ok(OutcomeRow {
            keys: keys.clone(),
            eps_star: Some(eps.value()),
            m_star: Some(m),
            detect: Some(detect_prob(params, profile)),
            surplus: Some(regulatory_surplus(params, profile)),
            auditor_payoff: Some(aud),
            operator_payoff: Some(operator_payoff(params, profile)?),
            residual: None,
            method: Some(method.into()),
            error: None,
        })
    };
    eval()
        .unwrap_or_else(|e| OutcomeRow::failed(keys.clone(), e.to_string()))
        .normalized()
}

fn best_response_table(spec: &RunSpec, player: Player) -> Table {
    let p = &spec.params;
    match player {
        Player::Auditor => {
            let rows = grid(spec, "eps")
                .par_iter()
                .map(|&e| {
                    let keys = vec![("eps".to_string(), e)];
                    match auditor_best_response(p, CertLevel::Finite(e)) {
                        Ok(r) => profile_row(p, keys, CertLevel::Finite(e), r.m, "auditor_closed_form"),
                        Err(err) => OutcomeRow::failed(keys, err.to_string()).normalized(),
                    }
                })
                .collect();
            outcome_table(&["eps"], rows)
        }
        Player::Operator => {
            let method = if p.is_ideal_detection() {
                "operator_closed_form"
            } else {
                "operator_numeric"
            };
            let rows = grid(spec, "m")
                .par_iter()
                .map(|&m| {
                    let keys = vec![("m".to_string(), m)];
                    match operator_best_response(p, m) {
                        Ok(eps) => profile_row(p, keys, eps, m, method),
                        Err(err) => OutcomeRow::failed(keys, err.to_string()).normalized(),
                    }
                })
                .collect();
            outcome_table(&["m"], rows)
        }
    }
}

fn spe_row(params: &GameParams, keys: Vec<(String, f64)>, spe: mu_audit::Result<SpeOutcome>) -> OutcomeRow {
    match spe {
        Ok(s) => OutcomeRow {
            keys,
            eps_star: Some(s.eps_d.value()),
            m_star: Some(s.m_d),
            detect: Some(detect_prob(params, StrategyProfile { eps: s.eps_d, m: s.m_d })),
            surplus: Some(s.surplus_d),
            auditor_payoff: Some(s.auditor_payoff_d),
            operator_payoff: Some(s.operator_payoff_d),
            residual: Some(s.diagnostics.foc_residual),
            method: Some("stackelberg".into()),
            error: None,
        }
        .normalized(),
        Err(e) => OutcomeRow::failed(keys, e.to_string()).normalized(),
    }
}

fn spe_table(spec: &RunSpec) -> Table {
    let p = &spec.params;
    match spec.grid("gamma_ratio") {
        None => outcome_table(&[], vec![spe_row(p, vec![], solve_spe(p))]),
        Some(ratios) => {
            let rows = ratios
                .par_iter()
                .map(|&r| {
                    let local = with_gamma_ratio(p, r);
                    spe_row(&local, vec![("gamma_ratio".into(), r)], solve_spe(&local))
                })
                .collect();
            outcome_table(&["gamma_ratio"], rows)
        }
    }
}

pub const REGIME_COLUMNS: &[&str] = &["eta", "p", "p_th", "eta_th", "regime", "direction", "error"];

fn regimes_table(spec: &RunSpec) -> Table {
    let mut t = Table::new(REGIME_COLUMNS.iter().map(|s| s.to_string()).collect());
    t.rows = lattice(grid(spec, "eta"), grid(spec, "p"))
        .into_par_iter()
        .map(|(eta, fine)| {
            let mut row = vec![Cell::num(eta), Cell::num(fine)];
            match classify_regime(&GameParams { eta, p: fine, ..spec.params }) {
                Ok(r) => row.extend([
                    Cell::num(r.p_th),
                    Cell::opt(r.eta_th),
                    Cell::text(r.regime.as_str()),
                    Cell::text(r.direction.as_str()),
                    Cell::Empty,
                ]),
                Err(e) => {
                    row.extend([Cell::Empty, Cell::Empty, Cell::Empty, Cell::Empty]);
                    row.push(Cell::text(e.to_string()));
                }
            }
            row
        })
        .collect();
    t
}

pub const MECHANISM_COLUMNS: &[&str] = &[
    "eta",
    "tra_eps",
    "tra_m",
    "tra_auditor_payoff",
    "tra_operator_payoff",
    "sua_eps",
    "sua_m",
    "sua_auditor_payoff",
    "sua_operator_payoff",
    "sda_eps",
    "sda_m",
    "sda_auditor_payoff",
    "sda_operator_payoff",
    "sua_vs_tra_auditor",
    "sua_vs_tra_operator",
    "sda_vs_tra_auditor",
    "sda_vs_tra_operator",
    "sda_vs_sua_auditor",
    "sda_vs_sua_operator",
    "absolute_gaps",
    "error",
];

fn mechanisms_table(spec: &RunSpec, belief: Option<f64>) -> Table {
    let mut t = Table::new(MECHANISM_COLUMNS.iter().map(|s| s.to_string()).collect());
    t.rows = grid(spec, "eta")
        .par_iter()
        .map(|&eta| {
            let local = GameParams { eta, ..spec.params };
            let config = match belief {
                Some(b) => TraConfig::with_belief(CertLevel::Finite(b)),
                None => TraConfig::default_for(&local),
            };
            let mut row = vec![Cell::num(eta)];
            match compare_mechanisms(&local, &config) {
                Ok(c) => {
                    for pt in [c.tra, c.sua, c.sda] {
                        row.extend([
                            Cell::num(pt.eps.value()),
                            Cell::num(pt.m),
                            Cell::num(pt.auditor_payoff),
                            Cell::num(pt.operator_payoff),
                        ]);
                    }
                    let named = [
                        ("sua_vs_tra_auditor", c.sua_vs_tra.auditor),
                        ("sua_vs_tra_operator", c.sua_vs_tra.operator),
                        ("sda_vs_tra_auditor", c.sda_vs_tra.auditor),
                        ("sda_vs_tra_operator", c.sda_vs_tra.operator),
                        ("sda_vs_sua_auditor", c.sda_vs_sua.auditor),
                        ("sda_vs_sua_operator", c.sda_vs_sua.operator),
                    ];
                    row.extend(named.iter().map(|(_, imp)| Cell::num(imp.value())));
                    let absolute: Vec<&str> = named
                        .iter()
                        .filter(|(_, imp)| matches!(imp, Improvement::AbsoluteGap(_)))
                        .map(|(n, _)| *n)
                        .collect();
                    row.push(if absolute.is_empty() {
                        Cell::Empty
                    } else {
                        Cell::text(absolute.join(";"))
                    });
                    row.push(Cell::Empty);
                }
                Err(e) => {
                    row.resize(MECHANISM_COLUMNS.len() - 1, Cell::Empty);
                    row.push(Cell::text(e.to_string()));
                }
            }
            row
        })
        .collect();
    t
}

pub const SIMULATION_COLUMNS: &[&str] = &[
    "eps",
    "m",
    "mode",
    "detect_hat",
    "detect_exact",
    "half_width_95",
    "surplus_hat",
    "surplus_exact",
    "surplus_half_width_95",
    "operator_payoff_hat",
    "operator_payoff_exact",
    "operator_payoff_half_width_95",
    "error",
];

fn simulate_table(spec: &RunSpec, profile: Option<(f64, f64)>) -> Table {
    let p = &spec.params;
    let config = spec.sim.unwrap_or_default();
    let mut t = Table::new(SIMULATION_COLUMNS.iter().map(|s| s.to_string()).collect());
    let profile = match profile {
        Some((e, m)) => Ok(StrategyProfile::finite(e, m)),
        None => solve_ne(p).map(|o| o.profile()),
    };
    let row = profile.and_then(|prof| {
        let r = simulate_audit(p, prof, &config)?;
        let eps = prof.eps.value();
        let exact_detect = match config.mode {
            SimMode::ContinuousFormula => detect_prob(p, prof),
            SimMode::IntegerRandomized => mixture_detect_prob(p, prof),
        };
        let u = model_utility(p, prof.eps)?;
        let stake = p.p + u + p.loss_scale() / p.eps0;
        Ok(vec![
            Cell::num(eps),
            Cell::num(prof.m),
            Cell::text(config.mode.as_str()),
            Cell::num(r.detect_hat),
            Cell::num(exact_detect),
            Cell::num(r.half_width_95),
            Cell::num(r.surplus_hat),
            Cell::num(p.p * exact_detect - p.c * prof.m),
            Cell::num(r.surplus_half_width_95),
            Cell::num(r.operator_payoff_hat),
            Cell::num(u - stake * exact_detect),
            Cell::num(r.operator_payoff_half_width_95),
            Cell::Empty,
        ])
    });
    t.rows.push(row.unwrap_or_else(|e: AuditError| {
        let mut row = vec![Cell::Empty; SIMULATION_COLUMNS.len() - 1];
        row.push(Cell::text(e.to_string()));
        row
    }));
    t
}
