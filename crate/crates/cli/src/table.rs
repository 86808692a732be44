//! Tabular output: fixed column schemas, 12-significant-digit numbers, CSV
//! and JSON Lines writers, and the matching readers.

use std::io::{BufRead, Write};

use serde_json::{json, Map, Value as Json};

use crate::error::CliError;

/// Columns shared by every equilibrium-style table, after the sweep keys.
pub const OUTCOME_COLUMNS: &[&str] = &[
    "eps_star",
    "m_star",
    "detect",
    "surplus",
    "auditor_payoff",
    "operator_payoff",
    "residual",
    "method",
];

/// Columns holding text rather than numbers.
const TEXT_COLUMNS: &[&str] = &["method", "error", "regime", "direction", "mode", "absolute_gaps"];

pub fn is_text_column(name: &str) -> bool {
    TEXT_COLUMNS.contains(&name)
}

/// Rounds to 12 significant digits. Rounded values print and re-parse
/// exactly, which is what makes emitted rows round-trip.
pub fn round12(x: f64) -> f64 {
    if !x.is_finite() || x == 0.0 {
        return x;
    }
    format!("{x:.11e}").parse().expect("formatted float re-parses")
}

pub fn format_num(x: f64) -> String {
    if x.is_nan() {
        "nan".to_string()
    } else {
        let r = round12(x);
        if r != 0.0 && r.is_finite() && !(1e-4..1e15).contains(&r.abs()) {
            format!("{r:e}")
        } else {
            format!("{r}")
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Num(f64),
    Text(String),
    Empty,
}

impl Cell {
    pub fn num(x: f64) -> Self {
        Cell::Num(round12(x))
    }

    pub fn text(s: impl Into<String>) -> Self {
        Cell::Text(s.into())
    }

    pub fn opt(x: Option<f64>) -> Self {
        x.map_or(Cell::Empty, Cell::num)
    }

    fn render(&self) -> String {
        match self {
            Cell::Num(x) => format_num(*x),
            Cell::Text(s) => s.clone(),
            Cell::Empty => String::new(),
        }
    }

    fn to_json(&self) -> Json {
        match self {
            Cell::Num(x) if x.is_finite() => json!(x),
            Cell::Num(x) => Json::String(format_num(*x)),
            Cell::Text(s) => Json::String(s.clone()),
            Cell::Empty => Json::Null,
        }
    }

    fn parse(column: &str, raw: &str) -> Result<Self, CliError> {
        if raw.is_empty() {
            return Ok(Cell::Empty);
        }
        if is_text_column(column) {
            return Ok(Cell::Text(raw.to_string()));
        }
        raw.parse()
            .map(Cell::Num)
            .map_err(|_| CliError::validation(format!("column `{column}`: `{raw}` is not a number")))
    }

    fn from_json(column: &str, v: &Json) -> Result<Self, CliError> {
        match v {
            Json::Null => Ok(Cell::Empty),
            Json::Number(n) => Ok(Cell::Num(n.as_f64().unwrap_or(f64::NAN))),
            Json::String(s) => Cell::parse(column, s),
            other => Err(CliError::validation(format!("column `{column}`: unexpected {other}"))),
        }
    }

    pub fn as_num(&self) -> Option<f64> {
        match self {
            Cell::Num(x) => Some(*x),
            _ => None,
        }
    }

    pub fn as_text(&self) -> Option<&str> {
        match self {
            Cell::Text(s) => Some(s),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new(columns: Vec<String>) -> Self {
        Self { columns, rows: Vec::new() }
    }

    pub fn column(&self, name: &str) -> Option<usize> {
        self.columns.iter().position(|c| c == name)
    }

    /// Rows whose `error` cell is set.
    pub fn errors(&self) -> Vec<&str> {
        let Some(i) = self.column("error") else { return Vec::new() };
        self.rows.iter().filter_map(|r| r[i].as_text()).collect()
    }

    pub fn write_csv(&self, header: &str, out: &mut impl Write) -> Result<(), CliError> {
        writeln!(out, "# {header}")?;
        let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(out);
        let io = |e: csv::Error| CliError::Io(e.into());
        w.write_record(&self.columns).map_err(io)?;
        for row in &self.rows {
            w.write_record(row.iter().map(Cell::render)).map_err(io)?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn write_jsonl(&self, meta: &Json, out: &mut impl Write) -> Result<(), CliError> {
        writeln!(out, "{}", json!({ "meta": meta }))?;
        for row in &self.rows {
            // Objects are built by hand so keys keep the column order.
            let fields: Vec<String> = self
                .columns
                .iter()
                .zip(row)
                .map(|(c, v)| format!("{}:{}", Json::String(c.clone()), v.to_json()))
                .collect();
            writeln!(out, "{{{}}}", fields.join(","))?;
        }
        Ok(())
    }

    pub fn read_csv(input: impl std::io::Read) -> Result<Self, CliError> {
        let mut r = csv::ReaderBuilder::new().comment(Some(b'#')).from_reader(input);
        let bad = |e: csv::Error| CliError::validation(format!("csv: {e}"));
        let columns: Vec<String> = r.headers().map_err(bad)?.iter().map(String::from).collect();
        let mut table = Table::new(columns);
        for rec in r.records() {
            let rec = rec.map_err(bad)?;
            let row = table
                .columns
                .iter()
                .zip(rec.iter())
                .map(|(c, raw)| Cell::parse(c, raw))
                .collect::<Result<Vec<_>, _>>()?;
            table.rows.push(row);
        }
        Ok(table)
    }

    /// Reads JSON Lines output, returning the table and its meta object.
    pub fn read_jsonl(input: impl BufRead) -> Result<(Self, Json), CliError> {
        let mut lines = input.lines();
        let bad = |e: serde_json::Error| CliError::validation(format!("jsonl: {e}"));
        let first = lines.next().ok_or_else(|| CliError::validation("jsonl: empty input"))??;
        let mut meta: Map<String, Json> = serde_json::from_str(&first).map_err(bad)?;
        let meta = meta.remove("meta").ok_or_else(|| CliError::validation("jsonl: missing meta line"))?;
        let mut table: Option<Table> = None;
        for line in lines {
            let line = line?;
            let obj: Json = serde_json::from_str(&line).map_err(bad)?;
            let Json::Object(obj) = obj else {
                return Err(CliError::validation("jsonl: row is not an object"));
            };
            // Column order is recovered from the raw line; `Map` sorts keys.
            let t = table.get_or_insert_with(|| Table::new(key_order(&line)));
            let row = t
                .columns
                .iter()
                .map(|c| Cell::from_json(c, obj.get(c).unwrap_or(&Json::Null)))
                .collect::<Result<Vec<_>, _>>()?;
            t.rows.push(row);
        }
        Ok((table.unwrap_or_else(|| Table::new(Vec::new())), meta))
    }
}

/// Top-level keys of a flat JSON object in textual order.
fn key_order(line: &str) -> Vec<String> {
    let mut keys = Vec::new();
    let mut de = serde_json::Deserializer::from_str(line);
    struct Keys<'a>(&'a mut Vec<String>);
    impl<'de> serde::de::Visitor<'de> for Keys<'_> {
        type Value = ();
        fn expecting(&self, f: &mut std::fmt::Formatter) -> std::fmt::Result {
            f.write_str("an object")
        }
        fn visit_map<A: serde::de::MapAccess<'de>>(self, mut map: A) -> Result<(), A::Error> {
            while let Some((k, _)) = map.next_entry::<String, serde::de::IgnoredAny>()? {
                self.0.push(k);
            }
            Ok(())
        }
    }
    let _ = serde::Deserializer::deserialize_map(&mut de, Keys(&mut keys));
    keys
}

/// Typed form of an equilibrium-style row.
#[derive(Debug, Clone, PartialEq)]
pub struct OutcomeRow {
    pub keys: Vec<(String, f64)>,
    pub eps_star: Option<f64>,
    pub m_star: Option<f64>,
    pub detect: Option<f64>,
    pub surplus: Option<f64>,
    pub auditor_payoff: Option<f64>,
    pub operator_payoff: Option<f64>,
    pub residual: Option<f64>,
    pub method: Option<String>,
    pub error: Option<String>,
}

impl OutcomeRow {
    pub fn columns(keys: &[&str]) -> Vec<String> {
        keys.iter()
            .chain(OUTCOME_COLUMNS)
            .chain(std::iter::once(&"error"))
            .map(|s| s.to_string())
            .collect()
    }

    /// Row with every value already rounded as it will be emitted.
    pub fn normalized(mut self) -> Self {
        for (_, v) in &mut self.keys {
            *v = round12(*v);
        }
        for v in [
            &mut self.eps_star,
            &mut self.m_star,
            &mut self.detect,
            &mut self.surplus,
            &mut self.auditor_payoff,
            &mut self.operator_payoff,
            &mut self.residual,
        ] {
            *v = v.map(round12);
        }
        self
    }

    pub fn failed(keys: Vec<(String, f64)>, error: String) -> Self {
        Self {
            keys,
            eps_star: None,
            m_star: None,
            detect: None,
            surplus: None,
            auditor_payoff: None,
            operator_payoff: None,
            residual: None,
            method: None,
            error: Some(error),
        }
    }

    pub fn cells(&self) -> Vec<Cell> {
        let mut cells: Vec<Cell> = self.keys.iter().map(|(_, v)| Cell::num(*v)).collect();
        cells.extend(
            [
                self.eps_star,
                self.m_star,
                self.detect,
                self.surplus,
                self.auditor_payoff,
                self.operator_payoff,
                self.residual,
            ]
            .map(Cell::opt),
        );
        for t in [&self.method, &self.error] {
            cells.push(t.as_ref().map_or(Cell::Empty, |s| Cell::text(s.clone())));
        }
        cells
    }

    pub fn parse(columns: &[String], cells: &[Cell]) -> Result<Self, CliError> {
        let n_keys = columns
            .len()
            .checked_sub(OUTCOME_COLUMNS.len() + 1)
            .ok_or_else(|| CliError::validation("not an outcome table"))?;
        if columns[n_keys..] != OutcomeRow::columns(&[])[..] || cells.len() != columns.len() {
            return Err(CliError::validation("not an outcome table"));
        }
        let num = |i: usize| cells[i].as_num();
        let text = |i: usize| cells[i].as_text().map(String::from);
        let keys = (0..n_keys)
            .map(|i| {
                num(i)
                    .map(|v| (columns[i].clone(), v))
                    .ok_or_else(|| CliError::validation(format!("missing key `{}`", columns[i])))
            })
            .collect::<Result<Vec<_>, _>>()?;
        let b = n_keys;
        Ok(Self {
            keys,
            eps_star: num(b),
            m_star: num(b + 1),
            detect: num(b + 2),
            surplus: num(b + 3),
            auditor_payoff: num(b + 4),
            operator_payoff: num(b + 5),
            residual: num(b + 6),
            method: text(b + 7),
            error: text(b + 8),
        })
    }
}
