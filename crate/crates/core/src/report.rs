//! Report tables and their csv/json serialization.
//!
//! Every report carries the metadata needed to reproduce it bit-identically. Csv numbers
//! use 17 significant digits; json numbers use the shortest round-trip representation.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::error::{precondition, Error, Result};
use crate::experiments::{DivergenceVerdict, VerdictStatus};

pub const SCHEMA_VERSION: u32 = 1;

/// run parameters embedded in every report
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Metadata {
    pub version: String,
    pub seed: u64,
    pub bump_id: String,
    pub length: f64,
    pub cutoff_rule: String,
    pub band: f64,
    pub fit_residual_max: f64,
    pub eps: f64,
    pub noise_floor: f64,
    pub zero_mask_floor: f64,
    pub modulation_enlargement: i32,
}

impl Metadata {
    pub fn new(seed: u64, length: f64) -> Self {
        Metadata {
            version: crate::VERSION.to_string(),
            seed,
            bump_id: crate::spectral::BUMP_ID.to_string(),
            length,
            cutoff_rule: crate::experiments::CUTOFF_RULE.to_string(),
            band: crate::experiments::DEFAULT_BAND,
            fit_residual_max: crate::experiments::FIT_RESIDUAL_MAX,
            eps: crate::nonlinearity::DEFAULT_EPS,
            noise_floor: crate::experiments::NOISE_FLOOR,
            zero_mask_floor: crate::nonlinearity::ZERO_MASK_FLOOR,
            modulation_enlargement: crate::spectral::MODULATION_ENLARGEMENT,
        }
    }

    fn pairs(&self) -> Vec<(&'static str, String)> {
        vec![
            ("version", self.version.clone()),
            ("seed", self.seed.to_string()),
            ("bump_id", self.bump_id.clone()),
            ("length", num(self.length)),
            ("cutoff_rule", self.cutoff_rule.clone()),
            ("band", num(self.band)),
            ("fit_residual_max", num(self.fit_residual_max)),
            ("eps", num(self.eps)),
            ("noise_floor", num(self.noise_floor)),
            ("zero_mask_floor", num(self.zero_mask_floor)),
            ("modulation_enlargement", self.modulation_enlargement.to_string()),
        ]
    }

    fn from_pairs(pairs: &[(String, String)]) -> Result<Self> {
        let get = |k: &str| -> Result<&str> {
            pairs
                .iter()
                .find(|(a, _)| a == k)
                .map(|(_, v)| v.as_str())
                .ok_or_else(|| Error::Precondition(format!("report metadata lacks `{k}`")))
        };
        let f = |k: &str| -> Result<f64> { parse_num(get(k)?) };
        Ok(Metadata {
            version: get("version")?.to_string(),
            seed: get("seed")?.parse().map_err(|_| bad("seed"))?,
            bump_id: get("bump_id")?.to_string(),
            length: f("length")?,
            cutoff_rule: get("cutoff_rule")?.to_string(),
            band: f("band")?,
            fit_residual_max: f("fit_residual_max")?,
            eps: f("eps")?,
            noise_floor: f("noise_floor")?,
            zero_mask_floor: f("zero_mask_floor")?,
            modulation_enlargement: get("modulation_enlargement")?
                .parse()
                .map_err(|_| bad("modulation_enlargement"))?,
        })
    }
}

fn bad(what: &str) -> Error {
    Error::Precondition(format!("malformed report field `{what}`"))
}

/// one table cell
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Cell {
    Empty,
    Int(i64),
    Num(f64),
    Text(String),
}

impl From<f64> for Cell {
    fn from(v: f64) -> Self {
        Cell::Num(v)
    }
}

impl From<usize> for Cell {
    fn from(v: usize) -> Self {
        Cell::Int(v as i64)
    }
}

impl From<&str> for Cell {
    fn from(v: &str) -> Self {
        Cell::Text(v.to_string())
    }
}

impl From<String> for Cell {
    fn from(v: String) -> Self {
        Cell::Text(v)
    }
}

impl Cell {
    pub fn as_f64(&self) -> Option<f64> {
        match self {
            Cell::Num(v) => Some(*v),
            Cell::Int(v) => Some(*v as f64),
            _ => None,
        }
    }

    fn render(&self) -> String {
        match self {
            Cell::Empty => String::new(),
            Cell::Int(v) => v.to_string(),
            Cell::Num(v) => num(*v),
            Cell::Text(t) => t.clone(),
        }
    }

    fn parse(field: &str) -> Cell {
        if field.is_empty() {
            Cell::Empty
        } else if let Ok(v) = field.parse::<i64>() {
            Cell::Int(v)
        } else if let Ok(v) = parse_num(field) {
            Cell::Num(v)
        } else {
            Cell::Text(field.to_string())
        }
    }
}

/// 17 significant digits, enough for an exact f64 round trip
pub fn num(v: f64) -> String {
    format!("{v:.16e}")
}

fn parse_num(s: &str) -> Result<f64> {
    s.parse::<f64>().map_err(|_| Error::Precondition(format!("`{s}` is not a number")))
}

/// a verdict attached to one (series, s) group of rows
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VerdictRow {
    pub series: String,
    pub s: f64,
    pub verdict: DivergenceVerdict,
    pub note: String,
}

/// a labelled table with verdicts, notes and metadata
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub schema_version: u32,
    pub command: String,
    pub metadata: Metadata,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
    pub verdicts: Vec<VerdictRow>,
    pub notes: Vec<String>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Format {
    Csv,
    Json,
}

impl std::str::FromStr for Format {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "csv" => Ok(Format::Csv),
            "json" => Ok(Format::Json),
            other => precondition(format!("unknown format `{other}`, expected csv or json")),
        }
    }
}

// csv fields are identifiers and numbers only; separators inside free text are replaced
fn clean(text: &str) -> String {
    text.chars().map(|c| if c == ',' || c == '\n' || c == '\r' { ';' } else { c }).collect()
}

const VERDICT_COLUMNS: [&str; 4] = ["status", "exponent", "confidence", "note"];

impl Report {
    pub fn new(command: &str, metadata: Metadata, columns: &[&str]) -> Self {
        Report {
            schema_version: SCHEMA_VERSION,
            command: command.to_string(),
            metadata,
            columns: columns.iter().map(|c| c.to_string()).collect(),
            rows: Vec::new(),
            verdicts: Vec::new(),
            notes: Vec::new(),
        }
    }

    pub fn push_row(&mut self, row: Vec<Cell>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    pub fn column(&self, name: &str) -> Option<usize> {
        self.columns.iter().position(|c| c == name)
    }

    /// one-line summaries of the verdicts
    pub fn summary_lines(&self) -> Vec<String> {
        self.verdicts
            .iter()
            .map(|v| {
                let exp = v.verdict.exponent.map(|e| format!(" exponent {e:.3}")).unwrap_or_default();
                let note = if v.note.is_empty() { String::new() } else { format!(" ({})", v.note) };
                format!("{} s={}: {}{exp}{note}", v.series, v.s, v.verdict.status.as_str())
            })
            .collect()
    }

    pub fn serialize(&self, format: Format) -> Result<Vec<u8>> {
        match format {
            Format::Json => {
                let mut out = serde_json::to_vec_pretty(self).map_err(|e| Error::Numerical(e.to_string()))?;
                out.push(b'\n');
                Ok(out)
            }
            Format::Csv => Ok(self.to_csv().into_bytes()),
        }
    }

    pub fn parse(bytes: &[u8], format: Format) -> Result<Report> {
        match format {
            Format::Json => serde_json::from_slice(bytes).map_err(|e| Error::Precondition(e.to_string())),
            Format::Csv => {
                let text = std::str::from_utf8(bytes).map_err(|e| Error::Precondition(e.to_string()))?;
                Report::from_csv(text)
            }
        }
    }

    fn to_csv(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "# schema_version={}", self.schema_version);
        let _ = writeln!(out, "# command={}", clean(&self.command));
        for (k, v) in self.metadata.pairs() {
            let _ = writeln!(out, "# {k}={}", clean(&v));
        }
        for n in &self.notes {
            let _ = writeln!(out, "# note={}", clean(n));
        }
        let mut header = vec!["kind".to_string()];
        header.extend(self.columns.iter().map(|c| clean(c)));
        header.extend(VERDICT_COLUMNS.iter().map(|c| c.to_string()));
        let _ = writeln!(out, "{}", header.join(","));
        for row in &self.rows {
            let mut cells = vec!["row".to_string()];
            cells.extend(row.iter().map(|c| clean(&c.render())));
            cells.extend(std::iter::repeat_n(String::new(), VERDICT_COLUMNS.len()));
            let _ = writeln!(out, "{}", cells.join(","));
        }
        for v in &self.verdicts {
            let mut cells = vec!["verdict".to_string()];
            for c in &self.columns {
                cells.push(match c.as_str() {
                    "series" => clean(&v.series),
                    "s" => num(v.s),
                    _ => String::new(),
                });
            }
            cells.push(v.verdict.status.as_str().to_string());
            cells.push(v.verdict.exponent.map(num).unwrap_or_default());
            cells.push(num(v.verdict.confidence));
            cells.push(clean(&v.note));
            let _ = writeln!(out, "{}", cells.join(","));
        }
        out
    }

    fn from_csv(text: &str) -> Result<Report> {
        let mut meta = Vec::new();
        let mut notes = Vec::new();
        let mut lines = text.lines();
        let header = loop {
            let line = lines.next().ok_or_else(|| Error::Precondition("csv report has no header".into()))?;
            if let Some(rest) = line.strip_prefix("# ") {
                let (k, v) = rest.split_once('=').ok_or_else(|| bad("comment"))?;
                if k == "note" {
                    notes.push(v.to_string());
                } else {
                    meta.push((k.to_string(), v.to_string()));
                }
            } else {
                break line;
            }
        };
        let head: Vec<&str> = header.split(',').collect();
        let nv = VERDICT_COLUMNS.len();
        if head.len() < nv + 1 || head[0] != "kind" || head[head.len() - nv..] != VERDICT_COLUMNS {
            return precondition("csv report header is malformed");
        }
        let columns: Vec<String> = head[1..head.len() - nv].iter().map(|s| s.to_string()).collect();
        let get = |k: &str| meta.iter().find(|(a, _)| a == k).map(|(_, v)| v.clone());
        let mut report = Report {
            schema_version: get("schema_version").ok_or_else(|| bad("schema_version"))?.parse().map_err(|_| bad("schema_version"))?,
            command: get("command").ok_or_else(|| bad("command"))?,
            metadata: Metadata::from_pairs(&meta)?,
            columns,
            rows: Vec::new(),
            verdicts: Vec::new(),
            notes,
        };
        let series_col = report.column("series");
        let s_col = report.column("s");
        for line in lines {
            if line.is_empty() {
                continue;
            }
            let f: Vec<&str> = line.split(',').collect();
            if f.len() != head.len() {
                return precondition(format!("csv row has {} fields, header has {}", f.len(), head.len()));
            }
            let body = &f[1..f.len() - nv];
            match f[0] {
                "row" => report.rows.push(body.iter().map(|c| Cell::parse(c)).collect()),
                "verdict" => {
                    let tail = &f[f.len() - nv..];
                    let series = series_col.map(|i| body[i].to_string()).unwrap_or_default();
                    let s = match s_col {
                        Some(i) => parse_num(body[i])?,
                        None => return precondition("verdict rows need an `s` column"),
                    };
                    let status = VerdictStatus::parse(tail[0])?;
                    let exponent = if tail[1].is_empty() { None } else { Some(parse_num(tail[1])?) };
                    let confidence = parse_num(tail[2])?;
                    report.verdicts.push(VerdictRow {
                        series,
                        s,
                        verdict: DivergenceVerdict { status, exponent, confidence },
                        note: tail[3].to_string(),
                    });
                }
                other => return precondition(format!("unknown csv row kind `{other}`")),
            }
        }
        Ok(report)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> Report {
        let mut r = Report::new("scan-abs", Metadata::new(7, 16.0), &["series", "p", "q", "s", "n", "value"]);
        r.push_row(vec!["abs".into(), Cell::Empty, 2.0.into(), 1.25.into(), 4096usize.into(), (1.0 / 3.0).into()]);
        r.push_row(vec!["abs".into(), Cell::Empty, 2.0.into(), 1.25.into(), 8192usize.into(), 0.1.into()]);
        r.verdicts.push(VerdictRow {
            series: "abs".into(),
            s: 1.25,
            verdict: DivergenceVerdict { status: VerdictStatus::Diverged, exponent: Some(1.0), confidence: 0.0 },
            note: "x, y".into(),
        });
        r.notes.push("expected threshold 1.5".into());
        r
    }

    #[test]
    fn csv_round_trip() {
        let mut r = sample();
        let bytes = r.serialize(Format::Csv).unwrap();
        let back = Report::parse(&bytes, Format::Csv).unwrap();
        // commas in free text are replaced by construction
        r.verdicts[0].note = "x; y".into();
        assert_eq!(back, r);
        assert!(!bytes.contains(&b'\r'));
    }

    #[test]
    fn json_round_trip() {
        let r = sample();
        let bytes = r.serialize(Format::Json).unwrap();
        let text = String::from_utf8(bytes.clone()).unwrap();
        assert!(text.contains("\"schema_version\": 1"));
        assert_eq!(Report::parse(&bytes, Format::Json).unwrap(), r);
    }

    #[test]
    fn empty_report_is_header_only() {
        let r = Report::new("scan-abs", Metadata::new(0, 16.0), &["series", "s", "n", "value"]);
        let text = String::from_utf8(r.serialize(Format::Csv).unwrap()).unwrap();
        let data: Vec<&str> = text.lines().filter(|l| !l.starts_with('#')).collect();
        assert_eq!(data, vec!["kind,series,s,n,value,status,exponent,confidence,note"]);
        assert_eq!(Report::parse(text.as_bytes(), Format::Csv).unwrap(), r);
    }

    #[test]
    fn numbers_use_seventeen_digits() {
        assert_eq!(num(0.1), "1.0000000000000001e-1");
        for v in [0.1, 1.0 / 3.0, 1e-300, 6.02e23, -2.5] {
            assert_eq!(num(v).parse::<f64>().unwrap(), v);
        }
    }

    #[test]
    fn metadata_is_embedded() {
        let text = String::from_utf8(sample().serialize(Format::Csv).unwrap()).unwrap();
        for key in ["version", "seed=7", "bump_id=psi-ratio-v1", "length", "cutoff_rule", "band", "eps"] {
            assert!(text.contains(&format!("# {key}")), "{key}");
        }
    }
}
