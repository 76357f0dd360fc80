//! Reading joint tables from JSON or CSV.
//!
//! JSON: `{"x_labels": [...], "y_labels": [...], "pxy": [[...]]}` with rows
//! indexed by X, or `{"pxyw": [[[...]]]}` indexed `[x][y][w]` for the
//! observation model (labels optional, plus `w_labels`).
//!
//! CSV: the header row holds the Y labels (its first cell is ignored), each
//! further row starts with an X label followed by masses. Lines starting
//! with `#` are comments.

use std::fs;
use std::path::Path;

use perfpriv_core::probability::MASS_TOL;
use perfpriv_core::{JointPmf, JointPmf3, Matrix};
use serde::Deserialize;
use sha2::{Digest, Sha256};

use crate::error::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Json,
    Csv,
}

impl Format {
    pub fn as_str(self) -> &'static str {
        match self {
            Format::Json => "json",
            Format::Csv => "csv",
        }
    }
}

#[derive(Debug, Clone)]
pub enum Table {
    Pair(JointPmf),
    Triple(JointPmf3),
}

#[derive(Debug, Clone)]
pub struct InputDocument {
    pub format: Format,
    pub x_labels: Vec<String>,
    pub y_labels: Vec<String>,
    /// Empty for two-way tables.
    pub w_labels: Vec<String>,
    pub table: Table,
    /// Original total mass when `--normalize` had to rescale.
    pub rescaled_from: Option<f64>,
}

impl InputDocument {
    pub fn dims(&self) -> Vec<usize> {
        match &self.table {
            Table::Pair(j) => vec![j.x_len(), j.y_len()],
            Table::Triple(j) => {
                let (x, y, w) = j.dims();
                vec![x, y, w]
            }
        }
    }

    fn masses(&self) -> &[f64] {
        match &self.table {
            Table::Pair(j) => j.table().as_slice(),
            Table::Triple(j) => j.as_slice(),
        }
    }

    /// SHA-256 over the table kind, its dimensions and the normalized masses
    /// (little-endian IEEE bits). Labels and file format do not enter.
    pub fn digest(&self) -> String {
        let mut h = Sha256::new();
        h.update(match self.table {
            Table::Pair(_) => b"pxy".as_slice(),
            Table::Triple(_) => b"pxyw".as_slice(),
        });
        for d in self.dims() {
            h.update((d as u64).to_le_bytes());
        }
        for v in self.masses() {
            h.update(v.to_le_bytes());
        }
        hex::encode(h.finalize())
    }
}

/// Reads `path`, choosing the format from the extension or, failing that,
/// from the first non-blank character.
pub fn load(path: &Path, normalize: bool) -> Result<InputDocument, CliError> {
    let text = fs::read_to_string(path).map_err(|e| CliError::Io {
        path: path.display().to_string(),
        msg: e.to_string(),
    })?;
    let ext = path
        .extension()
        .and_then(|e| e.to_str())
        .map(str::to_ascii_lowercase);
    let format = match ext.as_deref() {
        Some("json") => Format::Json,
        Some("csv") => Format::Csv,
        _ => sniff(&text),
    };
    parse(&text, format, normalize)
}

pub fn sniff(text: &str) -> Format {
    match text.trim_start().chars().next() {
        Some('{') => Format::Json,
        _ => Format::Csv,
    }
}

pub fn parse(text: &str, format: Format, normalize: bool) -> Result<InputDocument, CliError> {
    if text.trim().is_empty() {
        return Err(CliError::Parse {
            line: 1,
            column: 1,
            msg: "input is empty".into(),
        });
    }
    let raw = match format {
        Format::Json => parse_json(text)?,
        Format::Csv => parse_csv(text)?,
    };
    raw.finish(format, normalize)
}

struct RawTable {
    x_labels: Option<Vec<String>>,
    y_labels: Option<Vec<String>>,
    w_labels: Option<Vec<String>>,
    dims: Vec<usize>,
    data: Vec<f64>,
}

#[derive(Deserialize)]
#[serde(untagged)]
enum Label {
    Text(String),
    Number(serde_json::Number),
}

impl Label {
    fn into_string(self) -> String {
        match self {
            Label::Text(s) => s,
            Label::Number(n) => n.to_string(),
        }
    }
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct JsonInput {
    x_labels: Option<Vec<Label>>,
    y_labels: Option<Vec<Label>>,
    w_labels: Option<Vec<Label>>,
    pxy: Option<Vec<Vec<f64>>>,
    pxyw: Option<Vec<Vec<Vec<f64>>>>,
}

fn labels(v: Option<Vec<Label>>) -> Option<Vec<String>> {
    v.map(|l| l.into_iter().map(Label::into_string).collect())
}

fn parse_json(text: &str) -> Result<RawTable, CliError> {
    let doc: JsonInput = serde_json::from_str(text).map_err(|e| {
        let full = e.to_string();
        let msg = full
            .rsplit_once(" at line ")
            .map_or(full.as_str(), |(m, _)| m);
        CliError::Parse {
            line: e.line(),
            column: e.column(),
            msg: msg.to_string(),
        }
    })?;
    let (dims, data) = match (doc.pxy, doc.pxyw) {
        (Some(rows), None) => {
            let ny = rows.first().map_or(0, Vec::len);
            if let Some(i) = rows.iter().position(|r| r.len() != ny) {
                return Err(CliError::Invalid(format!(
                    "pxy row {i} has {} entries, row 0 has {ny}",
                    rows[i].len()
                )));
            }
            (vec![rows.len(), ny], rows.into_iter().flatten().collect())
        }
        (None, Some(t)) => {
            let ny = t.first().map_or(0, Vec::len);
            let nw = t.first().and_then(|r| r.first()).map_or(0, Vec::len);
            for (x, r) in t.iter().enumerate() {
                if r.len() != ny {
                    return Err(CliError::Invalid(format!(
                        "pxyw[{x}] has {} entries, expected {ny}",
                        r.len()
                    )));
                }
                if let Some(y) = r.iter().position(|c| c.len() != nw) {
                    return Err(CliError::Invalid(format!(
                        "pxyw[{x}][{y}] has {} entries, expected {nw}",
                        r[y].len()
                    )));
                }
            }
            (
                vec![t.len(), ny, nw],
                t.into_iter().flatten().flatten().collect(),
            )
        }
        (Some(_), Some(_)) => {
            return Err(CliError::Invalid(
                "give either pxy or pxyw, not both".into(),
            ))
        }
        (None, None) => {
            return Err(CliError::Invalid(
                "missing table: expected a pxy or pxyw field".into(),
            ))
        }
    };
    Ok(RawTable {
        x_labels: labels(doc.x_labels),
        y_labels: labels(doc.y_labels),
        w_labels: labels(doc.w_labels),
        dims,
        data,
    })
}

fn parse_csv(text: &str) -> Result<RawTable, CliError> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .comment(Some(b'#'))
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes());
    let mut header: Option<Vec<String>> = None;
    let mut x_labels = Vec::new();
    let mut data = Vec::new();
    for rec in reader.records() {
        let rec = rec.map_err(|e| {
            let line = e.position().map_or(1, |p| p.line() as usize);
            CliError::Parse {
                line,
                column: 1,
                msg: e.to_string(),
            }
        })?;
        let line = rec.position().map_or(0, |p| p.line() as usize);
        if rec.iter().all(str::is_empty) {
            continue;
        }
        let Some(h) = &header else {
            if rec.len() < 2 {
                return Err(CliError::Parse {
                    line,
                    column: 1,
                    msg: "header needs a corner cell followed by at least one Y label".into(),
                });
            }
            header = Some(rec.iter().skip(1).map(str::to_string).collect());
            continue;
        };
        if rec.len() != h.len() + 1 {
            return Err(CliError::Parse {
                line,
                column: rec.len().min(h.len() + 1) + 1,
                msg: format!(
                    "expected {} fields (label + {} masses), found {}",
                    h.len() + 1,
                    h.len(),
                    rec.len()
                ),
            });
        }
        x_labels.push(rec[0].to_string());
        for (k, cell) in rec.iter().enumerate().skip(1) {
            let v: f64 = cell.parse().map_err(|_| CliError::Parse {
                line,
                column: k + 1,
                msg: format!("cannot read '{cell}' as a probability mass"),
            })?;
            data.push(v);
        }
    }
    let y = header.ok_or_else(|| CliError::Parse {
        line: 1,
        column: 1,
        msg: "no header row".into(),
    })?;
    if x_labels.is_empty() {
        return Err(CliError::Parse {
            line: 2,
            column: 1,
            msg: "header is not followed by any data row".into(),
        });
    }
    Ok(RawTable {
        dims: vec![x_labels.len(), y.len()],
        x_labels: Some(x_labels),
        y_labels: Some(y),
        w_labels: None,
        data,
    })
}

fn default_labels(n: usize) -> Vec<String> {
    (1..=n).map(|i| i.to_string()).collect()
}

fn check_labels(l: Option<Vec<String>>, n: usize, axis: &str) -> Result<Vec<String>, CliError> {
    match l {
        None => Ok(default_labels(n)),
        Some(l) if l.len() == n => Ok(l),
        Some(l) => Err(CliError::Invalid(format!(
            "{} {axis} labels given but the table has {n} {axis} symbols",
            l.len()
        ))),
    }
}

/// Flat index into `[i][j]` or `[i][j][k]` for error messages.
fn cell_name(dims: &[usize], mut idx: usize) -> String {
    let mut parts = vec![0; dims.len()];
    for (p, &d) in parts.iter_mut().zip(dims).rev() {
        *p = idx % d;
        idx /= d;
    }
    let name = if dims.len() == 2 { "pxy" } else { "pxyw" };
    let idx: String = parts.iter().map(|p| format!("[{p}]")).collect();
    format!("{name}{idx}")
}

impl RawTable {
    fn finish(self, format: Format, normalize: bool) -> Result<InputDocument, CliError> {
        let dims = self.dims;
        if dims.contains(&0) {
            return Err(CliError::Invalid(format!(
                "table has an empty axis (dimensions {dims:?})"
            )));
        }
        let mut data = self.data;
        if let Some(i) = data.iter().position(|v| !v.is_finite() || *v < 0.0) {
            return Err(CliError::Invalid(format!(
                "{} = {} is not a nonnegative finite mass",
                cell_name(&dims, i),
                data[i]
            )));
        }
        let total: f64 = data.iter().sum();
        let mut rescaled_from = None;
        if normalize {
            if total <= 0.0 {
                return Err(CliError::Invalid(
                    "table has zero total mass; nothing to normalize".into(),
                ));
            }
            if total != 1.0 {
                data.iter_mut().for_each(|v| *v /= total);
                rescaled_from = Some(total);
            }
        } else if (total - 1.0).abs() > MASS_TOL {
            return Err(CliError::Invalid(format!(
                "table sums to {total}, expected 1 within {MASS_TOL:e}; pass --normalize to rescale"
            )));
        }

        let x_labels = check_labels(self.x_labels, dims[0], "X")?;
        let y_labels = check_labels(self.y_labels, dims[1], "Y")?;
        let (table, w_labels) = if dims.len() == 2 {
            if self.w_labels.is_some() {
                return Err(CliError::Invalid(
                    "w_labels given for a two-way table".into(),
                ));
            }
            let m = Matrix::new(dims[0], dims[1], data)?;
            (Table::Pair(JointPmf::new(m)?), Vec::new())
        } else {
            let w = check_labels(self.w_labels, dims[2], "W")?;
            (
                Table::Triple(JointPmf3::new((dims[0], dims[1], dims[2]), data)?),
                w,
            )
        };
        Ok(InputDocument {
            format,
            x_labels,
            y_labels,
            w_labels,
            table,
            rescaled_from,
        })
    }
}
