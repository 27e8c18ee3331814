//! Square language-indexed matrices and their CSV format.
//!
//! ```text
//! # provenance=elinguistics-table1 kind=distance symmetric=true
//! code,dsh,eng
//! dsh,0.00,20.60
//! eng,20.60,0.00
//! ```
//!
//! The first line carries metadata as `key=value` tokens; `provenance`, `kind`
//! and `symmetric` are required and any further keys are kept in order. Missing
//! cells are the literal `NA`.

use std::collections::HashMap;
use std::fmt;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::io::{csv_field, location, write_atomic};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MatrixKind {
    /// Smaller is closer; diagonal cells are 0 where present.
    Distance,
    /// Larger is closer.
    Similarity,
}

impl fmt::Display for MatrixKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            MatrixKind::Distance => "distance",
            MatrixKind::Similarity => "similarity",
        })
    }
}

impl FromStr for MatrixKind {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s {
            "distance" => Ok(MatrixKind::Distance),
            "similarity" => Ok(MatrixKind::Similarity),
            other => Err(format!("unknown matrix kind `{other}`")),
        }
    }
}

#[derive(Debug, Clone)]
pub struct DistanceMatrix {
    languages: Vec<String>,
    index: HashMap<String, usize>,
    cells: Vec<Option<f64>>,
    kind: MatrixKind,
    symmetric: bool,
    provenance: String,
    metadata: Vec<(String, String)>,
    /// Decimal places used when serializing; `None` writes the shortest
    /// representation that reads back to the same value.
    precision: Option<usize>,
}

/// Equality is over content: cells compare bit-for-bit and the
/// serialization precision is ignored.
impl PartialEq for DistanceMatrix {
    fn eq(&self, other: &Self) -> bool {
        self.languages == other.languages
            && self.kind == other.kind
            && self.symmetric == other.symmetric
            && self.provenance == other.provenance
            && self.metadata == other.metadata
            && self.cells.len() == other.cells.len()
            && self
                .cells
                .iter()
                .zip(&other.cells)
                .all(|(a, b)| a.map(f64::to_bits) == b.map(f64::to_bits))
    }
}

impl DistanceMatrix {
    /// An all-missing matrix over `languages`.
    pub fn new(
        languages: Vec<String>,
        kind: MatrixKind,
        symmetric: bool,
        provenance: impl Into<String>,
    ) -> Result<Self> {
        let mut index = HashMap::with_capacity(languages.len());
        for (i, code) in languages.iter().enumerate() {
            if code.is_empty() || code.contains(char::is_whitespace) {
                return Err(Error::InvalidMatrix {
                    at: "languages".into(),
                    message: format!("invalid language code `{code}`"),
                });
            }
            if index.insert(code.clone(), i).is_some() {
                return Err(Error::DuplicateCode {
                    at: "matrix header".into(),
                    code: code.clone(),
                });
            }
        }
        let provenance = provenance.into();
        check_token("provenance", &provenance)?;
        let n = languages.len();
        Ok(DistanceMatrix {
            languages,
            index,
            cells: vec![None; n * n],
            kind,
            symmetric,
            provenance,
            metadata: Vec::new(),
            precision: None,
        })
    }

    pub fn languages(&self) -> &[String] {
        &self.languages
    }

    pub fn len(&self) -> usize {
        self.languages.len()
    }

    pub fn is_empty(&self) -> bool {
        self.languages.is_empty()
    }

    pub fn kind(&self) -> MatrixKind {
        self.kind
    }

    pub fn is_symmetric(&self) -> bool {
        self.symmetric
    }

    pub fn provenance(&self) -> &str {
        &self.provenance
    }

    pub fn precision(&self) -> Option<usize> {
        self.precision
    }

    pub fn set_precision(&mut self, precision: Option<usize>) {
        self.precision = precision;
    }

    pub fn metadata(&self) -> &[(String, String)] {
        &self.metadata
    }

    pub fn meta(&self, key: &str) -> Option<&str> {
        self.metadata
            .iter()
            .find(|(k, _)| k == key)
            .map(|(_, v)| v.as_str())
    }

    /// Sets an extra header key, replacing an existing value.
    pub fn set_meta(&mut self, key: &str, value: &str) -> Result<()> {
        check_token(key, key)?;
        check_token(key, value)?;
        if matches!(key, "provenance" | "kind" | "symmetric") {
            return Err(Error::InvalidMatrix {
                at: "metadata".into(),
                message: format!("`{key}` is a reserved key"),
            });
        }
        match self.metadata.iter_mut().find(|(k, _)| k == key) {
            Some(entry) => entry.1 = value.to_string(),
            None => self.metadata.push((key.to_string(), value.to_string())),
        }
        Ok(())
    }

    pub fn index_of(&self, code: &str) -> Option<usize> {
        self.index.get(code).copied()
    }

    pub fn contains(&self, code: &str) -> bool {
        self.index.contains_key(code)
    }

    pub fn get(&self, row: usize, col: usize) -> Option<f64> {
        self.cells[row * self.len() + col]
    }

    /// Sets one cell; symmetric matrices mirror the write.
    pub fn set(&mut self, row: usize, col: usize, value: Option<f64>) {
        let n = self.len();
        self.cells[row * n + col] = value;
        if self.symmetric {
            self.cells[col * n + row] = value;
        }
    }

    /// Cell at row `source`, column `target`.
    pub fn lookup(&self, source: &str, target: &str) -> Result<Option<f64>> {
        let r = self
            .index_of(source)
            .ok_or_else(|| Error::unknown_language(source))?;
        let c = self
            .index_of(target)
            .ok_or_else(|| Error::unknown_language(target))?;
        Ok(self.get(r, c))
    }

    /// Number of absent cells.
    pub fn missing_count(&self) -> usize {
        self.cells.iter().filter(|c| c.is_none()).count()
    }

    /// Checks value, diagonal and symmetry invariants.
    pub fn validate(&self) -> Result<()> {
        let n = self.len();
        for i in 0..n {
            for j in 0..n {
                let Some(v) = self.get(i, j) else { continue };
                if !v.is_finite() || v < 0.0 {
                    return Err(Error::InvalidMatrix {
                        at: format!("({}, {})", self.languages[i], self.languages[j]),
                        message: format!("cell {v} is not a finite non-negative number"),
                    });
                }
                if i == j && self.kind == MatrixKind::Distance && v != 0.0 {
                    return Err(Error::InvalidMatrix {
                        at: format!("({0}, {0})", self.languages[i]),
                        message: format!("distance diagonal must be 0, found {v}"),
                    });
                }
            }
        }
        if self.symmetric {
            self.check_symmetry()?;
        }
        Ok(())
    }

    fn check_symmetry(&self) -> Result<()> {
        let n = self.len();
        for i in 0..n {
            for j in (i + 1)..n {
                let (a, b) = (self.get(i, j), self.get(j, i));
                if a != b {
                    return Err(Error::SymmetryViolation {
                        a: self.languages[i].clone(),
                        b: self.languages[j].clone(),
                        forward: self.format_cell(a),
                        backward: self.format_cell(b),
                    });
                }
            }
        }
        Ok(())
    }

    pub fn load(path: &Path, kind: Option<MatrixKind>, symmetric_expected: bool) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse(path, &text, kind, symmetric_expected)
    }

    /// Parses matrix CSV text. `origin` only labels diagnostics. When `kind`
    /// is given it must agree with the header; `symmetric_expected` forces a
    /// symmetry check even if the header does not declare one.
    pub fn parse(
        origin: &Path,
        text: &str,
        kind: Option<MatrixKind>,
        symmetric_expected: bool,
    ) -> Result<Self> {
        let mut lines = text.lines().enumerate();
        let header_at = location(origin, 1);
        let (_, meta_line) = lines.next().ok_or_else(|| Error::MissingMetadata {
            at: header_at.clone(),
            key: "provenance".into(),
        })?;
        let meta = parse_metadata_line(meta_line).map_err(|message| Error::Malformed {
            at: header_at.clone(),
            message,
        })?;
        let take = |key: &str| -> Result<String> {
            meta.iter()
                .find(|(k, _)| k == key)
                .map(|(_, v)| v.clone())
                .ok_or_else(|| Error::MissingMetadata {
                    at: header_at.clone(),
                    key: key.to_string(),
                })
        };
        let provenance = take("provenance")?;
        let declared_kind: MatrixKind =
            take("kind")?.parse().map_err(|message| Error::Malformed {
                at: header_at.clone(),
                message,
            })?;
        let symmetric = match take("symmetric")?.as_str() {
            "true" => true,
            "false" => false,
            other => {
                return Err(Error::Malformed {
                    at: header_at,
                    message: format!("symmetric must be true or false, found `{other}`"),
                })
            }
        };
        if let Some(k) = kind {
            if k != declared_kind {
                return Err(Error::InvalidMatrix {
                    at: header_at,
                    message: format!("expected kind {k}, file declares {declared_kind}"),
                });
            }
        }

        let body: String = lines.map(|(_, l)| l).collect::<Vec<_>>().join("\n");
        let mut reader = csv::ReaderBuilder::new()
            .has_headers(false)
            .flexible(true)
            .from_reader(body.as_bytes());
        let mut records = Vec::new();
        for rec in reader.records() {
            let rec = rec.map_err(|e| Error::Malformed {
                at: location(origin, e.position().map(|p| p.line() + 1).unwrap_or(0)),
                message: e.to_string(),
            })?;
            // csv line numbers are relative to the body, which starts on line 2
            let line = rec.position().map(|p| p.line() + 1).unwrap_or(0);
            if rec.iter().all(|f| f.trim().is_empty()) {
                continue;
            }
            records.push((
                line,
                rec.iter().map(|f| f.trim().to_string()).collect::<Vec<_>>(),
            ));
        }
        let Some((header_line, header)) = records.first() else {
            return Err(Error::NotSquare {
                at: location(origin, 2),
                message: "no header row".into(),
            });
        };
        let languages: Vec<String> = header[1..].to_vec();
        let n = languages.len();
        if records.len() - 1 != n {
            return Err(Error::NotSquare {
                at: location(origin, *header_line),
                message: format!("{n} columns but {} rows", records.len() - 1),
            });
        }

        let mut m = DistanceMatrix::new(languages, declared_kind, false, provenance)?;
        for (k, v) in meta.into_iter() {
            if !matches!(k.as_str(), "provenance" | "kind" | "symmetric") {
                m.metadata.push((k, v));
            }
        }
        // a uniform decimal count is kept for writing; mixed counts fall back
        // to shortest round-trip formatting
        let mut decimals: Option<Option<usize>> = None;
        for (i, (line, row)) in records[1..].iter().enumerate() {
            let at = location(origin, *line);
            if row.len() != n + 1 {
                return Err(Error::NotSquare {
                    at,
                    message: format!("row has {} cells, expected {}", row.len() - 1, n),
                });
            }
            if row[0] != m.languages[i] {
                return Err(Error::NotSquare {
                    at,
                    message: format!(
                        "row label `{}` does not match column `{}`",
                        row[0], m.languages[i]
                    ),
                });
            }
            for (j, cell) in row[1..].iter().enumerate() {
                let value = if cell == "NA" {
                    None
                } else {
                    let v = parse_cell(cell).ok_or_else(|| Error::UnparseableCell {
                        at: at.clone(),
                        cell: cell.clone(),
                    })?;
                    let d = cell.split_once('.').map_or(0, |(_, f)| f.len());
                    decimals = match decimals {
                        None => Some(Some(d)),
                        Some(Some(prev)) if prev == d => Some(Some(d)),
                        _ => Some(None),
                    };
                    Some(v)
                };
                m.cells[i * n + j] = value;
            }
        }
        m.precision = decimals.flatten();
        m.symmetric = symmetric;
        if symmetric_expected || symmetric {
            m.check_symmetry()?;
        }
        m.symmetric = symmetric || symmetric_expected;
        m.validate().map_err(|e| match e {
            Error::InvalidMatrix { at, message } => Error::InvalidMatrix {
                at: format!("{}: {at}", origin.display()),
                message,
            },
            other => other,
        })?;
        Ok(m)
    }

    pub fn format_cell(&self, value: Option<f64>) -> String {
        match (value, self.precision) {
            (None, _) => "NA".to_string(),
            (Some(v), Some(p)) => format!("{v:.p$}"),
            (Some(v), None) => format!("{v}"),
        }
    }

    pub fn to_csv_string(&self) -> String {
        let mut out = format!(
            "# provenance={} kind={} symmetric={}",
            self.provenance, self.kind, self.symmetric
        );
        for (k, v) in &self.metadata {
            out.push_str(&format!(" {k}={v}"));
        }
        out.push('\n');
        out.push_str("code");
        for l in &self.languages {
            out.push(',');
            out.push_str(&csv_field(l));
        }
        out.push('\n');
        let n = self.len();
        for i in 0..n {
            out.push_str(&csv_field(&self.languages[i]));
            for j in 0..n {
                out.push(',');
                out.push_str(&self.format_cell(self.get(i, j)));
            }
            out.push('\n');
        }
        out
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        write_atomic(path, self.to_csv_string().as_bytes())
    }

    /// Applies `f` to every present cell, keeping provenance and layout.
    pub fn map_values(&self, f: impl Fn(f64) -> f64) -> Self {
        let mut out = self.clone();
        for c in out.cells.iter_mut().flatten() {
            *c = f(*c);
        }
        out.precision = None;
        out
    }
}

fn parse_cell(cell: &str) -> Option<f64> {
    // plain decimal notation only: no grouping, exponents or special values
    let digits = cell.strip_prefix('-').unwrap_or(cell);
    let ok = !digits.is_empty()
        && digits.chars().all(|c| c.is_ascii_digit() || c == '.')
        && digits.chars().filter(|&c| c == '.').count() <= 1
        && digits.chars().any(|c| c.is_ascii_digit());
    if !ok {
        return None;
    }
    cell.parse().ok()
}

fn parse_metadata_line(line: &str) -> std::result::Result<Vec<(String, String)>, String> {
    let rest = line
        .trim()
        .strip_prefix('#')
        .ok_or_else(|| "first line must be a `# key=value ...` metadata line".to_string())?;
    let mut out: Vec<(String, String)> = Vec::new();
    for token in rest.split_whitespace() {
        let (k, v) = token
            .split_once('=')
            .ok_or_else(|| format!("metadata token `{token}` is not key=value"))?;
        if out.iter().any(|(existing, _)| existing == k) {
            return Err(format!("metadata key `{k}` repeated"));
        }
        out.push((k.to_string(), v.to_string()));
    }
    Ok(out)
}

fn check_token(key: &str, value: &str) -> Result<()> {
    if value.is_empty() || value.contains(char::is_whitespace) || value.contains('=') {
        return Err(Error::InvalidMatrix {
            at: "metadata".into(),
            message: format!("invalid value `{value}` for `{key}`"),
        });
    }
    Ok(())
}
