//! Response datasets: CSV and JSON readers and writers, and imports of
//! external guess files.
//!
//! CSV columns, in order:
//!
//! | column      | type                   | notes                                  |
//! |-------------|------------------------|----------------------------------------|
//! | source      | text                   | model or dataset the row came from     |
//! | condition   | condition id           | e.g. `pbcg-baseline`, `gg`, `mrg-game1` |
//! | subject     | text                   | unique within source and condition     |
//! | round       | integer ≥ 1            | 1 for one-shot games                   |
//! | value       | number                 | the response as given, unrounded       |
//! | temperature | number or empty        | sampling temperature, empty if unknown |
//! | timestamp   | text or empty          | free-form, usually RFC 3339            |
//! | incoherent  | `true` / `false`       | outside the condition's domain         |

use std::collections::{BTreeMap, BTreeSet};
use std::fs::File;
use std::io::{Read, Write};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::estimation::GgObservation;
use crate::games::{canonical_gg_rounds, Condition, GameKind, MRG_MAX, MRG_MIN};

pub const DATASET_SCHEMA_VERSION: u32 = 1;

pub const COLUMNS: [&str; 8] =
    ["source", "condition", "subject", "round", "value", "temperature", "timestamp", "incoherent"];

#[derive(Debug, Error)]
pub enum StoreError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("line {line}, column {column:?}: {message}")]
    Schema { line: u64, column: Option<String>, message: String },
    #[error("duplicate row for subject {subject:?}, condition {condition}, round {round}")]
    DuplicateKey { subject: String, condition: Condition, round: usize },
    #[error("mapping does not name a column for {0}")]
    Unmapped(&'static str),
    #[error("column {0:?} not found in the header")]
    MissingColumn(String),
    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
    #[error("unsupported file extension for {0}")]
    Format(PathBuf),
}

pub type StoreResult<T> = std::result::Result<T, StoreError>;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResponseRow {
    pub source: String,
    pub condition: Condition,
    pub subject: String,
    pub round: usize,
    pub value: f64,
    pub temperature: Option<f64>,
    pub timestamp: Option<String>,
    #[serde(default)]
    pub incoherent: bool,
}

/// Whether a response can be taken at face value. Guessing-game guesses
/// outside the limits are adjusted by the game's own rule, so only
/// non-finite ones are incoherent.
pub fn is_coherent(condition: Condition, round: usize, value: f64) -> bool {
    if !value.is_finite() {
        return false;
    }
    match condition.kind() {
        GameKind::Gg => true,
        GameKind::Mrg => value.fract() == 0.0 && (MRG_MIN as f64..=MRG_MAX as f64).contains(&value),
        GameKind::Pbcg => match condition.domain(round) {
            Ok((lo, hi)) => (lo..=hi).contains(&value),
            Err(_) => false,
        },
    }
}

/// Rows keyed uniquely by (subject, condition, round).
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct ResponseDataset {
    rows: Vec<ResponseRow>,
}

#[derive(Serialize, Deserialize)]
struct JsonDataset {
    schema_version: u32,
    rows: Vec<ResponseRow>,
}

impl ResponseDataset {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn from_rows(rows: impl IntoIterator<Item = ResponseRow>) -> StoreResult<Self> {
        let mut ds = Self::new();
        for r in rows {
            ds.push(r)?;
        }
        Ok(ds)
    }

    /// Adds a row, flagging it if it falls outside the condition's domain.
    /// A row never loses an incoherent flag it already carries.
    pub fn push(&mut self, mut row: ResponseRow) -> StoreResult<()> {
        if self.rows.iter().any(|r| r.subject == row.subject && r.condition == row.condition && r.round == row.round) {
            return Err(StoreError::DuplicateKey { subject: row.subject, condition: row.condition, round: row.round });
        }
        if row.timestamp.as_deref() == Some("") {
            row.timestamp = None;
        }
        row.incoherent |= !is_coherent(row.condition, row.round, row.value);
        self.rows.push(row);
        Ok(())
    }

    pub fn rows(&self) -> &[ResponseRow] {
        &self.rows
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn conditions(&self) -> BTreeSet<Condition> {
        self.rows.iter().map(|r| r.condition).collect()
    }

    /// Coherent responses of one condition, optionally from one round only.
    pub fn values(&self, condition: Condition, round: Option<usize>) -> Vec<f64> {
        self.rows
            .iter()
            .filter(|r| r.condition == condition && !r.incoherent && round.is_none_or(|t| r.round == t))
            .map(|r| r.value)
            .collect()
    }

    /// Each guessing-game subject's coherent guesses, paired with the
    /// canonical round they answered.
    pub fn gg_subjects(&self) -> BTreeMap<String, Vec<GgObservation>> {
        let rounds = canonical_gg_rounds();
        let mut out: BTreeMap<String, Vec<GgObservation>> = BTreeMap::new();
        for r in &self.rows {
            if r.condition != Condition::Gg || r.incoherent || r.round == 0 || r.round > rounds.len() {
                continue;
            }
            out.entry(r.subject.clone())
                .or_default()
                .push(GgObservation { round: rounds[r.round - 1], value: r.value });
        }
        out
    }

    pub fn write_csv<W: Write>(&self, w: W) -> StoreResult<()> {
        let mut wtr = csv::Writer::from_writer(w);
        if self.rows.is_empty() {
            wtr.write_record(COLUMNS).map_err(|e| csv_error(e, None))?;
        }
        for r in &self.rows {
            wtr.serialize(r).map_err(|e| csv_error(e, None))?;
        }
        wtr.flush().map_err(|e| StoreError::Io { path: PathBuf::new(), source: e })?;
        Ok(())
    }

    pub fn read_csv<R: Read>(r: R) -> StoreResult<Self> {
        let mut rdr = csv::Reader::from_reader(r);
        let header = rdr.headers().map_err(|e| csv_error(e, None))?.clone();
        for col in COLUMNS {
            if !header.iter().any(|h| h == col) {
                return Err(StoreError::MissingColumn(col.to_string()));
            }
        }
        let mut ds = Self::new();
        for rec in rdr.deserialize::<ResponseRow>() {
            let row = rec.map_err(|e| csv_error(e, Some(&header)))?;
            ds.push(row)?;
        }
        Ok(ds)
    }

    pub fn to_json(&self) -> StoreResult<String> {
        Ok(serde_json::to_string_pretty(&JsonDataset {
            schema_version: DATASET_SCHEMA_VERSION,
            rows: self.rows.clone(),
        })?)
    }

    pub fn from_json(text: &str) -> StoreResult<Self> {
        let doc: JsonDataset = serde_json::from_str(text)?;
        if doc.schema_version != DATASET_SCHEMA_VERSION {
            return Err(StoreError::Schema {
                line: 1,
                column: Some("schema_version".into()),
                message: format!("unsupported version {}", doc.schema_version),
            });
        }
        Self::from_rows(doc.rows)
    }
}

fn csv_error(e: csv::Error, header: Option<&csv::StringRecord>) -> StoreError {
    let line = e.position().map_or(0, |p| p.line());
    let column = match e.kind() {
        csv::ErrorKind::Deserialize { err, .. } => {
            err.field().and_then(|i| header.and_then(|h| h.get(i as usize))).map(str::to_string)
        }
        _ => None,
    };
    let message = match e.kind() {
        csv::ErrorKind::Deserialize { err, .. } => err.kind().to_string(),
        _ => e.to_string(),
    };
    StoreError::Schema { line, column, message }
}

fn open(path: &Path) -> StoreResult<File> {
    File::open(path).map_err(|e| StoreError::Io { path: path.to_path_buf(), source: e })
}

fn is_json(path: &Path) -> StoreResult<bool> {
    match path.extension().and_then(|e| e.to_str()) {
        Some("csv") => Ok(false),
        Some("json") => Ok(true),
        _ => Err(StoreError::Format(path.to_path_buf())),
    }
}

/// Reads a dataset from a `.csv` or `.json` file.
pub fn read_dataset(path: &Path) -> StoreResult<ResponseDataset> {
    if is_json(path)? {
        let text = std::fs::read_to_string(path).map_err(|e| StoreError::Io { path: path.to_path_buf(), source: e })?;
        ResponseDataset::from_json(&text)
    } else {
        ResponseDataset::read_csv(open(path)?)
    }
}

/// Writes a dataset as `.csv` or `.json`, chosen by extension.
pub fn write_dataset(ds: &ResponseDataset, path: &Path) -> StoreResult<()> {
    let io = |e| StoreError::Io { path: path.to_path_buf(), source: e };
    if is_json(path)? {
        std::fs::write(path, ds.to_json()? + "\n").map_err(io)
    } else {
        let f = File::create(path).map_err(io)?;
        ds.write_csv(f)
    }
}

/// How the columns of an external guess file map onto dataset rows.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ImportMapping {
    /// Provenance written to every row.
    pub source: String,
    pub condition: Condition,
    pub value_column: String,
    #[serde(default)]
    pub subject_column: Option<String>,
    #[serde(default)]
    pub round_column: Option<String>,
    #[serde(default = "default_delimiter")]
    pub delimiter: char,
}

fn default_delimiter() -> char {
    ','
}

impl ImportMapping {
    pub fn new(source: impl Into<String>, condition: Condition, value_column: impl Into<String>) -> Self {
        Self {
            source: source.into(),
            condition,
            value_column: value_column.into(),
            subject_column: None,
            round_column: None,
            delimiter: ',',
        }
    }
}

/// Normalizes an external guess file. Without a subject column, rows get
/// sequential subject ids; out-of-domain guesses are kept and flagged.
pub fn import_human_data(path: &Path, mapping: &ImportMapping) -> StoreResult<ResponseDataset> {
    if mapping.value_column.is_empty() {
        return Err(StoreError::Unmapped("value"));
    }
    let delimiter = u8::try_from(mapping.delimiter).map_err(|_| StoreError::Schema {
        line: 0,
        column: None,
        message: format!("delimiter {:?} is not a single byte", mapping.delimiter),
    })?;
    let mut rdr = csv::ReaderBuilder::new().delimiter(delimiter).trim(csv::Trim::All).from_reader(open(path)?);
    let header = rdr.headers().map_err(|e| csv_error(e, None))?.clone();
    let find =
        |name: &str| header.iter().position(|h| h == name).ok_or_else(|| StoreError::MissingColumn(name.to_string()));
    let value_ix = find(&mapping.value_column)?;
    let subject_ix = mapping.subject_column.as_deref().map(find).transpose()?;
    let round_ix = mapping.round_column.as_deref().map(find).transpose()?;
    if subject_ix.is_none() {
        log::warn!("{}: no subject column mapped; numbering subjects by row", path.display());
    }
    let mut ds = ResponseDataset::new();
    for (i, rec) in rdr.records().enumerate() {
        let rec = rec.map_err(|e| csv_error(e, None))?;
        let line = rec.position().map_or(0, |p| p.line());
        let field = |ix: usize, name: &str| {
            rec.get(ix).ok_or_else(|| StoreError::Schema {
                line,
                column: Some(name.to_string()),
                message: "missing field".into(),
            })
        };
        let raw = field(value_ix, &mapping.value_column)?;
        let value: f64 = raw.parse().map_err(|_| StoreError::Schema {
            line,
            column: Some(mapping.value_column.clone()),
            message: format!("{raw:?} is not a number"),
        })?;
        let subject = match subject_ix {
            Some(ix) => field(ix, "subject")?.to_string(),
            None => (i + 1).to_string(),
        };
        let round = match round_ix {
            Some(ix) => {
                let raw = field(ix, "round")?;
                raw.parse().map_err(|_| StoreError::Schema {
                    line,
                    column: mapping.round_column.clone(),
                    message: format!("{raw:?} is not a round number"),
                })?
            }
            None => 1,
        };
        ds.push(ResponseRow {
            source: mapping.source.clone(),
            condition: mapping.condition,
            subject,
            round,
            value,
            temperature: None,
            timestamp: None,
            incoherent: false,
        })?;
    }
    Ok(ds)
}
