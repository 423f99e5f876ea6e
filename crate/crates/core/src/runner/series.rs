//! Time-series files: a `t` column followed by one column per named series,
//! one row per step.

use std::fmt;
use std::path::{Path, PathBuf};

use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum SeriesError {
    #[error("{file}: {message}")]
    Io { file: String, message: String },
    #[error("{file}, line {line}: {message}")]
    Parse { file: String, line: usize, message: String },
    #[error("{file}: {rows} rows but the horizon has {steps} steps")]
    Length { file: String, rows: usize, steps: usize },
    #[error("{file}, line {line}: expected t = {expected}, got {got}")]
    NotMonotone { file: String, line: usize, expected: usize, got: String },
    #[error("{file}: series `{series}` at t = {t} is {value}, outside the {role} range {range}")]
    Range { file: String, series: String, t: usize, value: f64, role: SeriesRole, range: &'static str },
    #[error("series `{0}` is defined in both {1} and {2}")]
    Duplicate(String, String, String),
    #[error("unknown series `{0}`")]
    Unknown(String),
}

/// What a series is bound to, which fixes its admissible range.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SeriesRole {
    CapacityFactor,
    Demand,
    Cost,
}

impl SeriesRole {
    fn range(self) -> &'static str {
        match self {
            SeriesRole::CapacityFactor => "[0, 1]",
            SeriesRole::Demand | SeriesRole::Cost => "[0, inf)",
        }
    }

    fn admits(self, v: f64) -> bool {
        match self {
            SeriesRole::CapacityFactor => (0.0..=1.0).contains(&v),
            SeriesRole::Demand | SeriesRole::Cost => v >= 0.0 && v.is_finite(),
        }
    }
}

impl fmt::Display for SeriesRole {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SeriesRole::CapacityFactor => "capacity factor",
            SeriesRole::Demand => "demand",
            SeriesRole::Cost => "cost",
        })
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct TimeSeriesFile {
    /// Where the data came from, used in error messages.
    pub source: String,
    pub names: Vec<String>,
    pub columns: Vec<Vec<f64>>,
}

impl TimeSeriesFile {
    pub fn new(source: impl Into<String>) -> Self {
        TimeSeriesFile {
            source: source.into(),
            names: Vec::new(),
            columns: Vec::new(),
        }
    }

    pub fn push(&mut self, name: impl Into<String>, values: Vec<f64>) {
        self.names.push(name.into());
        self.columns.push(values);
    }

    pub fn steps(&self) -> usize {
        self.columns.first().map_or(0, Vec::len)
    }

    pub fn get(&self, name: &str) -> Option<&[f64]> {
        self.names.iter().position(|n| n == name).map(|i| self.columns[i].as_slice())
    }

    /// Parses delimited text. When `steps` is given the row count must match.
    pub fn parse(text: &str, source: &str, steps: Option<usize>) -> Result<Self, SeriesError> {
        let parse_err = |line: usize, message: String| SeriesError::Parse {
            file: source.to_string(),
            line,
            message,
        };
        let mut reader = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(text.as_bytes());
        let headers = reader.headers().map_err(|e| parse_err(1, e.to_string()))?.clone();
        if headers.get(0) != Some("t") {
            return Err(parse_err(1, "first column must be `t`".into()));
        }
        let mut out = TimeSeriesFile::new(source);
        for name in headers.iter().skip(1) {
            if name.is_empty() || out.names.iter().any(|n| n == name) {
                return Err(parse_err(1, format!("empty or repeated column name `{name}`")));
            }
            out.push(name, Vec::new());
        }
        for (row, record) in reader.records().enumerate() {
            let line = row + 2;
            let record = record.map_err(|e| parse_err(line, e.to_string()))?;
            let t = record.get(0).unwrap_or("");
            if t.parse::<usize>().ok() != Some(row) {
                return Err(SeriesError::NotMonotone {
                    file: source.to_string(),
                    line,
                    expected: row,
                    got: t.to_string(),
                });
            }
            for (k, col) in out.columns.iter_mut().enumerate() {
                let cell = record.get(k + 1).unwrap_or("");
                let v: f64 = cell
                    .parse()
                    .map_err(|_| parse_err(line, format!("`{cell}` in column `{}` is not a number", &headers[k + 1])))?;
                if !v.is_finite() {
                    return Err(parse_err(line, format!("non-finite value in column `{}`", &headers[k + 1])));
                }
                col.push(v);
            }
        }
        let rows = out.steps();
        if let Some(steps) = steps {
            if rows != steps {
                return Err(SeriesError::Length {
                    file: source.to_string(),
                    rows,
                    steps,
                });
            }
        }
        Ok(out)
    }

    pub fn read(path: &Path, steps: Option<usize>) -> Result<Self, SeriesError> {
        let source = path.display().to_string();
        let text = std::fs::read_to_string(path).map_err(|e| SeriesError::Io {
            file: source.clone(),
            message: e.to_string(),
        })?;
        Self::parse(&text, &source, steps)
    }

    /// Serializes with the shortest round-tripping representation of each
    /// value, so writing and reading back is lossless.
    pub fn to_csv(&self) -> String {
        let mut w = csv::Writer::from_writer(Vec::new());
        let mut header = vec!["t".to_string()];
        header.extend(self.names.iter().cloned());
        w.write_record(&header).expect("in-memory write");
        for t in 0..self.steps() {
            let mut rec = vec![t.to_string()];
            rec.extend(self.columns.iter().map(|c| c[t].to_string()));
            w.write_record(&rec).expect("in-memory write");
        }
        String::from_utf8(w.into_inner().expect("in-memory flush")).expect("ascii output")
    }
}

/// Every series available to a config, keyed by name across files.
#[derive(Clone, Debug, Default)]
pub struct SeriesStore {
    files: Vec<TimeSeriesFile>,
}

impl SeriesStore {
    pub fn add(&mut self, file: TimeSeriesFile) -> Result<(), SeriesError> {
        for name in &file.names {
            if let Some(prev) = self.files.iter().find(|f| f.get(name).is_some()) {
                return Err(SeriesError::Duplicate(name.clone(), prev.source.clone(), file.source.clone()));
            }
        }
        self.files.push(file);
        Ok(())
    }

    pub fn load(paths: &[PathBuf], steps: usize) -> Result<Self, SeriesError> {
        let mut store = SeriesStore::default();
        for p in paths {
            store.add(TimeSeriesFile::read(p, Some(steps))?)?;
        }
        Ok(store)
    }

    /// Looks up `name` and checks every value against `role`.
    pub fn bind(&self, name: &str, role: SeriesRole) -> Result<Vec<f64>, SeriesError> {
        let (file, values) = self
            .files
            .iter()
            .find_map(|f| f.get(name).map(|v| (f, v)))
            .ok_or_else(|| SeriesError::Unknown(name.to_string()))?;
        if let Some((t, &value)) = values.iter().enumerate().find(|(_, &v)| !role.admits(v)) {
            return Err(SeriesError::Range {
                file: file.source.clone(),
                series: name.to_string(),
                t,
                value,
                role,
                range: role.range(),
            });
        }
        Ok(values.to_vec())
    }
}
