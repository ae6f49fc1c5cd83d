//! CSV input: a raw string table, then numeric column selection.

use std::fmt;
use std::path::Path;
use std::str::FromStr;

use ellipsym::{Matrix, Sample};

use crate::CliError;

/// A column picked by 1-based position or by header name.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ColumnRef {
    Index(usize),
    Name(String),
}

impl FromStr for ColumnRef {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let s = s.trim();
        if s.is_empty() {
            return Err("empty column reference".into());
        }
        match s.parse::<usize>() {
            Ok(0) => Err("column positions start at 1".into()),
            Ok(i) => Ok(ColumnRef::Index(i)),
            Err(_) => Ok(ColumnRef::Name(s.to_string())),
        }
    }
}

impl fmt::Display for ColumnRef {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ColumnRef::Index(i) => write!(f, "{i}"),
            ColumnRef::Name(s) => f.write_str(s),
        }
    }
}

#[derive(Debug, Clone)]
pub struct RawTable {
    pub header: Option<Vec<String>>,
    pub rows: Vec<Vec<String>>,
}

impl RawTable {
    pub fn width(&self) -> usize {
        self.header
            .as_ref()
            .map(Vec::len)
            .or_else(|| self.rows.first().map(Vec::len))
            .unwrap_or(0)
    }

    /// 0-based position of a column reference.
    pub fn resolve(&self, col: &ColumnRef) -> Result<usize, CliError> {
        match col {
            ColumnRef::Index(i) if *i <= self.width() => Ok(i - 1),
            ColumnRef::Index(i) => Err(CliError::Usage(format!(
                "column {i} is out of range (the file has {} columns)",
                self.width()
            ))),
            ColumnRef::Name(name) => {
                let header = self.header.as_ref().ok_or_else(|| {
                    CliError::Usage(format!("column '{name}' selected by name but --header is not set"))
                })?;
                header
                    .iter()
                    .position(|h| h == name)
                    .ok_or_else(|| CliError::Usage(format!("no column named '{name}'")))
            }
        }
    }

    fn cell_name(&self, row: usize, col: usize) -> String {
        let line = row + 1 + usize::from(self.header.is_some());
        match &self.header {
            Some(h) => format!("line {line}, column {} ('{}')", col + 1, h[col]),
            None => format!("line {line}, column {}", col + 1),
        }
    }

    /// Parses the given columns into a sample, rows in file order.
    pub fn numeric(&self, columns: &[usize]) -> Result<Sample, CliError> {
        if columns.len() < 2 {
            return Err(CliError::Usage(format!(
                "at least 2 numeric columns are needed, {} selected",
                columns.len()
            )));
        }
        let mut m = Matrix::zeros(self.rows.len(), columns.len());
        for (i, row) in self.rows.iter().enumerate() {
            for (j, &c) in columns.iter().enumerate() {
                let raw = row.get(c).map(|s| s.trim()).unwrap_or("");
                if raw.is_empty() || raw.eq_ignore_ascii_case("na") {
                    return Err(CliError::Data(format!("missing value at {}", self.cell_name(i, c))));
                }
                let v: f64 = raw.parse().map_err(|_| {
                    CliError::Data(format!("cannot parse '{raw}' as a number at {}", self.cell_name(i, c)))
                })?;
                if !v.is_finite() {
                    return Err(CliError::Data(format!(
                        "non-finite value '{raw}' at {}",
                        self.cell_name(i, c)
                    )));
                }
                m[(i, j)] = v;
            }
        }
        Sample::new(m).map_err(CliError::Compute)
    }

    /// Columns to analyse: the selection if given, else all but `skip`.
    pub fn data_columns(&self, selection: Option<&[ColumnRef]>, skip: Option<usize>) -> Result<Vec<usize>, CliError> {
        match selection {
            Some(cols) => cols.iter().map(|c| self.resolve(c)).collect(),
            None => Ok((0..self.width()).filter(|&c| Some(c) != skip).collect()),
        }
    }

    pub fn text_column(&self, col: usize) -> Vec<String> {
        self.rows
            .iter()
            .map(|r| r.get(col).cloned().unwrap_or_default())
            .collect()
    }
}

pub fn read_table(path: &Path, has_header: bool) -> Result<RawTable, CliError> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(has_header)
        .trim(csv::Trim::All)
        .from_path(path)
        .map_err(|e| CliError::Data(format!("cannot read {}: {e}", path.display())))?;
    let header = if has_header {
        let h = reader
            .headers()
            .map_err(|e| CliError::Data(format!("{}: {e}", path.display())))?;
        Some(h.iter().map(str::to_string).collect())
    } else {
        None
    };
    let mut rows = Vec::new();
    for record in reader.records() {
        let record = record.map_err(|e| CliError::Data(format!("{}: {e}", path.display())))?;
        rows.push(record.iter().map(str::to_string).collect());
    }
    if rows.is_empty() {
        return Err(CliError::Data(format!("{} has no data rows", path.display())));
    }
    Ok(RawTable { header, rows })
}

/// Reads a CSV file into a sample.
pub fn ingest_csv(path: &Path, has_header: bool, columns: Option<&[ColumnRef]>) -> Result<Sample, CliError> {
    let table = read_table(path, has_header)?;
    let cols = table.data_columns(columns, None)?;
    table.numeric(&cols)
}
