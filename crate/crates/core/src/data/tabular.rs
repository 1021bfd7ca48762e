//! Regression CSV: header row, comma separated, last column is the target.

use std::path::Path;

use super::{meta, DataError, Dataset, Targets};

pub fn parse_csv(text: &str, source: &str) -> Result<Dataset, DataError> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes());
    let width = reader
        .headers()
        .map_err(|e| DataError::Csv(e.to_string()))?
        .len();
    if width < 2 {
        return Err(DataError::Csv("need at least one feature column and a target".into()));
    }
    let mut features = Vec::new();
    let mut targets = Vec::new();
    for (row, record) in reader.records().enumerate() {
        let record = record.map_err(|e| DataError::Csv(e.to_string()))?;
        if record.len() != width {
            return Err(DataError::Csv(format!(
                "row {} has {} fields, header has {width}",
                row + 1,
                record.len()
            )));
        }
        for (col, field) in record.iter().enumerate() {
            let v: f64 = field.parse().map_err(|_| {
                DataError::Csv(format!("row {} column {}: not a number: {field:?}", row + 1, col + 1))
            })?;
            if col + 1 == width {
                targets.push(v);
            } else {
                features.push(v);
            }
        }
    }
    if targets.is_empty() {
        return Err(DataError::Csv("no data rows".into()));
    }
    Dataset::new(features, width - 1, Targets::Real(targets), meta(source))
}

pub fn load_csv(path: impl AsRef<Path>) -> Result<Dataset, DataError> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|source| DataError::Io {
        path: path.display().to_string(),
        source,
    })?;
    parse_csv(&text, &path.display().to_string())
}
