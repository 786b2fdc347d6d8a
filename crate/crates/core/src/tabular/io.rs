//! CSV ingestion and output.
//!
//! Cells may hold category labels or integer indices. Labels win when a cell
//! matches both.

use std::io::{Read, Write};
use std::path::Path;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::tabular::{Dataset, Schema};

pub const HOUSEHOLD_COLUMN: &str = "household_id";

pub fn load_dataset(
    path: impl AsRef<Path>,
    schema: Arc<Schema>,
    household_column: Option<&str>,
) -> Result<Dataset> {
    let path = path.as_ref();
    let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    read_dataset(file, &path.display().to_string(), schema, household_column)
}

/// Parses CSV from any reader. `source` only labels error messages.
pub fn read_dataset<R: Read>(
    reader: R,
    source: &str,
    schema: Arc<Schema>,
    household_column: Option<&str>,
) -> Result<Dataset> {
    let parse_err = |row: usize, column: &str, message: String| Error::Parse {
        path: source.to_string(),
        row,
        column: column.to_string(),
        message,
    };

    let mut csv = csv::ReaderBuilder::new()
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(reader);
    let header: Vec<String> = csv.headers()?.iter().map(str::to_string).collect();

    // Position of each schema feature within a file row.
    let mut positions = Vec::with_capacity(schema.len());
    for f in schema.features() {
        let pos = header
            .iter()
            .position(|h| h == &f.name)
            .ok_or_else(|| parse_err(1, &f.name, "missing column".into()))?;
        positions.push(pos);
    }
    let household_pos = match household_column {
        Some(name) => Some(
            header
                .iter()
                .position(|h| h == name)
                .ok_or_else(|| parse_err(1, name, "missing household column".into()))?,
        ),
        None => None,
    };
    for h in &header {
        if schema.index_of(h).is_none() && Some(h.as_str()) != household_column {
            return Err(parse_err(1, h, "column not in schema".into()));
        }
    }

    let mut columns: Vec<Vec<u32>> = vec![Vec::new(); schema.len()];
    let mut households = household_pos.map(|_| Vec::new());
    for record in csv.records() {
        let record = record?;
        let line = record.position().map_or(0, |p| p.line() as usize);
        if record.len() != header.len() {
            return Err(parse_err(
                line,
                "",
                format!("ragged row: {} fields, header has {}", record.len(), header.len()),
            ));
        }
        for (f, (&pos, col)) in positions.iter().zip(columns.iter_mut()).enumerate() {
            let feature = schema.feature(f);
            let cell = &record[pos];
            let v = feature.lookup(cell).ok_or_else(|| {
                parse_err(
                    line,
                    &feature.name,
                    format!("unknown category {cell:?} (cardinality {})", feature.cardinality()),
                )
            })?;
            col.push(v);
        }
        if let (Some(pos), Some(h)) = (household_pos, households.as_mut()) {
            let cell = &record[pos];
            let id = cell.parse::<u64>().map_err(|_| {
                parse_err(
                    line,
                    household_column.unwrap_or_default(),
                    format!("household id {cell:?} is not a non-negative integer"),
                )
            })?;
            h.push(id);
        }
    }
    Dataset::from_columns(schema, columns, households)
}

/// Writes a header plus one row per record, using category labels. A
/// `household_id` column is appended when the dataset has one.
pub fn write_dataset<W: Write>(writer: W, data: &Dataset) -> Result<()> {
    let mut out = csv::Writer::from_writer(writer);
    let schema = data.schema();
    let mut header: Vec<&str> = schema.features().iter().map(|f| f.name.as_str()).collect();
    if data.household_ids().is_some() {
        header.push(HOUSEHOLD_COLUMN);
    }
    out.write_record(&header)?;
    let mut fields: Vec<String> = Vec::with_capacity(header.len());
    for r in 0..data.n_rows() {
        fields.clear();
        for f in 0..schema.len() {
            fields.push(schema.feature(f).categories[data.value(r, f) as usize].clone());
        }
        if let Some(h) = data.household(r) {
            fields.push(h.to_string());
        }
        out.write_record(&fields)?;
    }
    out.flush().map_err(|e| Error::io("<csv writer>", e))?;
    Ok(())
}

pub fn save_dataset(path: impl AsRef<Path>, data: &Dataset) -> Result<()> {
    let path = path.as_ref();
    let file = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
    write_dataset(std::io::BufWriter::new(file), data)
}
