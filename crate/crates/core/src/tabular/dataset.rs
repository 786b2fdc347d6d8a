use std::collections::BTreeMap;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::tabular::Schema;

/// Discrete records over a [`Schema`], stored column-major.
///
/// Value indices are dense and 0-based. Household ids, when present, are
/// attached to every row.
#[derive(Clone, Debug, PartialEq)]
pub struct Dataset {
    schema: Arc<Schema>,
    columns: Vec<Vec<u32>>,
    households: Option<Vec<u64>>,
    n_rows: usize,
}

impl Dataset {
    /// Builds a dataset from row-major records.
    pub fn from_rows(
        schema: Arc<Schema>,
        rows: &[Vec<u32>],
        households: Option<Vec<u64>>,
    ) -> Result<Self> {
        let width = schema.len();
        let mut columns = vec![Vec::with_capacity(rows.len()); width];
        for (r, row) in rows.iter().enumerate() {
            if row.len() != width {
                return Err(Error::Dataset(format!(
                    "row {r} has {} values, schema has {width} features",
                    row.len()
                )));
            }
            for (col, &v) in columns.iter_mut().zip(row) {
                col.push(v);
            }
        }
        Self::from_columns(schema, columns, households)
    }

    pub fn from_columns(
        schema: Arc<Schema>,
        columns: Vec<Vec<u32>>,
        households: Option<Vec<u64>>,
    ) -> Result<Self> {
        if columns.len() != schema.len() {
            return Err(Error::Dataset(format!(
                "{} columns for a schema with {} features",
                columns.len(),
                schema.len()
            )));
        }
        let n_rows = columns.first().map_or(0, Vec::len);
        for (f, col) in columns.iter().enumerate() {
            if col.len() != n_rows {
                return Err(Error::Dataset(format!("column {f} is ragged")));
            }
            let card = schema.cardinality(f) as u32;
            if let Some(r) = col.iter().position(|&v| v >= card) {
                return Err(Error::Dataset(format!(
                    "row {r}, feature {:?}: value {} out of range (cardinality {card})",
                    schema.feature(f).name,
                    col[r]
                )));
            }
        }
        if let Some(h) = &households {
            if h.len() != n_rows {
                return Err(Error::Dataset(format!(
                    "{} household ids for {n_rows} rows",
                    h.len()
                )));
            }
        }
        Ok(Self {
            schema,
            columns,
            households,
            n_rows,
        })
    }

    pub fn empty(schema: Arc<Schema>) -> Self {
        let columns = vec![Vec::new(); schema.len()];
        Self {
            schema,
            columns,
            households: None,
            n_rows: 0,
        }
    }

    pub fn schema(&self) -> &Schema {
        &self.schema
    }

    pub fn schema_arc(&self) -> &Arc<Schema> {
        &self.schema
    }

    pub fn n_rows(&self) -> usize {
        self.n_rows
    }

    pub fn is_empty(&self) -> bool {
        self.n_rows == 0
    }

    pub fn n_features(&self) -> usize {
        self.columns.len()
    }

    pub fn column(&self, feature: usize) -> &[u32] {
        &self.columns[feature]
    }

    pub fn value(&self, row: usize, feature: usize) -> u32 {
        self.columns[feature][row]
    }

    pub fn record(&self, row: usize) -> Vec<u32> {
        self.columns.iter().map(|c| c[row]).collect()
    }

    pub fn rows(&self) -> impl Iterator<Item = Vec<u32>> + '_ {
        (0..self.n_rows).map(|r| self.record(r))
    }

    pub fn household_ids(&self) -> Option<&[u64]> {
        self.households.as_deref()
    }

    pub fn household(&self, row: usize) -> Option<u64> {
        self.households.as_ref().map(|h| h[row])
    }

    pub fn household_index(&self) -> Option<HouseholdIndex> {
        self.households.as_deref().map(HouseholdIndex::from_ids)
    }

    /// Rows at `positions`, in that order (duplicates allowed).
    pub fn select(&self, positions: &[usize]) -> Dataset {
        let columns = self
            .columns
            .iter()
            .map(|c| positions.iter().map(|&p| c[p]).collect())
            .collect();
        let households = self
            .households
            .as_ref()
            .map(|h| positions.iter().map(|&p| h[p]).collect());
        Dataset {
            schema: self.schema.clone(),
            columns,
            households,
            n_rows: positions.len(),
        }
    }

    /// Rows of `self` followed by rows of `other`. Household ids survive only
    /// if both sides carry them.
    pub fn concat(&self, other: &Dataset) -> Result<Dataset> {
        if self.schema != other.schema {
            return Err(Error::SchemaMismatch("cannot concatenate datasets".into()));
        }
        let columns = self
            .columns
            .iter()
            .zip(&other.columns)
            .map(|(a, b)| a.iter().chain(b).copied().collect())
            .collect();
        let households = match (&self.households, &other.households) {
            (Some(a), Some(b)) => Some(a.iter().chain(b).copied().collect()),
            _ => None,
        };
        Ok(Dataset {
            schema: self.schema.clone(),
            columns,
            households,
            n_rows: self.n_rows + other.n_rows,
        })
    }

    pub fn without_households(mut self) -> Dataset {
        self.households = None;
        self
    }

    /// Errors unless `other` was built over an equal schema.
    pub fn check_same_schema(&self, other: &Dataset) -> Result<()> {
        if self.schema.as_ref() != other.schema.as_ref() {
            return Err(Error::SchemaMismatch(format!(
                "{} vs {}",
                self.schema.fingerprint(),
                other.schema.fingerprint()
            )));
        }
        Ok(())
    }
}

/// Household id to the row positions that carry it.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct HouseholdIndex {
    members: BTreeMap<u64, Vec<usize>>,
}

impl HouseholdIndex {
    pub fn from_ids(ids: &[u64]) -> Self {
        let mut members: BTreeMap<u64, Vec<usize>> = BTreeMap::new();
        for (row, &id) in ids.iter().enumerate() {
            members.entry(id).or_default().push(row);
        }
        Self { members }
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn rows(&self, household: u64) -> Option<&[usize]> {
        self.members.get(&household).map(Vec::as_slice)
    }

    pub fn ids(&self) -> impl Iterator<Item = u64> + '_ {
        self.members.keys().copied()
    }

    pub fn iter(&self) -> impl Iterator<Item = (u64, &[usize])> + '_ {
        self.members.iter().map(|(&k, v)| (k, v.as_slice()))
    }
}
