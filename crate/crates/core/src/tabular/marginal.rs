use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::tabular::{Dataset, Schema};

/// A set of features whose joint distribution is measured.
///
/// Constructors canonicalize: marginal indices and conditional parents are
/// sorted, so two runs that pick the same features in a different order
/// produce equal tuples.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FeatureTuple {
    Marginal(Vec<usize>),
    Conditional { child: usize, parents: Vec<usize> },
}

impl FeatureTuple {
    pub fn marginal(mut features: Vec<usize>) -> Self {
        features.sort_unstable();
        FeatureTuple::Marginal(features)
    }

    pub fn pair(a: usize, b: usize) -> Self {
        FeatureTuple::Marginal(vec![a.min(b), a.max(b)])
    }

    pub fn conditional(child: usize, mut parents: Vec<usize>) -> Self {
        parents.sort_unstable();
        FeatureTuple::Conditional { child, parents }
    }

    /// Table axis order: the listed features for a marginal, parents then the
    /// child for a conditional (so each parent stratum is a contiguous run of
    /// child cells).
    pub fn axes(&self) -> Vec<usize> {
        match self {
            FeatureTuple::Marginal(f) => f.clone(),
            FeatureTuple::Conditional { child, parents } => {
                parents.iter().copied().chain(std::iter::once(*child)).collect()
            }
        }
    }

    pub fn is_conditional(&self) -> bool {
        matches!(self, FeatureTuple::Conditional { .. })
    }

    pub fn parent_count(&self) -> Option<usize> {
        match self {
            FeatureTuple::Conditional { parents, .. } => Some(parents.len()),
            FeatureTuple::Marginal(_) => None,
        }
    }

    pub fn validate(&self, schema: &Schema) -> Result<()> {
        let axes = self.axes();
        if axes.is_empty() {
            return Err(Error::Tuple("a marginal needs at least one feature".into()));
        }
        for (i, &f) in axes.iter().enumerate() {
            if f >= schema.len() {
                return Err(Error::Tuple(format!(
                    "feature index {f} out of range for {} features",
                    schema.len()
                )));
            }
            if axes[..i].contains(&f) {
                return Err(Error::Tuple(format!("feature index {f} repeated in {self}")));
            }
        }
        Ok(())
    }
}

impl fmt::Display for FeatureTuple {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let join = |v: &[usize]| v.iter().map(usize::to_string).collect::<Vec<_>>().join(",");
        match self {
            FeatureTuple::Marginal(v) => write!(f, "({})", join(v)),
            FeatureTuple::Conditional { child, parents } => write!(f, "{child}|{}", join(parents)),
        }
    }
}

/// Dense contingency table over the cross product of a tuple's domains,
/// row-major in [`FeatureTuple::axes`] order.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MarginalTable {
    tuple: FeatureTuple,
    shape: Vec<usize>,
    cells: Vec<f64>,
    total: f64,
}

impl MarginalTable {
    /// Exact joint counts of `tuple` over every row of `data`.
    pub fn measure(data: &Dataset, tuple: &FeatureTuple) -> Result<Self> {
        tuple.validate(data.schema())?;
        if data.is_empty() {
            return Err(Error::EmptyDataset);
        }
        let axes = tuple.axes();
        let shape: Vec<usize> = axes.iter().map(|&f| data.schema().cardinality(f)).collect();
        let mut cells = vec![0.0; shape.iter().product()];
        let mut index = Vec::new();
        flat_indices(data, &axes, &mut index);
        for &i in &index {
            cells[i] += 1.0;
        }
        Ok(Self {
            tuple: tuple.clone(),
            shape,
            total: data.n_rows() as f64,
            cells,
        })
    }

    pub fn from_cells(schema: &Schema, tuple: FeatureTuple, cells: Vec<f64>) -> Result<Self> {
        tuple.validate(schema)?;
        let shape: Vec<usize> = tuple.axes().iter().map(|&f| schema.cardinality(f)).collect();
        let expected: usize = shape.iter().product();
        if cells.len() != expected {
            return Err(Error::Tuple(format!(
                "{} cells for tuple {tuple} (expected {expected})",
                cells.len()
            )));
        }
        if cells.iter().any(|c| !(c.is_finite() && *c >= 0.0)) {
            return Err(Error::param("table cells must be finite and non-negative"));
        }
        let total = cells.iter().sum();
        Ok(Self {
            tuple,
            shape,
            cells,
            total,
        })
    }

    /// Same tuple and shape, new cell values; the total is recomputed.
    pub(crate) fn with_cells(&self, cells: Vec<f64>) -> Self {
        debug_assert_eq!(cells.len(), self.cells.len());
        Self {
            tuple: self.tuple.clone(),
            shape: self.shape.clone(),
            total: cells.iter().sum(),
            cells,
        }
    }

    pub fn tuple(&self) -> &FeatureTuple {
        &self.tuple
    }

    pub fn shape(&self) -> &[usize] {
        &self.shape
    }

    pub fn cells(&self) -> &[f64] {
        &self.cells
    }

    pub fn total(&self) -> f64 {
        self.total
    }

    pub fn len(&self) -> usize {
        self.cells.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cells.is_empty()
    }

    /// Cell index for values given in axis order.
    pub fn flat_index(&self, values: &[u32]) -> usize {
        debug_assert_eq!(values.len(), self.shape.len());
        values
            .iter()
            .zip(&self.shape)
            .fold(0, |acc, (&v, &card)| acc * card + v as usize)
    }

    /// Cell index holding a full record (one value per schema feature).
    pub fn index_of_record(&self, record: &[u32]) -> usize {
        let mut acc = 0;
        for (f, card) in self.tuple.axes().into_iter().zip(&self.shape) {
            acc = acc * card + record[f] as usize;
        }
        acc
    }

    /// Additively smoothed joint probability of the cell holding `record`:
    /// `(count + s) / (total + s * cells)`. Uniform when both are zero.
    pub fn smoothed_probability(&self, record: &[u32], smoothing: f64) -> f64 {
        let denom = self.total + smoothing * self.cells.len() as f64;
        if denom <= 0.0 {
            return 1.0 / self.cells.len() as f64;
        }
        (self.cells[self.index_of_record(record)] + smoothing) / denom
    }

    fn child_cardinality(&self) -> usize {
        *self.shape.last().expect("tables have at least one axis")
    }

    /// Number of parent strata (product of parent cardinalities).
    pub fn strata(&self) -> usize {
        self.cells.len() / self.child_cardinality()
    }

    /// `P(child = child_value | parents = parent_values)` with additive
    /// smoothing. An empty stratum with zero smoothing gives the uniform
    /// `1 / child_cardinality`.
    pub fn conditional_prob(
        &self,
        child_value: u32,
        parent_values: &[u32],
        smoothing: f64,
    ) -> Result<f64> {
        let FeatureTuple::Conditional { parents, .. } = &self.tuple else {
            return Err(Error::Tuple(format!("{} is not a conditional", self.tuple)));
        };
        if parent_values.len() != parents.len() {
            return Err(Error::Tuple(format!(
                "{} parent values for {} parents",
                parent_values.len(),
                parents.len()
            )));
        }
        if smoothing < 0.0 || !smoothing.is_finite() {
            return Err(Error::param("smoothing must be finite and >= 0"));
        }
        for (&v, &card) in parent_values
            .iter()
            .chain(std::iter::once(&child_value))
            .zip(&self.shape)
        {
            if v as usize >= card {
                return Err(Error::param(format!("value {v} outside domain of size {card}")));
            }
        }
        let stratum = parent_values
            .iter()
            .zip(&self.shape)
            .fold(0, |acc, (&v, &card)| acc * card + v as usize);
        Ok(self.stratum_prob(stratum, child_value as usize, smoothing))
    }

    /// Conditional probability for the child and parent values in a full record.
    pub fn conditional_prob_of_record(&self, record: &[u32], smoothing: f64) -> f64 {
        let child_card = self.child_cardinality();
        let idx = self.index_of_record(record);
        self.stratum_prob(idx / child_card, idx % child_card, smoothing)
    }

    fn stratum_prob(&self, stratum: usize, child: usize, smoothing: f64) -> f64 {
        let child_card = self.child_cardinality();
        let row = &self.cells[stratum * child_card..(stratum + 1) * child_card];
        let count: f64 = row.iter().sum();
        let denom = count + smoothing * child_card as f64;
        if denom <= 0.0 {
            return 1.0 / child_card as f64;
        }
        (row[child] + smoothing) / denom
    }

    /// Probability-normalized copy; uniform if the table is all zeros.
    pub fn normalized(&self) -> Self {
        let n = self.cells.len() as f64;
        let cells = if self.total > 0.0 {
            self.cells.iter().map(|c| c / self.total).collect()
        } else {
            vec![1.0 / n; self.cells.len()]
        };
        self.with_cells(cells)
    }

    /// Each parent stratum normalized to sum to one (uniform for empty strata).
    /// For a marginal tuple the last axis plays the role of the child.
    pub fn normalized_per_stratum(&self) -> Self {
        let child_card = self.child_cardinality();
        let mut cells = self.cells.clone();
        for row in cells.chunks_mut(child_card) {
            let s: f64 = row.iter().sum();
            if s > 0.0 {
                row.iter_mut().for_each(|c| *c /= s);
            } else {
                row.iter_mut().for_each(|c| *c = 1.0 / child_card as f64);
            }
        }
        self.with_cells(cells)
    }

    /// Sums out every axis not in `keep` (schema feature indices, in any
    /// order). Result is a canonical marginal.
    pub fn project(&self, keep: &[usize]) -> Result<Self> {
        let axes = self.tuple.axes();
        let target = FeatureTuple::marginal(keep.to_vec());
        let FeatureTuple::Marginal(kept) = &target else {
            unreachable!()
        };
        let positions: Vec<usize> = kept
            .iter()
            .map(|f| {
                axes.iter()
                    .position(|a| a == f)
                    .ok_or_else(|| Error::Tuple(format!("feature {f} not in {}", self.tuple)))
            })
            .collect::<Result<_>>()?;
        let out_shape: Vec<usize> = positions.iter().map(|&p| self.shape[p]).collect();
        let mut out = vec![0.0; out_shape.iter().product()];
        let mut coord = vec![0usize; self.shape.len()];
        for &c in &self.cells {
            let idx = positions
                .iter()
                .zip(&out_shape)
                .fold(0, |acc, (&p, &card)| acc * card + coord[p]);
            out[idx] += c;
            for d in (0..coord.len()).rev() {
                coord[d] += 1;
                if coord[d] < self.shape[d] {
                    break;
                }
                coord[d] = 0;
            }
        }
        Ok(Self {
            tuple: target,
            total: out.iter().sum(),
            shape: out_shape,
            cells: out,
        })
    }
}

/// Per-row flat cell index over `axes`, written into `out`.
pub(crate) fn flat_indices(data: &Dataset, axes: &[usize], out: &mut Vec<usize>) {
    out.clear();
    out.resize(data.n_rows(), 0);
    for &f in axes {
        let card = data.schema().cardinality(f);
        for (slot, &v) in out.iter_mut().zip(data.column(f)) {
            *slot = *slot * card + v as usize;
        }
    }
}

/// `measure_marginal` under its operation name.
pub fn measure_marginal(data: &Dataset, tuple: &FeatureTuple) -> Result<MarginalTable> {
    MarginalTable::measure(data, tuple)
}
