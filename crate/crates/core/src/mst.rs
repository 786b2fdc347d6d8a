//! Maximum-spanning-tree synthesizer.
//!
//! Structure: `n − 1` rounds of the exponential mechanism over count-scaled
//! mutual information, restricted to pairs that keep the graph acyclic. Each
//! chosen pair's 2-way table and the root's 1-way table are measured with
//! Laplace noise. Synthesis is ancestral sampling down the tree from feature 0.

use std::collections::VecDeque;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::dp::{exponential_mechanism, noisy_marginal, PrivacyBudget};
use crate::error::{Error, Result};
use crate::rng::RandomSource;
use crate::tabular::{mutual_information, Dataset, FeatureTuple, MarginalTable, Schema};

/// Root of the sampling tree.
pub const ROOT: usize = 0;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct MstConfig {
    /// Sensitivity assumed for the `|train| · MI` selection score.
    pub mi_sensitivity: f64,
}

impl Default for MstConfig {
    fn default() -> Self {
        Self {
            mi_sensitivity: std::f64::consts::LN_2,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MstModel {
    schema_fingerprint: String,
    schema: Schema,
    budget: PrivacyBudget,
    /// Canonical `(min, max)` pairs, in selection order.
    edges: Vec<(usize, usize)>,
    /// Probability tables, one per edge, same order.
    edge_tables: Vec<MarginalTable>,
    root_table: MarginalTable,
    selection_log: Vec<FeatureTuple>,
}

struct UnionFind(Vec<usize>);

impl UnionFind {
    fn new(n: usize) -> Self {
        Self((0..n).collect())
    }

    fn find(&mut self, mut x: usize) -> usize {
        while self.0[x] != x {
            self.0[x] = self.0[self.0[x]];
            x = self.0[x];
        }
        x
    }

    fn union(&mut self, a: usize, b: usize) -> bool {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra == rb {
            return false;
        }
        self.0[ra.max(rb)] = ra.min(rb);
        true
    }
}

pub fn fit_mst(
    train: &Dataset,
    budget: &PrivacyBudget,
    config: &MstConfig,
    rng: &mut RandomSource,
) -> Result<MstModel> {
    let n = train.n_features();
    if n < 2 {
        return Err(Error::param("MST needs at least two features"));
    }
    if train.is_empty() {
        return Err(Error::EmptyDataset);
    }
    if config.mi_sensitivity.is_nan() || config.mi_sensitivity <= 0.0 {
        return Err(Error::param("mi_sensitivity must be positive"));
    }
    let split = budget.split(n - 1, n)?;
    let rows = train.n_rows() as f64;

    let mut pairs = Vec::with_capacity(n * (n - 1) / 2);
    for a in 0..n {
        for b in a + 1..n {
            pairs.push((a, b, rows * mutual_information(train, a, b)?));
        }
    }

    let mut select_rng = rng.fork("mst/select");
    let mut components = UnionFind::new(n);
    let mut edges = Vec::with_capacity(n - 1);
    let mut candidates: Vec<(usize, usize, f64)> = Vec::with_capacity(pairs.len());
    let mut scores: Vec<f64> = Vec::with_capacity(pairs.len());
    for _ in 0..n - 1 {
        candidates.clear();
        for &(a, b, s) in &pairs {
            if components.find(a) != components.find(b) {
                candidates.push((a, b, s));
            }
        }
        scores.clear();
        scores.extend(candidates.iter().map(|c| c.2));
        let pick = exponential_mechanism(
            &scores,
            config.mi_sensitivity,
            split.per_selection_round,
            &mut select_rng,
        )?;
        let (a, b, _) = candidates[pick];
        components.union(a, b);
        edges.push((a, b));
    }

    let mut measure_rng = rng.fork("mst/measure");
    let edge_tables = edges
        .iter()
        .map(|&(a, b)| {
            let counts = MarginalTable::measure(train, &FeatureTuple::pair(a, b))?;
            Ok(noisy_marginal(&counts, split.per_measurement, &mut measure_rng)?.normalized())
        })
        .collect::<Result<Vec<_>>>()?;
    let root_counts = MarginalTable::measure(train, &FeatureTuple::marginal(vec![ROOT]))?;
    let root_table = noisy_marginal(&root_counts, split.per_measurement, &mut measure_rng)?.normalized();

    Ok(MstModel {
        schema_fingerprint: train.schema().fingerprint(),
        schema: train.schema().clone(),
        budget: *budget,
        selection_log: edges.iter().map(|&(a, b)| FeatureTuple::pair(a, b)).collect(),
        edges,
        edge_tables,
        root_table,
    })
}

impl MstModel {
    pub fn schema(&self) -> &Schema {
        &self.schema
    }

    pub fn budget(&self) -> &PrivacyBudget {
        &self.budget
    }

    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    pub fn edge_tables(&self) -> &[MarginalTable] {
        &self.edge_tables
    }

    pub fn root_table(&self) -> &MarginalTable {
        &self.root_table
    }

    pub fn selection_log(&self) -> &[FeatureTuple] {
        &self.selection_log
    }

    /// Builds a model from explicit probability tables, e.g. for tests or
    /// imported structures. Tables are validated but not renormalized.
    pub fn from_parts(
        schema: Schema,
        budget: PrivacyBudget,
        edges: Vec<(usize, usize)>,
        edge_tables: Vec<MarginalTable>,
        root_table: MarginalTable,
    ) -> Result<Self> {
        let edges: Vec<(usize, usize)> = edges.into_iter().map(|(a, b)| (a.min(b), a.max(b))).collect();
        let model = Self {
            schema_fingerprint: schema.fingerprint(),
            selection_log: edges.iter().map(|&(a, b)| FeatureTuple::pair(a, b)).collect(),
            schema,
            budget,
            edges,
            edge_tables,
            root_table,
        };
        model.validate()?;
        Ok(model)
    }

    /// Checks the spanning-tree structure and table shapes and normalization.
    pub fn validate(&self) -> Result<()> {
        let n = self.schema.len();
        if self.schema.fingerprint() != self.schema_fingerprint {
            return Err(Error::SchemaMismatch("model schema fingerprint does not match".into()));
        }
        if self.edges.len() != n - 1 || self.edge_tables.len() != n - 1 {
            return Err(Error::param(format!("a spanning tree over {n} features needs {} edges", n - 1)));
        }
        let mut uf = UnionFind::new(n);
        for &(a, b) in &self.edges {
            if a >= n || b >= n || a == b {
                return Err(Error::param(format!("bad edge ({a},{b})")));
            }
            if !uf.union(a, b) {
                return Err(Error::param(format!("edge ({a},{b}) closes a cycle")));
            }
        }
        for (&(a, b), table) in self.edges.iter().zip(&self.edge_tables) {
            check_probability_table(&self.schema, table, &FeatureTuple::pair(a, b))?;
        }
        check_probability_table(&self.schema, &self.root_table, &FeatureTuple::marginal(vec![ROOT]))?;
        Ok(())
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("model serializes")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let model: Self = serde_json::from_str(text)?;
        model.validate()?;
        Ok(model)
    }
}

pub(crate) fn check_probability_table(schema: &Schema, table: &MarginalTable, tuple: &FeatureTuple) -> Result<()> {
    if table.tuple() != tuple {
        return Err(Error::Tuple(format!("table for {} where {tuple} was expected", table.tuple())));
    }
    // Re-derives the shape from the schema and rejects negative cells.
    let rebuilt = MarginalTable::from_cells(schema, tuple.clone(), table.cells().to_vec())?;
    if rebuilt.shape() != table.shape() {
        return Err(Error::Tuple(format!("table for {tuple} has the wrong shape")));
    }
    Ok(())
}

/// Rows drawn by ancestral sampling from [`ROOT`] along the tree.
pub fn sample_mst(model: &MstModel, n_rows: usize, rng: &mut RandomSource) -> Result<Dataset> {
    if n_rows == 0 {
        return Err(Error::param("n_rows must be positive"));
    }
    let n = model.schema.len();
    let mut adjacency: Vec<Vec<usize>> = vec![Vec::new(); n];
    for (e, &(a, b)) in model.edges.iter().enumerate() {
        adjacency[a].push(e);
        adjacency[b].push(e);
    }

    // (child, parent, per-parent-value child weights), in BFS order.
    let mut steps: Vec<(usize, usize, Vec<Vec<f64>>)> = Vec::with_capacity(n - 1);
    let mut seen = vec![false; n];
    seen[ROOT] = true;
    let mut queue = VecDeque::from([ROOT]);
    while let Some(parent) = queue.pop_front() {
        for &e in &adjacency[parent] {
            let (a, b) = model.edges[e];
            let child = if a == parent { b } else { a };
            if seen[child] {
                continue;
            }
            seen[child] = true;
            queue.push_back(child);
            steps.push((child, parent, conditional_rows(&model.edge_tables[e], parent == a)));
        }
    }

    let mut columns = vec![Vec::with_capacity(n_rows); n];
    let root_weights = model.root_table.cells();
    let mut row = vec![0u32; n];
    for _ in 0..n_rows {
        row[ROOT] = rng.weighted(root_weights) as u32;
        for (child, parent, weights) in &steps {
            row[*child] = rng.weighted(&weights[row[*parent] as usize]) as u32;
        }
        for (col, &v) in columns.iter_mut().zip(&row) {
            col.push(v);
        }
    }
    Dataset::from_columns(Arc::new(model.schema.clone()), columns, None)
}

/// Child weights for every parent value of a 2-way table. `parent_is_first`
/// says whether the parent is the table's first axis.
fn conditional_rows(table: &MarginalTable, parent_is_first: bool) -> Vec<Vec<f64>> {
    let (rows, cols) = (table.shape()[0], table.shape()[1]);
    let cells = table.cells();
    if parent_is_first {
        cells.chunks(cols).map(<[f64]>::to_vec).collect()
    } else {
        (0..cols)
            .map(|p| (0..rows).map(|c| cells[c * cols + p]).collect())
            .collect()
    }
}

/// The selected pairs in canonical (sorted) order.
pub fn focal_points_mst(model: &MstModel) -> Vec<FeatureTuple> {
    let mut out = model.selection_log.clone();
    out.sort();
    out
}
