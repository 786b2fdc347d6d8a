//! Plug-in mutual information over discrete columns, in nats.

use crate::error::{Error, Result};
use crate::tabular::marginal::flat_indices;
use crate::tabular::Dataset;

/// `I(A; B) = Σ p(a,b) ln[p(a,b) / (p(a) p(b))]` from empirical counts.
pub fn mutual_information(data: &Dataset, a: usize, b: usize) -> Result<f64> {
    if a == b {
        return Err(Error::Tuple(format!("mutual information of feature {a} with itself")));
    }
    set_mutual_information(data, b, &[a])
}

/// `I(child; parents)` where the parents are treated as one joint variable.
/// Zero for an empty parent set.
pub fn set_mutual_information(data: &Dataset, child: usize, parents: &[usize]) -> Result<f64> {
    let n = data.n_features();
    if child >= n || parents.iter().any(|&p| p >= n || p == child) {
        return Err(Error::Tuple(format!(
            "bad child/parents {child}/{parents:?} for {n} features"
        )));
    }
    if data.is_empty() {
        return Err(Error::EmptyDataset);
    }
    if parents.is_empty() {
        return Ok(0.0);
    }
    let mut scratch = MiScratch::default();
    Ok(scratch.mutual_information(data, child, parents))
}

/// Reusable buffers for repeated MI evaluations on one dataset.
#[derive(Default)]
pub(crate) struct MiScratch {
    index: Vec<usize>,
    counts: Vec<f64>,
}

impl MiScratch {
    pub(crate) fn mutual_information(
        &mut self,
        data: &Dataset,
        child: usize,
        parents: &[usize],
    ) -> f64 {
        if parents.is_empty() {
            return 0.0;
        }
        let child_card = data.schema().cardinality(child);
        let strata: usize = parents.iter().map(|&p| data.schema().cardinality(p)).product();
        let mut axes = parents.to_vec();
        axes.push(child);
        flat_indices(data, &axes, &mut self.index);
        self.counts.clear();
        self.counts.resize(strata * child_card, 0.0);
        for &i in &self.index {
            self.counts[i] += 1.0;
        }
        mi_from_counts(&self.counts, child_card)
    }
}

/// MI between the stratum (row) variable and the child (column) variable of
/// a row-major count table whose rows have `child_card` cells.
pub(crate) fn mi_from_counts(counts: &[f64], child_card: usize) -> f64 {
    let total: f64 = counts.iter().sum();
    if total <= 0.0 {
        return 0.0;
    }
    let mut child_marginal = vec![0.0; child_card];
    for row in counts.chunks(child_card) {
        for (m, c) in child_marginal.iter_mut().zip(row) {
            *m += c;
        }
    }
    let mut mi = 0.0;
    for row in counts.chunks(child_card) {
        let row_total: f64 = row.iter().sum();
        if row_total == 0.0 {
            continue;
        }
        for (&c, &m) in row.iter().zip(&child_marginal) {
            if c > 0.0 {
                // p(a,b) ln[p(a,b) / (p(a) p(b))] with counts: c/N ln[c N / (r m)]
                mi += c * ((c * total) / (row_total * m)).ln();
            }
        }
    }
    (mi / total).max(0.0)
}
