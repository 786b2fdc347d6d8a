//! Greedy Bayesian-network synthesizer.
//!
//! The first feature of the network order is drawn uniformly. Every later
//! position picks one `(child, parent set)` with the exponential mechanism
//! over `|train| · I(child; parents)`, where the child is any unplaced feature
//! and the parents are at most `k` already placed features whose joint table
//! with the child stays under a cell cap. Conditionals are measured with
//! Laplace noise and normalized per parent stratum.

use std::collections::HashMap;
use std::sync::Arc;

use itertools::Itertools;
use serde::{Deserialize, Serialize};

use crate::dp::{exponential_mechanism, noisy_marginal, PrivacyBudget};
use crate::error::{Error, Result};
use crate::mst::check_probability_table;
use crate::rng::RandomSource;
use crate::tabular::{Dataset, FeatureTuple, MarginalTable, MiScratch, Schema};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct PrivBayesConfig {
    /// Sensitivity assumed for the `|train| · MI` selection score.
    pub mi_sensitivity: f64,
    /// Hard upper bound on `k`.
    pub max_parents: usize,
    /// Largest allowed `child × parents` table.
    pub domain_cap: usize,
    /// `k` is the largest value whose worst-case stratum keeps at least
    /// `factor · min cardinality / ε_measurement` rows.
    pub k_threshold_factor: f64,
    /// Skips [`choose_k`] when set.
    pub fixed_k: Option<usize>,
}

impl Default for PrivBayesConfig {
    fn default() -> Self {
        Self {
            mi_sensitivity: std::f64::consts::LN_2,
            max_parents: 4,
            domain_cap: 10_000,
            k_threshold_factor: 5.0,
            fixed_k: None,
        }
    }
}

/// Selection rounds and measurements used by a network over `n` features.
fn budget_shape(n: usize) -> (usize, usize) {
    (n.saturating_sub(1).max(1), n)
}

/// Maximum parent count for the given budget and training size.
///
/// The worst-case parent set of size `k` is the product of the `k` largest
/// cardinalities; it must leave an average of at least
/// `k_threshold_factor · (smallest cardinality) / ε_measurement` rows per
/// stratum. The result is at least 1, non-decreasing in ε, and equals
/// `max_parents` as ε grows without bound.
pub fn choose_k(
    budget: &PrivacyBudget,
    schema: &Schema,
    train_rows: usize,
    config: &PrivBayesConfig,
) -> usize {
    let (rounds, measurements) = budget_shape(schema.len());
    let eps = budget
        .split(rounds, measurements)
        .expect("budget shape is positive")
        .per_measurement;
    let mut cards = schema.cardinalities();
    cards.sort_unstable_by(|a, b| b.cmp(a));
    let child_card = *cards.last().expect("schemas are non-empty") as f64;
    let threshold = config.k_threshold_factor * child_card / eps;

    let mut k = 1;
    for size in 1..=config.max_parents.max(1) {
        let worst: f64 = cards.iter().take(size).map(|&c| c as f64).product();
        if train_rows as f64 / worst >= threshold {
            k = size;
        } else {
            break;
        }
    }
    k
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BayesNet {
    schema_fingerprint: String,
    schema: Schema,
    budget: PrivacyBudget,
    k: usize,
    order: Vec<usize>,
    /// Sorted parent indices, per feature index.
    parents: Vec<Vec<usize>>,
    /// Per-stratum normalized conditionals, per feature index.
    conditionals: Vec<MarginalTable>,
    selection_log: Vec<FeatureTuple>,
}

pub fn fit_privbayes(
    train: &Dataset,
    budget: &PrivacyBudget,
    config: &PrivBayesConfig,
    rng: &mut RandomSource,
) -> Result<BayesNet> {
    let n = train.n_features();
    if train.is_empty() {
        return Err(Error::EmptyDataset);
    }
    if config.mi_sensitivity.is_nan() || config.mi_sensitivity <= 0.0 {
        return Err(Error::param("mi_sensitivity must be positive"));
    }
    let schema = train.schema();
    let k = match config.fixed_k {
        Some(k) if k >= 1 => k,
        Some(_) => return Err(Error::param("fixed_k must be at least 1")),
        None => choose_k(budget, schema, train.n_rows(), config),
    };
    let (rounds, measurements) = budget_shape(n);
    let split = budget.split(rounds, measurements)?;
    let rows = train.n_rows() as f64;

    let mut select_rng = rng.fork("privbayes/select");
    let first = select_rng.below(n);
    let mut order = vec![first];
    let mut placed = vec![false; n];
    placed[first] = true;
    let mut parents: Vec<Vec<usize>> = vec![Vec::new(); n];
    let mut selection_log = vec![FeatureTuple::conditional(first, Vec::new())];

    let mut cache: HashMap<(usize, Vec<usize>), f64> = HashMap::new();
    let mut scratch = MiScratch::default();
    let mut candidates: Vec<(usize, Vec<usize>)> = Vec::new();
    let mut scores: Vec<f64> = Vec::new();
    for _ in 1..n {
        let placed_list: Vec<usize> = (0..n).filter(|&f| placed[f]).collect();
        candidates.clear();
        scores.clear();
        for child in (0..n).filter(|&f| !placed[f]) {
            let child_card = schema.cardinality(child);
            for size in 0..=k.min(placed_list.len()) {
                for set in placed_list.iter().copied().combinations(size) {
                    let cells: usize = set.iter().map(|&p| schema.cardinality(p)).product::<usize>() * child_card;
                    if size > 0 && cells > config.domain_cap {
                        continue;
                    }
                    let mi = *cache
                        .entry((child, set.clone()))
                        .or_insert_with(|| scratch.mutual_information(train, child, &set));
                    scores.push(rows * mi);
                    candidates.push((child, set));
                }
            }
        }
        let pick = exponential_mechanism(&scores, config.mi_sensitivity, split.per_selection_round, &mut select_rng)?;
        let (child, set) = candidates.swap_remove(pick);
        placed[child] = true;
        order.push(child);
        selection_log.push(FeatureTuple::conditional(child, set.clone()));
        parents[child] = set;
    }

    let mut measure_rng = rng.fork("privbayes/measure");
    let mut conditionals: Vec<Option<MarginalTable>> = vec![None; n];
    for &f in &order {
        let counts = MarginalTable::measure(train, &FeatureTuple::conditional(f, parents[f].clone()))?;
        let noisy = noisy_marginal(&counts, split.per_measurement, &mut measure_rng)?;
        conditionals[f] = Some(noisy.normalized_per_stratum());
    }

    Ok(BayesNet {
        schema_fingerprint: schema.fingerprint(),
        schema: schema.clone(),
        budget: *budget,
        k,
        order,
        parents,
        conditionals: conditionals.into_iter().map(|c| c.expect("every feature measured")).collect(),
        selection_log,
    })
}

impl BayesNet {
    pub fn schema(&self) -> &Schema {
        &self.schema
    }

    pub fn budget(&self) -> &PrivacyBudget {
        &self.budget
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn order(&self) -> &[usize] {
        &self.order
    }

    pub fn parents(&self, feature: usize) -> &[usize] {
        &self.parents[feature]
    }

    pub fn conditional(&self, feature: usize) -> &MarginalTable {
        &self.conditionals[feature]
    }

    pub fn selection_log(&self) -> &[FeatureTuple] {
        &self.selection_log
    }

    /// Builds a network from an explicit order and conditionals (already
    /// normalized per stratum), e.g. for tests.
    pub fn from_parts(
        schema: Schema,
        budget: PrivacyBudget,
        k: usize,
        order: Vec<usize>,
        conditionals: Vec<MarginalTable>,
    ) -> Result<Self> {
        let n = schema.len();
        if conditionals.len() != n {
            return Err(Error::param("one conditional per feature is required"));
        }
        let mut parents = vec![Vec::new(); n];
        for t in &conditionals {
            match t.tuple() {
                FeatureTuple::Conditional { child, parents: p } if *child < n => parents[*child] = p.clone(),
                other => return Err(Error::Tuple(format!("{other} is not a conditional over the schema"))),
            }
        }
        let mut by_feature: Vec<Option<MarginalTable>> = vec![None; n];
        for t in conditionals {
            if let FeatureTuple::Conditional { child, .. } = t.tuple() {
                by_feature[*child] = Some(t.clone());
            }
        }
        let conditionals = by_feature
            .into_iter()
            .collect::<Option<Vec<_>>>()
            .ok_or_else(|| Error::param("a feature has no conditional"))?;
        let net = Self {
            schema_fingerprint: schema.fingerprint(),
            selection_log: order.iter().map(|&f| FeatureTuple::conditional(f, parents[f].clone())).collect(),
            schema,
            budget,
            k,
            order,
            parents,
            conditionals,
        };
        net.validate()?;
        Ok(net)
    }

    /// DAG order, parent bounds, table shapes and per-stratum normalization.
    pub fn validate(&self) -> Result<()> {
        let n = self.schema.len();
        if self.schema.fingerprint() != self.schema_fingerprint {
            return Err(Error::SchemaMismatch("model schema fingerprint does not match".into()));
        }
        let mut sorted = self.order.clone();
        sorted.sort_unstable();
        if sorted != (0..n).collect::<Vec<_>>() {
            return Err(Error::param("order is not a permutation of the features"));
        }
        if self.parents.len() != n || self.conditionals.len() != n {
            return Err(Error::param("one parent set and conditional per feature is required"));
        }
        let mut position = vec![0; n];
        for (i, &f) in self.order.iter().enumerate() {
            position[f] = i;
        }
        for f in 0..n {
            let ps = &self.parents[f];
            if ps.len() > self.k {
                return Err(Error::param(format!("feature {f} has {} parents (k = {})", ps.len(), self.k)));
            }
            if ps.iter().any(|&p| p >= n || position[p] >= position[f]) {
                return Err(Error::param(format!("parents of feature {f} do not precede it")));
            }
            let tuple = FeatureTuple::conditional(f, ps.clone());
            check_probability_table(&self.schema, &self.conditionals[f], &tuple)?;
            let child_card = self.schema.cardinality(f);
            for row in self.conditionals[f].cells().chunks(child_card) {
                let s: f64 = row.iter().sum();
                if (s - 1.0).abs() > 1e-9 {
                    return Err(Error::param(format!("conditional of feature {f} has a stratum summing to {s}")));
                }
            }
        }
        Ok(())
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("model serializes")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let net: Self = serde_json::from_str(text)?;
        net.validate()?;
        Ok(net)
    }
}

/// Ancestral sampling in network order.
pub fn sample_privbayes(model: &BayesNet, n_rows: usize, rng: &mut RandomSource) -> Result<Dataset> {
    if n_rows == 0 {
        return Err(Error::param("n_rows must be positive"));
    }
    let n = model.schema.len();
    let mut columns = vec![Vec::with_capacity(n_rows); n];
    let mut row = vec![0u32; n];
    for _ in 0..n_rows {
        for &f in &model.order {
            let table = &model.conditionals[f];
            let child_card = model.schema.cardinality(f);
            let stratum = model.parents[f]
                .iter()
                .fold(0, |acc, &p| acc * model.schema.cardinality(p) + row[p] as usize);
            let weights = &table.cells()[stratum * child_card..(stratum + 1) * child_card];
            row[f] = rng.weighted(weights) as u32;
        }
        for (col, &v) in columns.iter_mut().zip(&row) {
            col.push(v);
        }
    }
    Dataset::from_columns(Arc::new(model.schema.clone()), columns, None)
}

/// One `(child | sorted parents)` tuple per feature, sorted.
pub fn focal_points_privbayes(model: &BayesNet) -> Vec<FeatureTuple> {
    let mut out = model.selection_log.clone();
    out.sort();
    out
}
