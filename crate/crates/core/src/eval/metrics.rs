use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Which candidate households were really in the training data.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct GroundTruth {
    members: BTreeSet<u64>,
    candidates: BTreeSet<u64>,
}

impl GroundTruth {
    pub fn new(members: BTreeSet<u64>, candidates: BTreeSet<u64>) -> Result<Self> {
        if let Some(m) = members.iter().find(|m| !candidates.contains(m)) {
            return Err(Error::param(format!("member household {m} is not a candidate")));
        }
        Ok(Self { members, candidates })
    }

    pub fn members(&self) -> &BTreeSet<u64> {
        &self.members
    }

    pub fn candidates(&self) -> &BTreeSet<u64> {
        &self.candidates
    }

    pub fn is_member(&self, household: u64) -> bool {
        self.members.contains(&household)
    }
}

fn prediction(predictions: &BTreeMap<u64, f64>, household: u64) -> Result<f64> {
    let p = *predictions
        .get(&household)
        .ok_or_else(|| Error::param(format!("no prediction for household {household}")))?;
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::param(format!("prediction {p} for household {household} is outside [0, 1]")));
    }
    Ok(p)
}

/// Confidence-weighted `(tpr − fpr + 1) / 2`.
///
/// Each household weighs `2·|0.5 − p|` and is called a member iff `p > 0.5`.
/// Rates are normalized by the total weight of their class; a class with zero
/// total weight contributes a rate of 0.
pub fn membership_advantage(predictions: &BTreeMap<u64, f64>, truth: &GroundTruth) -> Result<f64> {
    let (mut tp, mut pos, mut fp, mut neg) = (0.0, 0.0, 0.0, 0.0);
    for &h in truth.candidates() {
        let p = prediction(predictions, h)?;
        let w = 2.0 * (0.5 - p).abs();
        let called = p > 0.5;
        if truth.is_member(h) {
            pos += w;
            if called {
                tp += w;
            }
        } else {
            neg += w;
            if called {
                fp += w;
            }
        }
    }
    let tpr = if pos > 0.0 { tp / pos } else { 0.0 };
    let fpr = if neg > 0.0 { fp / neg } else { 0.0 };
    Ok((tpr - fpr + 1.0) / 2.0)
}

/// Probability that a random member outranks a random non-member (ties 1/2).
pub fn auc(predictions: &BTreeMap<u64, f64>, truth: &GroundTruth) -> Result<f64> {
    let mut members = Vec::new();
    let mut others = Vec::new();
    for &h in truth.candidates() {
        let p = prediction(predictions, h)?;
        if truth.is_member(h) {
            members.push(p);
        } else {
            others.push(p);
        }
    }
    if members.is_empty() || others.is_empty() {
        return Err(Error::param("AUC needs both members and non-members"));
    }
    let mut wins = 0.0;
    for &m in &members {
        for &o in &others {
            wins += if m > o {
                1.0
            } else if m == o {
                0.5
            } else {
                0.0
            };
        }
    }
    Ok(wins / (members.len() * others.len()) as f64)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn truth() -> GroundTruth {
        GroundTruth::new([1, 2].into(), [1, 2, 3, 4].into()).unwrap()
    }

    fn preds(p: [f64; 4]) -> BTreeMap<u64, f64> {
        (1..=4).zip(p).collect()
    }

    #[test]
    fn perfect_and_constant() {
        assert_eq!(membership_advantage(&preds([1.0, 1.0, 0.0, 0.0]), &truth()).unwrap(), 1.0);
        assert_eq!(membership_advantage(&preds([0.5; 4]), &truth()).unwrap(), 0.5);
        assert_eq!(auc(&preds([1.0, 1.0, 0.0, 0.0]), &truth()).unwrap(), 1.0);
        assert_eq!(auc(&preds([0.3; 4]), &truth()).unwrap(), 0.5);
    }

    #[test]
    fn mixed_case() {
        let p = preds([0.9, 0.4, 0.8, 0.1]);
        let ma = membership_advantage(&p, &truth()).unwrap();
        assert!((ma - (0.8 - 0.6 / 1.4 + 1.0) / 2.0).abs() < 1e-12);
        assert_eq!(auc(&p, &truth()).unwrap(), 0.75);
    }

    #[test]
    fn errors() {
        let mut p = preds([0.9, 0.4, 0.8, 0.1]);
        p.insert(4, 1.5);
        assert!(membership_advantage(&p, &truth()).is_err());
        p.remove(&4);
        assert!(membership_advantage(&p, &truth()).is_err());
        assert!(GroundTruth::new([9].into(), [1].into()).is_err());
        let one_class = GroundTruth::new([1].into(), [1].into()).unwrap();
        assert!(auc(&[(1, 0.2)].into(), &one_class).is_err());
    }
}
