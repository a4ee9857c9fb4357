//! Story reward: (γ₁·D + γ₂·L + γ₃·C)·H.

use std::collections::HashMap;
use std::sync::{Arc, Mutex};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::facts::{DataFact, FactType};
use crate::logic::{Relation, RelationTable};
use crate::scoring::{self, FactScore, ScoringConfig};
use crate::table::{DataTable, RowSet, Subspace};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum WeightsError {
    #[error("weight {0} outside [0, 1]")]
    OutOfRange(f64),
    #[error("weights sum to {0}, expected 1")]
    BadSum(f64),
}

/// Balance of diversity, logicality and integrity; sums to 1.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RewardWeights {
    pub diversity: f64,
    pub logicality: f64,
    pub integrity: f64,
}

impl Default for RewardWeights {
    fn default() -> Self {
        RewardWeights {
            diversity: 1.0 / 3.0,
            logicality: 1.0 / 3.0,
            integrity: 1.0 / 3.0,
        }
    }
}

impl RewardWeights {
    pub const SUM_TOLERANCE: f64 = 1e-9;

    pub fn new(diversity: f64, logicality: f64, integrity: f64) -> Result<Self, WeightsError> {
        for w in [diversity, logicality, integrity] {
            if !(0.0..=1.0).contains(&w) {
                return Err(WeightsError::OutOfRange(w));
            }
        }
        let sum = diversity + logicality + integrity;
        if (sum - 1.0).abs() > Self::SUM_TOLERANCE {
            return Err(WeightsError::BadSum(sum));
        }
        Ok(RewardWeights {
            diversity,
            logicality,
            integrity,
        })
    }

    /// Accept weights whose sum is within `tolerance` of 1 and rescale them.
    /// The flag reports whether rescaling changed anything.
    pub fn renormalized(
        diversity: f64,
        logicality: f64,
        integrity: f64,
        tolerance: f64,
    ) -> Result<(Self, bool), WeightsError> {
        let sum = diversity + logicality + integrity;
        if (sum - 1.0).abs() > tolerance || sum <= 0.0 {
            return Err(WeightsError::BadSum(sum));
        }
        for w in [diversity, logicality, integrity] {
            if w < 0.0 {
                return Err(WeightsError::OutOfRange(w));
            }
        }
        let w = RewardWeights {
            diversity: diversity / sum,
            logicality: logicality / sum,
            integrity: integrity / sum,
        };
        Ok((w, (sum - 1.0).abs() > Self::SUM_TOLERANCE))
    }
}

/// The reward and its factors.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Criteria {
    pub diversity: f64,
    pub logicality: f64,
    pub integrity: f64,
    pub entropy: f64,
    pub reward: f64,
}

/// Σ P·importance.
pub fn entropy(scores: &[FactScore]) -> f64 {
    scores.iter().map(|s| s.probability * s.importance).sum()
}

/// Type count over min(|S|, 10), times the normalized Shannon index of the
/// type mix (1 when a single type is present).
pub fn diversity(types: &[FactType]) -> f64 {
    if types.is_empty() {
        return 0.0;
    }
    let mut counts = [0usize; 10];
    for t in types {
        counts[t.index()] += 1;
    }
    let total = types.len() as f64;
    let present: Vec<f64> = counts.iter().filter(|&&c| c > 0).map(|&c| c as f64 / total).collect();
    let n = present.len();
    let even = present.iter().all(|&p| p == present[0]);
    let evenness = if even {
        1.0
    } else {
        (-present.iter().map(|p| p * p.ln()).sum::<f64>() / (n as f64).ln()).min(1.0)
    };
    n as f64 / types.len().min(10) as f64 * evenness
}

/// Mean likelihood of each relation after its source fact's type. Missing
/// relations count as 0; a single fact scores 1.
pub fn logicality(types: &[FactType], relations: &[Option<Relation>], table: &RelationTable) -> f64 {
    if types.len() < 2 {
        return 1.0;
    }
    let sum: f64 = types
        .iter()
        .zip(relations)
        .map(|(&t, r)| r.map_or(0.0, |r| table.likelihood(t, r)))
        .sum();
    sum / (types.len() - 1) as f64
}

/// Share of table rows covered by the union of the facts' subspaces.
pub fn integrity(facts: &[DataFact], table: &DataTable) -> f64 {
    let sets: Vec<RowSet> = facts
        .iter()
        .map(|f| table.select_subspace(&f.subspace).unwrap_or_default())
        .collect();
    coverage(sets.iter(), table.row_count())
}

fn coverage<'a>(sets: impl Iterator<Item = &'a RowSet>, rows: usize) -> f64 {
    if rows == 0 {
        return 0.0;
    }
    let mut union = RowSet::default();
    for s in sets {
        if s.len() == rows {
            return 1.0;
        }
        union = union.union(s);
    }
    union.len() as f64 / rows as f64
}

pub fn combine(w: &RewardWeights, d: f64, l: f64, c: f64, h: f64) -> f64 {
    (w.diversity * d + w.logicality * l + w.integrity * c) * h
}

/// Memoized fact scores and subspace row sets for one table.
pub struct ScoreCache<'t> {
    table: &'t DataTable,
    config: ScoringConfig,
    scores: Mutex<HashMap<DataFact, FactScore>>,
    rows: Mutex<HashMap<Subspace, Arc<RowSet>>>,
}

impl<'t> ScoreCache<'t> {
    pub fn new(table: &'t DataTable, config: ScoringConfig) -> Self {
        ScoreCache {
            table,
            config,
            scores: Mutex::new(HashMap::new()),
            rows: Mutex::new(HashMap::new()),
        }
    }

    pub fn table(&self) -> &'t DataTable {
        self.table
    }

    /// Score of a fact; facts that cannot be scored count as zero support.
    pub fn score(&self, fact: &DataFact) -> FactScore {
        if let Some(s) = self.scores.lock().unwrap().get(fact) {
            return *s;
        }
        let s = scoring::importance_with(fact, self.table, &self.config)
            .unwrap_or_else(|_| FactScore::zero_support());
        self.scores.lock().unwrap().insert(fact.clone(), s);
        s
    }

    /// Score a batch in parallel; results follow input order.
    pub fn score_all(&self, facts: &[DataFact]) -> Vec<FactScore> {
        facts.par_iter().map(|f| self.score(f)).collect()
    }

    pub fn rows(&self, s: &Subspace) -> Arc<RowSet> {
        if let Some(r) = self.rows.lock().unwrap().get(s) {
            return r.clone();
        }
        let r = Arc::new(self.table.select_subspace(s).unwrap_or_default());
        self.rows.lock().unwrap().insert(s.clone(), r.clone());
        r
    }

    pub fn evaluate(
        &self,
        facts: &[DataFact],
        relations: &[Option<Relation>],
        weights: &RewardWeights,
        relation_table: &RelationTable,
    ) -> Criteria {
        let scores: Vec<FactScore> = facts.iter().map(|f| self.score(f)).collect();
        let types: Vec<FactType> = facts.iter().map(|f| f.fact_type).collect();
        let rows: Vec<Arc<RowSet>> = facts.iter().map(|f| self.rows(&f.subspace)).collect();
        let d = diversity(&types);
        let l = logicality(&types, relations, relation_table);
        let c = coverage(rows.iter().map(|r| r.as_ref()), self.table.row_count());
        let h = entropy(&scores);
        Criteria {
            diversity: d,
            logicality: l,
            integrity: c,
            entropy: h,
            reward: combine(weights, d, l, c, h),
        }
    }
}

/// Reward of a story from scratch.
pub fn reward(
    facts: &[DataFact],
    relations: &[Option<Relation>],
    weights: &RewardWeights,
    table: &DataTable,
) -> Criteria {
    ScoreCache::new(table, ScoringConfig::default()).evaluate(
        facts,
        relations,
        weights,
        &RelationTable::default(),
    )
}
