//! Logic-oriented Monte Carlo tree search over data facts.
//!
//! Each node of the search tree is a fact; edges carry the coherence
//! relation that produced the child. The legal children of a node are a
//! pure function of its path and a per-node seed, so repeated visits and
//! the simulation tree see the same candidates.

use std::collections::{HashMap, HashSet};
use std::sync::atomic::{AtomicBool, Ordering};
use std::sync::{Arc, Mutex};
use std::time::{Duration, Instant};

use rand::seq::SliceRandom;
use rand::SeedableRng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::factgen::{self, FactRng};
use crate::facts::{DataFact, FactType};
use crate::logic::{self, CausalModel, CorrelationCausality, Relation, RelationTable};
use crate::reward::{Criteria, RewardWeights, ScoreCache};
use crate::scoring::{FactScore, ScoringConfig};
use crate::table::{DataTable, FieldKind};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SearchError {
    #[error("invalid goal: {0}")]
    InvalidGoal(String),
    #[error("generation failed: {0}")]
    Generation(String),
    #[error("search cancelled")]
    Cancelled,
}

/// What the search should produce and how long it may take.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Goal {
    pub max_length: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub min_information_bits: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub iteration_budget: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub time_budget_ms: Option<u64>,
}

impl Goal {
    pub fn iterations(max_length: usize, iterations: usize) -> Self {
        Goal {
            max_length,
            min_information_bits: None,
            iteration_budget: Some(iterations),
            time_budget_ms: None,
        }
    }

    pub fn timed(max_length: usize, budget: Duration) -> Self {
        Goal {
            max_length,
            min_information_bits: None,
            iteration_budget: None,
            time_budget_ms: Some(budget.as_millis() as u64),
        }
    }

    pub fn validate(&self) -> Result<(), SearchError> {
        if self.max_length == 0 {
            return Err(SearchError::InvalidGoal("max_length must be at least 1".into()));
        }
        match (self.iteration_budget, self.time_budget_ms) {
            (Some(0), None) => Err(SearchError::InvalidGoal("iteration budget must be positive".into())),
            (None, Some(0)) => Err(SearchError::InvalidGoal("time budget must be positive".into())),
            (Some(_), None) | (None, Some(_)) => Ok(()),
            _ => Err(SearchError::InvalidGoal(
                "exactly one of iteration_budget and time_budget_ms is required".into(),
            )),
        }?;
        if let Some(b) = self.min_information_bits {
            if !(b >= 0.0) {
                return Err(SearchError::InvalidGoal("min_information_bits must be non-negative".into()));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SearchConfig {
    /// Children generated per node, split across relations by likelihood.
    pub fan_out: usize,
    /// Hard cap on children per node, taken round-robin across relations.
    pub max_children: Option<usize>,
    /// Random facts drawn when choosing the root.
    pub initial_batch: usize,
    /// Simulation-tree expansions per iteration.
    pub simulation_steps: usize,
    pub relation_table: RelationTable,
    pub scoring: ScoringConfig,
}

impl Default for SearchConfig {
    fn default() -> Self {
        SearchConfig {
            fan_out: 20,
            max_children: None,
            initial_batch: 50,
            simulation_steps: 16,
            relation_table: RelationTable::default(),
            scoring: ScoringConfig::default(),
        }
    }
}

/// A generated story.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Story {
    pub facts: Vec<DataFact>,
    pub relations: Vec<Relation>,
    pub scores: Vec<FactScore>,
    pub criteria: Criteria,
    pub reward: f64,
    #[serde(default)]
    pub goal_unmet: bool,
    #[serde(default)]
    pub warnings: Vec<String>,
}

impl Story {
    pub fn linked_relations(&self) -> Vec<Option<Relation>> {
        self.relations.iter().copied().map(Some).collect()
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct SearchStats {
    pub iterations: usize,
    pub simulation_steps: usize,
    /// Simulation steps that began after the deadline; always 0.
    pub steps_after_deadline: usize,
    pub deadline_ms: Option<f64>,
    pub last_step_start_ms: Option<f64>,
    pub elapsed_ms: f64,
    pub tree_nodes: usize,
    pub exhausted: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TreeNodeExport {
    pub id: usize,
    pub parent: Option<usize>,
    pub relation: Option<Relation>,
    pub fact: DataFact,
    pub weight: f64,
    /// Reward of the completed path ending here, if one does.
    pub path_reward: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TreeExport {
    pub nodes: Vec<TreeNodeExport>,
}

impl TreeExport {
    /// Whether every weight equals the best completed-path reward below it.
    pub fn weights_consistent(&self) -> bool {
        self.nodes.iter().all(|n| {
            let best = self
                .nodes
                .iter()
                .filter(|c| c.parent == Some(n.id))
                .map(|c| c.weight)
                .chain(n.path_reward)
                .fold(f64::NEG_INFINITY, f64::max);
            best == n.weight
        })
    }
}

#[derive(Debug, Clone)]
pub struct SearchOutcome {
    pub story: Story,
    pub stats: SearchStats,
    pub tree: TreeExport,
}

/// A legal move from a path: the relation, the new fact and its seed.
#[derive(Debug, Clone, PartialEq)]
pub struct Candidate {
    pub relation: Relation,
    pub fact: DataFact,
    pub seed: u64,
}

fn splitmix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

fn mix(seed: u64, k: u64) -> u64 {
    splitmix(seed ^ splitmix(k.wrapping_add(1)))
}

/// Seed of the root node for a run seed.
pub fn root_seed(seed: u64) -> u64 {
    mix(seed, 0x726f_6f74)
}

/// Legal children of the last fact of `path`, excluding facts already on
/// the path. Allocation per relation is round(fan_out·P), at least 1 when
/// P > 0.
pub fn legal_children(
    table: &DataTable,
    config: &SearchConfig,
    causal: &dyn CausalModel,
    path: &[DataFact],
    seed: u64,
) -> Vec<Candidate> {
    let Some(last) = path.last() else {
        return Vec::new();
    };
    let mut per_relation: Vec<Vec<(Relation, DataFact)>> = Vec::new();
    for r in Relation::ALL {
        let p = config.relation_table.likelihood(last.fact_type, r);
        if p <= 0.0 {
            continue;
        }
        let k = ((config.fan_out as f64 * p).round() as usize).max(1);
        let mut rng = FactRng::seed_from_u64(mix(seed, r.index() as u64));
        let facts = logic::expand_with(last, r, table, causal, &mut rng, k + path.len());
        per_relation.push(
            facts
                .into_iter()
                .filter(|f| !path.contains(f))
                .take(k)
                .map(|f| (r, f))
                .collect(),
        );
    }
    let mut ordered: Vec<(Relation, DataFact)> = Vec::new();
    match config.max_children {
        None => ordered.extend(per_relation.into_iter().flatten()),
        Some(cap) => {
            let mut iters: Vec<_> = per_relation.into_iter().map(Vec::into_iter).collect();
            let mut progressed = true;
            while ordered.len() < cap && progressed {
                progressed = false;
                for it in iters.iter_mut() {
                    if ordered.len() >= cap {
                        break;
                    }
                    if let Some(c) = it.next() {
                        ordered.push(c);
                        progressed = true;
                    }
                }
            }
        }
    }
    let mut seen = HashSet::new();
    ordered
        .into_iter()
        .filter(|(_, f)| seen.insert(f.clone()))
        .enumerate()
        .map(|(i, (relation, fact))| Candidate {
            relation,
            fact,
            seed: mix(seed, 1000 + i as u64),
        })
        .collect()
}

const INITIAL_TYPES: [FactType; 3] = [FactType::Value, FactType::Trend, FactType::Categorization];

fn constructible(t: FactType, table: &DataTable) -> bool {
    let n = table.count_of(FieldKind::Numerical);
    let c = table.count_of(FieldKind::Categorical);
    let tm = table.count_of(FieldKind::Temporal);
    match t {
        FactType::Value => n >= 1,
        FactType::Trend => n >= 1 && tm >= 1,
        FactType::Categorization => c >= 1,
        _ => true,
    }
}

/// The most important of a seeded batch of value, trend and
/// categorization facts.
pub fn initial_fact(table: &DataTable, seed: u64) -> Result<DataFact, SearchError> {
    initial_fact_with(table, seed, &SearchConfig::default())
}

pub fn initial_fact_with(table: &DataTable, seed: u64, config: &SearchConfig) -> Result<DataFact, SearchError> {
    let cache = ScoreCache::new(table, config.scoring);
    initial_fact_cached(table, seed, config, &cache)
}

fn initial_fact_cached(
    table: &DataTable,
    seed: u64,
    config: &SearchConfig,
    cache: &ScoreCache,
) -> Result<DataFact, SearchError> {
    if table.row_count() == 0 {
        return Err(SearchError::Generation("table has no rows".into()));
    }
    let types: Vec<FactType> = INITIAL_TYPES
        .into_iter()
        .filter(|&t| constructible(t, table))
        .collect();
    if types.is_empty() {
        return Err(SearchError::Generation(
            "no value, trend or categorization fact can be built from this schema".into(),
        ));
    }
    let mut rng = FactRng::seed_from_u64(mix(seed, 0x696e_6974));
    let batch = config.initial_batch.max(1);
    let mut facts = Vec::with_capacity(batch);
    for _ in 0..batch * 4 {
        if facts.len() >= batch {
            break;
        }
        let t = *types.choose(&mut rng).expect("non-empty");
        if let Some(f) = factgen::random_fact(t, table, &mut rng) {
            facts.push(f);
        }
    }
    let scores = cache.score_all(&facts);
    facts
        .into_iter()
        .zip(scores)
        .fold(None::<(DataFact, f64)>, |best, (f, s)| match best {
            Some((_, b)) if b >= s.importance => best,
            _ => Some((f, s.importance)),
        })
        .map(|(f, _)| f)
        .ok_or_else(|| SearchError::Generation("no usable initial fact found".into()))
}

struct Node {
    candidate: Candidate,
    from_parent: Option<Relation>,
    parent: Option<usize>,
    children: Vec<usize>,
    depth: usize,
    weight: f64,
    own_reward: Option<f64>,
    attached: HashSet<usize>,
}

struct SimNode {
    parent: Option<usize>,
    cand_index: usize,
    candidate: Candidate,
    depth: usize,
    reward: f64,
    expanded: bool,
}

struct Searcher<'t> {
    table: &'t DataTable,
    goal: &'t Goal,
    weights: RewardWeights,
    config: &'t SearchConfig,
    causal: &'t dyn CausalModel,
    cache: ScoreCache<'t>,
    children: Mutex<HashMap<u64, Arc<Vec<Candidate>>>>,
    cancel: Option<&'t AtomicBool>,
    start: Instant,
    deadline: Option<Instant>,
    stats: SearchStats,
    nodes: Vec<Node>,
}

impl<'t> Searcher<'t> {
    fn children_of(&self, path: &[DataFact], seed: u64) -> Arc<Vec<Candidate>> {
        if let Some(c) = self.children.lock().unwrap().get(&seed) {
            return c.clone();
        }
        let c = Arc::new(legal_children(self.table, self.config, self.causal, path, seed));
        let facts: Vec<DataFact> = c.iter().map(|c| c.fact.clone()).collect();
        self.cache.score_all(&facts);
        self.children.lock().unwrap().insert(seed, c.clone());
        c
    }

    fn evaluate(&self, facts: &[DataFact], relations: &[Relation]) -> Criteria {
        let rel: Vec<Option<Relation>> = relations.iter().copied().map(Some).collect();
        self.cache
            .evaluate(facts, &rel, &self.weights, &self.config.relation_table)
    }

    fn path(&self, mut id: usize) -> (Vec<DataFact>, Vec<Relation>) {
        let mut facts = Vec::new();
        let mut rels = Vec::new();
        loop {
            let n = &self.nodes[id];
            facts.push(n.candidate.fact.clone());
            if let Some(r) = n.from_parent {
                rels.push(r);
            }
            match n.parent {
                Some(p) => id = p,
                None => break,
            }
        }
        facts.reverse();
        rels.reverse();
        (facts, rels)
    }

    fn cancelled(&self) -> bool {
        self.cancel.is_some_and(|c| c.load(Ordering::Relaxed))
    }

    fn past_deadline(&self) -> bool {
        self.deadline.is_some_and(|d| Instant::now() >= d)
    }

    fn unattached(&self, id: usize) -> Vec<usize> {
        let n = &self.nodes[id];
        if n.depth + 1 >= self.goal.max_length {
            return Vec::new();
        }
        let (path, _) = self.path(id);
        let cands = self.children_of(&path, n.candidate.seed);
        (0..cands.len()).filter(|i| !n.attached.contains(i)).collect()
    }

    /// Expandable node of maximum weight; ties go to the newest node.
    fn select(&self) -> Option<(usize, Vec<usize>)> {
        let mut order: Vec<usize> = (0..self.nodes.len()).collect();
        order.sort_by(|&a, &b| {
            self.nodes[b]
                .weight
                .total_cmp(&self.nodes[a].weight)
                .then(b.cmp(&a))
        });
        order.into_iter().find_map(|id| {
            let u = self.unattached(id);
            (!u.is_empty()).then_some((id, u))
        })
    }

    fn sim_path(&self, sim: &[SimNode], mut k: usize, base: &(Vec<DataFact>, Vec<Relation>)) -> (Vec<DataFact>, Vec<Relation>) {
        let mut facts = Vec::new();
        let mut rels = Vec::new();
        loop {
            facts.push(sim[k].candidate.fact.clone());
            rels.push(sim[k].candidate.relation);
            match sim[k].parent {
                Some(p) => k = p,
                None => break,
            }
        }
        facts.reverse();
        rels.reverse();
        let mut f = base.0.clone();
        f.extend(facts);
        let mut r = base.1.clone();
        r.extend(rels);
        (f, r)
    }

    fn push_sim(
        &self,
        sim: &mut Vec<SimNode>,
        parent: Option<usize>,
        cand_index: usize,
        candidate: Candidate,
        depth: usize,
        base: &(Vec<DataFact>, Vec<Relation>),
    ) {
        sim.push(SimNode {
            parent,
            cand_index,
            candidate,
            depth,
            reward: 0.0,
            expanded: false,
        });
        let k = sim.len() - 1;
        let (f, r) = self.sim_path(sim, k, base);
        sim[k].reward = self.evaluate(&f, &r).reward;
    }

    /// Run the simulation tree below `id` and attach the best path found.
    fn iterate(&mut self, id: usize, unattached: Vec<usize>) -> Result<(), SearchError> {
        let base = self.path(id);
        let seed = self.nodes[id].candidate.seed;
        let cands = self.children_of(&base.0, seed);
        let full = self.goal.max_length - 1;
        let mut sim: Vec<SimNode> = Vec::new();
        for &i in &unattached {
            let depth = self.nodes[id].depth + 1;
            self.push_sim(&mut sim, None, i, cands[i].clone(), depth, &base);
        }

        let mut steps = 0usize;
        let mut completion_steps = 0usize;
        let completion_cap = 4 * self.goal.max_length;
        loop {
            if self.cancelled() {
                return Err(SearchError::Cancelled);
            }
            if self.past_deadline() {
                break;
            }
            let open = |s: &SimNode| !s.expanded && s.depth < full;
            let pick = if steps < self.config.simulation_steps {
                (0..sim.len()).filter(|&k| open(&sim[k])).max_by(|&a, &b| {
                    sim[a]
                        .reward
                        .total_cmp(&sim[b].reward)
                        .then(sim[a].depth.cmp(&sim[b].depth))
                        .then(a.cmp(&b))
                })
            } else if completion_steps < completion_cap && !sim.iter().any(|s| s.depth == full) {
                completion_steps += 1;
                (0..sim.len()).filter(|&k| open(&sim[k])).max_by(|&a, &b| {
                    sim[a]
                        .depth
                        .cmp(&sim[b].depth)
                        .then(sim[a].reward.total_cmp(&sim[b].reward))
                        .then(a.cmp(&b))
                })
            } else {
                None
            };
            let Some(k) = pick else { break };

            let t = self.start.elapsed();
            if self.deadline.is_some_and(|d| self.start + t >= d) {
                self.stats.steps_after_deadline += 1;
            }
            self.stats.last_step_start_ms = Some(t.as_secs_f64() * 1e3);
            self.stats.simulation_steps += 1;
            steps += 1;

            sim[k].expanded = true;
            let (path, _) = self.sim_path(&sim, k, &base);
            let children = self.children_of(&path, sim[k].candidate.seed);
            let depth = sim[k].depth + 1;
            for (i, c) in children.iter().enumerate() {
                self.push_sim(&mut sim, Some(k), i, c.clone(), depth, &base);
            }
        }

        let best = |complete: bool| {
            (0..sim.len())
                .filter(|&k| !complete || sim[k].depth == full)
                .fold(None::<usize>, |b, k| match b {
                    Some(b) if sim[b].reward >= sim[k].reward => Some(b),
                    _ => Some(k),
                })
        };
        let Some(end) = best(true).or_else(|| best(false)) else {
            return Ok(());
        };
        let delta = sim[end].reward;

        let mut chain = vec![end];
        while let Some(p) = sim[*chain.last().unwrap()].parent {
            chain.push(p);
        }
        chain.reverse();
        let mut parent = id;
        for &k in &chain {
            let s = &sim[k];
            self.nodes[parent].attached.insert(s.cand_index);
            let node = Node {
                candidate: s.candidate.clone(),
                from_parent: Some(s.candidate.relation),
                parent: Some(parent),
                children: Vec::new(),
                depth: s.depth,
                weight: delta,
                own_reward: None,
                attached: HashSet::new(),
            };
            self.nodes.push(node);
            let new_id = self.nodes.len() - 1;
            self.nodes[parent].children.push(new_id);
            parent = new_id;
        }
        self.nodes[parent].own_reward = Some(delta);
        let mut up = self.nodes[parent].parent;
        while let Some(u) = up {
            let n = &mut self.nodes[u];
            n.weight = n.weight.max(delta);
            up = n.parent;
        }
        Ok(())
    }

    /// Best complete path, or the best path overall when none is complete.
    fn best_path(&self) -> (usize, bool) {
        let full = self.goal.max_length - 1;
        let complete = self
            .nodes
            .iter()
            .enumerate()
            .filter(|(_, n)| n.depth == full)
            .fold(None::<(usize, f64)>, |b, (i, n)| {
                let r = n.own_reward.unwrap_or(f64::NEG_INFINITY);
                match b {
                    Some((_, br)) if br >= r => b,
                    _ => Some((i, r)),
                }
            });
        if let Some((i, _)) = complete {
            return (i, false);
        }
        let best = (0..self.nodes.len())
            .map(|i| {
                let (f, r) = self.path(i);
                (i, self.evaluate(&f, &r).reward)
            })
            .fold((0, f64::NEG_INFINITY), |b, c| if c.1 > b.1 { c } else { b });
        (best.0, true)
    }

    fn export(&self) -> TreeExport {
        TreeExport {
            nodes: self
                .nodes
                .iter()
                .enumerate()
                .map(|(id, n)| TreeNodeExport {
                    id,
                    parent: n.parent,
                    relation: n.from_parent,
                    fact: n.candidate.fact.clone(),
                    weight: n.weight,
                    path_reward: n.own_reward,
                })
                .collect(),
        }
    }
}

pub fn generate_story(
    table: &DataTable,
    goal: &Goal,
    weights: &RewardWeights,
    config: &SearchConfig,
    seed: u64,
) -> Result<Story, SearchError> {
    run_search(table, goal, weights, config, seed, &CorrelationCausality::default(), None).map(|o| o.story)
}

/// Full search with statistics and the final tree.
pub fn run_search(
    table: &DataTable,
    goal: &Goal,
    weights: &RewardWeights,
    config: &SearchConfig,
    seed: u64,
    causal: &dyn CausalModel,
    cancel: Option<&AtomicBool>,
) -> Result<SearchOutcome, SearchError> {
    goal.validate()?;
    let start = Instant::now();
    let deadline = goal.time_budget_ms.map(|ms| start + Duration::from_millis(ms));
    let mut s = Searcher {
        table,
        goal,
        weights: *weights,
        config,
        causal,
        cache: ScoreCache::new(table, config.scoring),
        children: Mutex::new(HashMap::new()),
        cancel,
        start,
        deadline,
        stats: SearchStats {
            deadline_ms: goal.time_budget_ms.map(|ms| ms as f64),
            ..SearchStats::default()
        },
        nodes: Vec::new(),
    };
    let root = initial_fact_cached(table, seed, config, &s.cache)?;
    let root_reward = s.evaluate(std::slice::from_ref(&root), &[]).reward;
    s.nodes.push(Node {
        candidate: Candidate {
            relation: Relation::Similarity,
            fact: root,
            seed: root_seed(seed),
        },
        from_parent: None,
        parent: None,
        children: Vec::new(),
        depth: 0,
        weight: root_reward,
        own_reward: Some(root_reward),
        attached: HashSet::new(),
    });

    let mut warnings = Vec::new();
    if goal.max_length > 1 && s.unattached(0).is_empty() {
        warnings.push("no legal expansion from the initial fact".to_string());
    }

    loop {
        if s.cancelled() {
            return Err(SearchError::Cancelled);
        }
        if goal.iteration_budget.is_some_and(|b| s.stats.iterations >= b) || s.past_deadline() {
            break;
        }
        if let Some(bits) = goal.min_information_bits {
            let (best, unmet) = s.best_path();
            let (f, r) = s.path(best);
            if !unmet && s.evaluate(&f, &r).entropy >= bits {
                break;
            }
        }
        let Some((id, unattached)) = s.select() else {
            s.stats.exhausted = true;
            break;
        };
        s.iterate(id, unattached)?;
        s.stats.iterations += 1;
    }

    let (best, mut goal_unmet) = s.best_path();
    let (facts, relations) = s.path(best);
    let criteria = s.evaluate(&facts, &relations);
    if let Some(bits) = goal.min_information_bits {
        goal_unmet |= criteria.entropy < bits;
    }
    if goal_unmet && warnings.is_empty() {
        warnings.push(format!(
            "goal not met: best story has {} of {} facts",
            facts.len(),
            goal.max_length
        ));
    }
    let scores = facts.iter().map(|f| s.cache.score(f)).collect();
    s.stats.elapsed_ms = start.elapsed().as_secs_f64() * 1e3;
    s.stats.tree_nodes = s.nodes.len();
    Ok(SearchOutcome {
        story: Story {
            facts,
            relations,
            scores,
            reward: criteria.reward,
            criteria,
            goal_unmet,
            warnings,
        },
        tree: s.export(),
        stats: s.stats,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::table::{load_csv, CsvOptions};

    fn cars() -> DataTable {
        let csv = "Year,Brand,Category,Sales,Price\n\
                   2007,Ford,SUV,10,30\n2007,Toyota,Compact,4,18\n\
                   2008,Ford,Compact,7,31\n2008,Toyota,SUV,3,29\n\
                   2009,Ford,SUV,2,19\n2009,Toyota,Compact,8,17\n\
                   2010,Ford,Compact,9,28\n2010,Toyota,SUV,6,16\n";
        load_csv(csv.as_bytes(), &CsvOptions::default()).unwrap()
    }

    #[test]
    fn goal_validation() {
        assert!(Goal::iterations(3, 0).validate().is_err());
        assert!(Goal::iterations(0, 5).validate().is_err());
        let both = Goal {
            time_budget_ms: Some(10),
            ..Goal::iterations(3, 5)
        };
        assert!(both.validate().is_err());
        assert!(Goal::timed(3, Duration::from_millis(5)).validate().is_ok());
    }

    #[test]
    fn initial_fact_is_seeded() {
        let t = cars();
        let a = initial_fact(&t, 11).unwrap();
        assert_eq!(a, initial_fact(&t, 11).unwrap());
        assert!(INITIAL_TYPES.contains(&a.fact_type));
    }

    #[test]
    fn categorization_only_schema() {
        let t = load_csv(b"Kind\na\nb\na\nc\n", &CsvOptions::default()).unwrap();
        assert_eq!(initial_fact(&t, 0).unwrap().fact_type, FactType::Categorization);
    }

    #[test]
    fn story_shape_and_audit() {
        let t = cars();
        let cfg = SearchConfig {
            fan_out: 6,
            ..SearchConfig::default()
        };
        let goal = Goal::iterations(4, 6);
        let out = run_search(&t, &goal, &RewardWeights::default(), &cfg, 5, &CorrelationCausality::default(), None).unwrap();
        let s = &out.story;
        assert_eq!(s.relations.len() + 1, s.facts.len());
        assert!(out.tree.weights_consistent());
        for (i, r) in s.relations.iter().enumerate() {
            assert!(logic::satisfies(*r, &s.facts[i], &s.facts[i + 1], &t));
        }
        let again = generate_story(&t, &goal, &RewardWeights::default(), &cfg, 5).unwrap();
        assert_eq!(&again, s);
    }

    #[test]
    fn cancellation() {
        let t = cars();
        let flag = AtomicBool::new(true);
        let r = run_search(
            &t,
            &Goal::iterations(3, 10),
            &RewardWeights::default(),
            &SearchConfig::default(),
            1,
            &CorrelationCausality::default(),
            Some(&flag),
        );
        assert_eq!(r.unwrap_err(), SearchError::Cancelled);
    }
}
