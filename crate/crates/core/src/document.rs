//! The story document: a story with its charts, captions, scores and the
//! parameters that produced it. The CLI writes it and the service stores it.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

use crate::facts::{self, DataFact, DerivedValue, FactError, FactRecord};
use crate::factgen::FactRng;
use crate::compose::{self, ComposeError, FactsheetLayout, Page};
use crate::logic::{self, Relation, RelationTable};
use crate::narrate::{self, NarrationError};
use crate::reward::{Criteria, RewardWeights, ScoreCache};
use crate::scoring::{FactScore, ScoringConfig};
use crate::search::{Goal, Story};
use crate::table::DataTable;
use crate::visualize::{self, ChartSpec, ChartType, SpecError};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum DocumentError {
    #[error("fact {index} is invalid: {}", violations.join("; "))]
    Invalid { index: usize, violations: Vec<String> },
    #[error("fact {index}: {source}")]
    Fact { index: usize, source: FactError },
    #[error(transparent)]
    Spec(#[from] SpecError),
    #[error(transparent)]
    Narration(#[from] NarrationError),
    #[error("index {index} out of range for {len} facts")]
    OutOfRange { index: usize, len: usize },
    #[error("order must be a permutation of 0..{0}")]
    BadOrder(usize),
    #[error("a story needs at least one fact")]
    Empty,
    #[error(transparent)]
    Compose(#[from] ComposeError),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GenerationParams {
    pub goal: Goal,
    pub weights: RewardWeights,
    pub chart_diversity: f64,
    pub seed: u64,
}

/// A fact together with everything shown for it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FactEntry {
    pub fact: FactRecord,
    pub chart: ChartType,
    pub caption: String,
    pub spec: ChartSpec,
    pub derived: DerivedValue,
    pub score: FactScore,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StoryDocument {
    pub id: String,
    pub dataset_id: String,
    pub revision: u64,
    pub params: GenerationParams,
    pub facts: Vec<FactEntry>,
    /// One entry per adjacent pair; `null` relations are written "unlinked".
    #[serde(serialize_with = "ser_links", deserialize_with = "de_links")]
    pub relations: Vec<Option<Relation>>,
    pub criteria: Criteria,
    pub summary: String,
    pub layout: FactsheetLayout,
    #[serde(default)]
    pub goal_unmet: bool,
    #[serde(default)]
    pub warnings: Vec<String>,
}

pub const UNLINKED: &str = "unlinked";

fn ser_links<S: Serializer>(links: &[Option<Relation>], s: S) -> Result<S::Ok, S::Error> {
    s.collect_seq(links.iter().map(|r| r.map_or(UNLINKED, Relation::name)))
}

fn de_links<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<Option<Relation>>, D::Error> {
    Vec::<String>::deserialize(d)?
        .into_iter()
        .map(|s| {
            if s == UNLINKED {
                Ok(None)
            } else {
                Relation::parse(&s)
                    .map(Some)
                    .ok_or_else(|| serde::de::Error::custom(format!("unknown relation '{s}'")))
            }
        })
        .collect()
}

/// Most likely relation from `a` to `b` whose rule the pair satisfies.
pub fn best_relation(a: &DataFact, b: &DataFact, table: &DataTable, rt: &RelationTable) -> Option<Relation> {
    Relation::ALL
        .into_iter()
        .filter(|&r| rt.likelihood(a.fact_type, r) > 0.0 && logic::satisfies(r, a, b, table))
        .fold(None, |best: Option<Relation>, r| match best {
            Some(q) if rt.likelihood(a.fact_type, q) >= rt.likelihood(a.fact_type, r) => Some(q),
            _ => Some(r),
        })
}

/// Best layout for stories that fit one sheet; longer stories are cut into
/// rows of four.
fn factsheet_layout(
    facts: &[DataFact],
    scores: &[FactScore],
    table: &DataTable,
    page: Page,
) -> Result<FactsheetLayout, DocumentError> {
    let s = compose::normalized_importance(&scores.iter().map(|s| s.importance).collect::<Vec<_>>());
    if facts.len() > compose::MAX_FACTSHEET_FACTS {
        let rows: Vec<Vec<usize>> = (0..facts.len())
            .collect::<Vec<_>>()
            .chunks(4)
            .map(<[usize]>::to_vec)
            .collect();
        return Ok(FactsheetLayout {
            areas: compose::row_areas(&rows, &s),
            rows,
            page,
        });
    }
    let dist = compose::distance_matrix(facts, table).map_err(|source| DocumentError::Fact { index: 0, source })?;
    Ok(compose::layout_factsheet(&s, &dist, page, facts.len()).map_err(ComposeError::from)?)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RenderMode {
    Storyline,
    Swiper,
    Factsheet,
}

impl RenderMode {
    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "storyline" => Some(RenderMode::Storyline),
            "swiper" => Some(RenderMode::Swiper),
            "factsheet" => Some(RenderMode::Factsheet),
            _ => None,
        }
    }

    pub fn content_type(self) -> &'static str {
        match self {
            RenderMode::Swiper => "text/html; charset=utf-8",
            _ => "image/svg+xml",
        }
    }
}

pub const PANEL: Page = Page {
    width: 480.0,
    height: 360.0,
};

/// Render a document. Storyline and factsheet are single SVG documents;
/// swiper is an HTML page with one frame per fact.
pub fn render(doc: &StoryDocument, mode: RenderMode) -> Result<String, DocumentError> {
    let specs = doc.specs();
    let out = match mode {
        RenderMode::Storyline => compose::render_storyline(&specs, PANEL, &doc.summary)?,
        RenderMode::Factsheet => compose::render_factsheet(&doc.layout, &specs, &doc.summary)?,
        RenderMode::Swiper => {
            let frames = compose::render_swiper(&specs, PANEL)?;
            let mut html = format!(
                "<!DOCTYPE html><html><head><meta charset=\"utf-8\"><title>{}</title></head><body>",
                visualize::escape_xml(&doc.id)
            );
            for (i, f) in frames.iter().enumerate() {
                html.push_str(&format!("<section class=\"frame\" data-index=\"{i}\">{f}</section>"));
            }
            html.push_str("</body></html>");
            html
        }
    };
    Ok(out)
}

/// Seeded pick among the candidate charts for the fact at `index`.
pub fn pick_chart(fact: &DataFact, diversity: f64, seed: u64, index: usize) -> ChartType {
    let candidates = visualize::chart_candidates(fact.fact_type, diversity);
    let mut rng = FactRng::seed_from_u64(seed ^ (index as u64 + 1).wrapping_mul(0x9e37_79b9_7f4a_7c15));
    *candidates.choose(&mut rng).expect("every fact type has a chart")
}

fn entry(fact: &DataFact, chart: ChartType, table: &DataTable, cache: &ScoreCache) -> Result<FactEntry, DocumentError> {
    let spec = visualize::build_chart_spec(fact, table, chart)?;
    let derived = facts::derive_value(fact, table).map_err(|source| DocumentError::Fact { index: 0, source })?;
    Ok(FactEntry {
        fact: facts::to_fact_record(fact),
        chart,
        caption: spec.caption.clone(),
        spec,
        derived,
        score: cache.score(fact),
    })
}

impl StoryDocument {
    pub fn from_story(
        id: impl Into<String>,
        dataset_id: impl Into<String>,
        story: &Story,
        params: GenerationParams,
        table: &DataTable,
    ) -> Result<Self, DocumentError> {
        let charts = story
            .facts
            .iter()
            .enumerate()
            .map(|(i, f)| pick_chart(f, params.chart_diversity, params.seed, i))
            .collect();
        let mut doc = StoryDocument {
            id: id.into(),
            dataset_id: dataset_id.into(),
            revision: 0,
            params,
            facts: Vec::new(),
            relations: story.linked_relations(),
            criteria: Criteria::default(),
            summary: String::new(),
            layout: FactsheetLayout {
                rows: Vec::new(),
                areas: Vec::new(),
                page: Page::default(),
            },
            goal_unmet: story.goal_unmet,
            warnings: story.warnings.clone(),
        };
        doc.rebuild(&story.facts, charts, table)?;
        Ok(doc)
    }

    /// Facts rebuilt from their records.
    pub fn data_facts(&self, table: &DataTable) -> Result<Vec<DataFact>, DocumentError> {
        self.facts
            .iter()
            .enumerate()
            .map(|(index, e)| {
                facts::from_fact_record(&e.fact, table.schema()).map_err(|source| DocumentError::Fact { index, source })
            })
            .collect()
    }

    /// Reward recomputed from the stored facts and relations.
    pub fn replay(&self, table: &DataTable) -> Result<Criteria, DocumentError> {
        let facts = self.data_facts(table)?;
        Ok(ScoreCache::new(table, ScoringConfig::default()).evaluate(
            &facts,
            &self.relations,
            &self.params.weights,
            &RelationTable::default(),
        ))
    }

    fn rebuild(&mut self, facts: &[DataFact], charts: Vec<ChartType>, table: &DataTable) -> Result<(), DocumentError> {
        let cache = ScoreCache::new(table, ScoringConfig::default());
        let mut entries = Vec::with_capacity(facts.len());
        for (index, (f, chart)) in facts.iter().zip(charts).enumerate() {
            facts::validate(f, table.schema()).map_err(|violations| DocumentError::Invalid { index, violations })?;
            entries.push(entry(f, chart, table, &cache).map_err(|e| match e {
                DocumentError::Fact { source, .. } => DocumentError::Fact { index, source },
                other => other,
            })?);
        }
        self.facts = entries;
        self.criteria = cache.evaluate(facts, &self.relations, &self.params.weights, &RelationTable::default());
        self.summary = narrate::story_summary(facts, table)?;
        self.layout = factsheet_layout(facts, &self.scores(), table, self.layout.page)?;
        Ok(())
    }

    fn relink(facts: &[DataFact], table: &DataTable) -> Vec<Option<Relation>> {
        let rt = RelationTable::default();
        facts.windows(2).map(|w| best_relation(&w[0], &w[1], table, &rt)).collect()
    }

    fn charts(&self) -> Vec<ChartType> {
        self.facts.iter().map(|e| e.chart).collect()
    }

    /// Replace one fact; the relations on both sides are recomputed.
    pub fn edit_fact(
        &mut self,
        index: usize,
        record: &FactRecord,
        chart: Option<ChartType>,
        table: &DataTable,
    ) -> Result<(), DocumentError> {
        let mut facts = self.data_facts(table)?;
        if index >= facts.len() {
            return Err(DocumentError::OutOfRange { index, len: facts.len() });
        }
        let fact = facts::from_fact_record(record, table.schema()).map_err(|source| DocumentError::Fact { index, source })?;
        let mut charts = self.charts();
        let allowed = visualize::chart_candidates(fact.fact_type, 1.0);
        charts[index] = match chart {
            Some(c) => c,
            None if allowed.contains(&charts[index]) => charts[index],
            None => visualize::default_chart(fact.fact_type),
        };
        facts[index] = fact;
        let rt = RelationTable::default();
        let mut relations = self.relations.clone();
        if index > 0 {
            relations[index - 1] = best_relation(&facts[index - 1], &facts[index], table, &rt);
        }
        if index + 1 < facts.len() {
            relations[index] = best_relation(&facts[index], &facts[index + 1], table, &rt);
        }
        self.commit(facts, charts, relations, table)
    }

    /// Insert a fact at `position` (the end when `None`).
    pub fn add_fact(
        &mut self,
        record: &FactRecord,
        position: Option<usize>,
        chart: Option<ChartType>,
        table: &DataTable,
    ) -> Result<(), DocumentError> {
        let mut facts = self.data_facts(table)?;
        let at = position.unwrap_or(facts.len());
        if at > facts.len() {
            return Err(DocumentError::OutOfRange { index: at, len: facts.len() });
        }
        let fact = facts::from_fact_record(record, table.schema()).map_err(|source| DocumentError::Fact { index: at, source })?;
        let mut charts = self.charts();
        charts.insert(at, chart.unwrap_or_else(|| visualize::default_chart(fact.fact_type)));
        facts.insert(at, fact);
        let relations = Self::relink(&facts, table);
        self.commit(facts, charts, relations, table)
    }

    pub fn remove_fact(&mut self, index: usize, table: &DataTable) -> Result<(), DocumentError> {
        let mut facts = self.data_facts(table)?;
        if index >= facts.len() {
            return Err(DocumentError::OutOfRange { index, len: facts.len() });
        }
        if facts.len() == 1 {
            return Err(DocumentError::Empty);
        }
        let mut charts = self.charts();
        facts.remove(index);
        charts.remove(index);
        let relations = Self::relink(&facts, table);
        self.commit(facts, charts, relations, table)
    }

    /// Reorder facts; `order[i]` is the old index of the new i-th fact.
    pub fn reorder(&mut self, order: &[usize], table: &DataTable) -> Result<(), DocumentError> {
        let n = self.facts.len();
        let mut seen = vec![false; n];
        if order.len() != n || order.iter().any(|&i| i >= n || std::mem::replace(&mut seen[i], true)) {
            return Err(DocumentError::BadOrder(n));
        }
        let old = self.data_facts(table)?;
        let old_charts = self.charts();
        let facts: Vec<DataFact> = order.iter().map(|&i| old[i].clone()).collect();
        let charts = order.iter().map(|&i| old_charts[i]).collect();
        let relations = if order.iter().enumerate().all(|(i, &j)| i == j) {
            self.relations.clone()
        } else {
            Self::relink(&facts, table)
        };
        self.commit(facts, charts, relations, table)
    }

    fn commit(
        &mut self,
        facts: Vec<DataFact>,
        charts: Vec<ChartType>,
        relations: Vec<Option<Relation>>,
        table: &DataTable,
    ) -> Result<(), DocumentError> {
        let mut next = self.clone();
        next.relations = relations;
        next.rebuild(&facts, charts, table)?;
        next.revision += 1;
        *self = next;
        Ok(())
    }

    pub fn specs(&self) -> Vec<ChartSpec> {
        self.facts.iter().map(|e| e.spec.clone()).collect()
    }

    pub fn scores(&self) -> Vec<FactScore> {
        self.facts.iter().map(|e| e.score).collect()
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("documents always serialize")
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::facts::FactType;
    use crate::search::{generate_story, SearchConfig};
    use crate::table::{load_csv, Aggregation, CsvOptions, Filter};

    fn table() -> DataTable {
        let mut csv = String::from("Year,Brand,Sales,Price\n");
        for (i, y) in (2010..2016).enumerate() {
            for (j, b) in ["Ford", "Honda", "Kia"].iter().enumerate() {
                csv.push_str(&format!("{y},{b},{},{}\n", 10 + i * (j + 1) + (i * j) % 4, 20 + j * 3 + i % 2));
            }
        }
        load_csv(csv.as_bytes(), &CsvOptions::default()).unwrap()
    }

    fn doc(t: &DataTable) -> StoryDocument {
        let goal = Goal::iterations(4, 8);
        let story = generate_story(t, &goal, &RewardWeights::default(), &SearchConfig::default(), 3).unwrap();
        let params = GenerationParams {
            goal,
            weights: RewardWeights::default(),
            chart_diversity: 0.5,
            seed: 3,
        };
        StoryDocument::from_story("s1", "d1", &story, params, t).unwrap()
    }

    #[test]
    fn json_round_trip_and_replay() {
        let t = table();
        let d = doc(&t);
        let back: StoryDocument = serde_json::from_str(&d.to_json()).unwrap();
        assert_eq!(back, d);
        assert!((d.replay(&t).unwrap().reward - d.criteria.reward).abs() < 1e-9);
        let mut unlinked = d.clone();
        unlinked.relations[0] = None;
        assert!(unlinked.to_json().contains("\"unlinked\""));
        let back: StoryDocument = serde_json::from_str(&unlinked.to_json()).unwrap();
        assert_eq!(back.relations[0], None);
    }

    #[test]
    fn mutations_bump_revision() {
        let t = table();
        let mut d = doc(&t);
        let n = d.facts.len();
        let before = d.criteria.logicality;
        let order: Vec<usize> = (0..n).collect();
        d.reorder(&order, &t).unwrap();
        assert_eq!(d.revision, 1);
        assert_eq!(d.criteria.logicality, before);

        let rec = facts::to_fact_record(
            &DataFact::new(FactType::Value)
                .with_subspace(vec![Filter::new("Brand", "Kia")])
                .with_measure("Sales", Aggregation::Sum),
        );
        d.add_fact(&rec, None, None, &t).unwrap();
        assert_eq!((d.facts.len(), d.relations.len(), d.revision), (n + 1, n, 2));
        d.remove_fact(1, &t).unwrap();
        assert_eq!((d.facts.len(), d.relations.len()), (n, n - 1));
        assert!(matches!(d.remove_fact(99, &t), Err(DocumentError::OutOfRange { .. })));
        assert!(d.reorder(&[0, 0], &t).is_err());
        assert_eq!(d.revision, 3);
        assert!((d.replay(&t).unwrap().reward - d.criteria.reward).abs() < 1e-9);
    }

    #[test]
    fn edit_recomputes_caption() {
        let t = table();
        let mut d = doc(&t);
        let prop = |brand: &str| {
            facts::to_fact_record(
                &DataFact::new(FactType::Proportion)
                    .with_breakdown("Brand")
                    .with_measure("Sales", Aggregation::Sum)
                    .with_focus("Brand", brand),
            )
        };
        d.edit_fact(0, &prop("Ford"), None, &t).unwrap();
        let first = d.facts[0].clone();
        assert_eq!(first.chart, ChartType::Pie);
        d.edit_fact(0, &prop("Kia"), None, &t).unwrap();
        assert_ne!(d.facts[0].caption, first.caption);
        assert!(d.facts[0].caption.contains("Kia accounts for"));
        let bad = FactRecord {
            fact_type: "trend".into(),
            measure: vec![],
            subspace: vec![],
            breakdown: vec![],
            focus: vec![],
        };
        assert!(matches!(d.edit_fact(0, &bad, None, &t), Err(DocumentError::Invalid { .. })));
        assert_eq!(d.revision, 2);
    }

    #[test]
    fn relation_choice() {
        let t = table();
        let rt = RelationTable::default();
        let a = DataFact::new(FactType::Value).with_measure("Sales", Aggregation::Sum);
        let b = a.clone().with_subspace(vec![Filter::new("Brand", "Ford")]);
        assert_eq!(best_relation(&a, &b, &t, &rt), Some(Relation::Elaboration));
        assert_eq!(best_relation(&b, &a, &t, &rt), Some(Relation::Generalization));
    }
}
