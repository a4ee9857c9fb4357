//! Story composition: factsheet layout, story aggregation and the
//! storyline, swiper and factsheet documents.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::facts::{self, DataFact, FactError};
use crate::narrate;
use crate::search::Story;
use crate::table::DataTable;
use crate::visualize::{self, ChartSpec, ChartType, RenderError};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum LayoutError {
    #[error("a factsheet needs at least one fact")]
    Empty,
    #[error("at most {max} facts fit a factsheet, got {got}")]
    TooMany { max: usize, got: usize },
    #[error("max_rows must be at least 1")]
    NoRows,
    #[error("invalid layout: {0}")]
    Invalid(String),
    #[error("{0} scores for {1} facts")]
    Mismatch(usize, usize),
}

pub const MAX_FACTSHEET_FACTS: usize = 16;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Page {
    pub width: f64,
    pub height: f64,
}

impl Default for Page {
    fn default() -> Self {
        Page {
            width: 1200.0,
            height: 1600.0,
        }
    }
}

/// Rows of fact indices in story order, with each fact's share of the page.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FactsheetLayout {
    pub rows: Vec<Vec<usize>>,
    pub areas: Vec<f64>,
    pub page: Page,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LayoutScore {
    pub f: f64,
    pub f_s: f64,
    pub f_d: f64,
    pub inter: f64,
    pub intra: f64,
}

pub fn fact_distance(a: &DataFact, b: &DataFact, table: &DataTable) -> Result<f64, FactError> {
    Ok(1.0 - facts::fact_similarity(a, b, table)?)
}

pub fn distance_matrix(facts: &[DataFact], table: &DataTable) -> Result<Vec<Vec<f64>>, FactError> {
    let n = facts.len();
    let mut d = vec![vec![0.0; n]; n];
    for i in 0..n {
        for j in i + 1..n {
            let v = fact_distance(&facts[i], &facts[j], table)?;
            d[i][j] = v;
            d[j][i] = v;
        }
    }
    Ok(d)
}

/// Importances scaled to sum to 1; uniform when all are zero.
pub fn normalized_importance(importance: &[f64]) -> Vec<f64> {
    let total: f64 = importance.iter().map(|v| v.max(0.0)).sum();
    if total <= 0.0 {
        return vec![1.0 / importance.len().max(1) as f64; importance.len()];
    }
    importance.iter().map(|v| v.max(0.0) / total).collect()
}

const MIN_WEIGHT: f64 = 1e-9;

/// Areas for a partition: equal row heights, widths proportional to `s`.
pub fn row_areas(rows: &[Vec<usize>], s: &[f64]) -> Vec<f64> {
    let mut areas = vec![0.0; s.len()];
    let k = rows.len() as f64;
    for row in rows {
        let sum: f64 = row.iter().map(|&i| s[i].max(MIN_WEIGHT)).sum();
        for &i in row {
            areas[i] = s[i].max(MIN_WEIGHT) / sum / k;
        }
    }
    areas
}

fn check_partition(rows: &[Vec<usize>], n: usize) -> Result<(), LayoutError> {
    let flat: Vec<usize> = rows.iter().flatten().copied().collect();
    if rows.iter().any(Vec::is_empty) {
        return Err(LayoutError::Invalid("empty row".into()));
    }
    if flat != (0..n).collect::<Vec<_>>() {
        return Err(LayoutError::Invalid("rows must partition the facts in story order".into()));
    }
    Ok(())
}

/// f = f_s + f_d with f_d = inter − intra.
pub fn layout_score(layout: &FactsheetLayout, s: &[f64], dist: &[Vec<f64>]) -> Result<LayoutScore, LayoutError> {
    let n = s.len();
    if n == 0 {
        return Err(LayoutError::Empty);
    }
    if layout.areas.len() != n || dist.len() != n {
        return Err(LayoutError::Mismatch(layout.areas.len(), n));
    }
    check_partition(&layout.rows, n)?;
    let area_sum: f64 = layout.areas.iter().sum();
    let f_s = s.iter().zip(&layout.areas).map(|(s, a)| s * a).sum::<f64>() / area_sum;
    let k = layout.rows.len();
    let inter = if k < 2 {
        0.0
    } else {
        layout
            .rows
            .windows(2)
            .map(|w| dist[*w[0].last().unwrap()][w[1][0]])
            .sum::<f64>()
            / (k - 1) as f64
    };
    let intra = if n == k {
        0.0
    } else {
        layout
            .rows
            .iter()
            .flat_map(|r| r.windows(2).map(|p| dist[p[0]][p[1]]))
            .sum::<f64>()
            / (n - k) as f64
    };
    Ok(LayoutScore {
        f: f_s + inter - intra,
        f_s,
        f_d: inter - intra,
        inter,
        intra,
    })
}

fn partition_from_mask(n: usize, mask: u32) -> Vec<Vec<usize>> {
    let mut rows = vec![vec![0]];
    for i in 1..n {
        if mask & (1 << (i - 1)) != 0 {
            rows.push(Vec::new());
        }
        rows.last_mut().unwrap().push(i);
    }
    rows
}

/// Exhaustive search over order-preserving row partitions. Ties go to fewer
/// rows, then to the lexicographically smaller partition.
pub fn layout_factsheet(
    s: &[f64],
    dist: &[Vec<f64>],
    page: Page,
    max_rows: usize,
) -> Result<FactsheetLayout, LayoutError> {
    let n = s.len();
    if n == 0 {
        return Err(LayoutError::Empty);
    }
    if n > MAX_FACTSHEET_FACTS {
        return Err(LayoutError::TooMany {
            max: MAX_FACTSHEET_FACTS,
            got: n,
        });
    }
    if max_rows == 0 {
        return Err(LayoutError::NoRows);
    }
    if dist.len() != n {
        return Err(LayoutError::Mismatch(dist.len(), n));
    }
    let mut best: Option<(f64, FactsheetLayout)> = None;
    for mask in 0..1u32 << (n - 1) {
        if mask.count_ones() as usize + 1 > max_rows {
            continue;
        }
        let rows = partition_from_mask(n, mask);
        let layout = FactsheetLayout {
            areas: row_areas(&rows, s),
            rows,
            page,
        };
        let f = layout_score(&layout, s, dist)?.f;
        let better = match &best {
            None => true,
            Some((bf, bl)) => {
                f > *bf
                    || (f == *bf
                        && (layout.rows.len(), &layout.rows) < (bl.rows.len(), &bl.rows))
            }
        };
        if better {
            best = Some((f, layout));
        }
    }
    Ok(best.expect("at least one partition").1)
}

/// Layout for a scored story, weighting facts by their importance.
pub fn layout_story(
    story: &Story,
    table: &DataTable,
    page: Page,
    max_rows: usize,
) -> Result<(FactsheetLayout, LayoutScore), ComposeError> {
    let s = normalized_importance(&story.scores.iter().map(|s| s.importance).collect::<Vec<_>>());
    let dist = distance_matrix(&story.facts, table)?;
    let layout = layout_factsheet(&s, &dist, page, max_rows.min(story.facts.len()).max(1))?;
    let score = layout_score(&layout, &s, &dist)?;
    Ok((layout, score))
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ComposeError {
    #[error(transparent)]
    Layout(#[from] LayoutError),
    #[error(transparent)]
    Fact(#[from] FactError),
    #[error(transparent)]
    Narration(#[from] narrate::NarrationError),
    #[error(transparent)]
    Render(#[from] RenderError),
    #[error("{0} chart specs for {1} layout slots")]
    Mismatch(usize, usize),
}

/// One agglomeration step: clusters `a` and `b` (ids below n are facts,
/// id n+i is the cluster formed at step i) joined at `distance`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Merge {
    pub a: usize,
    pub b: usize,
    pub distance: f64,
}

/// Average-linkage agglomerative clustering. Ties join the pair with the
/// smallest ids first.
pub fn cluster(dist: &[Vec<f64>]) -> Vec<Merge> {
    let n = dist.len();
    let mut active: Vec<(usize, Vec<usize>)> = (0..n).map(|i| (i, vec![i])).collect();
    let mut merges = Vec::new();
    while active.len() > 1 {
        let mut best: Option<(f64, usize, usize)> = None;
        for i in 0..active.len() {
            for j in i + 1..active.len() {
                let (ma, mb) = (&active[i].1, &active[j].1);
                let total: f64 = ma.iter().flat_map(|&x| mb.iter().map(move |&y| dist[x][y])).sum();
                let avg = total / (ma.len() * mb.len()) as f64;
                if best.is_none_or(|(d, _, _)| avg < d) {
                    best = Some((avg, i, j));
                }
            }
        }
        let (d, i, j) = best.unwrap();
        let (idb, mb) = active.remove(j);
        let (ida, ma) = active.remove(i);
        merges.push(Merge {
            a: ida.min(idb),
            b: ida.max(idb),
            distance: d,
        });
        let mut members = ma;
        members.extend(mb);
        members.sort_unstable();
        active.push((n + merges.len() - 1, members));
    }
    merges
}

/// Pairs of facts that are siblings in the dendrogram, most similar first.
pub fn sibling_pairs(dist: &[Vec<f64>]) -> Vec<(usize, usize)> {
    let n = dist.len();
    let mut pairs: Vec<(f64, usize, usize)> = cluster(dist)
        .into_iter()
        .filter(|m| m.b < n)
        .map(|m| (m.distance, m.a, m.b))
        .collect();
    pairs.sort_by(|x, y| x.0.total_cmp(&y.0).then((x.1, x.2).cmp(&(y.1, y.2))));
    pairs.into_iter().map(|(_, a, b)| (a, b)).collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CompoundFact {
    pub parts: [DataFact; 2],
    pub merged_chart: Option<ChartType>,
    pub juxtaposed: bool,
    pub caption: String,
}

fn tuples_agree(a: &DataFact, b: &DataFact) -> bool {
    a.subspace.same_as(&b.subspace) && a.breakdown == b.breakdown && a.measures == b.measures
}

/// Share one chart when the facts agree outside their focus and their
/// candidate charts overlap; otherwise place them side by side.
pub fn merge_facts(a: &DataFact, b: &DataFact, table: &DataTable) -> Result<CompoundFact, ComposeError> {
    let caption = format!("{} {}", narrate::caption(a, table)?, narrate::caption(b, table)?);
    let merged_chart = if tuples_agree(a, b) {
        let cb = visualize::chart_candidates(b.fact_type, 1.0);
        visualize::chart_candidates(a.fact_type, 1.0)
            .into_iter()
            .filter(|c| cb.contains(c))
            .map(|c| {
                let freq = visualize::chart_frequency(a.fact_type, c) + visualize::chart_frequency(b.fact_type, c);
                (freq, c)
            })
            .max_by(|x, y| x.0.cmp(&y.0).then(y.1.cmp(&x.1)))
            .map(|(_, c)| c)
    } else {
        None
    };
    Ok(CompoundFact {
        parts: [a.clone(), b.clone()],
        juxtaposed: merged_chart.is_none(),
        merged_chart,
        caption,
    })
}

#[allow(clippy::large_enum_variant)]
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum StoryItem {
    Single { index: usize },
    Compound { indices: [usize; 2], fact: CompoundFact },
}

/// Merge the top ⌈level × candidates⌉ sibling pairs. Items keep story order;
/// a compound sits at its first part's position.
pub fn aggregate_story(facts: &[DataFact], table: &DataTable, level: f64) -> Result<Vec<StoryItem>, ComposeError> {
    let n = facts.len();
    let level = level.clamp(0.0, 1.0);
    let pairs = sibling_pairs(&distance_matrix(facts, table)?);
    let take = ((level * pairs.len() as f64) - 1e-9).ceil().max(0.0) as usize;
    let mut partner: Vec<Option<usize>> = vec![None; n];
    for &(a, b) in pairs.iter().take(take) {
        partner[a] = Some(b);
        partner[b] = Some(a);
    }
    let mut items = Vec::new();
    for i in 0..n {
        match partner[i] {
            None => items.push(StoryItem::Single { index: i }),
            Some(j) if j > i => items.push(StoryItem::Compound {
                indices: [i, j],
                fact: merge_facts(&facts[i], &facts[j], table)?,
            }),
            Some(_) => {}
        }
    }
    Ok(items)
}

fn placed(spec: &ChartSpec, x: f64, y: f64, w: f64, h: f64) -> Result<String, RenderError> {
    let svg = visualize::render_svg(spec, w, h)?;
    Ok(svg.replacen("<svg ", &format!(r#"<svg x="{x:.2}" y="{y:.2}" "#), 1))
}

fn document(width: f64, height: f64, title: &str, body: &str) -> String {
    format!(
        r#"<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{width:.0}" height="{height:.0}" viewBox="0 0 {width:.2} {height:.2}"><title>{}</title>{body}</svg>"#,
        visualize::escape_xml(title)
    )
}

/// Captioned charts side by side in one row.
pub fn render_storyline(specs: &[ChartSpec], panel: Page, title: &str) -> Result<String, ComposeError> {
    let mut body = String::new();
    for (i, spec) in specs.iter().enumerate() {
        body.push_str(&placed(spec, i as f64 * panel.width, 0.0, panel.width, panel.height)?);
    }
    Ok(document(panel.width * specs.len().max(1) as f64, panel.height, title, &body))
}

/// One standalone chart per frame.
pub fn render_swiper(specs: &[ChartSpec], panel: Page) -> Result<Vec<String>, ComposeError> {
    specs
        .iter()
        .map(|s| visualize::render_svg(s, panel.width, panel.height).map_err(ComposeError::from))
        .collect()
}

/// All charts on one page, placed by the layout.
pub fn render_factsheet(layout: &FactsheetLayout, specs: &[ChartSpec], title: &str) -> Result<String, ComposeError> {
    if specs.len() != layout.areas.len() {
        return Err(ComposeError::Mismatch(specs.len(), layout.areas.len()));
    }
    let Page { width, height } = layout.page;
    let k = layout.rows.len() as f64;
    let row_h = height / k;
    let mut body = String::new();
    for (r, row) in layout.rows.iter().enumerate() {
        let mut x = 0.0;
        for &i in row {
            let w = layout.areas[i] * k * width;
            body.push_str(&placed(&specs[i], x, r as f64 * row_h, w, row_h)?);
            x += w;
        }
    }
    Ok(document(width, height, title, &body))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::facts::FactType;
    use crate::table::{load_csv, Aggregation, CsvOptions, Filter};

    fn approx(a: f64, b: f64) -> bool {
        (a - b).abs() < 1e-12
    }

    #[test]
    fn degenerate_layouts() {
        let l = layout_factsheet(&[1.0], &[vec![0.0]], Page::default(), 1).unwrap();
        assert_eq!(l.rows, vec![vec![0]]);
        let sc = layout_score(&l, &[1.0], &[vec![0.0]]).unwrap();
        assert_eq!((sc.f_d, sc.f, sc.f_s), (0.0, 1.0, 1.0));
        let d = vec![vec![0.0, 0.7], vec![0.7, 0.0]];
        let two = FactsheetLayout {
            rows: vec![vec![0], vec![1]],
            areas: vec![0.5, 0.5],
            page: Page::default(),
        };
        let sc = layout_score(&two, &[0.5, 0.5], &d).unwrap();
        assert!(approx(sc.f_d, 0.7) && sc.intra == 0.0);
        assert!(layout_factsheet(&[], &[], Page::default(), 1).is_err());
    }

    #[test]
    fn four_facts_by_hand() {
        let s = [0.4, 0.3, 0.2, 0.1];
        let mut d = vec![vec![0.0; 4]; 4];
        let mut set = |i: usize, j: usize, v: f64| {
            d[i][j] = v;
            d[j][i] = v;
        };
        set(0, 1, 0.2);
        set(1, 2, 0.9);
        set(2, 3, 0.3);
        let rows = vec![vec![0, 1], vec![2, 3]];
        let layout = FactsheetLayout {
            areas: row_areas(&rows, &s),
            rows,
            page: Page::default(),
        };
        let a = [0.4 / 0.7 / 2.0, 0.3 / 0.7 / 2.0, 0.2 / 0.3 / 2.0, 0.1 / 0.3 / 2.0];
        let fs = 0.4 * a[0] + 0.3 * a[1] + 0.2 * a[2] + 0.1 * a[3];
        let sc = layout_score(&layout, &s, &d).unwrap();
        assert!(approx(sc.f_s, fs));
        assert!(approx(sc.inter, 0.9));
        assert!(approx(sc.intra, 0.25));
        assert!(approx(sc.f, fs + 0.65));
        let best = layout_factsheet(&s, &d, Page::default(), 4).unwrap();
        assert_eq!(best.rows, vec![vec![0, 1], vec![2, 3]]);
    }

    #[test]
    fn identical_facts_share_a_row() {
        let d = vec![vec![0.0; 2]; 2];
        let l = layout_factsheet(&[0.5, 0.5], &d, Page::default(), 2).unwrap();
        assert_eq!(l.rows, vec![vec![0, 1]]);
        assert!(approx(l.areas.iter().sum::<f64>(), 1.0));
    }

    #[test]
    fn average_linkage() {
        let d = vec![
            vec![0.0, 0.1, 0.8, 0.9],
            vec![0.1, 0.0, 0.7, 0.6],
            vec![0.8, 0.7, 0.0, 0.2],
            vec![0.9, 0.6, 0.2, 0.0],
        ];
        let m = cluster(&d);
        assert_eq!((m[0].a, m[0].b), (0, 1));
        assert_eq!((m[1].a, m[1].b), (2, 3));
        assert!(approx(m[2].distance, (0.8 + 0.9 + 0.7 + 0.6) / 4.0));
        assert_eq!(sibling_pairs(&d), vec![(0, 1), (2, 3)]);
    }

    fn sales() -> DataTable {
        load_csv(
            b"Year,Brand,Sales\n2010,A,3\n2011,A,5\n2012,A,4\n2013,A,9\n2010,B,2\n2011,B,1\n2012,B,6\n2013,B,2\n",
            &CsvOptions::default(),
        )
        .unwrap()
    }

    #[test]
    fn merging() {
        let t = sales();
        let trend = DataFact::new(FactType::Trend)
            .with_breakdown("Year")
            .with_measure("Sales", Aggregation::Sum);
        let extreme = trend.clone().with_focus("Year", "2013");
        let extreme = DataFact {
            fact_type: FactType::Extreme,
            ..extreme
        };
        let c = merge_facts(&trend, &extreme, &t).unwrap();
        assert_eq!(c.merged_chart, Some(ChartType::Line));
        assert!(!c.juxtaposed);
        assert!(c.caption.starts_with(&narrate::caption(&trend, &t).unwrap()));

        let other = extreme.clone().with_subspace(vec![Filter::new("Brand", "A")]);
        let c = merge_facts(&trend, &other, &t).unwrap();
        assert!(c.juxtaposed && c.merged_chart.is_none());

        let prop = DataFact::new(FactType::Proportion)
            .with_breakdown("Brand")
            .with_measure("Sales", Aggregation::Sum)
            .with_focus("Brand", "A");
        let assoc = DataFact::new(FactType::Association)
            .with_breakdown("Year")
            .with_measure("Sales", Aggregation::Sum)
            .with_measure("Sales", Aggregation::Avg);
        assert!(merge_facts(&prop, &assoc, &t).unwrap().juxtaposed);
    }

    #[test]
    fn aggregation_levels() {
        let t = sales();
        let base = DataFact::new(FactType::Value).with_measure("Sales", Aggregation::Sum);
        let facts = vec![
            base.clone(),
            base.clone().with_subspace(vec![Filter::new("Brand", "A")]),
            base.clone().with_subspace(vec![Filter::new("Year", "2010")]),
            base.clone().with_subspace(vec![Filter::new("Year", "2011")]),
        ];
        let zero = aggregate_story(&facts, &t, 0.0).unwrap();
        assert_eq!(zero, (0..4).map(|index| StoryItem::Single { index }).collect::<Vec<_>>());
        let count = |items: &[StoryItem]| items.iter().filter(|i| matches!(i, StoryItem::Compound { .. })).count();
        let mut prev = 0;
        for lvl in [0.0, 0.25, 0.5, 0.75, 1.0] {
            let c = count(&aggregate_story(&facts, &t, lvl).unwrap());
            assert!(c >= prev);
            prev = c;
        }
        let full = aggregate_story(&facts, &t, 1.0).unwrap();
        let pairs = sibling_pairs(&distance_matrix(&facts, &t).unwrap());
        assert_eq!(count(&full), pairs.len());
    }
}
