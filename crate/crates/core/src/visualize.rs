//! Fact-to-chart mapping, declarative chart specs and SVG rendering.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::facts::{self, DataFact, DerivedValue, FactError, FactType};
use crate::narrate::{self, NarrationError};
use crate::table::DataTable;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ChartType {
    Bar,
    Line,
    Pie,
    Donut,
    HalfDonut,
    Scatter,
    Area,
    BigNumber,
    TableList,
    BoxPlot,
    Treemap,
    Bubble,
}

impl ChartType {
    pub const ALL: [ChartType; 12] = [
        ChartType::Bar,
        ChartType::Line,
        ChartType::Pie,
        ChartType::Donut,
        ChartType::HalfDonut,
        ChartType::Scatter,
        ChartType::Area,
        ChartType::BigNumber,
        ChartType::TableList,
        ChartType::BoxPlot,
        ChartType::Treemap,
        ChartType::Bubble,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ChartType::Bar => "bar",
            ChartType::Line => "line",
            ChartType::Pie => "pie",
            ChartType::Donut => "donut",
            ChartType::HalfDonut => "half_donut",
            ChartType::Scatter => "scatter",
            ChartType::Area => "area",
            ChartType::BigNumber => "big_number",
            ChartType::TableList => "table_list",
            ChartType::BoxPlot => "box_plot",
            ChartType::Treemap => "treemap",
            ChartType::Bubble => "bubble",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|c| c.name() == s)
    }
}

/// Renderable columns of the chart usage survey, in survey column order.
/// Text is drawn as a big number card.
const SURVEY_COLUMNS: [ChartType; 8] = [
    ChartType::Bar,
    ChartType::Line,
    ChartType::Scatter,
    ChartType::Pie,
    ChartType::Area,
    ChartType::Bubble,
    ChartType::BigNumber,
    ChartType::TableList,
];
const BOX_AND_TREEMAP: [ChartType; 2] = [ChartType::BoxPlot, ChartType::Treemap];

/// Survey counts per fact type over Bar, Line, Scatter, Pie, Area, Bubble,
/// Text, Table, Box plot, Treemap. Map and ISOType columns are dropped.
pub const CHART_FREQUENCIES: [[u32; 10]; 10] = [
    [56, 0, 0, 0, 0, 0, 204, 9, 0, 0],
    [99, 37, 0, 0, 0, 0, 46, 0, 0, 0],
    [45, 0, 0, 131, 0, 0, 58, 0, 0, 0],
    [60, 170, 0, 0, 14, 0, 0, 0, 0, 0],
    [24, 0, 0, 0, 4, 0, 0, 0, 0, 5],
    [40, 0, 0, 0, 12, 0, 0, 0, 0, 0],
    [24, 0, 0, 3, 0, 0, 22, 5, 0, 0],
    [0, 17, 9, 0, 0, 2, 1, 0, 0, 0],
    [12, 2, 0, 0, 0, 0, 4, 0, 0, 0],
    [0, 0, 0, 0, 4, 0, 2, 0, 2, 0],
];

fn column(i: usize) -> ChartType {
    if i < SURVEY_COLUMNS.len() {
        SURVEY_COLUMNS[i]
    } else {
        BOX_AND_TREEMAP[i - SURVEY_COLUMNS.len()]
    }
}

/// Nonzero renderable charts for a fact type, most frequent first.
pub fn ranked_charts(ft: FactType) -> Vec<ChartType> {
    let row = &CHART_FREQUENCIES[ft.index()];
    let mut idx: Vec<usize> = (0..row.len()).filter(|&i| row[i] > 0).collect();
    idx.sort_by(|&a, &b| row[b].cmp(&row[a]).then(a.cmp(&b)));
    idx.into_iter().map(column).collect()
}

pub fn default_chart(ft: FactType) -> ChartType {
    ranked_charts(ft)[0]
}

/// The top ⌈1 + d(K−1)⌉ charts; pie brings its donut variants along once
/// the diversity is positive.
pub fn chart_candidates(ft: FactType, diversity: f64) -> Vec<ChartType> {
    let ranked = ranked_charts(ft);
    let d = diversity.clamp(0.0, 1.0);
    let k = ranked.len();
    let take = ((1.0 + d * (k - 1) as f64) - 1e-9).ceil().max(1.0) as usize;
    let mut out = Vec::new();
    for &c in ranked.iter().take(take.min(k)) {
        out.push(c);
        if c == ChartType::Pie && d > 0.0 {
            out.push(ChartType::Donut);
            out.push(ChartType::HalfDonut);
        }
    }
    out
}

/// Survey frequency of a chart for a fact type; pie variants share pie's.
pub fn chart_frequency(ft: FactType, chart: ChartType) -> u32 {
    let chart = match chart {
        ChartType::Donut | ChartType::HalfDonut => ChartType::Pie,
        c => c,
    };
    (0..10)
        .find(|&i| column(i) == chart)
        .map_or(0, |i| CHART_FREQUENCIES[ft.index()][i])
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SpecError {
    #[error("{chart} cannot show a {fact} fact")]
    Incompatible { chart: &'static str, fact: &'static str },
    #[error("invalid fact: {0:?}")]
    Invalid(Vec<String>),
    #[error(transparent)]
    Fact(#[from] FactError),
    #[error(transparent)]
    Narration(#[from] NarrationError),
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum RenderError {
    #[error("chart size must be positive, got {width}x{height}")]
    BadSize { width: f64, height: f64 },
}

/// One data row: a key and one value per numerical channel.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DataRow {
    pub key: String,
    pub values: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChartSpec {
    pub chart: ChartType,
    pub fact_type: FactType,
    /// Categorical channel: the breakdown field.
    pub category: Option<String>,
    /// Numerical channels, e.g. "sum(Sales)".
    pub measures: Vec<String>,
    pub data: Vec<DataRow>,
    pub highlighted: Vec<String>,
    /// The derived value, formatted for number cards.
    pub headline: Option<String>,
    pub caption: String,
}

fn headline(d: &DerivedValue) -> Option<String> {
    match d {
        DerivedValue::Proportion { value } => Some(narrate::format_percent(*value)),
        DerivedValue::Association { r } => Some(format!("{r:.2}")),
        DerivedValue::Trend { direction, .. } => Some(direction.name().to_string()),
        other => other.number().map(narrate::format_number),
    }
}

pub fn build_chart_spec(fact: &DataFact, table: &DataTable, chart: ChartType) -> Result<ChartSpec, SpecError> {
    facts::validate(fact, table.schema()).map_err(SpecError::Invalid)?;
    if !chart_candidates(fact.fact_type, 1.0).contains(&chart) {
        return Err(SpecError::Incompatible {
            chart: chart.name(),
            fact: fact.fact_type.name(),
        });
    }
    let derived = facts::derive_value(fact, table)?;
    let caption = narrate::caption(fact, table)?;
    let measures: Vec<String> = fact
        .measures
        .iter()
        .map(|m| format!("{}({})", m.agg.name(), m.field))
        .collect();
    let data: Vec<DataRow> = if fact.fact_type == FactType::Association {
        fact.paired_groups(table)?
            .into_iter()
            .map(|(key, a, b)| DataRow { key, values: vec![a, b] })
            .collect()
    } else if fact.breakdown.is_empty() {
        vec![DataRow {
            key: measures.first().cloned().unwrap_or_default(),
            values: vec![derived.number().unwrap_or_default()],
        }]
    } else {
        fact.groups(table)?
            .into_iter()
            .map(|g| DataRow {
                key: g.label(),
                values: vec![g.value],
            })
            .collect()
    };
    let highlighted = fact
        .focus_values()
        .into_iter()
        .filter(|v| data.iter().any(|r| r.key == *v))
        .map(str::to_string)
        .collect();
    Ok(ChartSpec {
        chart,
        fact_type: fact.fact_type,
        category: fact.breakdown_field().map(str::to_string),
        measures,
        data,
        highlighted,
        headline: headline(&derived),
        caption,
    })
}

pub const PALETTE: [&str; 8] = [
    "#4e79a7", "#f28e2b", "#59a14f", "#76b7b2", "#edc948", "#b07aa1", "#ff9da7", "#9c755f",
];
pub const ACCENT: &str = "#e15759";

pub fn escape_xml(s: &str) -> String {
    let mut out = String::with_capacity(s.len());
    for c in s.chars() {
        match c {
            '&' => out.push_str("&amp;"),
            '<' => out.push_str("&lt;"),
            '>' => out.push_str("&gt;"),
            '"' => out.push_str("&quot;"),
            '\'' => out.push_str("&apos;"),
            c => out.push(c),
        }
    }
    out
}

struct Plot {
    x: f64,
    y: f64,
    w: f64,
    h: f64,
}

const CAPTION_BAND: f64 = 28.0;
const MARGIN: f64 = 24.0;

fn mark_class(highlight: bool) -> &'static str {
    if highlight {
        "mark accent"
    } else {
        "mark"
    }
}

fn fill(highlight: bool, i: usize) -> &'static str {
    if highlight {
        ACCENT
    } else {
        PALETTE[i % PALETTE.len()]
    }
}

/// Render a spec as a standalone SVG document.
pub fn render_svg(spec: &ChartSpec, width: f64, height: f64) -> Result<String, RenderError> {
    if !(width > 0.0 && height > 0.0 && width.is_finite() && height.is_finite()) {
        return Err(RenderError::BadSize { width, height });
    }
    let mut s = String::new();
    let _ = write!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{width:.0}" height="{height:.0}" viewBox="0 0 {width:.2} {height:.2}">"#
    );
    let _ = write!(s, "<title>{}</title>", escape_xml(&spec.caption));
    let _ = write!(
        s,
        "<style>.mark{{stroke:none}}.accent{{fill:{ACCENT}}}.line{{fill:none;stroke:{};stroke-width:2}}text{{font-family:sans-serif;font-size:11px;fill:#333}}.caption{{font-size:12px}}.big{{font-size:36px}}</style>",
        PALETTE[0]
    );
    s.push_str(&chart_body(spec, width, height));
    s.push_str("</svg>");
    Ok(s)
}

/// The chart marks and caption without the enclosing svg element, placed at
/// the origin.
pub fn chart_body(spec: &ChartSpec, width: f64, height: f64) -> String {
    let mut s = String::new();
    let _ = write!(
        s,
        r#"<text class="caption" x="{:.2}" y="{:.2}">{}</text>"#,
        MARGIN / 2.0,
        CAPTION_BAND / 2.0 + 4.0,
        escape_xml(&spec.caption)
    );
    let plot = Plot {
        x: MARGIN,
        y: CAPTION_BAND,
        w: (width - 2.0 * MARGIN).max(1.0),
        h: (height - CAPTION_BAND - MARGIN).max(1.0),
    };
    if spec.data.is_empty() {
        let _ = write!(
            s,
            r#"<text x="{:.2}" y="{:.2}" text-anchor="middle">no data</text>"#,
            width / 2.0,
            height / 2.0
        );
        return s;
    }
    let hl = |k: &str| spec.highlighted.iter().any(|h| h == k);
    match spec.chart {
        ChartType::Bar => bars(&mut s, spec, &plot, &hl),
        ChartType::Line => line(&mut s, spec, &plot, &hl, false),
        ChartType::Area => line(&mut s, spec, &plot, &hl, true),
        ChartType::Pie => pie(&mut s, spec, &plot, &hl, 0.0, false),
        ChartType::Donut => pie(&mut s, spec, &plot, &hl, 0.55, false),
        ChartType::HalfDonut => pie(&mut s, spec, &plot, &hl, 0.55, true),
        ChartType::Scatter => points(&mut s, spec, &plot, &hl, false),
        ChartType::Bubble => points(&mut s, spec, &plot, &hl, true),
        ChartType::BigNumber => big_number(&mut s, spec, &plot),
        ChartType::TableList => table_list(&mut s, spec, &plot, &hl),
        ChartType::BoxPlot => box_plot(&mut s, spec, &plot, &hl),
        ChartType::Treemap => treemap(&mut s, spec, &plot, &hl),
    }
    s
}

fn first_values(spec: &ChartSpec) -> Vec<f64> {
    spec.data.iter().map(|r| r.values.first().copied().unwrap_or(0.0)).collect()
}

fn value_range(vals: &[f64]) -> (f64, f64) {
    let lo = vals.iter().copied().fold(0.0f64, f64::min);
    let hi = vals.iter().copied().fold(0.0f64, f64::max);
    if hi - lo <= 0.0 {
        (lo, lo + 1.0)
    } else {
        (lo, hi)
    }
}

fn bars(s: &mut String, spec: &ChartSpec, p: &Plot, hl: &dyn Fn(&str) -> bool) {
    let vals = first_values(spec);
    let (lo, hi) = value_range(&vals);
    let n = vals.len() as f64;
    let slot = p.w / n;
    let y_of = |v: f64| p.y + p.h * (hi - v) / (hi - lo);
    let base = y_of(0.0);
    for (i, (row, v)) in spec.data.iter().zip(&vals).enumerate() {
        let h = hl(&row.key);
        let top = y_of(*v).min(base);
        let x = p.x + slot * i as f64 + slot * 0.1;
        let _ = write!(
            s,
            r#"<rect class="{}" x="{x:.2}" y="{top:.2}" width="{:.2}" height="{:.2}" fill="{}"/>"#,
            mark_class(h),
            slot * 0.8,
            (y_of(*v) - base).abs(),
            fill(h, 0)
        );
        let _ = write!(
            s,
            r#"<text x="{:.2}" y="{:.2}" text-anchor="middle">{}</text>"#,
            x + slot * 0.4,
            p.y + p.h + 14.0,
            escape_xml(&row.key)
        );
    }
}

fn line(s: &mut String, spec: &ChartSpec, p: &Plot, hl: &dyn Fn(&str) -> bool, area: bool) {
    let vals = first_values(spec);
    let (lo, hi) = value_range(&vals);
    let n = vals.len();
    let x_of = |i: usize| {
        if n == 1 {
            p.x + p.w / 2.0
        } else {
            p.x + p.w * i as f64 / (n - 1) as f64
        }
    };
    let y_of = |v: f64| p.y + p.h * (hi - v) / (hi - lo);
    let pts: Vec<String> = vals
        .iter()
        .enumerate()
        .map(|(i, v)| format!("{:.2},{:.2}", x_of(i), y_of(*v)))
        .collect();
    if area {
        let base = y_of(0.0);
        let _ = write!(
            s,
            r#"<polygon class="mark" points="{:.2},{base:.2} {} {:.2},{base:.2}" fill="{}" fill-opacity="0.5"/>"#,
            x_of(0),
            pts.join(" "),
            x_of(n - 1),
            PALETTE[0]
        );
    }
    let _ = write!(s, r#"<polyline class="line" points="{}"/>"#, pts.join(" "));
    for (i, (row, v)) in spec.data.iter().zip(&vals).enumerate() {
        let h = hl(&row.key);
        let _ = write!(
            s,
            r#"<circle class="{}" cx="{:.2}" cy="{:.2}" r="3.00" fill="{}"/>"#,
            mark_class(h),
            x_of(i),
            y_of(*v),
            fill(h, 0)
        );
    }
}

fn arc_point(cx: f64, cy: f64, r: f64, a: f64) -> (f64, f64) {
    (cx + r * a.cos(), cy + r * a.sin())
}

fn pie(s: &mut String, spec: &ChartSpec, p: &Plot, hl: &dyn Fn(&str) -> bool, inner: f64, half: bool) {
    let vals: Vec<f64> = first_values(spec).into_iter().map(f64::abs).collect();
    let total: f64 = vals.iter().sum();
    let cx = p.x + p.w / 2.0;
    let (cy, r, sweep) = if half {
        let r = (p.w / 2.0).min(p.h);
        (p.y + p.h, r, std::f64::consts::PI)
    } else {
        (p.y + p.h / 2.0, p.w.min(p.h) / 2.0, std::f64::consts::TAU)
    };
    let ri = r * inner;
    let mut a = if half { std::f64::consts::PI } else { -std::f64::consts::FRAC_PI_2 };
    for (i, (row, v)) in spec.data.iter().zip(&vals).enumerate() {
        let frac = if total > 0.0 { v / total } else { 1.0 / vals.len() as f64 };
        let da = frac * sweep;
        let h = hl(&row.key);
        // Arcs wider than half a turn are split so each segment is unambiguous.
        let mid = a + da / 2.0;
        let end = a + da;
        let (x0, y0) = arc_point(cx, cy, r, a);
        let (x1, y1) = arc_point(cx, cy, r, mid);
        let (x2, y2) = arc_point(cx, cy, r, end);
        let mut d = format!("M{x0:.2},{y0:.2}A{r:.2},{r:.2} 0 0 1 {x1:.2},{y1:.2}A{r:.2},{r:.2} 0 0 1 {x2:.2},{y2:.2}");
        if ri > 0.0 {
            let (u2, v2) = arc_point(cx, cy, ri, end);
            let (u1, v1) = arc_point(cx, cy, ri, mid);
            let (u0, v0) = arc_point(cx, cy, ri, a);
            let _ = write!(
                d,
                "L{u2:.2},{v2:.2}A{ri:.2},{ri:.2} 0 0 0 {u1:.2},{v1:.2}A{ri:.2},{ri:.2} 0 0 0 {u0:.2},{v0:.2}Z"
            );
        } else {
            let _ = write!(d, "L{cx:.2},{cy:.2}Z");
        }
        let _ = write!(s, r#"<path class="{}" d="{d}" fill="{}"/>"#, mark_class(h), fill(h, i));
        a = end;
    }
}

fn points(s: &mut String, spec: &ChartSpec, p: &Plot, hl: &dyn Fn(&str) -> bool, bubble: bool) {
    let xs: Vec<f64> = spec.data.iter().map(|r| r.values.first().copied().unwrap_or(0.0)).collect();
    let ys: Vec<f64> = spec.data.iter().map(|r| r.values.get(1).copied().unwrap_or(0.0)).collect();
    let (xl, xh) = value_range(&xs);
    let (yl, yh) = value_range(&ys);
    let ymax = ys.iter().map(|v| v.abs()).fold(0.0, f64::max);
    for (i, row) in spec.data.iter().enumerate() {
        let h = hl(&row.key);
        let cx = p.x + p.w * (xs[i] - xl) / (xh - xl);
        let cy = p.y + p.h * (yh - ys[i]) / (yh - yl);
        let r = if bubble && ymax > 0.0 {
            4.0 + 12.0 * (ys[i].abs() / ymax).sqrt()
        } else {
            4.0
        };
        let _ = write!(
            s,
            r#"<circle class="{}" cx="{cx:.2}" cy="{cy:.2}" r="{r:.2}" fill="{}" fill-opacity="0.8"/>"#,
            mark_class(h),
            fill(h, 0)
        );
    }
}

fn big_number(s: &mut String, spec: &ChartSpec, p: &Plot) {
    let text = spec
        .headline
        .clone()
        .unwrap_or_else(|| narrate::format_number(first_values(spec)[0]));
    let _ = write!(
        s,
        r#"<text class="big" x="{:.2}" y="{:.2}" text-anchor="middle" fill="{}">{}</text>"#,
        p.x + p.w / 2.0,
        p.y + p.h / 2.0,
        PALETTE[0],
        escape_xml(&text)
    );
    if let Some(m) = spec.measures.first() {
        let _ = write!(
            s,
            r#"<text x="{:.2}" y="{:.2}" text-anchor="middle">{}</text>"#,
            p.x + p.w / 2.0,
            p.y + p.h / 2.0 + 20.0,
            escape_xml(m)
        );
    }
}

fn table_list(s: &mut String, spec: &ChartSpec, p: &Plot, hl: &dyn Fn(&str) -> bool) {
    let step = (p.h / spec.data.len() as f64).min(18.0);
    for (i, row) in spec.data.iter().enumerate() {
        let h = hl(&row.key);
        let vals: Vec<String> = row.values.iter().map(|v| narrate::format_number(*v)).collect();
        let y = p.y + step * (i as f64 + 0.8);
        let class = if h { r#" class="accent""# } else { "" };
        let _ = write!(
            s,
            r#"<text{class} x="{:.2}" y="{y:.2}">{}</text><text{class} x="{:.2}" y="{y:.2}" text-anchor="end">{}</text>"#,
            p.x,
            escape_xml(&row.key),
            p.x + p.w,
            vals.join(", ")
        );
    }
}

fn quantile(sorted: &[f64], q: f64) -> f64 {
    let pos = q * (sorted.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    sorted[lo] + (sorted[hi] - sorted[lo]) * (pos - lo as f64)
}

fn box_plot(s: &mut String, spec: &ChartSpec, p: &Plot, hl: &dyn Fn(&str) -> bool) {
    let vals = first_values(spec);
    let mut sorted = vals.clone();
    sorted.sort_by(f64::total_cmp);
    let (lo, hi) = (sorted[0], sorted[sorted.len() - 1]);
    let span = if hi > lo { hi - lo } else { 1.0 };
    let y_of = |v: f64| p.y + p.h * (hi - v) / span;
    let (q1, q2, q3) = (quantile(&sorted, 0.25), quantile(&sorted, 0.5), quantile(&sorted, 0.75));
    let cx = p.x + p.w / 2.0;
    let bw = p.w / 4.0;
    let _ = write!(
        s,
        r#"<line x1="{cx:.2}" y1="{:.2}" x2="{cx:.2}" y2="{:.2}" stroke="{}"/>"#,
        y_of(hi),
        y_of(lo),
        PALETTE[0]
    );
    let _ = write!(
        s,
        r#"<rect class="mark" x="{:.2}" y="{:.2}" width="{bw:.2}" height="{:.2}" fill="{}" fill-opacity="0.6"/>"#,
        cx - bw / 2.0,
        y_of(q3),
        (y_of(q1) - y_of(q3)).max(0.5),
        PALETTE[0]
    );
    let _ = write!(
        s,
        r##"<line x1="{:.2}" y1="{:.2}" x2="{:.2}" y2="{:.2}" stroke="#333"/>"##,
        cx - bw / 2.0,
        y_of(q2),
        cx + bw / 2.0,
        y_of(q2)
    );
    for (row, v) in spec.data.iter().zip(&vals) {
        let h = hl(&row.key);
        let _ = write!(
            s,
            r#"<circle class="{}" cx="{cx:.2}" cy="{:.2}" r="3.00" fill="{}"/>"#,
            mark_class(h),
            y_of(*v),
            fill(h, 0)
        );
    }
}

fn treemap(s: &mut String, spec: &ChartSpec, p: &Plot, hl: &dyn Fn(&str) -> bool) {
    let vals: Vec<f64> = first_values(spec).into_iter().map(f64::abs).collect();
    let total: f64 = vals.iter().sum();
    let mut x = p.x;
    for (i, (row, v)) in spec.data.iter().zip(&vals).enumerate() {
        let w = if total > 0.0 { p.w * v / total } else { p.w / vals.len() as f64 };
        let h = hl(&row.key);
        let _ = write!(
            s,
            r##"<rect class="{}" x="{x:.2}" y="{:.2}" width="{w:.2}" height="{:.2}" fill="{}" stroke="#fff"/>"##,
            mark_class(h),
            p.y,
            p.h,
            fill(h, i)
        );
        let _ = write!(
            s,
            r#"<text x="{:.2}" y="{:.2}">{}</text>"#,
            x + 4.0,
            p.y + 14.0,
            escape_xml(&row.key)
        );
        x += w;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::table::{load_csv, Aggregation, CsvOptions};
    use FactType::*;

    #[test]
    fn default_charts() {
        assert_eq!(default_chart(Trend), ChartType::Line);
        assert_eq!(default_chart(Proportion), ChartType::Pie);
        assert_eq!(default_chart(Value), ChartType::BigNumber);
        assert_eq!(default_chart(Distribution), ChartType::Bar);
        assert_eq!(default_chart(Association), ChartType::Line);
        assert_eq!(default_chart(Outlier), ChartType::Area);
        for ft in FactType::ALL {
            assert_eq!(chart_candidates(ft, 0.0), vec![default_chart(ft)]);
        }
    }

    #[test]
    fn candidates() {
        use ChartType::*;
        assert_eq!(chart_candidates(Trend, 1.0), vec![Line, Bar, Area]);
        assert_eq!(chart_candidates(Outlier, 1.0), vec![Area, BigNumber, BoxPlot]);
        assert_eq!(chart_candidates(FactType::Value, 0.5), vec![BigNumber, Bar]);
        assert_eq!(chart_candidates(Proportion, 0.1), vec![Pie, Donut, HalfDonut, BigNumber]);
        assert_eq!(
            chart_candidates(Rank, 1.0),
            vec![Bar, BigNumber, TableList, Pie, Donut, HalfDonut]
        );
        assert_eq!(chart_frequency(Proportion, HalfDonut), 131);
    }

    #[test]
    fn bar_chart_marks() {
        let t = load_csv(b"K,V\na,5\nb,4\nc,3\nd,2\ne,1\n", &CsvOptions::default()).unwrap();
        let f = DataFact::new(Difference)
            .with_breakdown("K")
            .with_measure("V", Aggregation::Sum)
            .with_focus("K", "a")
            .with_focus("K", "c");
        let spec = build_chart_spec(&f, &t, ChartType::Bar).unwrap();
        assert_eq!(spec.highlighted, vec!["a", "c"]);
        let svg = render_svg(&spec, 400.0, 300.0).unwrap();
        assert_eq!(svg.matches("<rect").count(), 5);
        assert_eq!(svg.matches("mark accent").count(), 2);
        assert_eq!(svg, render_svg(&spec, 400.0, 300.0).unwrap());
        assert!(build_chart_spec(&f, &t, ChartType::Scatter).is_err());
        assert!(render_svg(&spec, 0.0, 10.0).is_err());
    }

    #[test]
    fn escaping() {
        assert_eq!(escape_xml("a<b & \"c\""), "a&lt;b &amp; &quot;c&quot;");
    }
}
