//! Construction of concrete facts: focus selection, usability checks,
//! random draws and exhaustive enumeration.

use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

use crate::facts::{self, BreakdownRule, DataFact, ExtremeKind, FactType, FocusRule, Measure};
use crate::table::{Aggregation, DataTable, FieldKind, Filter, Group, Subspace};

/// Seeded generator used throughout fact generation and search.
pub type FactRng = ChaCha8Rng;

/// How the focus of a candidate fact is obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FocusPlan {
    /// Use the focus as given.
    Fixed,
    /// Keep the given focus when still usable, otherwise rebuild it.
    Keep,
    /// Replace the focus with the type's default choice.
    Rebuild,
    /// Focus the maximum or minimum group.
    Extreme(ExtremeKind),
}

/// A fact is usable when it validates, selects rows, has at least two
/// groups when broken down, names only present focus values and has a
/// derivable value.
pub fn usable(fact: &DataFact, table: &DataTable) -> bool {
    if facts::validate(fact, table.schema()).is_err() {
        return false;
    }
    match table.select_subspace(&fact.subspace) {
        Ok(rows) if !rows.is_empty() => {}
        _ => return false,
    }
    if fact.breakdown_field().is_some() {
        let Ok(groups) = fact.groups(table) else {
            return false;
        };
        if groups.len() < 2 {
            return false;
        }
        let present = |v: &str| groups.iter().any(|g| g.key.len() == 1 && g.key[0] == v);
        if !fact.focus.iter().all(|f| present(&f.value)) {
            return false;
        }
        if fact.fact_type == FactType::Rank && !is_top_three(&groups, fact) {
            return false;
        }
    }
    facts::derive_value(fact, table).is_ok()
}

fn by_value_desc(groups: &[Group]) -> Vec<&Group> {
    let mut g: Vec<&Group> = groups.iter().collect();
    g.sort_by(|a, b| b.value.total_cmp(&a.value).then_with(|| a.key.cmp(&b.key)));
    g
}

fn is_top_three(groups: &[Group], fact: &DataFact) -> bool {
    let top: Vec<String> = by_value_desc(groups).iter().take(3).map(|g| g.label()).collect();
    let focus: Vec<String> = fact.focus.iter().map(|f| f.value.clone()).collect();
    top == focus
}

fn rebuild_focus(
    mut fact: DataFact,
    table: &DataTable,
    rng: &mut FactRng,
    extreme: Option<ExtremeKind>,
) -> Option<DataFact> {
    fact.focus.clear();
    let Some(b) = fact.breakdown_field().map(str::to_string) else {
        return Some(fact);
    };
    let needed = match fact.fact_type.constraint().focus {
        FocusRule::Exactly(k) => k,
        FocusRule::AtLeast(_) => 0,
    };
    if needed == 0 {
        return Some(fact);
    }
    let groups = fact.groups(table).ok()?;
    if groups.len() < needed.max(2) {
        return None;
    }
    let ranked = by_value_desc(&groups);
    let labels: Vec<String> = match fact.fact_type {
        FactType::Rank => ranked.iter().take(3).map(|g| g.label()).collect(),
        FactType::Extreme => {
            let g = match extreme.unwrap_or(ExtremeKind::Max) {
                ExtremeKind::Max => ranked.first()?,
                ExtremeKind::Min => ranked.last()?,
            };
            vec![g.label()]
        }
        FactType::Outlier => {
            let n = groups.len() as f64;
            let mean = groups.iter().map(|g| g.value).sum::<f64>() / n;
            let g = ranked
                .iter()
                .fold(None::<&&Group>, |best, g| match best {
                    Some(b) if (b.value - mean).abs() >= (g.value - mean).abs() => Some(b),
                    _ => Some(g),
                })?;
            vec![g.label()]
        }
        FactType::Difference => {
            let mut idx: Vec<usize> = (0..groups.len()).collect();
            idx.shuffle(rng);
            idx[..2].iter().map(|&i| groups[i].label()).collect()
        }
        FactType::Proportion => vec![groups[rng.gen_range(0..groups.len())].label()],
        _ => return None,
    };
    fact.focus = labels.into_iter().map(|v| Filter::new(b.clone(), v)).collect();
    Some(fact)
}

/// Resolve the focus per `plan` and return the fact if usable.
pub fn materialize(
    fact: DataFact,
    plan: FocusPlan,
    table: &DataTable,
    rng: &mut FactRng,
) -> Option<DataFact> {
    let out = match plan {
        FocusPlan::Fixed => Some(fact),
        FocusPlan::Keep => {
            if usable(&fact, table) {
                return Some(fact);
            }
            rebuild_focus(fact, table, rng, None)
        }
        FocusPlan::Rebuild => rebuild_focus(fact, table, rng, None),
        FocusPlan::Extreme(k) => rebuild_focus(fact, table, rng, Some(k)),
    }?;
    usable(&out, table).then_some(out)
}

/// Whether a type can be built from the given field shape.
pub fn shape_compatible(t: FactType, breakdown: Option<FieldKind>, measures: usize) -> bool {
    let c = t.constraint();
    let b_ok = match (c.breakdown, breakdown) {
        (BreakdownRule::None, None) => true,
        (BreakdownRule::None, Some(_)) | (_, None) => false,
        (rule, Some(k)) => rule.accepts(k),
    };
    b_ok && c.measures == measures
}

const AGG_WEIGHTS: [(Aggregation, u32); 4] = [
    (Aggregation::Sum, 5),
    (Aggregation::Avg, 3),
    (Aggregation::Max, 1),
    (Aggregation::Min, 1),
];

fn random_agg(rng: &mut FactRng) -> Aggregation {
    let total: u32 = AGG_WEIGHTS.iter().map(|w| w.1).sum();
    let mut r = rng.gen_range(0..total);
    for (a, w) in AGG_WEIGHTS {
        if r < w {
            return a;
        }
        r -= w;
    }
    Aggregation::Sum
}

/// Draw one random fact of type `t`; `None` when the draw is unusable.
pub fn random_fact(t: FactType, table: &DataTable, rng: &mut FactRng) -> Option<DataFact> {
    let rule = t.constraint();
    let dims: Vec<_> = table.dimensions().collect();
    let nums: Vec<_> = table.fields_of(FieldKind::Numerical).collect();

    let mut fact = DataFact::new(t);
    let breakdown = match rule.breakdown {
        BreakdownRule::None => None,
        r => {
            let options: Vec<_> = dims.iter().filter(|f| r.accepts(f.kind)).collect();
            Some(options.choose(rng)?.name.clone())
        }
    };
    if rng.gen_bool(0.5) {
        let options: Vec<_> = dims
            .iter()
            .filter(|f| Some(&f.name) != breakdown.as_ref() && !f.distinct_values.is_empty())
            .collect();
        if let Some(f) = options.choose(rng) {
            let v = f.distinct_values.choose(rng)?;
            fact.subspace = Subspace::new(vec![Filter::new(f.name.clone(), v.clone())]);
        }
    }
    if let Some(b) = breakdown {
        fact.breakdown = vec![b];
    }
    let agg = random_agg(rng);
    let picked: Vec<_> = nums.choose_multiple(rng, rule.measures).collect();
    if picked.len() < rule.measures {
        return None;
    }
    fact.measures = picked.iter().map(|f| Measure::new(f.name.clone(), agg)).collect();
    materialize(fact, FocusPlan::Rebuild, table, rng)
}

/// All usable facts with at most one subspace filter, sum aggregation and
/// the default focus, in a deterministic order. Stops after `limit`.
pub fn enumerate_facts(table: &DataTable, limit: usize) -> Vec<DataFact> {
    let mut rng = <FactRng as rand::SeedableRng>::seed_from_u64(0);
    let dims: Vec<_> = table.dimensions().collect();
    let nums: Vec<String> = table
        .fields_of(FieldKind::Numerical)
        .map(|f| f.name.clone())
        .collect();
    let mut subspaces = vec![Subspace::all()];
    for d in &dims {
        for v in &d.distinct_values {
            subspaces.push(Subspace::new(vec![Filter::new(d.name.clone(), v.clone())]));
        }
    }
    let mut measure_sets: Vec<Vec<String>> = vec![vec![]];
    measure_sets.extend(nums.iter().map(|n| vec![n.clone()]));
    for (i, a) in nums.iter().enumerate() {
        for b in &nums[i + 1..] {
            measure_sets.push(vec![a.clone(), b.clone()]);
        }
    }
    let mut breakdowns: Vec<Option<&str>> = vec![None];
    breakdowns.extend(dims.iter().map(|d| Some(d.name.as_str())));

    let mut out = Vec::new();
    for t in FactType::ALL {
        for s in &subspaces {
            for b in &breakdowns {
                if let Some(b) = b {
                    if s.contains_field(b) {
                        continue;
                    }
                }
                let kind = b.and_then(|b| table.field(b)).map(|f| f.kind);
                for ms in &measure_sets {
                    if !shape_compatible(t, kind, ms.len()) {
                        continue;
                    }
                    let fact = DataFact {
                        fact_type: t,
                        subspace: s.clone(),
                        breakdown: b.iter().map(|b| b.to_string()).collect(),
                        measures: ms.iter().map(|m| Measure::new(m.clone(), Aggregation::Sum)).collect(),
                        focus: Vec::new(),
                    };
                    let built = match t {
                        FactType::Difference => difference_top_two(fact, table),
                        FactType::Proportion => proportion_top(fact, table),
                        _ => materialize(fact, FocusPlan::Rebuild, table, &mut rng),
                    };
                    if let Some(f) = built {
                        out.push(f);
                        if out.len() >= limit {
                            return out;
                        }
                    }
                }
            }
        }
    }
    out
}

fn focus_on_ranked(mut fact: DataFact, table: &DataTable, k: usize) -> Option<DataFact> {
    let b = fact.breakdown_field()?.to_string();
    let groups = fact.groups(table).ok()?;
    fact.focus = by_value_desc(&groups)
        .iter()
        .take(k)
        .map(|g| Filter::new(b.clone(), g.label()))
        .collect();
    usable(&fact, table).then_some(fact)
}

fn difference_top_two(fact: DataFact, table: &DataTable) -> Option<DataFact> {
    focus_on_ranked(fact, table, 2)
}

fn proportion_top(fact: DataFact, table: &DataTable) -> Option<DataFact> {
    focus_on_ranked(fact, table, 1)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::table::{load_csv, CsvOptions};
    use rand::SeedableRng;

    fn table() -> DataTable {
        let csv = "Year,Brand,Sales,Price\n\
                   2007,Ford,10,30\n2007,Toyota,4,33\n2008,Ford,7,31\n\
                   2008,Toyota,3,29\n2009,Ford,2,19\n2009,Toyota,8,17\n\
                   2009,Honda,9,28\n2008,Honda,6,16\n";
        load_csv(csv.as_bytes(), &CsvOptions::default()).unwrap()
    }

    #[test]
    fn rank_focus_is_top_three() {
        let t = table();
        let f = DataFact::new(FactType::Rank)
            .with_breakdown("Year")
            .with_measure("Sales", Aggregation::Sum);
        let mut rng = FactRng::seed_from_u64(1);
        let f = materialize(f, FocusPlan::Rebuild, &t, &mut rng).unwrap();
        assert_eq!(f.focus_values(), ["2009", "2008", "2007"]);
    }

    #[test]
    fn extreme_plans() {
        let t = table();
        let base = DataFact::new(FactType::Extreme)
            .with_breakdown("Brand")
            .with_measure("Sales", Aggregation::Sum);
        let mut rng = FactRng::seed_from_u64(1);
        let max = materialize(base.clone(), FocusPlan::Extreme(ExtremeKind::Max), &t, &mut rng).unwrap();
        let min = materialize(base, FocusPlan::Extreme(ExtremeKind::Min), &t, &mut rng).unwrap();
        assert_eq!(max.focus_values(), ["Ford"]);
        assert_eq!(min.focus_values(), ["Toyota"]);
    }

    #[test]
    fn random_facts_are_usable_and_seeded() {
        let t = table();
        for seed in 0..50 {
            for ft in FactType::ALL {
                let a = random_fact(ft, &t, &mut FactRng::seed_from_u64(seed));
                let b = random_fact(ft, &t, &mut FactRng::seed_from_u64(seed));
                assert_eq!(a, b);
                if let Some(f) = a {
                    assert!(usable(&f, &t), "{f:?}");
                    assert_eq!(f.fact_type, ft);
                }
            }
        }
    }

    #[test]
    fn enumeration_is_usable_and_capped() {
        let t = table();
        let all = enumerate_facts(&t, usize::MAX);
        assert!(all.len() > 30);
        assert!(all.iter().all(|f| usable(f, &t)));
        assert_eq!(enumerate_facts(&t, 30), all[..30].to_vec());
    }
}
