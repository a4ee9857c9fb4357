use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use factweaver::reward::ScoreCache;
use factweaver::scoring::ScoringConfig;
use factweaver::table::{load_csv, CsvOptions};
use factweaver::{factgen, FactType};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_factweaver"))
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().unwrap()
}

fn cars_csv(dir: &Path) -> PathBuf {
    let mut csv = String::from("Year,Brand,Region,Sales,Price\n");
    for (i, year) in (2007..2013).enumerate() {
        for (j, brand) in ["Ford", "Kia", "BMW"].iter().enumerate() {
            for (k, region) in ["North", "South"].iter().enumerate() {
                let sales = 100 + (i * 37 + j * 53 + k * 11) % 90;
                let price = 20 + (i * 7 + j * 3 + k) % 15;
                csv.push_str(&format!("{year},{brand},{region},{sales},{price}\n"));
            }
        }
    }
    let p = dir.join("cars.csv");
    std::fs::write(&p, csv).unwrap();
    p
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

#[test]
fn generate_is_byte_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    let csv = cars_csv(dir.path());
    let out = |name: &str| {
        let p = dir.path().join(name);
        let o = run(&[
            "generate",
            csv.to_str().unwrap(),
            "--length",
            "4",
            "--iterations",
            "8",
            "--seed",
            "3",
            "--out",
            p.to_str().unwrap(),
        ]);
        assert!(o.status.success(), "{}", stderr(&o));
        std::fs::read(p).unwrap()
    };
    let a = out("a.json");
    assert_eq!(a, out("b.json"));
    let doc: serde_json::Value = serde_json::from_slice(&a).unwrap();
    assert_eq!(doc["facts"].as_array().unwrap().len(), 4);
}

#[test]
fn facts_are_ranked_by_importance() {
    let dir = tempfile::tempdir().unwrap();
    let csv = cars_csv(dir.path());
    let o = run(&["facts", csv.to_str().unwrap(), "--type", "trend", "--top", "3"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let listed: Vec<serde_json::Value> = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(listed.len(), 3);

    let table = load_csv(&std::fs::read(&csv).unwrap(), &CsvOptions::default()).unwrap();
    let cache = ScoreCache::new(&table, ScoringConfig::default());
    let mut all: Vec<f64> = factgen::enumerate_facts(&table, usize::MAX)
        .iter()
        .filter(|f| f.fact_type == FactType::Trend)
        .map(|f| cache.score(f).importance)
        .collect();
    all.sort_by(|a, b| b.total_cmp(a));
    for (got, want) in listed.iter().zip(&all) {
        assert_eq!(got["fact"]["type"], "trend");
        assert_eq!(got["score"]["importance"].as_f64().unwrap(), *want);
    }
}

#[test]
fn render_writes_every_mode() {
    let dir = tempfile::tempdir().unwrap();
    let csv = cars_csv(dir.path());
    let story = dir.path().join("story.json");
    let o = run(&[
        "generate",
        csv.to_str().unwrap(),
        "--length",
        "3",
        "--iterations",
        "4",
        "--out",
        story.to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    for mode in ["storyline", "swiper", "factsheet"] {
        let out = dir.path().join(format!("{mode}.out"));
        let o = run(&["render", story.to_str().unwrap(), "--mode", mode, "--out", out.to_str().unwrap()]);
        assert!(o.status.success(), "{mode}: {}", stderr(&o));
        assert!(!std::fs::read_to_string(out).unwrap().is_empty());
    }
}

#[test]
fn missing_input_exits_one() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("x.svg");
    let o = run(&["render", "/nonexistent/story.json", "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("cannot read"));
}

#[test]
fn bad_flags_exit_two() {
    let dir = tempfile::tempdir().unwrap();
    let csv = cars_csv(dir.path());
    let c = csv.to_str().unwrap();
    for args in [
        vec!["generate", c, "--weights", "0.5,0.5,0.5"],
        vec!["generate", c, "--weights", "a,b"],
        vec!["generate", c, "--chart-diversity", "2"],
        vec!["generate", c, "--iterations", "0"],
        vec!["generate", c, "--iterations", "3", "--time-limit", "1"],
        vec!["facts", c, "--type", "nonsense"],
        vec!["frobnicate"],
    ] {
        assert_eq!(run(&args).status.code(), Some(2), "{args:?}");
    }
}

#[test]
fn near_unit_weights_are_renormalized_with_a_warning() {
    let dir = tempfile::tempdir().unwrap();
    let csv = cars_csv(dir.path());
    let o = run(&[
        "generate",
        csv.to_str().unwrap(),
        "--length",
        "2",
        "--iterations",
        "2",
        "--weights",
        "0.3335,0.3335,0.3335",
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert!(stderr(&o).contains("renormalized"));
    let doc: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    let w = &doc["params"]["weights"];
    let sum: f64 = ["diversity", "logicality", "integrity"]
        .iter()
        .map(|k| w[k].as_f64().unwrap())
        .sum();
    assert!((sum - 1.0).abs() < 1e-12);
}

#[test]
fn score_reports_a_record() {
    let dir = tempfile::tempdir().unwrap();
    let csv = cars_csv(dir.path());
    let fact = dir.path().join("fact.json");
    std::fs::write(
        &fact,
        r#"{"type":"value","measure":[{"field":"Sales","aggregate":"sum"}],"subspace":[{"field":"Brand","value":"Kia"}]}"#,
    )
    .unwrap();
    let o = run(&["score", csv.to_str().unwrap(), fact.to_str().unwrap()]);
    assert!(o.status.success(), "{}", stderr(&o));
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert!(v["caption"].as_str().unwrap().starts_with("The total Sales is"));
    assert!(v["score"]["importance"].as_f64().unwrap() >= 0.0);

    std::fs::write(&fact, r#"{"type":"value","measure":[]}"#).unwrap();
    let o = run(&["score", csv.to_str().unwrap(), fact.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("invalid fact"));
}
