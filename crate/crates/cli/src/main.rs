use std::fs;
use std::net::SocketAddr;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Duration;

use anyhow::{bail, Context};
use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use factweaver::document::{self, GenerationParams, RenderMode, StoryDocument};
use factweaver::factgen::enumerate_facts;
use factweaver::facts::{self, DerivedValue};
use factweaver::narrate;
use factweaver::reward::{RewardWeights, ScoreCache};
use factweaver::scoring::{FactScore, ScoringConfig};
use factweaver::search::{generate_story, Goal, SearchConfig};
use factweaver::table::{load_csv, CsvOptions};
use factweaver::{DataTable, FactRecord, FactType};
use factweaver_service::ServiceConfig;

const WEIGHT_TOLERANCE: f64 = 1e-3;

#[derive(Debug, Parser)]
#[command(name = "factweaver", version, about = "Generate visual data stories from CSV files")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Search for a story and write it as a story document.
    Generate(GenerateArgs),
    /// List the most important facts of one type.
    Facts {
        csv: PathBuf,
        #[arg(long = "type")]
        fact_type: String,
        #[arg(long, default_value_t = 10)]
        top: usize,
    },
    /// Render a story document.
    Render {
        story: PathBuf,
        #[arg(long, default_value = "storyline")]
        mode: String,
        #[arg(long)]
        out: PathBuf,
    },
    /// Score one fact record against a table.
    Score { csv: PathBuf, fact: PathBuf },
    /// Run the HTTP service.
    Serve {
        #[arg(long, default_value_t = 8080)]
        port: u16,
        #[arg(long, env = "FACTWEAVER_DATA_DIR", default_value = "factweaver-data")]
        data_dir: PathBuf,
    },
}

#[derive(Debug, Args)]
struct GenerateArgs {
    csv: PathBuf,
    #[arg(long, default_value_t = 6)]
    length: usize,
    /// Diversity, logicality and integrity weights.
    #[arg(long, default_value = "0.3333333333333333,0.3333333333333333,0.3333333333333334")]
    weights: String,
    #[arg(long, default_value_t = 0.0)]
    chart_diversity: f64,
    /// Time budget in seconds.
    #[arg(long, conflicts_with = "iterations")]
    time_limit: Option<f64>,
    #[arg(long)]
    iterations: Option<usize>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: Option<PathBuf>,
}

/// Bad flag values found before any work starts.
#[derive(Debug)]
struct UsageError(String);

impl std::fmt::Display for UsageError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for UsageError {}

fn usage(msg: impl Into<String>) -> anyhow::Error {
    UsageError(msg.into()).into()
}

fn parse_weights(s: &str) -> anyhow::Result<RewardWeights> {
    let parts: Vec<f64> = s
        .split(',')
        .map(|p| p.trim().parse::<f64>())
        .collect::<Result<_, _>>()
        .map_err(|_| usage(format!("--weights expects three numbers, got '{s}'")))?;
    let [d, l, c] = parts[..] else {
        return Err(usage(format!("--weights expects three numbers, got '{s}'")));
    };
    let (w, changed) =
        RewardWeights::renormalized(d, l, c, WEIGHT_TOLERANCE).map_err(|e| usage(format!("--weights: {e}")))?;
    if changed {
        eprintln!(
            "warning: weights sum to {}, renormalized to {:.6},{:.6},{:.6}",
            d + l + c,
            w.diversity,
            w.logicality,
            w.integrity
        );
    }
    Ok(w)
}

fn load_table(path: &Path) -> anyhow::Result<DataTable> {
    let bytes = fs::read(path).with_context(|| format!("cannot read {}", path.display()))?;
    load_csv(&bytes, &CsvOptions::default()).with_context(|| format!("cannot load {}", path.display()))
}

fn write_out(out: Option<&Path>, text: &str) -> anyhow::Result<()> {
    match out {
        Some(p) => fs::write(p, text).with_context(|| format!("cannot write {}", p.display())),
        None => {
            println!("{text}");
            Ok(())
        }
    }
}

fn generate(args: GenerateArgs) -> anyhow::Result<()> {
    let weights = parse_weights(&args.weights)?;
    if !(0.0..=1.0).contains(&args.chart_diversity) {
        return Err(usage("--chart-diversity must lie in [0, 1]"));
    }
    if args.length == 0 {
        return Err(usage("--length must be at least 1"));
    }
    let goal = match (args.iterations, args.time_limit) {
        (Some(0), _) => return Err(usage("--iterations must be positive")),
        (Some(k), _) => Goal::iterations(args.length, k),
        (None, Some(s)) if s > 0.0 && s.is_finite() => Goal::timed(args.length, Duration::from_secs_f64(s)),
        (None, Some(_)) => return Err(usage("--time-limit must be positive")),
        (None, None) => Goal::timed(args.length, Duration::from_secs(10)),
    };
    let table = load_table(&args.csv)?;
    let story = generate_story(&table, &goal, &weights, &SearchConfig::default(), args.seed)?;
    if story.goal_unmet {
        eprintln!("warning: the story is shorter than requested");
    }
    let dataset = args
        .csv
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default();
    let params = GenerationParams {
        goal,
        weights,
        chart_diversity: args.chart_diversity,
        seed: args.seed,
    };
    let doc = StoryDocument::from_story(format!("story-{}", args.seed), dataset, &story, params, &table)?;
    write_out(args.out.as_deref(), &doc.to_json())
}

#[derive(Serialize)]
struct ScoredFact {
    fact: FactRecord,
    caption: String,
    derived: DerivedValue,
    score: FactScore,
}

fn scored(fact: &factweaver::DataFact, table: &DataTable, cache: &ScoreCache) -> anyhow::Result<ScoredFact> {
    Ok(ScoredFact {
        fact: facts::to_fact_record(fact),
        caption: narrate::caption(fact, table)?,
        derived: facts::derive_value(fact, table)?,
        score: cache.score(fact),
    })
}

fn list_facts(csv: &Path, fact_type: &str, top: usize) -> anyhow::Result<()> {
    let t = FactType::parse(fact_type).ok_or_else(|| usage(format!("unknown fact type '{fact_type}'")))?;
    let table = load_table(csv)?;
    let cache = ScoreCache::new(&table, ScoringConfig::default());
    let candidates: Vec<_> = enumerate_facts(&table, usize::MAX)
        .into_iter()
        .filter(|f| f.fact_type == t)
        .collect();
    let scores = cache.score_all(&candidates);
    let mut ranked: Vec<usize> = (0..candidates.len()).collect();
    ranked.sort_by(|&a, &b| scores[b].importance.total_cmp(&scores[a].importance).then(a.cmp(&b)));
    let out = ranked
        .into_iter()
        .take(top)
        .map(|i| scored(&candidates[i], &table, &cache))
        .collect::<anyhow::Result<Vec<_>>>()?;
    write_out(None, &serde_json::to_string_pretty(&out)?)
}

fn render(story: &Path, mode: &str, out: &Path) -> anyhow::Result<()> {
    let mode = RenderMode::parse(mode).ok_or_else(|| usage(format!("unknown mode '{mode}'")))?;
    let text = fs::read_to_string(story).with_context(|| format!("cannot read {}", story.display()))?;
    let doc: StoryDocument = serde_json::from_str(&text).context("not a story document")?;
    write_out(Some(out), &document::render(&doc, mode)?)
}

fn score(csv: &Path, fact: &Path) -> anyhow::Result<()> {
    let table = load_table(csv)?;
    let text = fs::read_to_string(fact).with_context(|| format!("cannot read {}", fact.display()))?;
    let record: FactRecord = serde_json::from_str(&text).context("not a fact record")?;
    let f = facts::from_fact_record(&record, table.schema())?;
    if let Err(v) = facts::validate(&f, table.schema()) {
        bail!("invalid fact: {}", v.join("; "));
    }
    let cache = ScoreCache::new(&table, ScoringConfig::default());
    write_out(None, &serde_json::to_string_pretty(&scored(&f, &table, &cache)?)?)
}

fn serve(port: u16, data_dir: PathBuf) -> anyhow::Result<()> {
    let rt = tokio::runtime::Runtime::new()?;
    let addr = SocketAddr::from(([0, 0, 0, 0], port));
    rt.block_on(factweaver_service::serve(ServiceConfig::new(data_dir), addr))?;
    Ok(())
}

fn run(cli: Cli) -> anyhow::Result<()> {
    match cli.command {
        Command::Generate(args) => generate(args),
        Command::Facts { csv, fact_type, top } => list_facts(&csv, &fact_type, top),
        Command::Render { story, mode, out } => render(&story, &mode, &out),
        Command::Score { csv, fact } => score(&csv, &fact),
        Command::Serve { port, data_dir } => serve(port, data_dir),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(e.exit_code() as u8);
        }
    };
    tracing_subscriber::fmt()
        .with_env_filter(tracing_subscriber::EnvFilter::from_default_env())
        .with_writer(std::io::stderr)
        .init();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            if e.is::<UsageError>() {
                ExitCode::from(2)
            } else {
                ExitCode::from(1)
            }
        }
    }
}
