//! Deterministic experiment driver: runs the lemma verifiers, recurrence
//! sweeps, the radical suite, and the IRS dichotomy harness, emitting
//! machine-readable reports with sorted keys.
//!
//! Exit codes: 0 success, 2 lemma-conclusion failure, 3 dichotomy
//! inconsistency, 4 precondition failure.

use std::fs;
use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{anyhow, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use hypgg::harness::{
    run_dichotomy, run_lemma_suite, run_radical_suite, ExperimentConfig, HarnessError,
    IrsSource, ModelSelect,
};
use hypgg::isometry::{classify_sweep, limit_set_handle, CylinderSet, DEFAULT_ORBIT_BUDGET};
use hypgg::models::probe::acylindricity_probe;
use hypgg::models::{FreeGroupModel, HalfPlaneModel, LamplighterModel};
use hypgg::subgroups::{recurrence_check, RecurrenceStatus, SubgroupHandle};
use hypgg::word::ball;
use hypgg::ModelSpace;

#[derive(Parser)]
#[command(name = "hypgg", about = "exact experiments with groups acting on hyperbolic spaces", version)]
struct Cli {
    /// JSON configuration file mirroring the experiment config.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Model space to drive.
    #[arg(long, global = true, value_enum)]
    model: Option<ModelArg>,
    /// Seed for all randomness in the run.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Output file (stdout when omitted).
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Output format.
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    format: Format,
    /// Cylinder depth for limit sets.
    #[arg(long, global = true)]
    depth: Option<usize>,
    /// Word-ball / generation radius.
    #[arg(long, global = true)]
    radius: Option<usize>,
    /// Orbit sweep bound.
    #[arg(long = "n-max", global = true)]
    n_max: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum ModelArg {
    Free,
    HalfPlane,
    Lamplighter,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Csv,
}

#[derive(Subcommand)]
enum Command {
    /// Stabilizer-IRS dichotomy harness: classify every atom.
    Dichotomy(DichotomyArgs),
    /// Randomized verification of the displacement lemmas.
    Lemmas,
    /// Elliptic radical suite: candidates, negative controls, the chain.
    Radical(RadicalArgs),
    /// Classification sweep over a word ball.
    Classify,
    /// Recurrence check for one subgroup handle.
    Recurrence(RecurrenceArgs),
    /// Truncated limit-set approximation for a subgroup.
    LimitSet(LimitSetArgs),
    /// Empirical acylindricity probe.
    AcylProbe(AcylArgs),
}

#[derive(Args)]
struct DichotomyArgs {
    /// Number of seeded transitive source actions.
    #[arg(long)]
    actions: Option<usize>,
    /// Maximum number of points of a source action.
    #[arg(long)]
    max_points: Option<usize>,
    /// IRS source family.
    #[arg(long, value_enum, default_value_t = SourceArg::SeededActions)]
    source: SourceArg,
}

#[derive(Clone, Copy, ValueEnum)]
enum SourceArg {
    SeededActions,
    DiracTrivial,
    DiracCyclic,
}

#[derive(Args)]
struct RadicalArgs {
    /// Chain length K for the no-maximal chain.
    #[arg(long)]
    chain: Option<usize>,
}

#[derive(Args)]
struct RecurrenceArgs {
    /// Generating words of the subgroup (free model), comma separated.
    #[arg(long, value_delimiter = ',')]
    subgroup: Vec<String>,
    /// Conjugating element.
    #[arg(long, default_value = "b")]
    conjugator: String,
    /// Probe set: a word-ball radius.
    #[arg(long, default_value_t = 1)]
    probe_radius: usize,
    /// Explicit probe words (override the ball).
    #[arg(long, value_delimiter = ',')]
    probe_words: Vec<String>,
}

#[derive(Args)]
struct LimitSetArgs {
    /// Generating words of the subgroup (free model), comma separated.
    #[arg(long, value_delimiter = ',')]
    subgroup: Vec<String>,
}

#[derive(Args)]
struct AcylArgs {
    #[arg(long, default_value_t = 2.0)]
    epsilon: f64,
    #[arg(long, default_value_t = 20.0)]
    r: f64,
    #[arg(long, default_value_t = 50)]
    pairs: usize,
    #[arg(long, default_value_t = 5)]
    elem_radius: usize,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(4)
        }
    }
}

fn load_config(cli: &Cli) -> Result<ExperimentConfig> {
    let mut cfg = match &cli.config {
        Some(path) => {
            let text = fs::read_to_string(path)
                .with_context(|| format!("reading config {}", path.display()))?;
            serde_json::from_str(&text).context("parsing config")?
        }
        None => ExperimentConfig::default(),
    };
    if let Some(model) = cli.model {
        cfg.model = match model {
            ModelArg::Free => ModelSelect::Free,
            ModelArg::HalfPlane => ModelSelect::HalfPlane,
            ModelArg::Lamplighter => ModelSelect::Lamplighter,
        };
    }
    if let Some(seed) = cli.seed {
        cfg.seed = seed;
    }
    if let Some(depth) = cli.depth {
        cfg.depth = depth;
    }
    if let Some(radius) = cli.radius {
        cfg.search_radius = radius;
    }
    if let Some(n_max) = cli.n_max {
        cfg.n_max = n_max;
    }
    Ok(cfg)
}

fn run(cli: Cli) -> Result<ExitCode> {
    let mut cfg = load_config(&cli)?;
    match &cli.command {
        Command::Dichotomy(args) => {
            if let Some(actions) = args.actions {
                cfg.actions = actions;
            }
            if let Some(mp) = args.max_points {
                cfg.max_points = mp;
            }
            cfg.irs_source = match args.source {
                SourceArg::SeededActions => IrsSource::SeededActions,
                SourceArg::DiracTrivial => IrsSource::DiracTrivial,
                SourceArg::DiracCyclic => IrsSource::DiracCyclic,
            };
            let report = run_dichotomy(&cfg).map_err(harness_err)?;
            let inconsistent = report.inconsistent_rows;
            emit_json(&cli, &report)?;
            Ok(if inconsistent > 0 {
                ExitCode::from(3)
            } else {
                ExitCode::SUCCESS
            })
        }
        Command::Lemmas => {
            let report = run_lemma_suite(&cfg).map_err(harness_err)?;
            let failures = report.conclusion_failures();
            emit_json(&cli, &report)?;
            Ok(if failures > 0 {
                ExitCode::from(2)
            } else {
                ExitCode::SUCCESS
            })
        }
        Command::Radical(args) => {
            if let Some(chain) = args.chain {
                cfg.chain_length = chain;
            }
            let report = run_radical_suite(&cfg).map_err(harness_err)?;
            emit_json(&cli, &report)?;
            Ok(ExitCode::SUCCESS)
        }
        Command::Classify => {
            let radius = cfg.search_radius;
            let rows = match cfg.model {
                ModelSelect::Free => {
                    let m = FreeGroupModel::new(cfg.rank);
                    classify_sweep(&m, &m.standard_generators(), radius, DEFAULT_ORBIT_BUDGET)
                }
                ModelSelect::HalfPlane => {
                    let m = HalfPlaneModel::new();
                    classify_sweep(&m, &m.standard_generators(), radius, DEFAULT_ORBIT_BUDGET)
                }
                ModelSelect::Lamplighter => {
                    let m = LamplighterModel::new();
                    classify_sweep(&m, &m.standard_generators(), radius, DEFAULT_ORBIT_BUDGET)
                }
            }
            .map_err(|e| anyhow!("classification sweep failed: {e}"))?;
            if cli.format == Format::Csv {
                let mut text = String::from("element,class,translation_length,fixed_point_plus,fixed_point_minus\n");
                for r in &rows {
                    let (fp, fm) = r
                        .fixed_points
                        .clone()
                        .map(|(p, q)| (p, q))
                        .unwrap_or_default();
                    let tl = r
                        .translation_length
                        .map(|v| format!("{v}"))
                        .unwrap_or_default();
                    text.push_str(&format!(
                        "{},{},{},{},{}\n",
                        csv_escape(&r.element),
                        r.class,
                        tl,
                        csv_escape(&fp),
                        csv_escape(&fm)
                    ));
                }
                emit_text(&cli, &text)?;
            } else {
                let rows: Vec<ClassifyRowJson> = rows
                    .iter()
                    .map(|r| ClassifyRowJson {
                        element: r.element.clone(),
                        class: r.class.to_string(),
                        translation_length: r.translation_length,
                        fixed_points: r.fixed_points.clone(),
                    })
                    .collect();
                emit_json(&cli, &rows)?;
            }
            Ok(ExitCode::SUCCESS)
        }
        Command::Recurrence(args) => {
            let m = FreeGroupModel::new(cfg.rank);
            let gens = parse_words(&m, &args.subgroup)?;
            let handle = if gens.is_empty() {
                SubgroupHandle::trivial(&m)
            } else {
                SubgroupHandle::from_generators(&m, &gens)
            };
            let g = m
                .parse(&args.conjugator)
                .map_err(|e| anyhow!("bad conjugator: {e}"))?;
            let probe = if args.probe_words.is_empty() {
                ball(cfg.rank, args.probe_radius)
            } else {
                parse_words(&m, &args.probe_words)?
            };
            let verdict =
                recurrence_check(&m, &handle, &g, &probe, cfg.recurrence_bound).map_err(|e| anyhow!("{e}"))?;
            let out = RecurrenceJson {
                subgroup: args.subgroup.clone(),
                conjugator: args.conjugator.clone(),
                probe_size: probe.len(),
                search_bound: cfg.recurrence_bound,
                status: match verdict.status {
                    RecurrenceStatus::Verified(n) => format!("verified({n})"),
                    RecurrenceStatus::RefutedUpTo(n) => format!("refuted-up-to({n})"),
                },
            };
            emit_json(&cli, &out)?;
            Ok(ExitCode::SUCCESS)
        }
        Command::LimitSet(args) => {
            let m = FreeGroupModel::new(cfg.rank);
            let gens = parse_words(&m, &args.subgroup)?;
            let handle = if gens.is_empty() {
                SubgroupHandle::from_generators(&m, &m.standard_generators())
            } else {
                SubgroupHandle::from_generators(&m, &gens)
            };
            let radius = if cfg.limit_radius >= 2 * cfg.depth {
                cfg.limit_radius
            } else {
                2 * cfg.depth
            };
            let approx = limit_set_handle(&m, &handle, cfg.depth, radius)
                .map_err(|e| anyhow!("{e}"))?;
            let prefixes: Vec<String> = match &approx.cylinders {
                CylinderSet::Vertices(set) => {
                    let mut v: Vec<_> = set.iter().cloned().collect();
                    v.sort_by(|a, b| a.shortlex_cmp(b));
                    v.iter().map(|w| w.to_string()).collect()
                }
                CylinderSet::Boundary(set) => set.iter().map(|b| format!("{b:?}")).collect(),
            };
            let out = LimitSetJson {
                depth: approx.depth,
                generation_radius: approx.generation_radius,
                prefixes,
            };
            emit_json(&cli, &out)?;
            Ok(ExitCode::SUCCESS)
        }
        Command::AcylProbe(args) => {
            macro_rules! probe {
                ($m:expr) => {{
                    let m = $m;
                    let gens = m.standard_generators();
                    let report = acylindricity_probe(
                        &m,
                        &gens,
                        args.epsilon,
                        args.r,
                        args.pairs,
                        args.elem_radius,
                        cfg.seed,
                    )
                    .map_err(|e| anyhow!("{e}"))?;
                    AcylJson {
                        epsilon: report.epsilon,
                        r: report.r,
                        n_observed: report.n_observed,
                        pairs_sampled: report.pairs_sampled,
                        ball_size: report.ball_size,
                        witnesses: report
                            .witnesses
                            .iter()
                            .map(|(x, y)| (m.point_string(x), m.point_string(y)))
                            .collect(),
                    }
                }};
            }
            let out = match cfg.model {
                ModelSelect::Free => probe!(FreeGroupModel::new(cfg.rank)),
                ModelSelect::HalfPlane => probe!(HalfPlaneModel::new()),
                ModelSelect::Lamplighter => probe!(LamplighterModel::new()),
            };
            emit_json(&cli, &out)?;
            Ok(ExitCode::SUCCESS)
        }
    }
}

#[derive(Serialize)]
struct ClassifyRowJson {
    element: String,
    class: String,
    translation_length: Option<f64>,
    fixed_points: Option<(String, String)>,
}

#[derive(Serialize)]
struct RecurrenceJson {
    subgroup: Vec<String>,
    conjugator: String,
    probe_size: usize,
    search_bound: usize,
    status: String,
}

#[derive(Serialize)]
struct LimitSetJson {
    depth: usize,
    generation_radius: usize,
    prefixes: Vec<String>,
}

#[derive(Serialize)]
struct AcylJson {
    epsilon: f64,
    r: f64,
    n_observed: usize,
    pairs_sampled: usize,
    ball_size: usize,
    witnesses: Vec<(String, String)>,
}

fn parse_words(m: &FreeGroupModel, inputs: &[String]) -> Result<Vec<hypgg::Word>> {
    inputs
        .iter()
        .filter(|s| !s.trim().is_empty())
        .map(|s| m.parse(s).map_err(|e| anyhow!("bad word {s:?}: {e}")))
        .collect()
}

fn csv_escape(s: &str) -> String {
    if s.contains(',') || s.contains('"') {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

/// Serialize with sorted keys (via the Value round-trip) and a trailing
/// newline, so identical configurations produce byte-identical outputs.
fn emit_json<T: Serialize>(cli: &Cli, value: &T) -> Result<()> {
    let value = serde_json::to_value(value)?;
    let mut text = serde_json::to_string_pretty(&value)?;
    text.push('\n');
    emit_text(cli, &text)
}

fn emit_text(cli: &Cli, text: &str) -> Result<()> {
    match &cli.out {
        Some(path) => {
            fs::write(path, text.as_bytes())
                .with_context(|| format!("writing {}", path.display()))?;
        }
        None => {
            std::io::stdout().write_all(text.as_bytes())?;
        }
    }
    Ok(())
}

fn harness_err(e: HarnessError) -> anyhow::Error {
    anyhow!("{e}")
}
