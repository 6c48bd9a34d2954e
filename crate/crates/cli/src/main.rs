//! `fflgen`: the finding-label report generation pipeline.
//!
//! Every stage is exposed as a subcommand; `pipeline` chains them end to
//! end (extract -> build-db -> calibrate -> predict-pattern -> generate ->
//! evaluate) with deterministic, byte-stable artifacts.

mod commands;
mod jsonio;

use std::path::PathBuf;

use anyhow::Result;
use clap::{Args, Parser, Subcommand};

#[derive(Parser)]
#[command(name = "fflgen", version, about = "Finding-label report generation pipeline")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Lexicon maintenance.
    Lexicon {
        #[command(subcommand)]
        command: LexiconCommand,
    },
    /// Parse raw reports into the tab-separated dependency format.
    Parse(ParseArgs),
    /// Extract fine finding labels from reports.
    Extract(ExtractArgs),
    /// Build the pattern -> ranked report database.
    BuildDb(BuildDbArgs),
    /// Pattern database inspection.
    Db {
        #[command(subcommand)]
        command: DbCommand,
    },
    /// Calibrate per-label operating points from classifier scores.
    Calibrate(CalibrateArgs),
    /// Threshold score rows into predicted label patterns.
    PredictPattern(PredictArgs),
    /// Generate reports for predicted patterns.
    Generate(GenerateArgs),
    /// Score generated reports against references.
    Evaluate(EvaluateArgs),
    /// Audit extractions against gold annotations.
    Audit(AuditArgs),
    /// Run every stage end to end.
    Pipeline(PipelineArgs),
}

#[derive(Subcommand)]
enum LexiconCommand {
    /// Validate a lexicon file; exits nonzero with diagnostics on violation.
    Validate { path: PathBuf },
}

#[derive(Subcommand)]
enum DbCommand {
    /// Print pattern, report, sentence and label counts.
    Stats { path: PathBuf },
}

#[derive(Args)]
struct ParseArgs {
    /// Report file or directory of .txt reports.
    #[arg(long = "in")]
    input: PathBuf,
    /// Lexicon file (the heuristic parser is vocabulary-driven).
    #[arg(long)]
    lexicon: PathBuf,
    /// Output parse file (tab-separated).
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct ExtractArgs {
    /// Report file or directory of .txt reports.
    #[arg(long)]
    reports: PathBuf,
    /// Lexicon file.
    #[arg(long)]
    lexicon: PathBuf,
    /// Optional externally parsed sentences (tab-separated format); when
    /// given, reports are only consulted for ids absent from the parse file.
    #[arg(long)]
    parsed: Option<PathBuf>,
    /// Output labels file (one JSON record per sentence).
    #[arg(long)]
    out: PathBuf,
    /// Worker threads for per-report extraction.
    #[arg(long)]
    jobs: Option<usize>,
}

#[derive(Args)]
struct BuildDbArgs {
    /// Labels file produced by `extract`.
    #[arg(long)]
    labels: PathBuf,
    /// Optional report directory; when given, sentence text is re-read from
    /// the reports instead of the labels file.
    #[arg(long)]
    reports: Option<PathBuf>,
    /// Minimum supporting reports for a label to enter the label space.
    #[arg(long, default_value_t = 1)]
    min_support: u32,
    /// Treat all sentences as relevant, not only label-bearing ones.
    #[arg(long)]
    all_sentences: bool,
    /// Lexicon file (criticality ranks drive the label weights).
    #[arg(long)]
    lexicon: PathBuf,
    /// Output database file.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct CalibrateArgs {
    /// Score CSV: header `image_id,<label keys...>`, one row per image.
    #[arg(long)]
    scores: PathBuf,
    /// Truth CSV with the same shape and {0,1} values.
    #[arg(long)]
    truth: PathBuf,
    /// Output thresholds file (JSON).
    #[arg(long)]
    out: PathBuf,
    /// Average F1 over labels instead of images.
    #[arg(long)]
    per_label: bool,
}

#[derive(Args)]
struct PredictArgs {
    /// Score CSV to threshold.
    #[arg(long)]
    scores: PathBuf,
    /// Thresholds from `calibrate`.
    #[arg(long)]
    thresholds: PathBuf,
    /// Optional CFL-model score CSV to merge in.
    #[arg(long)]
    cfl_scores: Option<PathBuf>,
    /// Thresholds for the CFL scores (defaults to --thresholds).
    #[arg(long)]
    cfl_thresholds: Option<PathBuf>,
    /// Output patterns file (one JSON record per image).
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct GenerateArgs {
    /// Patterns file from `predict-pattern`.
    #[arg(long)]
    patterns: PathBuf,
    /// Pattern database from `build-db`.
    #[arg(long)]
    db: PathBuf,
    /// Output directory (one .txt report per image).
    #[arg(long)]
    out: PathBuf,
    /// Also write per-image match explanations (pattern, distance, pruning).
    #[arg(long)]
    explain: bool,
    /// Keep sentences whose only unmatched labels are negative findings.
    #[arg(long)]
    keep_negatives: bool,
}

#[derive(Args)]
struct EvaluateArgs {
    /// Directory of generated reports.
    #[arg(long)]
    generated: PathBuf,
    /// Directory of reference reports (paired by file stem).
    #[arg(long)]
    reference: PathBuf,
    /// Comma-separated metric list.
    #[arg(long, default_value = "bleu,rouge,meteor")]
    metrics: String,
    /// Output metrics file (JSON).
    #[arg(long)]
    out: PathBuf,
    /// Smooth zero higher-order BLEU precisions.
    #[arg(long)]
    smooth: bool,
}

#[derive(Args)]
struct AuditArgs {
    /// Labels file produced by `extract`.
    #[arg(long)]
    labels: PathBuf,
    /// Gold annotations (one JSON record per sentence).
    #[arg(long)]
    gold: PathBuf,
}

#[derive(Args)]
struct PipelineArgs {
    /// JSON config file; explicit flags win over config values.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    lexicon: Option<PathBuf>,
    #[arg(long)]
    reports: Option<PathBuf>,
    /// Optional externally parsed sentences.
    #[arg(long)]
    parsed: Option<PathBuf>,
    #[arg(long)]
    scores: Option<PathBuf>,
    #[arg(long)]
    truth: Option<PathBuf>,
    /// Reference reports for evaluation (defaults to --reports).
    #[arg(long)]
    refs: Option<PathBuf>,
    /// Output directory for all artifacts.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    min_support: Option<u32>,
    #[arg(long)]
    all_sentences: bool,
    #[arg(long)]
    per_label: bool,
    #[arg(long)]
    keep_negatives: bool,
    #[arg(long)]
    smooth: bool,
    /// Worker threads for intra-stage parallelism.
    #[arg(long)]
    jobs: Option<usize>,
}

fn main() -> Result<()> {
    let cli = Cli::parse();
    match cli.command {
        Command::Lexicon {
            command: LexiconCommand::Validate { path },
        } => commands::lexicon_validate(&path),
        Command::Parse(args) => commands::parse(&args.input, &args.lexicon, &args.out),
        Command::Extract(args) => commands::extract(
            &args.reports,
            &args.lexicon,
            args.parsed.as_deref(),
            &args.out,
            args.jobs,
        ),
        Command::BuildDb(args) => commands::build_db(
            &args.labels,
            args.reports.as_deref(),
            &args.lexicon,
            args.min_support,
            args.all_sentences,
            &args.out,
        ),
        Command::Db {
            command: DbCommand::Stats { path },
        } => commands::db_stats(&path),
        Command::Calibrate(args) => {
            commands::calibrate(&args.scores, &args.truth, args.per_label, &args.out)
        }
        Command::PredictPattern(args) => commands::predict_pattern(
            &args.scores,
            &args.thresholds,
            args.cfl_scores.as_deref(),
            args.cfl_thresholds.as_deref(),
            &args.out,
        ),
        Command::Generate(args) => commands::generate(
            &args.patterns,
            &args.db,
            &args.out,
            args.explain,
            args.keep_negatives,
        ),
        Command::Evaluate(args) => commands::evaluate(
            &args.generated,
            &args.reference,
            &args.metrics,
            args.smooth,
            &args.out,
        ),
        Command::Audit(args) => commands::audit(&args.labels, &args.gold),
        Command::Pipeline(args) => {
            let overrides = commands::PipelineOverrides {
                lexicon: args.lexicon,
                reports: args.reports,
                parsed: args.parsed,
                scores: args.scores,
                truth: args.truth,
                refs: args.refs,
                out: args.out,
                min_support: args.min_support,
                all_sentences: args.all_sentences,
                per_label: args.per_label,
                keep_negatives: args.keep_negatives,
                smooth: args.smooth,
                jobs: args.jobs,
            };
            commands::pipeline(args.config.as_deref(), overrides)
        }
    }
}
