//! Subcommand implementations.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use serde::{Deserialize, Serialize};

use fflgen_core::calibration::{
    self, CalibrateOptions, OperatingPoints, ScoreMatrix,
};
use fflgen_core::extraction::{
    self, FflLabel, ReportExtraction, SentenceExtraction,
};
use fflgen_core::generator::{self, AssembleOptions};
use fflgen_core::lexicon;
use fflgen_core::metrics::{self, GoldRecord};
use fflgen_core::parsing;
use fflgen_core::patterndb::{self, BuildOptions, PatternDatabase};

use crate::jsonio;

pub fn lexicon_validate(path: &Path) -> Result<()> {
    let lexicon = lexicon::load_lexicon(path)
        .with_context(|| format!("lexicon {} is invalid", path.display()))?;
    println!(
        "ok: {} findings, {} modifier categories, {} negation seeds (version {})",
        lexicon.findings.len(),
        lexicon.modifiers.len(),
        lexicon.negation_seeds.len(),
        lexicon.version
    );
    Ok(())
}

pub fn parse(input: &Path, lexicon_path: &Path, out: &Path) -> Result<()> {
    let lexicon = lexicon::load_lexicon(lexicon_path)?;
    let reports = jsonio::read_reports(input)?;
    let mut sentences = Vec::new();
    for (id, text) in &reports {
        let region = extraction::reportable_region(text);
        for (i, raw) in parsing::segment_sentences(&region).iter().enumerate() {
            sentences.push(parsing::fallback_parse(id, i, raw, &lexicon));
        }
    }
    fs::write(out, parsing::write_tsv(&sentences))
        .with_context(|| format!("writing {}", out.display()))?;
    println!("parsed {} reports into {} sentences", reports.len(), sentences.len());
    Ok(())
}

pub fn extract(
    reports_path: &Path,
    lexicon_path: &Path,
    parsed: Option<&Path>,
    out: &Path,
    jobs: Option<usize>,
) -> Result<()> {
    configure_jobs(jobs);
    let lexicon = lexicon::load_lexicon(lexicon_path)?;
    let mut extractions: Vec<ReportExtraction> = Vec::new();
    let mut parsed_ids: Vec<String> = Vec::new();
    if let Some(parsed_path) = parsed {
        let sentences = parsing::ingest_parse(parsed_path)?;
        let parsed_reports = extraction::extract_parsed(&sentences, &lexicon);
        parsed_ids = parsed_reports.iter().map(|r| r.report_id.clone()).collect();
        extractions.extend(parsed_reports);
    }
    let reports = jsonio::read_reports(reports_path)?;
    let remaining: Vec<(String, String)> = reports
        .into_iter()
        .filter(|(id, _)| !parsed_ids.contains(id))
        .collect();
    extractions.extend(extraction::extract_corpus(&remaining, &lexicon));
    extractions.sort_by(|a, b| a.report_id.cmp(&b.report_id));

    let mut records: Vec<&SentenceExtraction> = Vec::new();
    for report in &extractions {
        records.extend(report.sentences.iter());
    }
    jsonio::write_jsonl(out, &records)?;
    let labels: usize = records.iter().map(|s| s.labels.len()).sum();
    println!(
        "extracted {} labels from {} sentences across {} reports",
        labels,
        records.len(),
        extractions.len()
    );
    Ok(())
}

pub fn build_db(
    labels_path: &Path,
    reports_path: Option<&Path>,
    lexicon_path: &Path,
    min_support: u32,
    all_sentences: bool,
    out: &Path,
) -> Result<()> {
    let lexicon = lexicon::load_lexicon(lexicon_path)?;
    let mut sentences: Vec<SentenceExtraction> = jsonio::read_jsonl(labels_path)?;

    // Labels files may omit sentence text; recover it from the reports.
    if sentences.iter().any(|s| s.text.is_empty()) {
        let reports_path = reports_path
            .context("labels file has empty sentence text; --reports is required to recover it")?;
        let reports = jsonio::read_reports(reports_path)?;
        let mut segmented: BTreeMap<String, Vec<String>> = BTreeMap::new();
        for (id, text) in &reports {
            let region = extraction::reportable_region(text);
            segmented.insert(id.clone(), parsing::segment_sentences(&region));
        }
        for sentence in sentences.iter_mut().filter(|s| s.text.is_empty()) {
            let report = segmented
                .get(&sentence.report_id)
                .with_context(|| format!("no report file for id {:?}", sentence.report_id))?;
            sentence.text = report
                .get(sentence.sentence_index)
                .with_context(|| {
                    format!(
                        "report {:?} has no sentence {}",
                        sentence.report_id, sentence.sentence_index
                    )
                })?
                .clone();
        }
    }

    let corpus = extraction::group_extractions(sentences);
    let db = PatternDatabase::build(
        &corpus,
        &lexicon,
        BuildOptions {
            min_support,
            all_sentences,
        },
    )?;
    patterndb::save_db(&db, out)?;
    let stats = db.stats();
    println!(
        "built {} patterns over {} reports ({} distinct sentences, {} labels)",
        stats.patterns, stats.reports, stats.distinct_sentences, stats.labels
    );
    Ok(())
}

pub fn db_stats(path: &Path) -> Result<()> {
    let db = patterndb::load_db(path)?;
    let stats = db.stats();
    println!("patterns: {}", stats.patterns);
    println!("reports: {}", stats.reports);
    println!("distinct sentences: {}", stats.distinct_sentences);
    println!("labels: {}", stats.labels);
    Ok(())
}

pub fn calibrate(scores_path: &Path, truth_path: &Path, per_label: bool, out: &Path) -> Result<()> {
    let scores = ScoreMatrix::read_csv(scores_path)?;
    let truth_matrix = ScoreMatrix::read_csv(truth_path)?;
    if truth_matrix.labels != scores.labels {
        bail!("score and truth files disagree on label columns");
    }
    let truth = truth_matrix.truth_rows()?;
    let points = calibration::calibrate(&scores, &truth, CalibrateOptions { per_label_f1: per_label })?;
    jsonio::write_json_pretty(out, &points)?;
    println!(
        "calibrated {} labels, achieved loss {:.6}",
        points.labels.len(),
        points.achieved_loss
    );
    Ok(())
}

/// One predicted pattern: the set label keys for an image.
#[derive(Debug, Serialize, Deserialize)]
pub struct PatternRecord {
    pub image_id: String,
    pub labels: Vec<String>,
}

fn threshold_keys(scores: &ScoreMatrix, points: &OperatingPoints) -> Result<Vec<PatternRecord>> {
    let mut records = Vec::with_capacity(scores.rows.len());
    for (image_id, row) in scores.image_ids.iter().zip(&scores.rows) {
        let mut labels = Vec::new();
        for (label, &value) in scores.labels.iter().zip(row) {
            let threshold = points
                .threshold_for(label)
                .with_context(|| format!("no threshold for label {label:?}"))?;
            if value >= threshold {
                labels.push(label.clone());
            }
        }
        labels.sort();
        records.push(PatternRecord {
            image_id: image_id.clone(),
            labels,
        });
    }
    Ok(records)
}

pub fn predict_pattern(
    scores_path: &Path,
    thresholds_path: &Path,
    cfl_scores: Option<&Path>,
    cfl_thresholds: Option<&Path>,
    out: &Path,
) -> Result<()> {
    let scores = ScoreMatrix::read_csv(scores_path)?;
    let points: OperatingPoints = serde_json::from_str(
        &fs::read_to_string(thresholds_path)
            .with_context(|| format!("reading {}", thresholds_path.display()))?,
    )?;
    let mut records = threshold_keys(&scores, &points)?;

    if let Some(cfl_path) = cfl_scores {
        let cfl = ScoreMatrix::read_csv(cfl_path)?;
        let cfl_points: OperatingPoints = match cfl_thresholds {
            Some(p) => serde_json::from_str(&fs::read_to_string(p)?)?,
            None => points.clone(),
        };
        let cfl_records = threshold_keys(&cfl, &cfl_points)?;
        let by_image: BTreeMap<&str, &PatternRecord> =
            cfl_records.iter().map(|r| (r.image_id.as_str(), r)).collect();
        for record in records.iter_mut() {
            if let Some(cfl_record) = by_image.get(record.image_id.as_str()) {
                record.labels =
                    calibration::merge_label_keys(&cfl_record.labels, &record.labels);
            }
        }
    }

    jsonio::write_jsonl(out, &records)?;
    println!("predicted {} patterns", records.len());
    Ok(())
}

#[derive(Debug, Serialize)]
struct Explanation {
    image_id: String,
    matched_pattern: Vec<String>,
    distance: f64,
    source_report_id: String,
    mapping: MappingSummary,
    pruned: Vec<PrunedExplanation>,
}

#[derive(Debug, Serialize)]
struct MappingSummary {
    exact: usize,
    nearest: usize,
    ignored: usize,
}

#[derive(Debug, Serialize)]
struct PrunedExplanation {
    sentence: String,
    missing: Vec<String>,
}

pub fn generate(
    patterns_path: &Path,
    db_path: &Path,
    out_dir: &Path,
    explain: bool,
    keep_negatives: bool,
) -> Result<()> {
    let db = patterndb::load_db(db_path)?;
    let records: Vec<PatternRecord> = jsonio::read_jsonl(patterns_path)?;
    fs::create_dir_all(out_dir)
        .with_context(|| format!("creating {}", out_dir.display()))?;
    let options = AssembleOptions {
        keep_unmatched_negatives: keep_negatives,
    };

    for record in &records {
        if record.image_id.contains(['/', '\\']) || record.image_id.is_empty() {
            bail!("image id {:?} is not usable as a file name", record.image_id);
        }
        let labels: Vec<FflLabel> = record
            .labels
            .iter()
            .map(|k| {
                FflLabel::parse(k)
                    .with_context(|| format!("image {:?}: bad label key", record.image_id))
            })
            .collect::<Result<_>>()?;
        let (query, stats) = patterndb::report_to_pattern(&labels, &db.space);
        let result = generator::assemble_report(&query, &db, options)
            .with_context(|| format!("assembling report for image {:?}", record.image_id))?;

        let mut text = result.assembled.join("\n");
        if !text.is_empty() {
            text.push('\n');
        }
        fs::write(out_dir.join(format!("{}.txt", record.image_id)), text)?;

        if explain {
            let explanation = Explanation {
                image_id: record.image_id.clone(),
                matched_pattern: result
                    .matched_pattern
                    .ones()
                    .map(|i| db.space.keys[i].clone())
                    .collect(),
                distance: result.distance,
                source_report_id: result.source_report_id.clone(),
                mapping: MappingSummary {
                    exact: stats.exact,
                    nearest: stats.nearest,
                    ignored: stats.ignored,
                },
                pruned: result
                    .pruned
                    .iter()
                    .map(|p| PrunedExplanation {
                        sentence: p.text.clone(),
                        missing: p.missing.clone(),
                    })
                    .collect(),
            };
            jsonio::write_json_pretty(
                &out_dir.join(format!("{}.explain.json", record.image_id)),
                &explanation,
            )?;
        }
    }
    println!("generated {} reports under {}", records.len(), out_dir.display());
    Ok(())
}

pub fn evaluate(
    generated: &Path,
    reference: &Path,
    metric_list: &str,
    smooth: bool,
    out: &Path,
) -> Result<()> {
    let mut want_bleu = false;
    let mut want_rouge = false;
    let mut want_meteor = false;
    for metric in metric_list.split(',').map(str::trim).filter(|m| !m.is_empty()) {
        match metric {
            "bleu" => want_bleu = true,
            "rouge" | "rouge-l" => want_rouge = true,
            "meteor" => want_meteor = true,
            other => bail!("unknown metric {other:?} (expected bleu, rouge, meteor)"),
        }
    }

    let generated_reports = jsonio::read_reports(generated)?;
    let references = jsonio::read_reports(reference)?;
    let by_id: BTreeMap<&str, &str> =
        references.iter().map(|(id, text)| (id.as_str(), text.as_str())).collect();
    let mut triples = Vec::new();
    for (id, text) in &generated_reports {
        let reference_text = by_id
            .get(id.as_str())
            .with_context(|| format!("no reference report for {id:?}"))?;
        triples.push((id.clone(), text.clone(), reference_text.to_string()));
    }
    triples.sort_by(|a, b| a.0.cmp(&b.0));
    let report = metrics::evaluate_corpus(&triples, smooth);

    // Emit only the requested metric families; map keys sort, so the JSON
    // image is deterministic.
    let mut corpus = serde_json::Map::new();
    if want_bleu {
        corpus.insert("bleu".into(), serde_json::to_value(report.corpus_bleu)?);
    }
    if want_rouge {
        corpus.insert("rouge_l".into(), serde_json::to_value(report.mean_rouge_l)?);
    }
    if want_meteor {
        corpus.insert("meteor".into(), serde_json::to_value(report.mean_meteor)?);
    }
    let mut pairs = Vec::new();
    for pair in &report.pairs {
        let mut entry = serde_json::Map::new();
        entry.insert("id".into(), serde_json::Value::String(pair.id.clone()));
        if want_bleu {
            entry.insert("bleu".into(), serde_json::to_value(pair.bleu)?);
        }
        if want_rouge {
            entry.insert("rouge_l".into(), serde_json::to_value(pair.rouge_l)?);
        }
        if want_meteor {
            entry.insert("meteor".into(), serde_json::to_value(pair.meteor)?);
        }
        pairs.push(serde_json::Value::Object(entry));
    }
    let document = serde_json::json!({ "corpus": corpus, "pairs": pairs });
    jsonio::write_json_pretty(out, &document)?;
    println!("evaluated {} report pairs", report.pairs.len());
    Ok(())
}

pub fn audit(labels_path: &Path, gold_path: &Path) -> Result<()> {
    let sentences: Vec<SentenceExtraction> = jsonio::read_jsonl(labels_path)?;
    let gold: Vec<GoldRecord> = jsonio::read_jsonl(gold_path)?;
    let audit = metrics::audit_extraction(&sentences, &gold)?;
    println!("sentences analyzed: {}", audit.sentences_analyzed);
    println!("labels extracted: {}", audit.labels_extracted);
    println!("missed findings: {}", audit.missed_findings);
    println!("overcall (negated findings): {}", audit.overcalls);
    println!(
        "incorrect association of modifiers: {}",
        audit.incorrect_modifier_associations
    );
    println!("missed modifiers: {}", audit.missed_modifiers);
    println!("overcall rate: {:.2}%", audit.overcall_rate() * 100.0);
    println!(
        "modifier association precision: {:.2}%",
        audit.modifier_precision() * 100.0
    );
    Ok(())
}

/// Pipeline configuration; a JSON file may provide any field and explicit
/// flags win.
#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PipelineConfig {
    pub lexicon: Option<PathBuf>,
    pub reports: Option<PathBuf>,
    pub parsed: Option<PathBuf>,
    pub scores: Option<PathBuf>,
    pub truth: Option<PathBuf>,
    pub refs: Option<PathBuf>,
    pub out: Option<PathBuf>,
    pub min_support: Option<u32>,
    pub all_sentences: Option<bool>,
    pub per_label: Option<bool>,
    pub keep_negatives: Option<bool>,
    pub smooth: Option<bool>,
    pub jobs: Option<usize>,
}

#[derive(Debug, Default)]
pub struct PipelineOverrides {
    pub lexicon: Option<PathBuf>,
    pub reports: Option<PathBuf>,
    pub parsed: Option<PathBuf>,
    pub scores: Option<PathBuf>,
    pub truth: Option<PathBuf>,
    pub refs: Option<PathBuf>,
    pub out: Option<PathBuf>,
    pub min_support: Option<u32>,
    pub all_sentences: bool,
    pub per_label: bool,
    pub keep_negatives: bool,
    pub smooth: bool,
    pub jobs: Option<usize>,
}

pub fn pipeline(config_path: Option<&Path>, overrides: PipelineOverrides) -> Result<()> {
    let config: PipelineConfig = match config_path {
        Some(path) => serde_json::from_str(
            &fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?,
        )
        .with_context(|| format!("config {}", path.display()))?,
        None => PipelineConfig::default(),
    };

    let lexicon_path = overrides
        .lexicon
        .or(config.lexicon)
        .context("pipeline needs --lexicon (or a config entry)")?;
    let reports = overrides
        .reports
        .or(config.reports)
        .context("pipeline needs --reports (or a config entry)")?;
    let parsed = overrides.parsed.or(config.parsed);
    let scores = overrides
        .scores
        .or(config.scores)
        .context("pipeline needs --scores (or a config entry)")?;
    let truth = overrides
        .truth
        .or(config.truth)
        .context("pipeline needs --truth (or a config entry)")?;
    let refs = overrides.refs.or(config.refs).unwrap_or_else(|| reports.clone());
    let out = overrides
        .out
        .or(config.out)
        .context("pipeline needs --out (or a config entry)")?;
    let min_support = overrides.min_support.or(config.min_support).unwrap_or(1);
    if min_support < 1 {
        bail!("--min-support must be at least 1");
    }
    let all_sentences = overrides.all_sentences || config.all_sentences.unwrap_or(false);
    let per_label = overrides.per_label || config.per_label.unwrap_or(false);
    let keep_negatives = overrides.keep_negatives || config.keep_negatives.unwrap_or(false);
    let smooth = overrides.smooth || config.smooth.unwrap_or(false);
    let jobs = overrides.jobs.or(config.jobs);

    for (name, path) in [
        ("lexicon", &lexicon_path),
        ("reports", &reports),
        ("scores", &scores),
        ("truth", &truth),
        ("refs", &refs),
    ] {
        if !path.exists() {
            bail!("{name} path {} does not exist", path.display());
        }
    }
    if let Some(parsed) = &parsed {
        if !parsed.exists() {
            bail!("parsed path {} does not exist", parsed.display());
        }
    }

    fs::create_dir_all(&out).with_context(|| format!("creating {}", out.display()))?;
    let labels_file = out.join("labels.jsonl");
    let db_file = out.join("db.bin");
    let thresholds_file = out.join("thresholds.json");
    let patterns_file = out.join("patterns.jsonl");
    let generated_dir = out.join("generated");
    let metrics_file = out.join("metrics.json");

    let stage = |name: &'static str, result: Result<()>| -> Result<()> {
        result.with_context(|| {
            format!("stage {name} failed; artifacts under {} may be partial", out.display())
        })
    };

    eprintln!("[1/6] extract");
    stage(
        "extract",
        extract(&reports, &lexicon_path, parsed.as_deref(), &labels_file, jobs),
    )?;
    eprintln!("[2/6] build-db");
    stage(
        "build-db",
        build_db(&labels_file, Some(&reports), &lexicon_path, min_support, all_sentences, &db_file),
    )?;
    eprintln!("[3/6] calibrate");
    stage("calibrate", calibrate(&scores, &truth, per_label, &thresholds_file))?;
    eprintln!("[4/6] predict-pattern");
    stage(
        "predict-pattern",
        predict_pattern(&scores, &thresholds_file, None, None, &patterns_file),
    )?;
    eprintln!("[5/6] generate");
    stage(
        "generate",
        generate(&patterns_file, &db_file, &generated_dir, true, keep_negatives),
    )?;
    eprintln!("[6/6] evaluate");
    stage(
        "evaluate",
        evaluate(&generated_dir, &refs, "bleu,rouge,meteor", smooth, &metrics_file),
    )?;
    println!("pipeline complete: artifacts under {}", out.display());
    Ok(())
}

fn configure_jobs(jobs: Option<usize>) {
    if let Some(n) = jobs {
        // Ignore a second initialization (e.g. extract inside pipeline).
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    }
}
