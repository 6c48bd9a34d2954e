//! Shared builders for the benchmark targets.

use fflgen_core::extraction::{ExtractedLabel, FflLabel, ReportExtraction, SentenceExtraction};
use fflgen_core::lexicon::Lexicon;
use fflgen_core::patterndb::{BuildOptions, PatternDatabase};

/// A database shaped like the production one: 924 distinct patterns over a
/// 457-label space with 5,246 distinct sentences.
pub fn production_scale_database() -> PatternDatabase {
    let lexicon = Lexicon::demo();
    let core_ids: Vec<String> = lexicon.findings.iter().map(|f| f.id.clone()).collect();
    let severities =
        ["mild", "moderate", "severe", "marked", "minimal", "extensive", "trace", "subtle"];
    let locations = ["base", "apex", "lower lobe", "upper lobe", "perihilar", "retrocardiac"];
    let keys: Vec<String> = (0..457)
        .map(|i| {
            let core = &core_ids[i % core_ids.len()];
            let combo = i / core_ids.len();
            format!(
                "<anatomical finding|yes|{core}|location:{}|severity:{}>",
                locations[combo % locations.len()],
                severities[combo / locations.len() % severities.len()],
            )
        })
        .collect();

    let mut corpus = Vec::with_capacity(924);
    for k in 0..924usize {
        let (size, stride, base) = match k {
            0..=456 => (6, 76, k),
            457..=625 => (6, 70, k - 457),
            _ => (5, 91, k - 626),
        };
        let labels: Vec<usize> = (0..size).map(|j| (base + j * stride) % 457).collect();
        let sentences: Vec<SentenceExtraction> = labels
            .iter()
            .enumerate()
            .map(|(j, &label)| SentenceExtraction {
                report_id: format!("r{k:03}"),
                sentence_index: j,
                text: format!("pattern {k} sentence about label {label}."),
                labels: vec![ExtractedLabel {
                    label: FflLabel::parse(&keys[label]).expect("synthetic key parses"),
                    tokens: vec![1],
                }],
                audit: Default::default(),
            })
            .collect();
        corpus.push(ReportExtraction {
            report_id: format!("r{k:03}"),
            sentences,
        });
    }
    PatternDatabase::build(&corpus, &lexicon, BuildOptions::default())
        .expect("synthetic corpus builds")
}
