//! Text-overlap metrics (BLEU, ROUGE-L, METEOR-lite) and the
//! extraction-accuracy audit.
//!
//! Tokenization everywhere is lowercase word splitting on non-alphanumeric
//! characters. METEOR-lite matches unigrams exactly and then through a small
//! suffix-stripping stemmer; it uses no synonym resource, so its absolute
//! values are not comparable to METEOR scores computed with one.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::extraction::{FflLabel, SentenceExtraction};
use crate::text::word_tokens;

const ROUGE_BETA: f64 = 1.2;

#[derive(Debug, Error)]
pub enum AuditError {
    #[error("gold record {report_id:?}#{sentence_index} has no matching extraction")]
    Alignment {
        report_id: String,
        sentence_index: usize,
    },
    #[error("gold label cannot be parsed: {0}")]
    BadLabel(String),
}

/// Modified n-gram precision numerator/denominator for one order.
fn ngram_counts(candidate: &[String], references: &[Vec<String>], n: usize) -> (u64, u64) {
    if candidate.len() < n {
        return (0, 0);
    }
    let mut cand: HashMap<&[String], u64> = HashMap::new();
    for window in candidate.windows(n) {
        *cand.entry(window).or_insert(0) += 1;
    }
    let mut clipped = 0u64;
    for (gram, count) in &cand {
        let best_ref = references
            .iter()
            .map(|r| r.windows(n).filter(|w| w == gram).count() as u64)
            .max()
            .unwrap_or(0);
        clipped += (*count).min(best_ref);
    }
    (clipped, (candidate.len() - n + 1) as u64)
}

/// Reference length closest to the candidate length (shorter wins ties).
fn closest_ref_len(c: usize, references: &[Vec<String>]) -> usize {
    references
        .iter()
        .map(|r| r.len())
        .min_by_key(|&r| (r.abs_diff(c), r))
        .unwrap_or(0)
}

fn bleu_from_counts(counts: &[(u64, u64)], c: usize, r: usize, smooth: bool) -> f64 {
    if c == 0 {
        return 0.0;
    }
    let mut log_sum = 0.0;
    for (k, &(num, den)) in counts.iter().enumerate() {
        if den == 0 {
            return 0.0;
        }
        let p = if num == 0 {
            if smooth && k > 0 {
                // Add-one smoothing for the higher orders.
                1.0 / (den + 1) as f64
            } else {
                return 0.0;
            }
        } else {
            num as f64 / den as f64
        };
        log_sum += p.ln();
    }
    let brevity = if c > r {
        1.0
    } else {
        (1.0 - r as f64 / c as f64).exp()
    };
    brevity * (log_sum / counts.len() as f64).exp()
}

/// BLEU-n: geometric mean of modified 1..n-gram precisions with the brevity
/// penalty. An empty candidate scores 0.
pub fn bleu_n(candidate: &str, references: &[&str], n: usize, smooth: bool) -> f64 {
    assert!((1..=4).contains(&n), "BLEU order must be 1..=4");
    let cand = word_tokens(candidate);
    let refs: Vec<Vec<String>> = references.iter().map(|r| word_tokens(r)).collect();
    if cand.is_empty() || refs.iter().all(|r| r.is_empty()) {
        return 0.0;
    }
    let counts: Vec<(u64, u64)> = (1..=n).map(|k| ngram_counts(&cand, &refs, k)).collect();
    bleu_from_counts(&counts, cand.len(), closest_ref_len(cand.len(), &refs), smooth)
}

/// Corpus-level BLEU-n: n-gram counts aggregate over all pairs before the
/// ratio is taken.
pub fn corpus_bleu(pairs: &[(String, String)], n: usize, smooth: bool) -> f64 {
    assert!((1..=4).contains(&n), "BLEU order must be 1..=4");
    let mut counts = vec![(0u64, 0u64); n];
    let mut c_total = 0usize;
    let mut r_total = 0usize;
    for (candidate, reference) in pairs {
        let cand = word_tokens(candidate);
        let refs = vec![word_tokens(reference)];
        if cand.is_empty() {
            continue;
        }
        for (k, slot) in counts.iter_mut().enumerate() {
            let (num, den) = ngram_counts(&cand, &refs, k + 1);
            slot.0 += num;
            slot.1 += den;
        }
        c_total += cand.len();
        r_total += closest_ref_len(cand.len(), &refs);
    }
    bleu_from_counts(&counts, c_total, r_total, smooth)
}

fn lcs_len(a: &[String], b: &[String]) -> usize {
    let mut prev = vec![0usize; b.len() + 1];
    let mut current = vec![0usize; b.len() + 1];
    for x in a {
        for (j, y) in b.iter().enumerate() {
            current[j + 1] = if x == y {
                prev[j] + 1
            } else {
                prev[j + 1].max(current[j])
            };
        }
        std::mem::swap(&mut prev, &mut current);
    }
    prev[b.len()]
}

/// ROUGE-L: longest-common-subsequence F-measure with beta = 1.2.
pub fn rouge_l(candidate: &str, reference: &str) -> f64 {
    let cand = word_tokens(candidate);
    let refs = word_tokens(reference);
    if cand.is_empty() || refs.is_empty() {
        return 0.0;
    }
    let lcs = lcs_len(&cand, &refs) as f64;
    if lcs == 0.0 {
        return 0.0;
    }
    let recall = lcs / refs.len() as f64;
    let precision = lcs / cand.len() as f64;
    let beta2 = ROUGE_BETA * ROUGE_BETA;
    (1.0 + beta2) * recall * precision / (recall + beta2 * precision)
}

/// Tiny suffix-stripping stemmer for METEOR-lite's second matching pass.
fn stem(word: &str) -> String {
    if word.len() > 4 {
        for suffix in ["ing", "ed", "es", "ly", "s"] {
            if let Some(base) = word.strip_suffix(suffix) {
                if base.len() >= 3 {
                    return base.to_string();
                }
            }
        }
    }
    word.to_string()
}

/// METEOR-lite: recall-weighted (9:1) unigram harmonic mean with the
/// fragmentation penalty `0.5 * (chunks/matches)^3`. Identical token
/// sequences score exactly 1 (one chunk covering everything).
pub fn meteor_lite(candidate: &str, reference: &str) -> f64 {
    let cand = word_tokens(candidate);
    let refs = word_tokens(reference);
    if cand.is_empty() || refs.is_empty() {
        return 0.0;
    }
    if cand == refs {
        return 1.0;
    }

    // Greedy two-pass alignment: exact matches first, then stem matches.
    let mut ref_taken = vec![false; refs.len()];
    let mut alignment: Vec<Option<usize>> = vec![None; cand.len()];
    for (i, token) in cand.iter().enumerate() {
        if let Some(j) = refs
            .iter()
            .enumerate()
            .position(|(j, r)| !ref_taken[j] && r == token)
        {
            alignment[i] = Some(j);
            ref_taken[j] = true;
        }
    }
    for (i, token) in cand.iter().enumerate() {
        if alignment[i].is_some() {
            continue;
        }
        let stemmed = stem(token);
        if let Some(j) = refs
            .iter()
            .enumerate()
            .position(|(j, r)| !ref_taken[j] && stem(r) == stemmed)
        {
            alignment[i] = Some(j);
            ref_taken[j] = true;
        }
    }

    let matches: Vec<(usize, usize)> = alignment
        .iter()
        .enumerate()
        .filter_map(|(i, j)| j.map(|j| (i, j)))
        .collect();
    let m = matches.len() as f64;
    if matches.is_empty() {
        return 0.0;
    }
    let precision = m / cand.len() as f64;
    let recall = m / refs.len() as f64;
    let f_mean = 10.0 * precision * recall / (recall + 9.0 * precision);

    let mut chunks = 1usize;
    for pair in matches.windows(2) {
        let (ci, ri) = pair[0];
        let (cj, rj) = pair[1];
        if cj != ci + 1 || rj != ri + 1 {
            chunks += 1;
        }
    }
    let penalty = 0.5 * (chunks as f64 / m).powi(3);
    f_mean * (1.0 - penalty)
}

/// Metric scores for one generated/reference pair.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PairMetrics {
    pub id: String,
    pub bleu: [f64; 4],
    pub rouge_l: f64,
    pub meteor: f64,
}

/// Corpus-level and per-pair metric values.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricReport {
    pub corpus_bleu: [f64; 4],
    pub mean_rouge_l: f64,
    pub mean_meteor: f64,
    pub pairs: Vec<PairMetrics>,
}

/// Score a corpus of (id, candidate, reference) triples.
pub fn evaluate_corpus(triples: &[(String, String, String)], smooth: bool) -> MetricReport {
    let mut pairs = Vec::with_capacity(triples.len());
    for (id, candidate, reference) in triples {
        let refs = [reference.as_str()];
        pairs.push(PairMetrics {
            id: id.clone(),
            bleu: [
                bleu_n(candidate, &refs, 1, smooth),
                bleu_n(candidate, &refs, 2, smooth),
                bleu_n(candidate, &refs, 3, smooth),
                bleu_n(candidate, &refs, 4, smooth),
            ],
            rouge_l: rouge_l(candidate, reference),
            meteor: meteor_lite(candidate, reference),
        });
    }
    let cand_ref: Vec<(String, String)> = triples
        .iter()
        .map(|(_, c, r)| (c.clone(), r.clone()))
        .collect();
    let n = pairs.len().max(1) as f64;
    MetricReport {
        corpus_bleu: [
            corpus_bleu(&cand_ref, 1, smooth),
            corpus_bleu(&cand_ref, 2, smooth),
            corpus_bleu(&cand_ref, 3, smooth),
            corpus_bleu(&cand_ref, 4, smooth),
        ],
        mean_rouge_l: pairs.iter().map(|p| p.rouge_l).sum::<f64>() / n,
        mean_meteor: pairs.iter().map(|p| p.meteor).sum::<f64>() / n,
        pairs,
    }
}

/// One gold-annotated sentence: the expected serialized labels.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GoldRecord {
    pub report_id: String,
    pub sentence_index: usize,
    pub labels: Vec<String>,
}

/// Table-shaped extraction accuracy counts.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct ExtractionAudit {
    pub sentences_analyzed: usize,
    pub labels_extracted: usize,
    pub modifiers_extracted: usize,
    pub missed_findings: usize,
    pub overcalls: usize,
    pub incorrect_modifier_associations: usize,
    pub missed_modifiers: usize,
}

impl ExtractionAudit {
    /// Overcalled labels as a fraction of extracted labels.
    pub fn overcall_rate(&self) -> f64 {
        if self.labels_extracted == 0 {
            0.0
        } else {
            self.overcalls as f64 / self.labels_extracted as f64
        }
    }

    /// Correctly associated modifiers as a fraction of extracted modifiers.
    pub fn modifier_precision(&self) -> f64 {
        if self.modifiers_extracted == 0 {
            1.0
        } else {
            1.0 - self.incorrect_modifier_associations as f64 / self.modifiers_extracted as f64
        }
    }
}

/// Compare extractions against gold annotations aligned by
/// (report_id, sentence_index).
///
/// A gold core with no extracted label of that core is a missed finding; an
/// extracted label whose core is absent from gold, or whose negation sense
/// disagrees with every gold label of that core, is an overcall. For a core
/// matched with agreeing sense, extracted modifiers absent from gold count
/// as incorrect associations and gold modifiers absent from the extraction
/// as missed modifiers.
pub fn audit_extraction(
    extractions: &[SentenceExtraction],
    gold: &[GoldRecord],
) -> Result<ExtractionAudit, AuditError> {
    let mut by_key: HashMap<(&str, usize), &SentenceExtraction> = HashMap::new();
    for e in extractions {
        by_key.insert((e.report_id.as_str(), e.sentence_index), e);
    }

    let mut audit = ExtractionAudit {
        sentences_analyzed: extractions.len(),
        ..Default::default()
    };
    for e in extractions {
        audit.labels_extracted += e.labels.len();
        audit.modifiers_extracted +=
            e.labels.iter().map(|l| l.label.modifiers.len()).sum::<usize>();
    }

    for record in gold {
        let extraction = by_key
            .get(&(record.report_id.as_str(), record.sentence_index))
            .ok_or_else(|| AuditError::Alignment {
                report_id: record.report_id.clone(),
                sentence_index: record.sentence_index,
            })?;
        let gold_labels: Vec<FflLabel> = record
            .labels
            .iter()
            .map(|k| FflLabel::parse(k).map_err(|e| AuditError::BadLabel(e.to_string())))
            .collect::<Result<_, _>>()?;
        let extracted: Vec<&FflLabel> = extraction.labels.iter().map(|l| &l.label).collect();

        // Missed findings: gold cores never extracted at all.
        for g in &gold_labels {
            if !extracted.iter().any(|e| e.core == g.core) {
                audit.missed_findings += 1;
            }
        }
        // Overcalls: spurious cores or wrong negation sense.
        for e in &extracted {
            let same_core: Vec<&FflLabel> =
                gold_labels.iter().filter(|g| g.core == e.core).collect();
            if same_core.is_empty() || !same_core.iter().any(|g| g.present == e.present) {
                audit.overcalls += 1;
                continue;
            }
            // Modifier agreement against the matching gold label.
            let gold_match = same_core
                .iter()
                .find(|g| g.present == e.present)
                .expect("checked above");
            for m in &e.modifiers {
                if !gold_match.modifiers.contains(m) {
                    audit.incorrect_modifier_associations += 1;
                }
            }
            for m in &gold_match.modifiers {
                if !e.modifiers.contains(m) {
                    audit.missed_modifiers += 1;
                }
            }
        }
    }
    Ok(audit)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::extraction::extract_report;
    use crate::lexicon::Lexicon;

    const TOL: f64 = 1e-6;

    #[test]
    fn identity_scores_one_everywhere() {
        let text = "and the image shows a stable right pleural effusion";
        assert!((bleu_n(text, &[text], 4, false) - 1.0).abs() < TOL);
        assert!((rouge_l(text, text) - 1.0).abs() < TOL);
        assert!((meteor_lite(text, text) - 1.0).abs() < TOL);
    }

    #[test]
    fn disjoint_scores_zero_everywhere() {
        let a = "alpha beta gamma";
        let b = "delta epsilon zeta";
        assert_eq!(bleu_n(a, &[b], 1, false), 0.0);
        assert_eq!(rouge_l(a, b), 0.0);
        assert_eq!(meteor_lite(a, b), 0.0);
    }

    #[test]
    fn empty_candidate_scores_zero() {
        assert_eq!(bleu_n("", &["reference text"], 2, false), 0.0);
        assert_eq!(rouge_l("", "reference"), 0.0);
        assert_eq!(meteor_lite("", "reference"), 0.0);
    }

    #[test]
    fn empty_reference_scores_zero() {
        assert_eq!(bleu_n("candidate text", &[""], 2, false), 0.0);
        assert_eq!(rouge_l("candidate", ""), 0.0);
        assert_eq!(meteor_lite("candidate", ""), 0.0);
    }

    #[test]
    fn rouge_identity_holds_on_fuzzed_strings() {
        use rand::rngs::StdRng;
        use rand::{Rng, SeedableRng};
        let vocab = ["no", "stable", "opacity", "effusion", "left", "seen", "x9"];
        let mut rng = StdRng::seed_from_u64(12);
        for _ in 0..200 {
            let len = rng.random_range(1..12);
            let text: Vec<&str> =
                (0..len).map(|_| vocab[rng.random_range(0..vocab.len())]).collect();
            let text = text.join(" ");
            assert!((rouge_l(&text, &text) - 1.0).abs() < 1e-12, "{text:?}");
        }
    }

    // Hand-computed values. BLEU-1 of "the cat sat" against "the cat sat
    // down": p1 = 3/3, brevity penalty = e^(1 - 4/3).
    #[test]
    fn bleu1_hand_value_with_brevity_penalty() {
        let got = bleu_n("the cat sat", &["the cat sat down"], 1, false);
        assert!((got - 0.7165313105737893).abs() < TOL, "got {got}");
    }

    // "the cat sat on the mat" (6 tokens) against "the cat sat down":
    // clipped unigrams the/cat/sat = 3 of 6, no brevity penalty.
    #[test]
    fn bleu1_hand_value_with_clipping() {
        let got = bleu_n("the cat sat on the mat", &["the cat sat down"], 1, false);
        assert!((got - 0.5).abs() < TOL, "got {got}");
    }

    // BLEU-2 of "no acute disease" against "no acute cardiopulmonary
    // disease": p1 = 1, p2 = 1/2, BP = e^(1-4/3).
    #[test]
    fn bleu2_hand_value() {
        let got = bleu_n(
            "no acute disease",
            &["no acute cardiopulmonary disease"],
            2,
            false,
        );
        assert!((got - 0.5066641486392106).abs() < TOL, "got {got}");
    }

    // ROUGE-L of "a b c" vs "a x b y": LCS = 2, R = 1/2, P = 2/3, beta = 1.2.
    #[test]
    fn rouge_l_hand_value() {
        let got = rouge_l("a b c", "a x b y");
        assert!((got - 0.5570776255707762).abs() < TOL, "got {got}");
    }

    // METEOR-lite of "opacity noted" vs "opacity seen": one exact match,
    // F_mean = 0.5, one chunk of one match -> penalty 0.5.
    #[test]
    fn meteor_hand_value() {
        let got = meteor_lite("opacity noted", "opacity seen");
        assert!((got - 0.25).abs() < TOL, "got {got}");
    }

    #[test]
    fn meteor_stem_match_counts() {
        // "improving" vs "improved" align through the stemmer.
        let got = meteor_lite("effusion improving", "effusion improved");
        assert!(got > 0.5, "stem match should lift the score, got {got}");
    }

    // BLEU-n is NOT monotone non-increasing in n under clipping with
    // repeated tokens: for "a b a" vs "b a b", p1 = 2/3 but p2 = 1, so
    // BLEU-2 = sqrt(2/3) > BLEU-1. Kept as a worked counterexample.
    #[test]
    fn bleu_order_not_monotonic_under_token_repetition() {
        let b1 = bleu_n("a b a", &["b a b"], 1, false);
        let b2 = bleu_n("a b a", &["b a b"], 2, false);
        assert!((b1 - 2.0 / 3.0).abs() < TOL);
        assert!((b2 - (2.0f64 / 3.0).sqrt()).abs() < TOL);
        assert!(b2 > b1);
    }

    #[test]
    fn smoothing_rescues_zero_higher_orders() {
        let strict = bleu_n("no acute disease", &["no acute findings"], 3, false);
        let smoothed = bleu_n("no acute disease", &["no acute findings"], 3, true);
        assert_eq!(strict, 0.0);
        assert!(smoothed > 0.0);
    }

    #[test]
    fn corpus_bleu_aggregates_counts_before_ratio() {
        let pairs = vec![
            ("the cat sat".to_string(), "the cat sat".to_string()),
            ("a b".to_string(), "c d".to_string()),
        ];
        let corpus = corpus_bleu(&pairs, 1, false);
        // 3 + 0 clipped unigrams over 3 + 2 candidates = 3/5, no BP.
        assert!((corpus - 0.6).abs() < TOL, "got {corpus}");
    }

    #[test]
    fn metric_report_values_stay_in_unit_interval() {
        let triples = vec![
            ("x".to_string(), "no pneumothorax".to_string(), "no pneumothorax seen".to_string()),
            ("y".to_string(), "stable opacity".to_string(), "large mass".to_string()),
        ];
        let report = evaluate_corpus(&triples, false);
        for pair in &report.pairs {
            for b in pair.bleu {
                assert!((0.0..=1.0).contains(&b));
            }
            assert!((0.0..=1.0).contains(&pair.rouge_l));
            assert!((0.0..=1.0).contains(&pair.meteor));
        }
        for b in report.corpus_bleu {
            assert!((0.0..=1.0).contains(&b));
        }
    }

    fn extraction_of(text: &str) -> Vec<SentenceExtraction> {
        extract_report("r1", text, &Lexicon::demo()).sentences
    }

    #[test]
    fn audit_of_exact_match_has_zero_errors() {
        let extractions = extraction_of("No pneumothorax. Stable opacity.");
        let gold = vec![
            GoldRecord {
                report_id: "r1".into(),
                sentence_index: 0,
                labels: vec!["<anatomical finding|no|pneumothorax>".into()],
            },
            GoldRecord {
                report_id: "r1".into(),
                sentence_index: 1,
                labels: vec!["<anatomical finding|yes|opacity|temporal:stable>".into()],
            },
        ];
        let audit = audit_extraction(&extractions, &gold).unwrap();
        assert_eq!(audit.missed_findings, 0);
        assert_eq!(audit.overcalls, 0);
        assert_eq!(audit.incorrect_modifier_associations, 0);
        assert_eq!(audit.missed_modifiers, 0);
        assert_eq!(audit.labels_extracted, 2);
    }

    #[test]
    fn gold_finding_absent_from_extraction_is_missed() {
        let extractions = extraction_of("Stable opacity.");
        let gold = vec![GoldRecord {
            report_id: "r1".into(),
            sentence_index: 0,
            labels: vec![
                "<anatomical finding|yes|opacity|temporal:stable>".into(),
                "<anatomical finding|yes|mass>".into(),
            ],
        }];
        let audit = audit_extraction(&extractions, &gold).unwrap();
        assert_eq!(audit.missed_findings, 1);
    }

    #[test]
    fn wrong_negation_sense_counts_as_overcall() {
        let extractions = extraction_of("No pneumothorax.");
        let gold = vec![GoldRecord {
            report_id: "r1".into(),
            sentence_index: 0,
            labels: vec!["<anatomical finding|yes|pneumothorax>".into()],
        }];
        let audit = audit_extraction(&extractions, &gold).unwrap();
        assert_eq!(audit.overcalls, 1);
        assert_eq!(audit.missed_findings, 0);
    }

    #[test]
    fn misaligned_gold_is_an_error() {
        let extractions = extraction_of("No pneumothorax.");
        let gold = vec![GoldRecord {
            report_id: "other".into(),
            sentence_index: 5,
            labels: vec![],
        }];
        assert!(matches!(
            audit_extraction(&extractions, &gold),
            Err(AuditError::Alignment { .. })
        ));
    }
}
