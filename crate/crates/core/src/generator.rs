//! Report assembly: nearest-pattern matching and evidence-based pruning.
//!
//! A query pattern retrieves the semantically nearest stored pattern under
//! the weighted distance
//!
//! ```text
//! d(Q, P) = sqrt( sum over labels of w_l * (I_P(l) - I_Q(l))^2 ) / |F^|
//! ```
//!
//! then takes the cohort's top-ranked report and drops every sentence
//! asserting a label whose bit is absent from the query. Exact matches
//! short-circuit through the hash index; otherwise an exact linear scan over
//! the stored patterns finds the minimum (at the hundreds-of-patterns scale
//! this needs no index).

use thiserror::Error;

use crate::patterndb::{PatternDatabase, PatternVector};

#[derive(Debug, Error)]
pub enum GeneratorError {
    #[error("pattern database is empty")]
    EmptyDatabase,
    #[error("pattern length {found} does not match label space size {expected}")]
    LengthMismatch { found: usize, expected: usize },
}

/// Weighted pattern distance (zero iff the patterns agree on every bit,
/// given positive weights).
pub fn pattern_distance(
    q: &PatternVector,
    p: &PatternVector,
    weights: &[f64],
) -> Result<f64, GeneratorError> {
    if q.len() != weights.len() {
        return Err(GeneratorError::LengthMismatch {
            found: q.len(),
            expected: weights.len(),
        });
    }
    if p.len() != weights.len() {
        return Err(GeneratorError::LengthMismatch {
            found: p.len(),
            expected: weights.len(),
        });
    }
    let mut sum = 0.0;
    for (l, w) in weights.iter().enumerate() {
        if q.get(l) != p.get(l) {
            sum += w;
        }
    }
    Ok(sum.sqrt() / weights.len() as f64)
}

/// Nearest stored pattern by weighted distance. An exact match returns
/// immediately with distance zero; otherwise the scan breaks distance ties
/// by the higher top-report rank, then by ascending bit order.
pub fn nearest_pattern<'db>(
    q: &PatternVector,
    db: &'db PatternDatabase,
) -> Result<(&'db PatternVector, f64), GeneratorError> {
    if db.entry_count() == 0 {
        return Err(GeneratorError::EmptyDatabase);
    }
    if let Some((stored, _)) = db.find(q) {
        return Ok((stored, 0.0));
    }
    let weights = &db.space.weights;
    let mut best: Option<(&PatternVector, f64)> = None;
    for pattern in db.patterns() {
        let d = pattern_distance(q, pattern, weights)?;
        let better = match &best {
            None => true,
            Some((current, best_d)) => {
                if d + 1e-15 < *best_d {
                    true
                } else if d - 1e-15 > *best_d {
                    false
                } else {
                    let rank = |p: &PatternVector| {
                        db.lookup(p).first().map(|r| r.rank).unwrap_or(f64::NEG_INFINITY)
                    };
                    match rank(pattern).partial_cmp(&rank(current)) {
                        Some(std::cmp::Ordering::Greater) => true,
                        Some(std::cmp::Ordering::Less) => false,
                        _ => pattern.bit_cmp(current) == std::cmp::Ordering::Less,
                    }
                }
            }
        };
        if better {
            best = Some((pattern, d));
        }
    }
    Ok(best.expect("database has entries"))
}

/// A sentence dropped during assembly, with the label keys whose evidence
/// the query lacked.
#[derive(Debug, Clone, PartialEq)]
pub struct PrunedSentence {
    pub text: String,
    pub missing: Vec<String>,
}

/// The assembled report for one query pattern.
#[derive(Debug, Clone, PartialEq)]
pub struct MatchResult {
    pub matched_pattern: PatternVector,
    pub distance: f64,
    pub source_report_id: String,
    pub assembled: Vec<String>,
    pub pruned: Vec<PrunedSentence>,
}

#[derive(Debug, Clone, Copy, Default)]
pub struct AssembleOptions {
    /// Keep sentences whose only unmatched labels are negative findings
    /// ("no pneumothorax" when the query lacks that negative label).
    pub keep_unmatched_negatives: bool,
}

/// Retrieve the top-ranked report of the nearest pattern and prune sentences
/// whose evidence is absent from the query. Sentences asserting no labels
/// carry no evidence claim and are kept; original sentence order is
/// preserved.
pub fn assemble_report(
    q: &PatternVector,
    db: &PatternDatabase,
    options: AssembleOptions,
) -> Result<MatchResult, GeneratorError> {
    let (pattern, distance) = nearest_pattern(q, db)?;
    let reports = db.lookup(pattern);
    let top = reports.first().ok_or(GeneratorError::EmptyDatabase)?;

    let mut assembled = Vec::new();
    let mut pruned = Vec::new();
    for sentence in &top.sentences {
        let missing: Vec<String> = sentence
            .labels
            .iter()
            .filter(|l| !q.get(l.index))
            .filter(|l| l.present || !options.keep_unmatched_negatives)
            .map(|l| db.space.keys[l.index].clone())
            .collect();
        if missing.is_empty() {
            assembled.push(sentence.text.clone());
        } else {
            pruned.push(PrunedSentence {
                text: sentence.text.clone(),
                missing,
            });
        }
    }

    Ok(MatchResult {
        matched_pattern: pattern.clone(),
        distance,
        source_report_id: top.report_id.clone(),
        assembled,
        pruned,
    })
}
