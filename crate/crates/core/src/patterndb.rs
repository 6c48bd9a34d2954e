//! The binary pattern -> ranked report database.
//!
//! A report is summarized as a binary pattern vector over the fixed label
//! space `F^` (one bit per admitted FFL label). All reports sharing a pattern
//! form a cohort; each report is ranked by the support its relevant
//! sentences enjoy inside the cohort:
//!
//! ```text
//! Rank(r) = sum over relevant sentences s_j of h(s_j),
//! h(s_j)  = (number of cohort reports containing s_j) / |cohort|
//! ```
//!
//! Lookup by exact pattern is a hash-map probe. The database persists to a
//! versioned, checksummed binary container with an embedded plain-text label
//! space header, and serializes deterministically: building twice from the
//! same corpus yields identical bytes.

use std::cmp::Ordering;
use std::collections::{BTreeMap, HashMap, HashSet};
use std::fmt;
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::extraction::{FflLabel, ReportExtraction};
use crate::lexicon::Lexicon;
use crate::text::normalize_sentence;

const MAGIC: &[u8; 4] = b"FFDB";
const FORMAT_VERSION: u32 = 1;

#[derive(Debug, Error)]
pub enum DbError {
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
    #[error("corpus is empty")]
    EmptyCorpus,
    #[error("no label reached the support threshold {min_support}")]
    EmptyLabelSpace { min_support: u32 },
    #[error("duplicate report id {0:?} in corpus")]
    DuplicateReport(String),
    #[error("label {label:?} names core {core:?} absent from the lexicon")]
    UnknownCore { label: String, core: String },
    #[error("unsupported database version {found} (expected {FORMAT_VERSION})")]
    VersionMismatch { found: u32 },
    #[error("checksum mismatch: file is truncated or corrupt")]
    ChecksumMismatch,
    #[error("corrupt database: {0}")]
    Corrupt(String),
}

/// Binary indicator vector over the label space.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct PatternVector {
    len: usize,
    blocks: Vec<u64>,
}

impl PatternVector {
    pub fn zeros(len: usize) -> Self {
        PatternVector {
            len,
            blocks: vec![0; len.div_ceil(64)],
        }
    }

    pub fn from_indices(len: usize, indices: &[usize]) -> Self {
        let mut v = PatternVector::zeros(len);
        for &i in indices {
            v.set(i);
        }
        v
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn set(&mut self, i: usize) {
        assert!(i < self.len, "bit {i} out of range for |F^| = {}", self.len);
        self.blocks[i / 64] |= 1u64 << (i % 64);
    }

    pub fn get(&self, i: usize) -> bool {
        assert!(i < self.len, "bit {i} out of range for |F^| = {}", self.len);
        self.blocks[i / 64] >> (i % 64) & 1 == 1
    }

    pub fn count_ones(&self) -> usize {
        self.blocks.iter().map(|b| b.count_ones() as usize).sum()
    }

    pub fn ones(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.len).filter(|&i| self.get(i))
    }

    pub fn is_zero(&self) -> bool {
        self.blocks.iter().all(|&b| b == 0)
    }

    /// Lexicographic order over the bit string (bit 0 first).
    pub fn bit_cmp(&self, other: &PatternVector) -> Ordering {
        let n = self.len.min(other.len);
        for i in 0..n {
            match (self.get(i), other.get(i)) {
                (false, true) => return Ordering::Less,
                (true, false) => return Ordering::Greater,
                _ => {}
            }
        }
        self.len.cmp(&other.len)
    }
}

impl fmt::Display for PatternVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for i in 0..self.len {
            f.write_str(if self.get(i) { "1" } else { "0" })?;
        }
        Ok(())
    }
}

/// The ordered label set `F^` with per-label weights and image support.
///
/// `weights[l]` is the criticality of the label's core finding divided by
/// ten, so labels of the same core share a weight in `(0, 1]`. `cfl_subset`
/// indexes the bare positive core labels, the CFL-style subset.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LabelSpace {
    pub keys: Vec<String>,
    pub weights: Vec<f64>,
    pub support: Vec<u32>,
    pub cfl_subset: Vec<usize>,
    #[serde(skip)]
    index: HashMap<String, usize>,
    #[serde(skip)]
    parsed: Vec<FflLabel>,
    #[serde(skip)]
    by_tnc: HashMap<(String, bool, String), Vec<usize>>,
}

impl LabelSpace {
    /// Assemble a label space from keys and weights (used by loaders and
    /// synthetic corpora); keys must be valid serialized FFL labels.
    pub fn from_keys(
        keys: Vec<String>,
        weights: Vec<f64>,
        support: Vec<u32>,
    ) -> Result<LabelSpace, DbError> {
        if keys.is_empty() {
            return Err(DbError::EmptyLabelSpace { min_support: 0 });
        }
        if keys.len() != weights.len() || keys.len() != support.len() {
            return Err(DbError::Corrupt(format!(
                "label space arrays disagree: {} keys, {} weights, {} support",
                keys.len(),
                weights.len(),
                support.len()
            )));
        }
        let mut space = LabelSpace {
            keys,
            weights,
            support,
            cfl_subset: Vec::new(),
            index: HashMap::new(),
            parsed: Vec::new(),
            by_tnc: HashMap::new(),
        };
        space.rebuild_index()?;
        Ok(space)
    }

    fn rebuild_index(&mut self) -> Result<(), DbError> {
        self.index.clear();
        self.parsed.clear();
        self.by_tnc.clear();
        self.cfl_subset.clear();
        for (i, key) in self.keys.iter().enumerate() {
            let label = FflLabel::parse(key)
                .map_err(|e| DbError::Corrupt(format!("bad label key in space: {e}")))?;
            if self.index.insert(key.clone(), i).is_some() {
                return Err(DbError::Corrupt(format!("duplicate label key {key:?}")));
            }
            if label.modifiers.is_empty() && label.present {
                self.cfl_subset.push(i);
            }
            self.by_tnc
                .entry((label.finding_type.clone(), label.present, label.core.clone()))
                .or_default()
                .push(i);
            self.parsed.push(label);
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.keys.len()
    }

    pub fn is_empty(&self) -> bool {
        self.keys.is_empty()
    }

    pub fn index_of(&self, key: &str) -> Option<usize> {
        self.index.get(key).copied()
    }

    pub fn label(&self, i: usize) -> &FflLabel {
        &self.parsed[i]
    }

    /// Map one label to its bit. Labels not in `F^` fall back to their
    /// nearest in-space counterpart when only modifiers differ (the extra
    /// modifiers are dropped); otherwise `None`.
    pub fn map_label(&self, label: &FflLabel) -> Option<usize> {
        if let Some(&i) = self.index.get(&label.key()) {
            return Some(i);
        }
        let candidates = self
            .by_tnc
            .get(&(label.finding_type.clone(), label.present, label.core.clone()))?;
        candidates
            .iter()
            .copied()
            .filter(|&i| {
                self.parsed[i]
                    .modifiers
                    .iter()
                    .all(|m| label.modifiers.contains(m))
            })
            // Nearest counterpart keeps the most modifiers; ties go to the
            // lexicographically smallest key.
            .min_by(|&a, &b| {
                self.parsed[b]
                    .modifiers
                    .len()
                    .cmp(&self.parsed[a].modifiers.len())
                    .then_with(|| self.keys[a].cmp(&self.keys[b]))
            })
    }
}

/// How a report's labels mapped into the space.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct MapStats {
    pub exact: usize,
    pub nearest: usize,
    pub ignored: usize,
}

/// Set the bit of every label present in the report; out-of-space labels map
/// to their nearest in-space counterpart when only modifiers differ, and are
/// otherwise ignored and counted.
pub fn report_to_pattern(labels: &[FflLabel], space: &LabelSpace) -> (PatternVector, MapStats) {
    let mut vector = PatternVector::zeros(space.len());
    let mut stats = MapStats::default();
    for label in labels {
        match space.map_label(label) {
            Some(i) => {
                if space.keys[i] == label.key() {
                    stats.exact += 1;
                } else {
                    stats.nearest += 1;
                }
                vector.set(i);
            }
            None => stats.ignored += 1,
        }
    }
    (vector, stats)
}

/// One label asserted by a stored sentence: the bit index plus whether the
/// finding is reported present.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SentenceLabel {
    pub index: usize,
    pub present: bool,
}

/// A sentence kept with its report, with per-sentence label provenance so
/// report assembly can prune without re-extraction.
#[derive(Debug, Clone, PartialEq)]
pub struct StoredSentence {
    pub text: String,
    pub labels: Vec<SentenceLabel>,
}

/// A report inside a pattern cohort, ranked by sentence support.
#[derive(Debug, Clone, PartialEq)]
pub struct RankedReport {
    pub report_id: String,
    pub rank: f64,
    /// Relevant sentences in original report order.
    pub sentences: Vec<StoredSentence>,
}

/// A pattern cohort: ranked reports plus per-sentence containment counts
/// (the numerators of `h`).
#[derive(Debug, Clone, PartialEq, Default)]
pub struct PatternEntry {
    pub reports: Vec<RankedReport>,
    pub sentence_counts: BTreeMap<String, u32>,
}

#[derive(Debug, Clone, Copy)]
pub struct BuildOptions {
    /// A label joins `F^` only with at least this many supporting reports.
    pub min_support: u32,
    /// Treat every sentence of a report as relevant, not only the ones
    /// asserting an in-pattern label.
    pub all_sentences: bool,
}

impl Default for BuildOptions {
    fn default() -> Self {
        BuildOptions {
            min_support: 1,
            all_sentences: false,
        }
    }
}

/// The pattern database.
#[derive(Debug, Clone, PartialEq)]
pub struct PatternDatabase {
    pub space: LabelSpace,
    entries: HashMap<PatternVector, PatternEntry>,
    all_sentences: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct DbStats {
    pub patterns: usize,
    pub reports: usize,
    pub distinct_sentences: usize,
    pub labels: usize,
}

impl PatternDatabase {
    /// Group a corpus of report extractions by binary pattern and rank every
    /// cohort's reports by sentence support.
    pub fn build(
        corpus: &[ReportExtraction],
        lexicon: &Lexicon,
        options: BuildOptions,
    ) -> Result<PatternDatabase, DbError> {
        if corpus.is_empty() {
            return Err(DbError::EmptyCorpus);
        }
        let mut seen_ids = HashSet::new();
        for report in corpus {
            if !seen_ids.insert(report.report_id.as_str()) {
                return Err(DbError::DuplicateReport(report.report_id.clone()));
            }
        }

        // Label admission: distinct reports supporting each label key.
        let mut support: BTreeMap<String, u32> = BTreeMap::new();
        for report in corpus {
            let mut keys: HashSet<String> = HashSet::new();
            for sentence in &report.sentences {
                for l in &sentence.labels {
                    keys.insert(l.label.key());
                }
            }
            for key in keys {
                *support.entry(key).or_insert(0) += 1;
            }
        }
        let admitted: Vec<(String, u32)> = support
            .into_iter()
            .filter(|(_, n)| *n >= options.min_support)
            .collect();
        if admitted.is_empty() {
            return Err(DbError::EmptyLabelSpace {
                min_support: options.min_support,
            });
        }
        let mut keys = Vec::with_capacity(admitted.len());
        let mut weights = Vec::with_capacity(admitted.len());
        let mut supports = Vec::with_capacity(admitted.len());
        for (key, n) in admitted {
            let label = FflLabel::parse(&key)
                .map_err(|e| DbError::Corrupt(format!("unparseable extracted label: {e}")))?;
            let finding = lexicon
                .finding(&label.core)
                .ok_or_else(|| DbError::UnknownCore {
                    label: key.clone(),
                    core: label.core.clone(),
                })?;
            keys.push(key);
            weights.push(f64::from(finding.criticality) / 10.0);
            supports.push(n);
        }
        let space = LabelSpace::from_keys(keys, weights, supports)?;

        // Group reports by pattern.
        let mut cohorts: HashMap<PatternVector, Vec<&ReportExtraction>> = HashMap::new();
        for report in corpus {
            let labels: Vec<FflLabel> = report
                .sentences
                .iter()
                .flat_map(|s| s.labels.iter().map(|l| l.label.clone()))
                .collect();
            let (pattern, _) = report_to_pattern(&labels, &space);
            cohorts.entry(pattern).or_default().push(report);
        }

        let mut entries: HashMap<PatternVector, PatternEntry> = HashMap::new();
        for (pattern, cohort) in cohorts {
            let cohort_size = cohort.len() as f64;

            // Containment counts over the cohort, on normalized sentence
            // text; a report contains a sentence when any of its extracted
            // sentences normalizes equal.
            let mut counts: BTreeMap<String, u32> = BTreeMap::new();
            for report in &cohort {
                let mut distinct: HashSet<String> = HashSet::new();
                for sentence in &report.sentences {
                    distinct.insert(normalize_sentence(&sentence.text));
                }
                for key in distinct {
                    *counts.entry(key).or_insert(0) += 1;
                }
            }

            let mut reports: Vec<RankedReport> = Vec::with_capacity(cohort.len());
            for report in &cohort {
                let mut rank = 0.0;
                let mut stored = Vec::new();
                for sentence in &report.sentences {
                    let mapped: Vec<SentenceLabel> = sentence
                        .labels
                        .iter()
                        .filter_map(|l| {
                            space.map_label(&l.label).map(|index| SentenceLabel {
                                index,
                                present: l.label.present,
                            })
                        })
                        .collect();
                    let relevant = options.all_sentences || !mapped.is_empty();
                    if !relevant {
                        continue;
                    }
                    let h = f64::from(counts[&normalize_sentence(&sentence.text)]) / cohort_size;
                    rank += h;
                    stored.push(StoredSentence {
                        text: sentence.text.clone(),
                        labels: mapped,
                    });
                }
                reports.push(RankedReport {
                    report_id: report.report_id.clone(),
                    rank,
                    sentences: stored,
                });
            }
            reports.sort_by(|a, b| {
                b.rank
                    .partial_cmp(&a.rank)
                    .unwrap_or(Ordering::Equal)
                    .then_with(|| a.report_id.cmp(&b.report_id))
            });
            entries.insert(
                pattern,
                PatternEntry {
                    reports,
                    sentence_counts: counts,
                },
            );
        }

        Ok(PatternDatabase {
            space,
            entries,
            all_sentences: options.all_sentences,
        })
    }

    /// Exact-match retrieval; an absent pattern yields an empty slice and the
    /// caller falls back to nearest-pattern search.
    pub fn lookup(&self, pattern: &PatternVector) -> &[RankedReport] {
        self.entries
            .get(pattern)
            .map(|e| e.reports.as_slice())
            .unwrap_or(&[])
    }

    pub fn entry(&self, pattern: &PatternVector) -> Option<&PatternEntry> {
        self.entries.get(pattern)
    }

    /// Exact lookup returning the stored key alongside its cohort.
    pub fn find(&self, pattern: &PatternVector) -> Option<(&PatternVector, &PatternEntry)> {
        self.entries.get_key_value(pattern)
    }

    pub fn patterns(&self) -> impl Iterator<Item = &PatternVector> {
        self.entries.keys()
    }

    pub fn entry_count(&self) -> usize {
        self.entries.len()
    }

    pub fn stats(&self) -> DbStats {
        let mut sentences: HashSet<&str> = HashSet::new();
        let mut reports = 0usize;
        for entry in self.entries.values() {
            reports += entry.reports.len();
            for key in entry.sentence_counts.keys() {
                sentences.insert(key);
            }
        }
        DbStats {
            patterns: self.entries.len(),
            reports,
            distinct_sentences: sentences.len(),
            labels: self.space.len(),
        }
    }

    /// Serialize to the container format (see module docs for layout).
    pub fn to_bytes(&self) -> Vec<u8> {
        let mut body = Vec::new();
        body.push(u8::from(self.all_sentences));
        let mut ordered: Vec<(&PatternVector, &PatternEntry)> = self.entries.iter().collect();
        ordered.sort_by(|a, b| a.0.bit_cmp(b.0));
        write_u64(&mut body, ordered.len() as u64);
        for (pattern, entry) in ordered {
            write_u64(&mut body, pattern.len as u64);
            for block in &pattern.blocks {
                body.extend_from_slice(&block.to_le_bytes());
            }
            write_u64(&mut body, entry.reports.len() as u64);
            for report in &entry.reports {
                write_str(&mut body, &report.report_id);
                body.extend_from_slice(&report.rank.to_bits().to_le_bytes());
                write_u64(&mut body, report.sentences.len() as u64);
                for sentence in &report.sentences {
                    write_str(&mut body, &sentence.text);
                    write_u64(&mut body, sentence.labels.len() as u64);
                    for label in &sentence.labels {
                        write_u64(&mut body, label.index as u64);
                        body.push(u8::from(label.present));
                    }
                }
            }
            write_u64(&mut body, entry.sentence_counts.len() as u64);
            for (text, count) in &entry.sentence_counts {
                write_str(&mut body, text);
                body.extend_from_slice(&count.to_le_bytes());
            }
        }

        let header = serde_json::to_vec(&self.space).expect("label space serializes");
        let mut out = Vec::with_capacity(16 + header.len() + body.len());
        out.extend_from_slice(MAGIC);
        out.extend_from_slice(&FORMAT_VERSION.to_le_bytes());
        write_u64(&mut out, header.len() as u64);
        out.extend_from_slice(&header);
        out.extend_from_slice(&body);
        let crc = crc32fast::hash(&out);
        out.extend_from_slice(&crc.to_le_bytes());
        out
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<PatternDatabase, DbError> {
        if bytes.len() < MAGIC.len() + 8 + 4 {
            return Err(DbError::ChecksumMismatch);
        }
        let (payload, trailer) = bytes.split_at(bytes.len() - 4);
        let stored_crc = u32::from_le_bytes(trailer.try_into().expect("4-byte trailer"));
        if crc32fast::hash(payload) != stored_crc {
            return Err(DbError::ChecksumMismatch);
        }
        let mut cursor = Reader::new(payload);
        let magic = cursor.take(4)?;
        if magic != MAGIC {
            return Err(DbError::Corrupt("bad magic".to_string()));
        }
        let version = u32::from_le_bytes(cursor.take(4)?.try_into().expect("4 bytes"));
        if version != FORMAT_VERSION {
            return Err(DbError::VersionMismatch { found: version });
        }
        let header_len = cursor.read_u64()? as usize;
        let header = cursor.take(header_len)?;
        let mut space: LabelSpace = serde_json::from_slice(header)
            .map_err(|e| DbError::Corrupt(format!("bad label space header: {e}")))?;
        space.rebuild_index()?;

        let all_sentences = cursor.read_u8()? != 0;
        let n_entries = cursor.read_u64()? as usize;
        let mut entries = HashMap::with_capacity(n_entries);
        for _ in 0..n_entries {
            let len = cursor.read_u64()? as usize;
            let mut blocks = vec![0u64; len.div_ceil(64)];
            for block in blocks.iter_mut() {
                *block = cursor.read_u64()?;
            }
            let pattern = PatternVector { len, blocks };
            let n_reports = cursor.read_u64()? as usize;
            let mut reports = Vec::with_capacity(n_reports);
            for _ in 0..n_reports {
                let report_id = cursor.read_str()?;
                let rank = f64::from_bits(cursor.read_u64()?);
                let n_sentences = cursor.read_u64()? as usize;
                let mut sentences = Vec::with_capacity(n_sentences);
                for _ in 0..n_sentences {
                    let text = cursor.read_str()?;
                    let n_labels = cursor.read_u64()? as usize;
                    let mut labels = Vec::with_capacity(n_labels);
                    for _ in 0..n_labels {
                        let index = cursor.read_u64()? as usize;
                        let present = cursor.read_u8()? != 0;
                        if index >= space.len() {
                            return Err(DbError::Corrupt(format!(
                                "sentence label index {index} out of range"
                            )));
                        }
                        labels.push(SentenceLabel { index, present });
                    }
                    sentences.push(StoredSentence { text, labels });
                }
                reports.push(RankedReport {
                    report_id,
                    rank,
                    sentences,
                });
            }
            let n_counts = cursor.read_u64()? as usize;
            let mut sentence_counts = BTreeMap::new();
            for _ in 0..n_counts {
                let text = cursor.read_str()?;
                let count = u32::from_le_bytes(cursor.take(4)?.try_into().expect("4 bytes"));
                sentence_counts.insert(text, count);
            }
            let cohort_size = reports.len() as f64;
            // Integrity: every stored rank must equal the sum of h values
            // recomputed from the stored containment counts.
            for report in &reports {
                let recomputed: f64 = report
                    .sentences
                    .iter()
                    .map(|s| {
                        sentence_counts
                            .get(&normalize_sentence(&s.text))
                            .map(|&c| f64::from(c) / cohort_size)
                            .unwrap_or(0.0)
                    })
                    .sum();
                if (recomputed - report.rank).abs() > 1e-9 {
                    return Err(DbError::Corrupt(format!(
                        "rank of report {:?} does not match its sentence support",
                        report.report_id
                    )));
                }
            }
            entries.insert(pattern, PatternEntry {
                reports,
                sentence_counts,
            });
        }

        Ok(PatternDatabase {
            space,
            entries,
            all_sentences,
        })
    }
}

/// Persist a database; the byte image is deterministic.
pub fn save_db(db: &PatternDatabase, path: &Path) -> Result<(), DbError> {
    fs::write(path, db.to_bytes())?;
    Ok(())
}

pub fn load_db(path: &Path) -> Result<PatternDatabase, DbError> {
    let bytes = fs::read(path)?;
    PatternDatabase::from_bytes(&bytes)
}

fn write_u64(out: &mut Vec<u8>, v: u64) {
    out.extend_from_slice(&v.to_le_bytes());
}

fn write_str(out: &mut Vec<u8>, s: &str) {
    write_u64(out, s.len() as u64);
    out.extend_from_slice(s.as_bytes());
}

struct Reader<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    fn new(bytes: &'a [u8]) -> Self {
        Reader { bytes, pos: 0 }
    }

    fn take(&mut self, n: usize) -> Result<&'a [u8], DbError> {
        if self.pos + n > self.bytes.len() {
            return Err(DbError::Corrupt("unexpected end of data".to_string()));
        }
        let slice = &self.bytes[self.pos..self.pos + n];
        self.pos += n;
        Ok(slice)
    }

    fn read_u8(&mut self) -> Result<u8, DbError> {
        Ok(self.take(1)?[0])
    }

    fn read_u64(&mut self) -> Result<u64, DbError> {
        Ok(u64::from_le_bytes(self.take(8)?.try_into().expect("8 bytes")))
    }

    fn read_str(&mut self) -> Result<String, DbError> {
        let len = self.read_u64()? as usize;
        let bytes = self.take(len)?;
        String::from_utf8(bytes.to_vec())
            .map_err(|_| DbError::Corrupt("invalid utf-8 string".to_string()))
    }
}
