//! Fine finding label (FFL) extraction from report sentences.
//!
//! Extraction runs four steps per sentence:
//!
//! 1. concept detection: longest-match vocabulary scan for core findings
//!    and modifiers,
//! 2. phrasal grouping: connected components over the dependency links,
//!    skipping over unknown tokens,
//! 3. negation sense detection: iterative scope expansion from seed
//!    negation terms,
//! 4. pattern completion: default anatomical locations from the lexicon and
//!    ontology roll-up of the core finding.
//!
//! Each finding occurrence becomes one [`FflLabel`]
//! `<type|yes/no|core|modifier...>` with token-level provenance.

use std::collections::{BTreeMap, BTreeSet, HashMap, HashSet};
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::lexicon::{Lexicon, TermHit, TermSpan};
use crate::parsing::{fallback_parse, segment_sentences, ParsedSentence};

#[derive(Debug, Error)]
pub enum LabelParseError {
    #[error("label {0:?} is not delimited by '<' and '>'")]
    Delimiters(String),
    #[error("label {0:?} needs at least type, negation and core fields")]
    MissingFields(String),
    #[error("label {label:?}: negation field {value:?} must be 'yes' or 'no'")]
    BadNegation { label: String, value: String },
    #[error("label {label:?}: modifier {value:?} is not 'category:value'")]
    BadModifier { label: String, value: String },
    #[error("label {label:?}: empty {field} field")]
    EmptyField { label: String, field: &'static str },
}

/// One modifier attached to a finding: a category plus the matched value.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Modifier {
    pub category: String,
    pub value: String,
}

impl Modifier {
    pub fn new(category: impl Into<String>, value: impl Into<String>) -> Self {
        Modifier {
            category: category.into(),
            value: value.into(),
        }
    }
}

/// A fine finding label `<T|N|C|M*>`: finding type, negation sense
/// (`present == true` means the finding is reported present), core finding
/// id and zero or more modifiers.
///
/// Modifiers are kept sorted and deduplicated so that equal labels have
/// equal serialized keys.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct FflLabel {
    pub finding_type: String,
    pub present: bool,
    pub core: String,
    pub modifiers: Vec<Modifier>,
}

impl FflLabel {
    pub fn new(
        finding_type: impl Into<String>,
        present: bool,
        core: impl Into<String>,
        modifiers: Vec<Modifier>,
    ) -> Self {
        let mut label = FflLabel {
            finding_type: finding_type.into(),
            present,
            core: core.into(),
            modifiers,
        };
        label.canonicalize();
        label
    }

    fn canonicalize(&mut self) {
        self.modifiers.sort();
        self.modifiers.dedup();
    }

    /// Serialized form `<T|N|C|cat:val|...>`; no trailing separator when the
    /// label has no modifiers.
    pub fn key(&self) -> String {
        let mut out = format!(
            "<{}|{}|{}",
            self.finding_type,
            if self.present { "yes" } else { "no" },
            self.core
        );
        for m in &self.modifiers {
            out.push('|');
            out.push_str(&m.category);
            out.push(':');
            out.push_str(&m.value);
        }
        out.push('>');
        out
    }

    pub fn parse(s: &str) -> Result<FflLabel, LabelParseError> {
        let inner = s
            .strip_prefix('<')
            .and_then(|rest| rest.strip_suffix('>'))
            .ok_or_else(|| LabelParseError::Delimiters(s.to_string()))?;
        let parts: Vec<&str> = inner.split('|').collect();
        if parts.len() < 3 {
            return Err(LabelParseError::MissingFields(s.to_string()));
        }
        let present = match parts[1] {
            "yes" => true,
            "no" => false,
            other => {
                return Err(LabelParseError::BadNegation {
                    label: s.to_string(),
                    value: other.to_string(),
                })
            }
        };
        for (field, value) in [("type", parts[0]), ("core", parts[2])] {
            if value.is_empty() {
                return Err(LabelParseError::EmptyField {
                    label: s.to_string(),
                    field,
                });
            }
        }
        let mut modifiers = Vec::new();
        for part in &parts[3..] {
            let (category, value) =
                part.split_once(':')
                    .ok_or_else(|| LabelParseError::BadModifier {
                        label: s.to_string(),
                        value: part.to_string(),
                    })?;
            if category.is_empty() || value.is_empty() {
                return Err(LabelParseError::BadModifier {
                    label: s.to_string(),
                    value: part.to_string(),
                });
            }
            modifiers.push(Modifier::new(category, value));
        }
        Ok(FflLabel::new(parts[0], present, parts[2], modifiers))
    }

    /// The bare-core version of this label (modifiers dropped).
    pub fn bare(&self) -> FflLabel {
        FflLabel::new(self.finding_type.clone(), self.present, self.core.clone(), vec![])
    }

    pub fn has_category(&self, category: &str) -> bool {
        self.modifiers.iter().any(|m| m.category == category)
    }
}

impl fmt::Display for FflLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.key())
    }
}

impl FromStr for FflLabel {
    type Err = LabelParseError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        FflLabel::parse(s)
    }
}

/// A vocabulary concept located in a sentence; token indices are 1-based and
/// inclusive.
#[derive(Debug, Clone, PartialEq)]
pub struct Concept {
    pub start: usize,
    pub end: usize,
    pub hit: TermHit,
}

impl Concept {
    fn tokens(&self) -> impl Iterator<Item = usize> {
        self.start..=self.end
    }

    fn is_finding(&self) -> bool {
        matches!(self.hit, TermHit::Finding { .. })
    }
}

/// A phrasal group: a connected component of non-unknown tokens. When the
/// group contains a core finding, `core_id` names the leftmost one.
#[derive(Debug, Clone, PartialEq)]
pub struct PhrasalGroup {
    pub token_indices: BTreeSet<usize>,
    pub core_id: Option<String>,
}

impl PhrasalGroup {
    pub fn contains_core(&self) -> bool {
        self.core_id.is_some()
    }
}

/// Bookkeeping counters per sentence; these aggregate into the
/// extraction-accuracy audit.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct SentenceAudit {
    pub concepts: usize,
    pub groups: usize,
    pub negated_cores: usize,
    pub discarded_modifiers: usize,
}

/// One extracted label plus the 1-based token indices it traces to.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExtractedLabel {
    #[serde(with = "ffl_as_key")]
    pub label: FflLabel,
    pub tokens: Vec<usize>,
}

mod ffl_as_key {
    use super::FflLabel;
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    pub fn serialize<S: Serializer>(label: &FflLabel, ser: S) -> Result<S::Ok, S::Error> {
        label.key().serialize(ser)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(de: D) -> Result<FflLabel, D::Error> {
        let raw = String::deserialize(de)?;
        FflLabel::parse(&raw).map_err(serde::de::Error::custom)
    }
}

/// Extraction output for one sentence.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SentenceExtraction {
    pub report_id: String,
    pub sentence_index: usize,
    pub text: String,
    pub labels: Vec<ExtractedLabel>,
    pub audit: SentenceAudit,
}

/// All sentence extractions of one report, in order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportExtraction {
    pub report_id: String,
    pub sentences: Vec<SentenceExtraction>,
}

/// Step (a): longest-match scan for finding synonyms and modifier terms.
/// Overlapping shorter matches are dropped.
pub fn detect_concepts(sentence: &ParsedSentence, lexicon: &Lexicon) -> Vec<Concept> {
    let lemmas = sentence.lemmas();
    let surfaces = sentence.surfaces();
    lexicon
        .scan_terms(&lemmas, &surfaces)
        .into_iter()
        .map(|TermSpan { start, end, hit }| Concept {
            start: start + 1,
            end: end + 1,
            hit,
        })
        .collect()
}

/// Step (b): phrasal grouping.
///
/// Nodes are the non-unknown tokens (tokens inside detected concept spans
/// always count as known). A dependency link contributes an edge when every
/// token lying strictly between its endpoints is unknown or concept-internal;
/// links spanning other known material do not merge groups. Connected
/// components become phrasal groups, ordered by their first token.
pub fn group_phrases(sentence: &ParsedSentence, concepts: &[Concept]) -> Vec<PhrasalGroup> {
    let n = sentence.tokens.len();
    if n == 0 {
        return Vec::new();
    }
    let mut in_concept = vec![false; n + 1];
    for c in concepts {
        for i in c.tokens() {
            in_concept[i] = true;
        }
    }
    let known: Vec<bool> = std::iter::once(false)
        .chain(sentence.tokens.iter().map(|t| !t.is_unknown || in_concept[t.index]))
        .collect();

    let mut parent: Vec<usize> = (0..=n).collect();
    fn find(parent: &mut [usize], x: usize) -> usize {
        let mut root = x;
        while parent[root] != root {
            root = parent[root];
        }
        let mut cursor = x;
        while parent[cursor] != root {
            let next = parent[cursor];
            parent[cursor] = root;
            cursor = next;
        }
        root
    }

    for tok in &sentence.tokens {
        if tok.head == 0 {
            continue;
        }
        let (a, b) = (tok.index.min(tok.head), tok.index.max(tok.head));
        if !known[a] || !known[b] {
            continue;
        }
        let bridgeable = (a + 1..b).all(|i| !known[i] || in_concept[i]);
        if bridgeable {
            let (ra, rb) = (find(&mut parent, a), find(&mut parent, b));
            if ra != rb {
                parent[ra] = rb;
            }
        }
    }

    let mut components: BTreeMap<usize, BTreeSet<usize>> = BTreeMap::new();
    for (i, _) in known.iter().enumerate().skip(1).filter(|(_, k)| **k) {
        let root = find(&mut parent, i);
        components.entry(root).or_default().insert(i);
    }

    let mut groups: Vec<PhrasalGroup> = components
        .into_values()
        .map(|token_indices| PhrasalGroup {
            token_indices,
            core_id: None,
        })
        .collect();
    groups.sort_by_key(|g| *g.token_indices.iter().next().unwrap());

    for group in groups.iter_mut() {
        let leftmost_core = concepts
            .iter()
            .filter(|c| c.is_finding() && group.token_indices.contains(&c.end))
            .min_by_key(|c| c.start);
        if let Some(Concept {
            hit: TermHit::Finding { id },
            ..
        }) = leftmost_core
        {
            group.core_id = Some(id.clone());
        }
    }
    groups
}

/// A core finding occurrence with its associated modifiers.
#[derive(Debug, Clone, PartialEq)]
pub struct CoreOccurrence {
    pub finding_id: String,
    pub start: usize,
    pub end: usize,
    pub modifiers: Vec<(Modifier, Vec<usize>)>,
}

/// Step (b) continued: attach modifiers to core findings.
///
/// Modifiers sharing a group with a core attach to the nearest core span of
/// that group; modifiers in coreless groups attach to the nearest
/// core-bearing group by token distance (ties go to the preceding group).
/// Modifiers in a sentence without any core finding are discarded and
/// counted.
pub fn associate_modifiers(
    groups: &[PhrasalGroup],
    concepts: &[Concept],
) -> (Vec<CoreOccurrence>, usize) {
    let group_of_token: HashMap<usize, usize> = groups
        .iter()
        .enumerate()
        .flat_map(|(gi, g)| g.token_indices.iter().map(move |&t| (t, gi)))
        .collect();
    let group_of = |c: &Concept| group_of_token.get(&c.end).copied();

    let mut cores: Vec<CoreOccurrence> = Vec::new();
    let mut core_group: Vec<Option<usize>> = Vec::new();
    for c in concepts {
        if let TermHit::Finding { id } = &c.hit {
            cores.push(CoreOccurrence {
                finding_id: id.clone(),
                start: c.start,
                end: c.end,
                modifiers: Vec::new(),
            });
            core_group.push(group_of(c));
        }
    }

    let span_distance = |a_start: usize, a_end: usize, b_start: usize, b_end: usize| -> usize {
        if a_end < b_start {
            b_start - a_end
        } else {
            // Overlapping spans saturate to zero.
            a_start.saturating_sub(b_end)
        }
    };

    // Nearest core occurrence within a candidate set; equidistant ties go to
    // the preceding (earlier) core.
    let nearest_core = |candidates: &[usize], m_start: usize, m_end: usize, cores: &[CoreOccurrence]| {
        candidates
            .iter()
            .copied()
            .min_by_key(|&ci| {
                let c = &cores[ci];
                let d = span_distance(m_start, m_end, c.start, c.end);
                (d, c.start)
            })
            .expect("candidate set is non-empty")
    };

    let mut discarded = 0usize;
    for concept in concepts {
        let TermHit::Modifier { category, value } = &concept.hit else {
            continue;
        };
        let modifier = Modifier::new(category.clone(), value.clone());
        let tokens: Vec<usize> = concept.tokens().collect();
        let own_group = group_of(concept);

        let in_group: Vec<usize> = (0..cores.len())
            .filter(|&ci| core_group[ci].is_some() && core_group[ci] == own_group)
            .collect();
        let target = if !in_group.is_empty() {
            Some(nearest_core(&in_group, concept.start, concept.end, &cores))
        } else {
            // Coreless group: nearest core-bearing group by token distance,
            // preceding group on ties, then nearest core inside it.
            let mut best: Option<(usize, usize, usize)> = None; // (dist, nearest_tok, group)
            for (gi, group) in groups.iter().enumerate() {
                if group.core_id.is_none() {
                    continue;
                }
                for &t in &group.token_indices {
                    let d = span_distance(concept.start, concept.end, t, t);
                    let cand = (d, t, gi);
                    if best.is_none_or(|b| (cand.0, cand.1) < (b.0, b.1)) {
                        best = Some(cand);
                    }
                }
            }
            best.map(|(_, _, gi)| {
                let members: Vec<usize> =
                    (0..cores.len()).filter(|&ci| core_group[ci] == Some(gi)).collect();
                nearest_core(&members, concept.start, concept.end, &cores)
            })
        };

        match target {
            Some(ci) => cores[ci].modifiers.push((modifier, tokens)),
            None => discarded += 1,
        }
    }

    (cores, discarded)
}

/// Step (c): negation sense detection.
///
/// Each seed's scope expands iteratively along dependency edges (to head and
/// dependents) until fixpoint. An edge is never crossed when a boundary word
/// (adversative conjunction) lies between its endpoints, and a scope never
/// enters a phrasal group already claimed by an earlier seed. A core finding
/// is negated when its span intersects any scope.
pub fn detect_negation(
    sentence: &ParsedSentence,
    groups: &[PhrasalGroup],
    concepts: &[Concept],
    lexicon: &Lexicon,
) -> HashMap<(usize, usize), bool> {
    let n = sentence.tokens.len();
    let mut negated: HashMap<(usize, usize), bool> = concepts
        .iter()
        .filter(|c| c.is_finding())
        .map(|c| ((c.start, c.end), false))
        .collect();
    if n == 0 {
        return negated;
    }

    let lemmas = sentence.lemmas();
    let surfaces = sentence.surfaces();
    let seed_spans: Vec<(usize, usize)> = lexicon
        .scan_seeds(&lemmas, &surfaces)
        .into_iter()
        .map(|(s, e)| (s + 1, e + 1))
        .collect();
    if seed_spans.is_empty() {
        return negated;
    }

    let boundary: Vec<bool> = std::iter::once(false)
        .chain(lemmas.iter().map(|l| lexicon.is_boundary_word(l)))
        .collect();
    let adjacency = sentence.adjacency();
    let group_of_token: HashMap<usize, usize> = groups
        .iter()
        .enumerate()
        .flat_map(|(gi, g)| g.token_indices.iter().map(move |&t| (t, gi)))
        .collect();

    let mut claimed: HashMap<usize, usize> = HashMap::new();
    let mut scopes: Vec<BTreeSet<usize>> = Vec::new();

    for (seed_idx, &(s_start, s_end)) in seed_spans.iter().enumerate() {
        let mut scope: BTreeSet<usize> = (s_start..=s_end).collect();
        let mut frontier: Vec<usize> = scope.iter().copied().collect();
        while let Some(u) = frontier.pop() {
            for &v in &adjacency[u] {
                if scope.contains(&v) || boundary[v] {
                    continue;
                }
                let (lo, hi) = (u.min(v), u.max(v));
                if (lo + 1..hi).any(|i| boundary[i]) {
                    continue;
                }
                if let Some(&owner) = group_of_token.get(&v).and_then(|g| claimed.get(g)) {
                    if owner != seed_idx {
                        continue;
                    }
                }
                scope.insert(v);
                frontier.push(v);
            }
        }
        for &t in &scope {
            if let Some(&g) = group_of_token.get(&t) {
                claimed.entry(g).or_insert(seed_idx);
            }
        }
        scopes.push(scope);
    }

    for (span, flag) in negated.iter_mut() {
        let covered = scopes
            .iter()
            .any(|scope| (span.0..=span.1).any(|t| scope.contains(&t)));
        *flag = covered;
    }
    negated
}

/// Step (d): pattern completion. Labels without a location modifier gain the
/// lexicon's default location for their (pre-rollup) core, taken from the
/// nearest ancestor-or-self that defines one; cores are then ontologically
/// rolled up and the finding type follows the rolled-up core.
pub fn complete_pattern(labels: Vec<FflLabel>, lexicon: &Lexicon) -> Vec<FflLabel> {
    labels
        .into_iter()
        .map(|label| complete_one(label, lexicon))
        .collect()
}

fn complete_one(label: FflLabel, lexicon: &Lexicon) -> FflLabel {
    let mut modifiers = label.modifiers.clone();
    if !label.has_category("location") {
        if let Some(location) = default_location(lexicon, &label.core) {
            modifiers.push(Modifier::new("location", location));
        }
    }
    match lexicon.rollup(&label.core) {
        Ok(core) => {
            let finding_type = lexicon
                .finding(core)
                .map(|f| f.finding_type.clone())
                .unwrap_or(label.finding_type);
            FflLabel::new(finding_type, label.present, core.to_string(), modifiers)
        }
        Err(_) => FflLabel::new(label.finding_type, label.present, label.core, modifiers),
    }
}

fn default_location(lexicon: &Lexicon, core: &str) -> Option<String> {
    let mut cursor = lexicon.finding(core)?;
    loop {
        if let Some(loc) = &cursor.default_location {
            return Some(loc.clone());
        }
        cursor = lexicon.finding(cursor.ontology_parent.as_deref()?)?;
    }
}

/// Run all four extraction steps over an already-parsed sentence.
pub fn extract_sentence(sentence: &ParsedSentence, lexicon: &Lexicon) -> SentenceExtraction {
    let concepts = detect_concepts(sentence, lexicon);
    let groups = group_phrases(sentence, &concepts);
    let (cores, discarded_modifiers) = associate_modifiers(&groups, &concepts);
    let negation = detect_negation(sentence, &groups, &concepts, lexicon);

    let mut negated_cores = 0usize;
    let mut merged: BTreeMap<String, ExtractedLabel> = BTreeMap::new();
    for core in &cores {
        let negated = negation.get(&(core.start, core.end)).copied().unwrap_or(false);
        if negated {
            negated_cores += 1;
        }
        let finding_type = lexicon
            .finding(&core.finding_id)
            .map(|f| f.finding_type.clone())
            .unwrap_or_default();
        let mut tokens: Vec<usize> = (core.start..=core.end).collect();
        let mut modifiers = Vec::new();
        for (modifier, mod_tokens) in &core.modifiers {
            modifiers.push(modifier.clone());
            tokens.extend(mod_tokens.iter().copied());
        }
        let raw = FflLabel::new(finding_type, !negated, core.finding_id.clone(), modifiers);
        let label = complete_one(raw, lexicon);
        tokens.sort_unstable();
        tokens.dedup();
        merged
            .entry(label.key())
            .and_modify(|existing| {
                existing.tokens.extend(tokens.iter().copied());
                existing.tokens.sort_unstable();
                existing.tokens.dedup();
            })
            .or_insert(ExtractedLabel { label, tokens });
    }

    SentenceExtraction {
        report_id: sentence.report_id.clone(),
        sentence_index: sentence.sentence_index,
        text: sentence.raw_text.clone(),
        labels: merged.into_values().collect(),
        audit: SentenceAudit {
            concepts: concepts.len(),
            groups: groups.len(),
            negated_cores,
            discarded_modifiers,
        },
    }
}

/// Restrict a report to its Findings/Impression sections. Headers are lines
/// beginning `Name:` (or a bare `FINDINGS`/`IMPRESSION` line), matched
/// case-insensitively; a report without such headers is used whole.
pub fn reportable_region(text: &str) -> String {
    let mut sections: Vec<(String, String)> = vec![(String::new(), String::new())];
    for line in text.lines() {
        let bare = line.trim().to_lowercase();
        if matches!(bare.as_str(), "findings" | "impression" | "impressions") {
            sections.push((bare, String::new()));
            continue;
        }
        let mut handled = false;
        if let Some(colon) = line.find(':') {
            let head = line[..colon].trim();
            if !head.is_empty()
                && head.len() <= 30
                && head.chars().all(|c| c.is_alphabetic() || c == ' ')
            {
                let mut content = line[colon + 1..].trim().to_string();
                if !content.is_empty() {
                    content.push('\n');
                }
                sections.push((head.to_lowercase(), content));
                handled = true;
            }
        }
        if !handled {
            let section = sections.last_mut().expect("at least one section");
            section.1.push_str(line);
            section.1.push('\n');
        }
    }
    let wanted: Vec<&str> = sections
        .iter()
        .filter(|(name, _)| matches!(name.as_str(), "findings" | "impression" | "impressions"))
        .map(|(_, content)| content.as_str())
        .collect();
    if wanted.is_empty() {
        text.to_string()
    } else {
        wanted.join("\n")
    }
}

/// Extract a corpus of (report_id, text) pairs in parallel. Extraction is
/// pure per sentence, so per-report parallelism preserves the sequential
/// output exactly.
pub fn extract_corpus(reports: &[(String, String)], lexicon: &Lexicon) -> Vec<ReportExtraction> {
    use rayon::prelude::*;
    reports
        .par_iter()
        .map(|(id, text)| extract_report(id, text, lexicon))
        .collect()
}

/// Extract a whole report from raw text using the fallback parser:
/// section restriction, sentence segmentation, then per-sentence extraction.
pub fn extract_report(report_id: &str, text: &str, lexicon: &Lexicon) -> ReportExtraction {
    let region = reportable_region(text);
    let sentences = segment_sentences(&region);
    let extractions = sentences
        .iter()
        .enumerate()
        .map(|(i, raw)| {
            let parsed = fallback_parse(report_id, i, raw, lexicon);
            extract_sentence(&parsed, lexicon)
        })
        .collect();
    ReportExtraction {
        report_id: report_id.to_string(),
        sentences: extractions,
    }
}

/// Group already-extracted sentences into per-report records, preserving
/// input order. Out-of-order repeats of a report id are appended to the
/// existing record.
pub fn group_extractions(sentences: Vec<SentenceExtraction>) -> Vec<ReportExtraction> {
    let mut reports: Vec<ReportExtraction> = Vec::new();
    let mut position: HashMap<String, usize> = HashMap::new();
    for sentence in sentences {
        let idx = *position.entry(sentence.report_id.clone()).or_insert_with(|| {
            reports.push(ReportExtraction {
                report_id: sentence.report_id.clone(),
                sentences: Vec::new(),
            });
            reports.len() - 1
        });
        reports[idx].sentences.push(sentence);
    }
    reports
}

/// Extract over externally parsed sentences, grouping them by report id in
/// input order.
pub fn extract_parsed(sentences: &[ParsedSentence], lexicon: &Lexicon) -> Vec<ReportExtraction> {
    let mut reports: Vec<ReportExtraction> = Vec::new();
    let mut seen: HashSet<String> = HashSet::new();
    for sentence in sentences {
        if reports.last().map(|r| r.report_id.as_str()) != Some(sentence.report_id.as_str()) {
            if !seen.insert(sentence.report_id.clone()) {
                // Out-of-order repeat of a report id: append to the existing
                // record rather than creating a duplicate.
                let idx = reports
                    .iter()
                    .position(|r| r.report_id == sentence.report_id)
                    .expect("seen implies present");
                reports[idx].sentences.push(extract_sentence(sentence, lexicon));
                continue;
            }
            reports.push(ReportExtraction {
                report_id: sentence.report_id.clone(),
                sentences: Vec::new(),
            });
        }
        let record = reports.last_mut().expect("just pushed");
        record.sentences.push(extract_sentence(sentence, lexicon));
    }
    reports
}
