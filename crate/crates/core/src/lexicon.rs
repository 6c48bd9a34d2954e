//! Core-finding and modifier vocabulary.
//!
//! A [`Lexicon`] holds the finding vocabulary (with synonyms, ontology
//! roll-ups, default anatomical locations and clinician criticality ranks),
//! the nine modifier categories, and the negation seed terms. It is loaded
//! from a human-editable JSON document (see `docs/lexicon-schema.md` in the
//! repository root) and is immutable after load, so shared concurrent reads
//! are safe.

use std::collections::{HashMap, HashSet};
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::text::normalize_term;

/// The demonstration lexicon bundled with the crate. Roughly 30 findings,
/// all nine modifier categories and 15 negation seeds; every test corpus in
/// the repository is written against it.
pub const DEMO_LEXICON_JSON: &str = include_str!("../assets/demo_lexicon.json");

/// Default finding-type category names. A lexicon file may override them via
/// the optional `finding_types` array.
pub const DEFAULT_FINDING_TYPES: &[&str] = &[
    "anatomical finding",
    "tubes and lines",
    "external device",
    "viewpoint issue",
    "implied disease",
    "technical quality",
];

/// Default scope boundary words for negation detection; a lexicon file may
/// override them via the optional `boundary_words` array.
pub const DEFAULT_BOUNDARY_WORDS: &[&str] = &["but", "however", "although", "though", "yet"];

/// A valid lexicon carries exactly this many modifier categories.
pub const MODIFIER_CATEGORY_COUNT: usize = 9;

const FORBIDDEN_CHARS: &[char] = &['<', '>', '|'];

#[derive(Debug, Error)]
pub enum LexiconError {
    #[error("i/o error reading lexicon: {0}")]
    Io(#[from] std::io::Error),
    #[error("lexicon schema violation: {0}")]
    Schema(String),
    #[error("duplicate finding id {0:?}")]
    DuplicateId(String),
    #[error("term {term:?} is claimed by both {first} and {second}")]
    DuplicateTerm {
        term: String,
        first: String,
        second: String,
    },
    #[error("finding {child:?} references unknown ontology parent {parent:?}")]
    UnknownParent { child: String, parent: String },
    #[error("cyclic ontology chain through finding {0:?}")]
    CyclicOntology(String),
    #[error("finding {id:?} has criticality {value}, expected 1..=10")]
    CriticalityOutOfRange { id: String, value: u8 },
    #[error("finding {id:?} has unknown finding type {finding_type:?}")]
    UnknownFindingType { id: String, finding_type: String },
    #[error("expected exactly {MODIFIER_CATEGORY_COUNT} modifier categories, found {0}")]
    ModifierCategoryCount(usize),
    #[error("negation_seeds must be non-empty")]
    EmptyNegationSeeds,
    #[error("unknown finding id {0:?}")]
    UnknownId(String),
}

impl LexiconError {
    fn schema(msg: impl Into<String>) -> Self {
        LexiconError::Schema(msg.into())
    }
}

/// One concept of the finding vocabulary.
///
/// Findings form an ontology through `ontology_parent`; entries flagged with
/// `cfl` are core (CFL-level) findings that fine labels roll up to. When the
/// flag is omitted it defaults to `true` for root findings and `false` for
/// findings with a parent.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoreFinding {
    pub id: String,
    pub canonical_name: String,
    pub finding_type: String,
    #[serde(default)]
    pub synonyms: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ontology_parent: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub default_location: Option<String>,
    /// Clinician criticality rank on a 1..=10 scale; drives label weights.
    pub criticality: u8,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cfl: Option<bool>,
}

impl CoreFinding {
    /// Whether this entry is a core (CFL-level) finding.
    pub fn is_cfl(&self) -> bool {
        self.cfl.unwrap_or(self.ontology_parent.is_none())
    }
}

/// One of the nine modifier categories and its term vocabulary.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModifierDef {
    pub category: String,
    pub terms: Vec<String>,
}

/// What a scanned token span matched in the vocabulary.
#[derive(Debug, Clone, PartialEq)]
pub enum TermHit {
    Finding { id: String },
    Modifier { category: String, value: String },
}

/// A maximal vocabulary match over a token sequence. Token offsets are
/// 0-based and inclusive.
#[derive(Debug, Clone, PartialEq)]
pub struct TermSpan {
    pub start: usize,
    pub end: usize,
    pub hit: TermHit,
}

#[derive(Debug, Clone, PartialEq)]
enum TermEntry {
    Finding(usize),
    Modifier(usize),
}

#[derive(Debug, Clone, Default, PartialEq)]
struct LexIndex {
    by_id: HashMap<String, usize>,
    terms: HashMap<String, TermEntry>,
    seeds: HashSet<String>,
    boundary: HashSet<String>,
    rollup: Vec<usize>,
    max_term_tokens: usize,
    max_seed_tokens: usize,
}

/// The loaded vocabulary. Construct via [`load_lexicon`], [`Lexicon::from_json`]
/// or [`Lexicon::from_parts`]; all of them validate the invariants and build
/// the term indexes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Lexicon {
    pub version: String,
    #[serde(default)]
    pub finding_types: Vec<String>,
    pub findings: Vec<CoreFinding>,
    pub modifiers: Vec<ModifierDef>,
    pub negation_seeds: Vec<String>,
    #[serde(default)]
    pub boundary_words: Vec<String>,
    #[serde(skip)]
    index: LexIndex,
}

/// Load and validate a lexicon file.
pub fn load_lexicon(path: &Path) -> Result<Lexicon, LexiconError> {
    let raw = fs::read_to_string(path)?;
    Lexicon::from_json(&raw)
}

/// Write a lexicon back out as pretty-printed JSON. `load -> save -> load`
/// yields an identical lexicon.
pub fn save_lexicon(lexicon: &Lexicon, path: &Path) -> Result<(), LexiconError> {
    fs::write(path, lexicon.to_json())?;
    Ok(())
}

impl Lexicon {
    /// Parse and validate a lexicon from its JSON form.
    pub fn from_json(raw: &str) -> Result<Lexicon, LexiconError> {
        let mut lexicon: Lexicon =
            serde_json::from_str(raw).map_err(|e| LexiconError::schema(e.to_string()))?;
        lexicon.normalize_and_validate()?;
        Ok(lexicon)
    }

    /// Validate a lexicon assembled in code.
    pub fn from_parts(
        version: String,
        finding_types: Vec<String>,
        findings: Vec<CoreFinding>,
        modifiers: Vec<ModifierDef>,
        negation_seeds: Vec<String>,
        boundary_words: Vec<String>,
    ) -> Result<Lexicon, LexiconError> {
        let mut lexicon = Lexicon {
            version,
            finding_types,
            findings,
            modifiers,
            negation_seeds,
            boundary_words,
            index: LexIndex::default(),
        };
        lexicon.normalize_and_validate()?;
        Ok(lexicon)
    }

    /// The bundled demonstration lexicon.
    pub fn demo() -> Lexicon {
        Lexicon::from_json(DEMO_LEXICON_JSON).expect("bundled demo lexicon is valid")
    }

    pub fn to_json(&self) -> String {
        let mut out = serde_json::to_string_pretty(self).expect("lexicon serializes");
        out.push('\n');
        out
    }

    pub fn finding(&self, id: &str) -> Option<&CoreFinding> {
        self.index.by_id.get(id).map(|&i| &self.findings[i])
    }

    /// Nearest ancestor flagged as a core (CFL-level) finding; identity when
    /// the finding is already core.
    pub fn rollup(&self, id: &str) -> Result<&str, LexiconError> {
        let idx = *self
            .index
            .by_id
            .get(id)
            .ok_or_else(|| LexiconError::UnknownId(id.to_string()))?;
        Ok(&self.findings[self.index.rollup[idx]].id)
    }

    /// Resolve a synonym (or canonical name) to its finding.
    pub fn resolve_synonym(&self, term: &str) -> Option<&CoreFinding> {
        match self.index.terms.get(&normalize_term(term)) {
            Some(TermEntry::Finding(i)) => Some(&self.findings[*i]),
            _ => None,
        }
    }

    pub fn is_boundary_word(&self, word: &str) -> bool {
        self.index.boundary.contains(&normalize_term(word))
    }

    /// Greedy left-to-right longest-match scan of finding synonyms and
    /// modifier terms over a token sequence. Both the lemma and the surface
    /// reading of a span are tried; overlapping shorter matches are dropped.
    pub fn scan_terms(&self, lemmas: &[String], surfaces: &[String]) -> Vec<TermSpan> {
        self.scan(lemmas, surfaces, false)
    }

    /// Same scan over the negation seed vocabulary.
    pub fn scan_seeds(&self, lemmas: &[String], surfaces: &[String]) -> Vec<(usize, usize)> {
        self.scan(lemmas, surfaces, true)
            .into_iter()
            .map(|s| (s.start, s.end))
            .collect()
    }

    fn scan(&self, lemmas: &[String], surfaces: &[String], seeds: bool) -> Vec<TermSpan> {
        debug_assert_eq!(lemmas.len(), surfaces.len());
        let n = lemmas.len();
        let max_len = if seeds {
            self.index.max_seed_tokens
        } else {
            self.index.max_term_tokens
        };
        let mut spans = Vec::new();
        let mut i = 0;
        while i < n {
            let mut matched = None;
            let upper = max_len.min(n - i);
            for len in (1..=upper).rev() {
                let end = i + len - 1;
                let lemma_key = lemmas[i..=end].join(" ");
                let surface_key = surfaces[i..=end].join(" ");
                let hit = if seeds {
                    if self.index.seeds.contains(&lemma_key)
                        || self.index.seeds.contains(&surface_key)
                    {
                        // Seed spans carry no payload; reuse the finding arm
                        // as a placeholder.
                        Some(TermHit::Finding { id: String::new() })
                    } else {
                        None
                    }
                } else {
                    self.lookup_entry(&lemma_key)
                        .or_else(|| self.lookup_entry(&surface_key))
                };
                if let Some(hit) = hit {
                    matched = Some(TermSpan {
                        start: i,
                        end,
                        hit,
                    });
                    break;
                }
            }
            match matched {
                Some(span) => {
                    i = span.end + 1;
                    spans.push(span);
                }
                None => i += 1,
            }
        }
        spans
    }

    fn lookup_entry(&self, key: &str) -> Option<TermHit> {
        match self.index.terms.get(key)? {
            TermEntry::Finding(i) => Some(TermHit::Finding {
                id: self.findings[*i].id.clone(),
            }),
            TermEntry::Modifier(i) => Some(TermHit::Modifier {
                category: self.modifiers[*i].category.clone(),
                value: key.to_string(),
            }),
        }
    }

    fn normalize_and_validate(&mut self) -> Result<(), LexiconError> {
        if self.finding_types.is_empty() {
            self.finding_types = DEFAULT_FINDING_TYPES.iter().map(|s| s.to_string()).collect();
        }
        if self.boundary_words.is_empty() {
            self.boundary_words = DEFAULT_BOUNDARY_WORDS.iter().map(|s| s.to_string()).collect();
        }
        self.finding_types = self.finding_types.iter().map(|t| normalize_term(t)).collect();
        self.boundary_words = self.boundary_words.iter().map(|t| normalize_term(t)).collect();

        let type_set: HashSet<&String> = self.finding_types.iter().collect();
        let mut index = LexIndex::default();

        for (i, finding) in self.findings.iter_mut().enumerate() {
            finding.id = normalize_term(&finding.id);
            finding.canonical_name = normalize_term(&finding.canonical_name);
            finding.finding_type = normalize_term(&finding.finding_type);
            finding.ontology_parent = finding.ontology_parent.as_deref().map(normalize_term);
            finding.default_location = finding.default_location.as_deref().map(normalize_term);
            if finding.id.is_empty() {
                return Err(LexiconError::schema(format!("finding #{i} has an empty id")));
            }
            check_chars(&finding.id, "finding id")?;
            if finding.criticality < 1 || finding.criticality > 10 {
                return Err(LexiconError::CriticalityOutOfRange {
                    id: finding.id.clone(),
                    value: finding.criticality,
                });
            }
            if !type_set.contains(&finding.finding_type) {
                return Err(LexiconError::UnknownFindingType {
                    id: finding.id.clone(),
                    finding_type: finding.finding_type.clone(),
                });
            }
            if index.by_id.insert(finding.id.clone(), i).is_some() {
                return Err(LexiconError::DuplicateId(finding.id.clone()));
            }
            // Synonyms are stored lowercased, whitespace-normalized and
            // unique within a finding; the canonical name always matches.
            let mut seen = HashSet::new();
            let mut normalized = Vec::new();
            for syn in finding
                .synonyms
                .iter()
                .map(|s| normalize_term(s))
                .chain(std::iter::once(finding.canonical_name.clone()))
            {
                if syn.is_empty() {
                    return Err(LexiconError::schema(format!(
                        "finding {:?} has an empty synonym",
                        finding.id
                    )));
                }
                check_chars(&syn, "synonym")?;
                if seen.insert(syn.clone()) && syn != finding.canonical_name {
                    normalized.push(syn);
                }
            }
            if !seen.contains(&finding.canonical_name) {
                seen.insert(finding.canonical_name.clone());
            }
            finding.synonyms = normalized;
        }

        // Ontology: parents must exist, chains must be acyclic and reach a
        // CFL-level finding.
        index.rollup = vec![usize::MAX; self.findings.len()];
        for (i, finding) in self.findings.iter().enumerate() {
            if let Some(parent) = &finding.ontology_parent {
                if !index.by_id.contains_key(parent) {
                    return Err(LexiconError::UnknownParent {
                        child: finding.id.clone(),
                        parent: parent.clone(),
                    });
                }
            } else if !finding.is_cfl() {
                return Err(LexiconError::schema(format!(
                    "root finding {:?} must be a core (CFL-level) finding",
                    finding.id
                )));
            }
            let mut visited = HashSet::new();
            let mut cursor = i;
            loop {
                if !visited.insert(cursor) {
                    return Err(LexiconError::CyclicOntology(finding.id.clone()));
                }
                if self.findings[cursor].is_cfl() {
                    index.rollup[i] = cursor;
                    break;
                }
                match &self.findings[cursor].ontology_parent {
                    Some(parent) => cursor = index.by_id[parent],
                    None => {
                        return Err(LexiconError::schema(format!(
                            "ontology chain from {:?} never reaches a core finding",
                            finding.id
                        )))
                    }
                }
            }
        }

        // Term index: every synonym and modifier term maps to exactly one
        // vocabulary entry across the whole lexicon.
        for (i, finding) in self.findings.iter().enumerate() {
            for syn in finding.synonyms.iter().chain(std::iter::once(&finding.canonical_name)) {
                let owner = format!("finding {:?}", finding.id);
                insert_term(&mut index, syn, TermEntry::Finding(i), &owner, self)?;
            }
        }

        if self.modifiers.len() != MODIFIER_CATEGORY_COUNT {
            return Err(LexiconError::ModifierCategoryCount(self.modifiers.len()));
        }
        let mut categories = HashSet::new();
        for def in self.modifiers.iter_mut() {
            def.category = normalize_term(&def.category);
            if def.category.is_empty() || def.category.contains(':') {
                return Err(LexiconError::schema(format!(
                    "invalid modifier category {:?}",
                    def.category
                )));
            }
            check_chars(&def.category, "modifier category")?;
            if !categories.insert(def.category.clone()) {
                return Err(LexiconError::schema(format!(
                    "duplicate modifier category {:?}",
                    def.category
                )));
            }
            def.terms = def.terms.iter().map(|t| normalize_term(t)).collect();
        }
        for (i, def) in self.modifiers.iter().enumerate() {
            for term in &def.terms {
                if term.is_empty() {
                    return Err(LexiconError::schema(format!(
                        "modifier category {:?} has an empty term",
                        def.category
                    )));
                }
                check_chars(term, "modifier term")?;
                let owner = format!("modifier category {:?}", def.category);
                insert_term(&mut index, term, TermEntry::Modifier(i), &owner, self)?;
            }
        }

        if self.negation_seeds.is_empty() {
            return Err(LexiconError::EmptyNegationSeeds);
        }
        self.negation_seeds = self.negation_seeds.iter().map(|s| normalize_term(s)).collect();
        for seed in &self.negation_seeds {
            if seed.is_empty() {
                return Err(LexiconError::schema("empty negation seed".to_string()));
            }
            index.max_seed_tokens = index.max_seed_tokens.max(token_count(seed));
            index.seeds.insert(seed.clone());
        }

        index.boundary = self.boundary_words.iter().cloned().collect();
        self.index = index;
        Ok(())
    }
}

fn check_chars(s: &str, what: &str) -> Result<(), LexiconError> {
    if s.contains(FORBIDDEN_CHARS) {
        return Err(LexiconError::schema(format!(
            "{what} {s:?} contains a reserved character (one of '<', '>', '|')"
        )));
    }
    Ok(())
}

fn token_count(s: &str) -> usize {
    s.split_whitespace().count()
}

fn insert_term(
    index: &mut LexIndex,
    term: &str,
    entry: TermEntry,
    owner: &str,
    lexicon: &Lexicon,
) -> Result<(), LexiconError> {
    if let Some(existing) = index.terms.get(term) {
        if *existing != entry {
            let first = match existing {
                TermEntry::Finding(i) => format!("finding {:?}", lexicon.findings[*i].id),
                TermEntry::Modifier(i) => {
                    format!("modifier category {:?}", lexicon.modifiers[*i].category)
                }
            };
            return Err(LexiconError::DuplicateTerm {
                term: term.to_string(),
                first,
                second: owner.to_string(),
            });
        }
        return Ok(());
    }
    index.max_term_tokens = index.max_term_tokens.max(token_count(term));
    index.terms.insert(term.to_string(), entry);
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn finding(id: &str, parent: Option<&str>, cfl: Option<bool>) -> CoreFinding {
        CoreFinding {
            id: id.to_string(),
            canonical_name: id.to_string(),
            finding_type: "anatomical finding".to_string(),
            synonyms: vec![],
            ontology_parent: parent.map(|p| p.to_string()),
            default_location: None,
            criticality: 5,
            cfl,
        }
    }

    fn nine_categories() -> Vec<ModifierDef> {
        Lexicon::demo().modifiers
    }

    fn build(findings: Vec<CoreFinding>) -> Result<Lexicon, LexiconError> {
        Lexicon::from_parts(
            "test".into(),
            vec![],
            findings,
            nine_categories(),
            vec!["no".into()],
            vec![],
        )
    }

    #[test]
    fn demo_lexicon_loads() {
        let lex = Lexicon::demo();
        assert!(lex.findings.len() >= 30);
        assert_eq!(lex.modifiers.len(), MODIFIER_CATEGORY_COUNT);
        assert!(lex.negation_seeds.len() >= 15);
    }

    #[test]
    fn lexicon_with_78_findings_loads_with_78_entries() {
        let findings: Vec<CoreFinding> =
            (0..78).map(|i| finding(&format!("finding {i}"), None, None)).collect();
        let lex = build(findings).unwrap();
        assert_eq!(lex.findings.len(), 78);
    }

    #[test]
    fn duplicate_id_rejected() {
        let err = build(vec![finding("opacity", None, None), finding("opacity", None, None)])
            .unwrap_err();
        assert!(matches!(err, LexiconError::DuplicateId(id) if id == "opacity"));
    }

    #[test]
    fn self_parent_is_a_cycle() {
        let err = build(vec![finding("opacity", Some("opacity"), Some(false))]).unwrap_err();
        assert!(matches!(err, LexiconError::CyclicOntology(_)));
    }

    #[test]
    fn two_node_cycle_detected() {
        let err = build(vec![
            finding("a", Some("b"), Some(false)),
            finding("b", Some("a"), Some(false)),
        ])
        .unwrap_err();
        assert!(matches!(err, LexiconError::CyclicOntology(_)));
    }

    #[test]
    fn criticality_must_be_in_range() {
        let mut f = finding("opacity", None, None);
        f.criticality = 11;
        assert!(matches!(
            build(vec![f]).unwrap_err(),
            LexiconError::CriticalityOutOfRange { .. }
        ));
    }

    #[test]
    fn rollup_identity_for_core_finding() {
        let lex = Lexicon::demo();
        assert_eq!(lex.rollup("opacity").unwrap(), "opacity");
    }

    #[test]
    fn rollup_walks_subtype_to_core_parent() {
        let lex = Lexicon::demo();
        assert_eq!(lex.rollup("bullous emphysema").unwrap(), "emphysema");
    }

    #[test]
    fn rollup_walks_three_node_chain() {
        // Hand-built chain a -> b -> c where only c is core: both a and b
        // roll up to c.
        let lex = build(vec![
            finding("c", None, None),
            finding("b", Some("c"), Some(false)),
            finding("a", Some("b"), Some(false)),
        ])
        .unwrap();
        assert_eq!(lex.rollup("a").unwrap(), "c");
        assert_eq!(lex.rollup("b").unwrap(), "c");
    }

    #[test]
    fn rollup_is_idempotent_across_demo_lexicon() {
        let lex = Lexicon::demo();
        for f in &lex.findings {
            let once = lex.rollup(&f.id).unwrap().to_string();
            let twice = lex.rollup(&once).unwrap();
            assert_eq!(once, twice, "rollup not idempotent for {}", f.id);
        }
    }

    #[test]
    fn rollup_unknown_id_errors() {
        let lex = Lexicon::demo();
        assert!(matches!(
            lex.rollup("widget").unwrap_err(),
            LexiconError::UnknownId(_)
        ));
    }

    #[test]
    fn every_synonym_resolves_to_exactly_one_finding() {
        let lex = Lexicon::demo();
        for f in &lex.findings {
            for syn in f.synonyms.iter().chain(std::iter::once(&f.canonical_name)) {
                let resolved = lex.resolve_synonym(syn).expect("synonym resolves");
                assert_eq!(resolved.id, f.id, "synonym {syn:?} resolved elsewhere");
            }
        }
    }

    #[test]
    fn term_in_two_categories_rejected() {
        let mut mods = nine_categories();
        mods[2].terms.push("left".to_string()); // already a laterality term
        let err = Lexicon::from_parts(
            "test".into(),
            vec![],
            vec![finding("opacity", None, None)],
            mods,
            vec!["no".into()],
            vec![],
        )
        .unwrap_err();
        assert!(matches!(err, LexiconError::DuplicateTerm { .. }));
    }

    #[test]
    fn modifier_category_count_enforced() {
        let mut mods = nine_categories();
        mods.pop();
        let err = Lexicon::from_parts(
            "test".into(),
            vec![],
            vec![finding("opacity", None, None)],
            mods,
            vec!["no".into()],
            vec![],
        )
        .unwrap_err();
        assert!(matches!(err, LexiconError::ModifierCategoryCount(8)));
    }

    #[test]
    fn empty_negation_seeds_rejected() {
        let err = Lexicon::from_parts(
            "test".into(),
            vec![],
            vec![finding("opacity", None, None)],
            nine_categories(),
            vec![],
            vec![],
        )
        .unwrap_err();
        assert!(matches!(err, LexiconError::EmptyNegationSeeds));
    }

    #[test]
    fn load_save_load_round_trips() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("lexicon.json");
        std::fs::write(&path, DEMO_LEXICON_JSON).unwrap();
        let first = load_lexicon(&path).unwrap();
        let saved = dir.path().join("saved.json");
        save_lexicon(&first, &saved).unwrap();
        let second = load_lexicon(&saved).unwrap();
        assert_eq!(first, second);
    }

    #[test]
    fn longest_match_scan_prefers_multiword_terms() {
        let lex = Lexicon::demo();
        let words: Vec<String> = ["left", "lower", "lobe", "opacity"]
            .iter()
            .map(|s| s.to_string())
            .collect();
        let spans = lex.scan_terms(&words, &words);
        let hits: Vec<(usize, usize)> = spans.iter().map(|s| (s.start, s.end)).collect();
        assert_eq!(hits, vec![(0, 0), (1, 2), (3, 3)]);
        assert!(matches!(&spans[1].hit, TermHit::Modifier { category, value }
            if category == "location" && value == "lower lobe"));
    }

    #[test]
    fn multiword_seed_matches_as_one_span() {
        let lex = Lexicon::demo();
        let words: Vec<String> = ["no", "evidence", "of", "pneumothorax"]
            .iter()
            .map(|s| s.to_string())
            .collect();
        let seeds = lex.scan_seeds(&words, &words);
        assert_eq!(seeds, vec![(0, 2)]);
    }
}
