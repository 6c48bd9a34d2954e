//! Dependency-parse ingestion and the built-in heuristic fallback parser.
//!
//! The primary path ingests an external parser's output in a tab-separated
//! format (one token per row: `index<TAB>surface<TAB>lemma<TAB>head<TAB>flag`,
//! blank line between sentences, `# report <id>` lines announcing the source
//! report). The fallback parser exists so the pipeline runs end-to-end with
//! no external tools: downstream stages only need token positions, heads and
//! unknown flags.

use std::collections::HashSet;
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::lexicon::{Lexicon, TermHit};
use crate::text::normalize_term;

/// Function words that count as "known" for the fallback parser even though
/// they never appear in the lexicon.
pub const CLOSED_CLASS_WORDS: &[&str] = &[
    "a", "an", "the", "and", "or", "nor", "of", "in", "on", "at", "by", "with", "without", "for",
    "to", "from", "into", "onto", "over", "under", "above", "below", "is", "are", "was", "were",
    "be", "been", "being", "has", "have", "had", "there", "here", "this", "that", "these",
    "those", "it", "its", "no", "not", "than", "as", "which", "who", "while", "when", "where",
    "but", "however", "although", "though", "yet", "if", "then", "also", "both", "either",
    "neither", "since", "during", "within", "along", "across", "near", "versus", "vs",
];

/// Words before a period that never end a sentence.
const PROTECTED_ABBREVIATIONS: &[&str] = &[
    "dr", "mr", "mrs", "ms", "prof", "st", "vs", "etc", "eg", "ie", "approx", "fig",
];

#[derive(Debug, Error)]
pub enum ParseError {
    #[error("i/o error reading parse file: {0}")]
    Io(#[from] std::io::Error),
    #[error("malformed parse row at line {line}: {reason}")]
    MalformedRow { line: usize, reason: String },
    #[error("sentence {sentence_index} of report {report_id:?}: {reason}")]
    BadStructure {
        report_id: String,
        sentence_index: usize,
        reason: String,
    },
}

/// One token of a dependency parse. `head` is the 1-based index of the
/// governing token, 0 for the sentence root. `is_unknown` marks tokens whose
/// lemma could not be resolved; phrasal grouping skips over them.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Token {
    pub index: usize,
    pub surface: String,
    pub lemma: String,
    pub head: usize,
    pub is_unknown: bool,
}

/// A parsed sentence. Token indices are contiguous from 1 and the head
/// relation forms a tree with exactly one root (unless the sentence is
/// empty).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParsedSentence {
    pub report_id: String,
    pub sentence_index: usize,
    pub raw_text: String,
    pub tokens: Vec<Token>,
}

impl ParsedSentence {
    pub fn empty(report_id: &str, sentence_index: usize) -> Self {
        ParsedSentence {
            report_id: report_id.to_string(),
            sentence_index,
            raw_text: String::new(),
            tokens: Vec::new(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }

    /// Check the structural invariants: contiguous 1-based indices, heads in
    /// range, no self-heads, single root, acyclic.
    pub fn validate(&self) -> Result<(), ParseError> {
        let fail = |reason: String| ParseError::BadStructure {
            report_id: self.report_id.clone(),
            sentence_index: self.sentence_index,
            reason,
        };
        let n = self.tokens.len();
        if n == 0 {
            return Ok(());
        }
        let mut roots = 0;
        for (i, tok) in self.tokens.iter().enumerate() {
            if tok.index != i + 1 {
                return Err(fail(format!(
                    "token indices not contiguous: expected {}, found {}",
                    i + 1,
                    tok.index
                )));
            }
            if tok.head > n {
                return Err(fail(format!(
                    "token {} has head {} out of range",
                    tok.index, tok.head
                )));
            }
            if tok.head == tok.index {
                return Err(fail(format!("token {} is its own head", tok.index)));
            }
            if tok.head == 0 {
                roots += 1;
            }
        }
        if roots != 1 {
            return Err(fail(format!("expected exactly one root, found {roots}")));
        }
        // Every token must reach the root; a bounded walk catches cycles.
        for tok in &self.tokens {
            let mut cursor = tok.head;
            let mut steps = 0;
            while cursor != 0 {
                cursor = self.tokens[cursor - 1].head;
                steps += 1;
                if steps > n {
                    return Err(fail(format!("cycle in head chain at token {}", tok.index)));
                }
            }
        }
        Ok(())
    }

    /// Undirected adjacency over token indices (1-based; slot 0 unused).
    pub fn adjacency(&self) -> Vec<Vec<usize>> {
        let mut adj = vec![Vec::new(); self.tokens.len() + 1];
        for tok in &self.tokens {
            if tok.head != 0 {
                adj[tok.index].push(tok.head);
                adj[tok.head].push(tok.index);
            }
        }
        adj
    }

    /// Normalized lemma strings, one per token.
    pub fn lemmas(&self) -> Vec<String> {
        self.tokens.iter().map(|t| normalize_term(&t.lemma)).collect()
    }

    /// Normalized surface strings, one per token.
    pub fn surfaces(&self) -> Vec<String> {
        self.tokens.iter().map(|t| normalize_term(&t.surface)).collect()
    }
}

/// Read sentences from the tab-separated parse format.
pub fn ingest_parse(path: &Path) -> Result<Vec<ParsedSentence>, ParseError> {
    let raw = fs::read_to_string(path)?;
    parse_tsv(&raw)
}

/// Parse the tab-separated format from a string. `# report <id>` lines set
/// the report id for the sentences that follow and reset the sentence
/// counter; other `#` lines are comments.
pub fn parse_tsv(raw: &str) -> Result<Vec<ParsedSentence>, ParseError> {
    let mut sentences = Vec::new();
    let mut report_id = String::from("unidentified");
    let mut sentence_index = 0;
    let mut pending: Vec<Token> = Vec::new();

    let mut flush = |pending: &mut Vec<Token>,
                     report_id: &str,
                     sentence_index: &mut usize|
     -> Result<(), ParseError> {
        if pending.is_empty() {
            return Ok(());
        }
        let tokens = std::mem::take(pending);
        let raw_text = tokens.iter().map(|t| t.surface.as_str()).collect::<Vec<_>>().join(" ");
        let sentence = ParsedSentence {
            report_id: report_id.to_string(),
            sentence_index: *sentence_index,
            raw_text,
            tokens,
        };
        sentence.validate()?;
        *sentence_index += 1;
        sentences.push(sentence);
        Ok(())
    };

    for (line_no, line) in raw.lines().enumerate() {
        let line_no = line_no + 1;
        let trimmed = line.trim_end();
        if trimmed.trim().is_empty() {
            flush(&mut pending, &report_id, &mut sentence_index)?;
            continue;
        }
        if let Some(comment) = trimmed.strip_prefix('#') {
            flush(&mut pending, &report_id, &mut sentence_index)?;
            let comment = comment.trim();
            if let Some(id) = comment.strip_prefix("report ") {
                report_id = id.trim().to_string();
                sentence_index = 0;
            }
            continue;
        }
        let fields: Vec<&str> = trimmed.split('\t').collect();
        if fields.len() != 5 {
            return Err(ParseError::MalformedRow {
                line: line_no,
                reason: format!("expected 5 tab-separated fields, found {}", fields.len()),
            });
        }
        let index: usize = fields[0].parse().map_err(|_| ParseError::MalformedRow {
            line: line_no,
            reason: format!("bad token index {:?}", fields[0]),
        })?;
        let head: usize = fields[3].parse().map_err(|_| ParseError::MalformedRow {
            line: line_no,
            reason: format!("bad head index {:?}", fields[3]),
        })?;
        let is_unknown = match fields[4] {
            "u" => true,
            "-" => false,
            other => {
                return Err(ParseError::MalformedRow {
                    line: line_no,
                    reason: format!("bad unknown flag {other:?}, expected 'u' or '-'"),
                })
            }
        };
        pending.push(Token {
            index,
            surface: fields[1].to_string(),
            lemma: fields[2].to_string(),
            head,
            is_unknown,
        });
    }
    flush(&mut pending, &report_id, &mut sentence_index)?;
    Ok(sentences)
}

/// Write sentences in the tab-separated parse format (the inverse of
/// [`parse_tsv`]).
pub fn write_tsv(sentences: &[ParsedSentence]) -> String {
    let mut out = String::new();
    let mut current_report: Option<&str> = None;
    for sentence in sentences {
        if current_report != Some(sentence.report_id.as_str()) {
            out.push_str(&format!("# report {}\n", sentence.report_id));
            current_report = Some(sentence.report_id.as_str());
        }
        for tok in &sentence.tokens {
            out.push_str(&format!(
                "{}\t{}\t{}\t{}\t{}\n",
                tok.index,
                tok.surface,
                tok.lemma,
                tok.head,
                if tok.is_unknown { "u" } else { "-" }
            ));
        }
        out.push('\n');
    }
    out
}

/// Deterministic heuristic parse used when no external parse is supplied.
///
/// Tokens split on whitespace and punctuation. Within its comma-delimited
/// segment every token attaches to the nearest following noun-like token (a
/// token that ends a lexicon concept match); tokens left without a head
/// attach to the head token of the first lexicon-matched finding, or to the
/// last token when the sentence has no finding. Tokens absent from both the
/// lexicon and the closed-class word list are flagged unknown.
pub fn fallback_parse(
    report_id: &str,
    sentence_index: usize,
    raw_text: &str,
    lexicon: &Lexicon,
) -> ParsedSentence {
    let mut surfaces: Vec<String> = Vec::new();
    let mut segments: Vec<usize> = Vec::new();
    let mut segment = 0usize;
    let mut word = String::new();
    for ch in raw_text.chars() {
        if ch.is_alphanumeric() {
            word.push(ch);
        } else {
            if !word.is_empty() {
                surfaces.push(std::mem::take(&mut word));
                segments.push(segment);
            }
            if ch == ',' || ch == ';' {
                segment += 1;
            }
        }
    }
    if !word.is_empty() {
        surfaces.push(word);
        segments.push(segment);
    }

    let n = surfaces.len();
    if n == 0 {
        return ParsedSentence {
            report_id: report_id.to_string(),
            sentence_index,
            raw_text: raw_text.to_string(),
            tokens: Vec::new(),
        };
    }

    let lemmas: Vec<String> = surfaces.iter().map(|s| s.to_lowercase()).collect();
    let spans = lexicon.scan_terms(&lemmas, &lemmas);
    let seed_spans = lexicon.scan_seeds(&lemmas, &lemmas);

    let mut in_concept = vec![false; n];
    let mut noun_like = vec![false; n];
    let mut anchor: Option<usize> = None; // 0-based
    for span in &spans {
        for flag in in_concept.iter_mut().take(span.end + 1).skip(span.start) {
            *flag = true;
        }
        noun_like[span.end] = true;
        if anchor.is_none() {
            if let TermHit::Finding { .. } = span.hit {
                anchor = Some(span.end);
            }
        }
    }
    for &(start, end) in &seed_spans {
        for flag in in_concept.iter_mut().take(end + 1).skip(start) {
            *flag = true;
        }
    }

    let closed: HashSet<&str> = CLOSED_CLASS_WORDS.iter().copied().collect();
    let mut tokens = Vec::with_capacity(n);
    for i in 0..n {
        let head = if anchor == Some(i) {
            0
        } else {
            let mut found = None;
            for j in i + 1..n {
                if segments[j] != segments[i] {
                    break;
                }
                if noun_like[j] {
                    found = Some(j + 1);
                    break;
                }
            }
            match (found, anchor) {
                (Some(h), _) => h,
                (None, Some(a)) => a + 1,
                // No finding anywhere: everything hangs off the last token.
                (None, None) => {
                    if i == n - 1 {
                        0
                    } else {
                        n
                    }
                }
            }
        };
        let is_unknown = !in_concept[i] && !closed.contains(lemmas[i].as_str());
        tokens.push(Token {
            index: i + 1,
            surface: surfaces[i].clone(),
            lemma: lemmas[i].clone(),
            head,
            is_unknown,
        });
    }

    ParsedSentence {
        report_id: report_id.to_string(),
        sentence_index,
        raw_text: raw_text.to_string(),
        tokens,
    }
}

/// Split report text into sentences. Periods (and `!`/`?`) followed by
/// whitespace and a capital letter end a sentence, as do newlines followed
/// by a capital; a short fixed list of abbreviations is protected.
pub fn segment_sentences(text: &str) -> Vec<String> {
    let chars: Vec<char> = text.chars().collect();
    let mut sentences = Vec::new();
    let mut current = String::new();

    let ends_with_abbreviation = |s: &str| -> bool {
        let last_word: String = s
            .chars()
            .rev()
            .take_while(|c| c.is_alphanumeric())
            .collect::<String>()
            .chars()
            .rev()
            .collect::<String>()
            .to_lowercase();
        PROTECTED_ABBREVIATIONS.contains(&last_word.as_str())
    };

    let mut i = 0;
    while i < chars.len() {
        let ch = chars[i];
        if ch == '.' || ch == '!' || ch == '?' || ch == '\n' {
            // Look ahead past whitespace for a capital letter or end of text.
            let mut j = i + 1;
            while j < chars.len() && chars[j].is_whitespace() {
                j += 1;
            }
            let at_end = j >= chars.len();
            let next_capital = !at_end && chars[j].is_uppercase();
            let protected = ch == '.' && ends_with_abbreviation(&current);
            if (at_end || next_capital) && !protected {
                if ch != '\n' {
                    current.push(ch);
                }
                let trimmed = current.trim();
                if !trimmed.is_empty() {
                    sentences.push(trimmed.to_string());
                }
                current.clear();
                i += 1;
                continue;
            }
        }
        if ch == '\n' {
            current.push(' ');
        } else {
            current.push(ch);
        }
        i += 1;
    }
    let trimmed = current.trim();
    if !trimmed.is_empty() {
        sentences.push(trimmed.to_string());
    }
    sentences
}

#[cfg(test)]
mod tests {
    use super::*;

    fn demo() -> Lexicon {
        Lexicon::demo()
    }

    #[test]
    fn ingest_well_formed_sentence() {
        let tsv = "# report r1\n\
                   1\tNo\tno\t2\t-\n\
                   2\tpneumothorax\tpneumothorax\t0\t-\n";
        let sentences = parse_tsv(tsv).unwrap();
        assert_eq!(sentences.len(), 1);
        assert_eq!(sentences[0].tokens.len(), 2);
        assert_eq!(sentences[0].report_id, "r1");
    }

    #[test]
    fn ingest_five_token_tree() {
        let tsv = "1\tStable\tstable\t4\t-\n\
                   2\tleft\tleft\t4\t-\n\
                   3\tpleural\tpleural\t4\t-\n\
                   4\teffusion\teffusion\t0\t-\n\
                   5\tpersists\tpersist\t4\tu\n";
        let sentences = parse_tsv(tsv).unwrap();
        assert_eq!(sentences.len(), 1);
        assert_eq!(sentences[0].tokens.len(), 5);
        assert!(sentences[0].tokens[4].is_unknown);
    }

    #[test]
    fn self_head_is_a_structure_error() {
        let tsv = "1\tword\tword\t1\t-\n";
        let err = parse_tsv(tsv).unwrap_err();
        assert!(matches!(err, ParseError::BadStructure { .. }), "{err}");
    }

    #[test]
    fn blank_line_separates_sentences() {
        let tsv = "1\ta\ta\t0\t-\n\n1\tb\tb\t0\t-\n";
        let sentences = parse_tsv(tsv).unwrap();
        assert_eq!(sentences.len(), 2);
        assert_eq!(sentences[0].sentence_index, 0);
        assert_eq!(sentences[1].sentence_index, 1);
    }

    #[test]
    fn malformed_row_reports_line_number() {
        let tsv = "1\tonly\tthree\n";
        match parse_tsv(tsv).unwrap_err() {
            ParseError::MalformedRow { line, .. } => assert_eq!(line, 1),
            other => panic!("unexpected error {other}"),
        }
    }

    #[test]
    fn two_roots_rejected() {
        let tsv = "1\ta\ta\t0\t-\n2\tb\tb\t0\t-\n";
        assert!(parse_tsv(tsv).is_err());
    }

    #[test]
    fn cycle_rejected() {
        let tsv = "1\ta\ta\t2\t-\n2\tb\tb\t1\t-\n3\tc\tc\t0\t-\n";
        assert!(parse_tsv(tsv).is_err());
    }

    #[test]
    fn tsv_round_trips() {
        let lex = demo();
        let parsed = vec![
            fallback_parse("r1", 0, "No pneumothorax.", &lex),
            fallback_parse("r1", 1, "Stable alveolar consolidation.", &lex),
        ];
        let tsv = write_tsv(&parsed);
        let back = parse_tsv(&tsv).unwrap();
        assert_eq!(back.len(), 2);
        for (a, b) in parsed.iter().zip(back.iter()) {
            assert_eq!(a.tokens, b.tokens);
            assert_eq!(a.report_id, b.report_id);
        }
    }

    #[test]
    fn fallback_no_pneumothorax() {
        let sent = fallback_parse("r", 0, "no pneumothorax", &demo());
        assert_eq!(sent.tokens.len(), 2);
        // "no" is headed by "pneumothorax", which is the root.
        assert_eq!(sent.tokens[0].head, 2);
        assert_eq!(sent.tokens[1].head, 0);
        sent.validate().unwrap();
    }

    #[test]
    fn fallback_empty_text() {
        let sent = fallback_parse("r", 0, "", &demo());
        assert!(sent.is_empty());
        sent.validate().unwrap();
    }

    #[test]
    fn fallback_stable_alveolar_consolidation() {
        let sent = fallback_parse("r", 0, "stable alveolar consolidation", &demo());
        assert_eq!(sent.tokens.len(), 3);
        // Both "stable" and "alveolar" head to "consolidation".
        assert_eq!(sent.tokens[0].head, 3);
        assert_eq!(sent.tokens[1].head, 3);
        assert_eq!(sent.tokens[2].head, 0);
        sent.validate().unwrap();
    }

    #[test]
    fn fallback_is_deterministic() {
        let lex = demo();
        let text = "There is a new right pleural effusion, with bibasilar atelectasis.";
        let a = fallback_parse("r", 0, text, &lex);
        let b = fallback_parse("r", 0, text, &lex);
        assert_eq!(a, b);
    }

    #[test]
    fn fallback_marks_out_of_vocabulary_tokens_unknown() {
        let sent = fallback_parse("r", 0, "the florid opacity persists", &demo());
        let unknown: Vec<&str> =
            sent.tokens.iter().filter(|t| t.is_unknown).map(|t| t.lemma.as_str()).collect();
        assert_eq!(unknown, vec!["florid", "persists"]);
    }

    #[test]
    fn fallback_trees_hold_on_fuzzed_sentences() {
        // 1,000 random word soups, including commas and vocabulary terms:
        // the head relation must always be a single-rooted tree.
        use rand::rngs::StdRng;
        use rand::{Rng, SeedableRng};
        let lex = demo();
        let vocab = [
            "opacity", "left", "lower", "lobe", "no", "with", "stable", "blort", "zzz", ",",
            "effusion", "pneumothorax", "evidence", "of", "but", "mild", "alveolar",
            "consolidation", "persists", ";", "and", "915",
        ];
        let mut rng = StdRng::seed_from_u64(42);
        for case in 0..1000 {
            let len = rng.random_range(0..14);
            let mut text = String::new();
            for _ in 0..len {
                text.push_str(vocab[rng.random_range(0..vocab.len())]);
                text.push(' ');
            }
            let sent = fallback_parse("fuzz", case, &text, &lex);
            sent.validate().unwrap_or_else(|e| panic!("case {case} ({text:?}): {e}"));
        }
    }

    #[test]
    fn segmentation_splits_on_period_and_capital() {
        let sentences = segment_sentences("No pneumothorax. Stable effusion.");
        assert_eq!(sentences, vec!["No pneumothorax.", "Stable effusion."]);
    }

    #[test]
    fn segmentation_protects_abbreviations_and_decimals() {
        let sentences = segment_sentences("Compared with prior by Dr. Smith. Nodule measures 1.5 cm.");
        assert_eq!(
            sentences,
            vec!["Compared with prior by Dr. Smith.", "Nodule measures 1.5 cm."]
        );
    }

    #[test]
    fn segmentation_splits_on_newline_before_capital() {
        let sentences = segment_sentences("No pneumothorax\nHeart size normal");
        assert_eq!(sentences, vec!["No pneumothorax", "Heart size normal"]);
    }
}
