//! Small text normalization helpers shared across the pipeline.

/// Lowercase and collapse internal whitespace to single spaces.
pub fn normalize_term(s: &str) -> String {
    s.split_whitespace()
        .map(|w| w.to_lowercase())
        .collect::<Vec<_>>()
        .join(" ")
}

/// Canonical sentence identity used when counting sentence support:
/// lowercase, collapse whitespace, strip terminal punctuation.
pub fn normalize_sentence(s: &str) -> String {
    let collapsed = normalize_term(s);
    collapsed
        .trim_end_matches(['.', '!', '?', ';', ':'])
        .trim_end()
        .to_string()
}

/// Lowercased alphanumeric word tokens. Punctuation acts as a separator.
pub fn word_tokens(s: &str) -> Vec<String> {
    s.split(|c: char| !c.is_alphanumeric())
        .filter(|w| !w.is_empty())
        .map(|w| w.to_lowercase())
        .collect()
}
