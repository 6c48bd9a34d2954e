//! Serialization round-trips, determinism and negation properties of the
//! extraction stage.

use fflgen_core::extraction::{
    detect_concepts, extract_corpus, extract_report, extract_sentence, FflLabel, Modifier,
};
use fflgen_core::lexicon::{Lexicon, TermHit};
use fflgen_core::parsing::fallback_parse;
use proptest::prelude::*;

fn identifier() -> impl Strategy<Value = String> {
    "[a-z][a-z ]{0,12}[a-z]".prop_map(|s| s.trim().to_string())
}

fn modifier_value() -> impl Strategy<Value = String> {
    "[a-z0-9][a-z0-9 .-]{0,10}[a-z0-9]".prop_map(|s| s.trim().to_string())
}

prop_compose! {
    fn arbitrary_label()(
        finding_type in identifier(),
        present in any::<bool>(),
        core in identifier(),
        modifiers in proptest::collection::vec((identifier(), modifier_value()), 0..5),
    ) -> FflLabel {
        FflLabel::new(
            finding_type,
            present,
            core,
            modifiers.into_iter().map(|(c, v)| Modifier::new(c, v)).collect(),
        )
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(10_000))]
    // parse(serialize(L)) == L for generated labels.
    #[test]
    fn label_serialization_round_trips(label in arbitrary_label()) {
        let key = label.key();
        let parsed = FflLabel::parse(&key).expect("serialized labels parse");
        prop_assert_eq!(parsed, label);
    }
}

const FUZZ_VOCAB: &[&str] = &[
    "opacity",
    "effusion",
    "pneumothorax",
    "mass",
    "consolidation",
    "stable",
    "left",
    "right",
    "mild",
    "lower",
    "lobe",
    "no",
    "not",
    "without",
    "evidence",
    "of",
    "is",
    "there",
    "but",
    "and",
    "or",
    "persists",
    "seen",
    "florid",
    "widget",
    ",",
];

fn fuzz_sentences(seed: u64, count: usize) -> Vec<String> {
    use rand::rngs::StdRng;
    use rand::{Rng, SeedableRng};
    let mut rng = StdRng::seed_from_u64(seed);
    (0..count)
        .map(|_| {
            let len = rng.random_range(1..12);
            let mut words = Vec::with_capacity(len);
            for _ in 0..len {
                words.push(FUZZ_VOCAB[rng.random_range(0..FUZZ_VOCAB.len())]);
            }
            words.join(" ")
        })
        .collect()
}

/// Stripping every negation seed from a sentence yields all-positive labels:
/// negation only ever fires inside some seed's scope.
#[test]
fn without_seeds_every_label_is_positive() {
    let lexicon = Lexicon::demo();
    let seeds = ["no", "not", "without"];
    for (i, text) in fuzz_sentences(1234, 500).into_iter().enumerate() {
        let stripped: String = text
            .split_whitespace()
            .filter(|w| !seeds.contains(w))
            .collect::<Vec<_>>()
            .join(" ");
        let sentence = fallback_parse("fuzz", i, &stripped, &lexicon);
        let extraction = extract_sentence(&sentence, &lexicon);
        for label in &extraction.labels {
            assert!(
                label.label.present,
                "negation without a seed in {stripped:?}: {}",
                label.label
            );
        }
    }
}

/// Every modifier in the output traces to a detected concept span or to a
/// lexicon default-location insertion; extraction invents nothing else.
#[test]
fn output_modifiers_trace_to_concepts_or_defaults() {
    let lexicon = Lexicon::demo();
    let default_locations: Vec<String> = lexicon
        .findings
        .iter()
        .filter_map(|f| f.default_location.clone())
        .collect();
    for (i, text) in fuzz_sentences(987, 500).into_iter().enumerate() {
        let sentence = fallback_parse("fuzz", i, &text, &lexicon);
        let concepts = detect_concepts(&sentence, &lexicon);
        let detected: Vec<(String, String)> = concepts
            .iter()
            .filter_map(|c| match &c.hit {
                TermHit::Modifier { category, value } => {
                    Some((category.clone(), value.clone()))
                }
                TermHit::Finding { .. } => None,
            })
            .collect();
        let extraction = extract_sentence(&sentence, &lexicon);
        for label in &extraction.labels {
            for modifier in &label.label.modifiers {
                let from_concept =
                    detected.iter().any(|(c, v)| c == &modifier.category && v == &modifier.value);
                let from_default = modifier.category == "location"
                    && default_locations.contains(&modifier.value);
                assert!(
                    from_concept || from_default,
                    "invented modifier {modifier:?} in {text:?}"
                );
            }
        }
    }
}

/// Extraction is deterministic and order-independent across reports.
#[test]
fn corpus_extraction_is_order_independent() {
    let lexicon = Lexicon::demo();
    let reports: Vec<(String, String)> = fuzz_sentences(55, 30)
        .into_iter()
        .enumerate()
        .map(|(i, text)| (format!("r{i:02}"), format!("{text}. No pneumothorax.")))
        .collect();
    let mut reversed = reports.clone();
    reversed.reverse();
    let forward = extract_corpus(&reports, &lexicon);
    let mut backward = extract_corpus(&reversed, &lexicon);
    backward.reverse();
    assert_eq!(forward, backward);
    let again = extract_corpus(&reports, &lexicon);
    assert_eq!(forward, again);
}

/// End-to-end shape of the flagship examples, through raw report text.
#[test]
fn report_level_extraction_matches_expected_labels() {
    let lexicon = Lexicon::demo();
    let text = "FINDINGS: There is stable alveolar consolidation. No pneumothorax.\n\
                IMPRESSION: Stable left lower lobe opacity.";
    let report = extract_report("fig", text, &lexicon);
    let keys: Vec<String> = report
        .sentences
        .iter()
        .flat_map(|s| s.labels.iter().map(|l| l.label.key()))
        .collect();
    assert_eq!(
        keys,
        vec![
            "<anatomical finding|yes|alveolar consolidation|location:alveoli|temporal:stable>",
            "<anatomical finding|no|pneumothorax>",
            "<anatomical finding|yes|opacity|laterality:left|location:lower lobe|temporal:stable>",
        ]
    );
}
