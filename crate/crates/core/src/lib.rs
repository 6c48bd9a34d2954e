//! Retrieval-based chest X-ray report generation.
//!
//! The pipeline turns free-text radiology reports into structured fine
//! finding labels (FFLs), indexes reports by their binary label patterns,
//! calibrates per-label classifier thresholds, and assembles new reports by
//! weighted nearest-pattern retrieval with evidence-based sentence pruning.
//!
//! Modules follow the pipeline stages:
//!
//! - [`lexicon`]: finding/modifier vocabulary, ontology roll-ups, negation seeds
//! - [`parsing`]: dependency-parse ingestion and a heuristic fallback parser
//! - [`extraction`]: concept detection, phrasal grouping, negation scope,
//!   pattern completion
//! - [`patterndb`]: binary pattern -> ranked report database
//! - [`calibration`]: F1-optimal operating points for classifier scores
//! - [`generator`]: nearest-pattern matching and report assembly
//! - [`metrics`]: BLEU / ROUGE-L / METEOR-lite and extraction audits

pub mod calibration;
pub mod extraction;
pub mod generator;
pub mod lexicon;
pub mod metrics;
pub mod parsing;
pub mod patterndb;
pub mod text;

pub use extraction::{FflLabel, ReportExtraction, SentenceExtraction};
pub use lexicon::{CoreFinding, Lexicon, ModifierDef};
pub use parsing::{ParsedSentence, Token};
pub use patterndb::{LabelSpace, PatternDatabase, PatternVector, RankedReport};
