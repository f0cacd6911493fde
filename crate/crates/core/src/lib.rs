//! Core algorithms for homophone-aware CTC decoding of Cantonese speech.
//!
//! Everything in this crate is pure computation over in-memory values: the
//! lexicon and homophone index, CTC emission matrices, back-off n-gram
//! scoring, prefix beam search with homophone extension, variant-character
//! pair discovery and replacement, and character error rate. File formats,
//! the experiment harness, and the command-line tool live in the
//! `homodecode` crate.
//!
//! The crate is `no_std` when the default `std` feature is disabled; it only
//! needs `alloc`.

#![cfg_attr(not(feature = "std"), no_std)]

extern crate alloc;

pub mod decoder;
pub mod distance;
pub mod emissions;
pub mod eval;
pub mod jyutping;
pub mod lexicon;
mod math;
pub mod ngram;
pub mod unified_writing;

pub use decoder::{
    decode, greedy_decode, homophone_adjusted_prob, BeamHypothesis, DecodeError, DecodeResult,
    Decoder, DecoderConfig, HeInjection, NBestEntry,
};
pub use distance::{levenshtein, normalized_edit_distance, DistanceError};
pub use emissions::{EmissionError, EmissionMatrix, Vocabulary, VocabularyError};
pub use eval::{character_edit_distance, evaluate, EvalError, EvalReport, UtteranceScore};
pub use jyutping::{JyutpingCode, JyutpingError};
pub use lexicon::{GlyphCodeTable, GlyphError, HomophoneIndex, Lexicon, LexiconEntry};
pub use math::{log_add_exp, LN_10};
pub use ngram::{NGramBuilder, NGramError, NGramModel, SENTENCE_END, SENTENCE_START, UNKNOWN};
pub use unified_writing::{
    apply_unified_writing, cosine_similarity, discover_pairs, discover_pairs_naive,
    rewrite_checker_score, EmbeddingChecker, EmbeddingError, EmbeddingTable, FrequencyTable,
    MinMethods, RewriteAudit, RewriteChecker, UnifiedPair, UwConfig, UwError,
};
