//! Variant-character normalization: discovering character pairs that sound
//! the same, look alike, and are used alike, then rewriting the rarer form to
//! the more frequent one when a semantic checker approves the sentence.

mod embedding;
mod rewrite;

use alloc::collections::BTreeSet;
use alloc::string::{String, ToString};
use alloc::vec::Vec;

pub use embedding::{cosine_similarity, EmbeddingError, EmbeddingTable};
pub use rewrite::{
    apply_unified_writing, rewrite_checker_score, EmbeddingChecker, FrequencyTable, RewriteAudit,
    RewriteChecker,
};

use crate::distance::normalized_edit_distance;
use crate::lexicon::{GlyphCodeTable, HomophoneIndex, Lexicon};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum UwError {
    #[error("empty sentence")]
    EmptySentence,
    #[error("no embedding for {0:?}")]
    MissingEmbedding(char),
    #[error("invalid unified-writing config: {0}")]
    InvalidConfig(&'static str),
}

/// How many glyph methods must agree before a pair counts as look-alike.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum MinMethods {
    /// Every method that has codes for both characters.
    #[default]
    AllShared,
    AtLeast(usize),
}

#[derive(Debug, Clone, PartialEq)]
pub struct UwConfig {
    pub jyutping_max_distance: f64,
    pub glyph_max_distance: f64,
    pub cosine_min: f64,
    pub checker_min: f64,
    pub min_methods: MinMethods,
}

impl Default for UwConfig {
    fn default() -> Self {
        Self {
            jyutping_max_distance: 0.0,
            glyph_max_distance: 0.25,
            cosine_min: 0.5,
            checker_min: 0.9,
            min_methods: MinMethods::AllShared,
        }
    }
}

impl UwConfig {
    pub fn validate(&self) -> Result<(), UwError> {
        if !(0.0..=1.0).contains(&self.jyutping_max_distance) {
            return Err(UwError::InvalidConfig(
                "jyutping_max_distance must lie in [0, 1]",
            ));
        }
        if !(0.0..=1.0).contains(&self.glyph_max_distance) {
            return Err(UwError::InvalidConfig(
                "glyph_max_distance must lie in [0, 1]",
            ));
        }
        // an unreachable cosine or checker bound is allowed and simply rejects everything
        if self.cosine_min.is_nan() || self.checker_min.is_nan() {
            return Err(UwError::InvalidConfig("thresholds must not be NaN"));
        }
        if self.min_methods == MinMethods::AtLeast(0) {
            return Err(UwError::InvalidConfig("min_methods must be at least 1"));
        }
        Ok(())
    }
}

/// A discovered pair. Discovery knows nothing about frequency, so it orients
/// pairs by code point (smaller character as `canonical`); replacement
/// re-orients them by corpus frequency.
#[derive(Debug, Clone, PartialEq)]
pub struct UnifiedPair {
    pub variant: char,
    pub canonical: char,
    pub jyutping_distance: f64,
    /// Best-code distance for every glyph method with codes for both
    /// characters, in the order the tables were supplied.
    pub glyph_distances: Vec<(String, f64)>,
    pub cosine: f64,
}

/// Smallest distance over all code pairs.
fn best_distance<A: AsRef<str>, B: AsRef<str>>(xs: &[A], ys: &[B]) -> Option<f64> {
    let mut best: Option<f64> = None;
    for x in xs {
        for y in ys {
            if let Ok(d) = normalized_edit_distance(x.as_ref(), y.as_ref()) {
                best = Some(best.map_or(d, |b: f64| b.min(d)));
            }
        }
    }
    best
}

fn evaluate_pair(
    a: char,
    b: char,
    index: &HomophoneIndex,
    glyphs: &[GlyphCodeTable],
    emb: &EmbeddingTable,
    config: &UwConfig,
) -> Option<UnifiedPair> {
    if a == b {
        return None;
    }
    let (ea, eb) = (emb.get(a)?, emb.get(b)?);

    let codes_a: Vec<String> = index.codes_of(a).iter().map(ToString::to_string).collect();
    let codes_b: Vec<String> = index.codes_of(b).iter().map(ToString::to_string).collect();
    let jyutping_distance = best_distance(&codes_a, &codes_b)?;
    if jyutping_distance > config.jyutping_max_distance {
        return None;
    }

    let mut glyph_distances = Vec::new();
    let mut passed = 0;
    for table in glyphs {
        let (Some(ga), Some(gb)) = (table.codes_of(a), table.codes_of(b)) else {
            continue;
        };
        let Some(d) = best_distance(ga, gb) else {
            continue;
        };
        if d <= config.glyph_max_distance {
            passed += 1;
        }
        glyph_distances.push((String::from(table.method()), d));
    }
    let required = match config.min_methods {
        MinMethods::AllShared => glyph_distances.len(),
        MinMethods::AtLeast(k) => k,
    };
    if glyph_distances.is_empty() || passed < required {
        return None;
    }

    let cosine = cosine_similarity(ea, eb).ok()?;
    if cosine < config.cosine_min {
        return None;
    }
    let (canonical, variant) = if a < b { (a, b) } else { (b, a) };
    Some(UnifiedPair {
        variant,
        canonical,
        jyutping_distance,
        glyph_distances,
        cosine,
    })
}

fn sort_pairs(pairs: &mut [UnifiedPair]) {
    pairs.sort_by_key(|p| (p.canonical, p.variant));
}

/// Reference discovery: every ordered combination of distinct lexicon
/// characters, `L * (L - 1)` checks in total.
pub fn discover_pairs_naive(
    lex: &Lexicon,
    glyphs: &[GlyphCodeTable],
    emb: &EmbeddingTable,
    config: &UwConfig,
) -> Vec<UnifiedPair> {
    let index = HomophoneIndex::build(lex);
    let chars = lex.characters();
    let mut seen = BTreeSet::new();
    let mut out = Vec::new();
    for &x in &chars {
        for &y in &chars {
            if x == y {
                continue;
            }
            if let Some(pair) = evaluate_pair(x, y, &index, glyphs, emb, config) {
                if seen.insert((pair.canonical, pair.variant)) {
                    out.push(pair);
                }
            }
        }
    }
    sort_pairs(&mut out);
    out
}

/// Finds variant pairs. At a zero pronunciation threshold only characters
/// sharing a Jyutping code can pass, so candidates are drawn from each
/// homophone set instead of the full cross product; any positive threshold
/// falls back to [`discover_pairs_naive`].
pub fn discover_pairs(
    lex: &Lexicon,
    glyphs: &[GlyphCodeTable],
    emb: &EmbeddingTable,
    config: &UwConfig,
) -> Vec<UnifiedPair> {
    if config.jyutping_max_distance > 0.0 {
        return discover_pairs_naive(lex, glyphs, emb, config);
    }
    let index = HomophoneIndex::build(lex);
    let mut candidates = BTreeSet::new();
    for (_, set) in index.iter() {
        // sets are ordered by code point, so (set[i], set[j]) is (smaller, larger)
        for (i, &x) in set.iter().enumerate() {
            if emb.get(x).is_none() {
                continue;
            }
            for &y in &set[i + 1..] {
                candidates.insert((x, y));
            }
        }
    }
    let mut out: Vec<UnifiedPair> = candidates
        .into_iter()
        .filter_map(|(x, y)| evaluate_pair(x, y, &index, glyphs, emb, config))
        .collect();
    sort_pairs(&mut out);
    out
}
