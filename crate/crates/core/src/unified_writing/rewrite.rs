use alloc::collections::{BTreeMap, BTreeSet};
use alloc::string::String;
use alloc::vec::Vec;

use super::{UnifiedPair, UwConfig, UwError};
use crate::unified_writing::EmbeddingTable;

/// Character counts; absent characters count as zero.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct FrequencyTable {
    counts: BTreeMap<char, u64>,
}

impl FrequencyTable {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn from_corpus<S: AsRef<str>>(corpus: &[S]) -> Self {
        let mut table = Self::new();
        for sentence in corpus {
            for c in sentence.as_ref().chars() {
                *table.counts.entry(c).or_insert(0) += 1;
            }
        }
        table
    }

    pub fn set(&mut self, c: char, count: u64) {
        self.counts.insert(c, count);
    }

    pub fn get(&self, c: char) -> u64 {
        self.counts.get(&c).copied().unwrap_or(0)
    }

    pub fn iter(&self) -> impl Iterator<Item = (char, u64)> + '_ {
        self.counts.iter().map(|(c, n)| (*c, *n))
    }
}

/// Scores how well a rewritten sentence preserves the original's meaning,
/// in `[0, 1]`.
pub trait RewriteChecker {
    fn score(&self, original: &str, rewritten: &str) -> Result<f64, UwError>;
}

/// Greedy-match F-score over character embeddings.
pub struct EmbeddingChecker<'a>(pub &'a EmbeddingTable);

impl RewriteChecker for EmbeddingChecker<'_> {
    fn score(&self, original: &str, rewritten: &str) -> Result<f64, UwError> {
        rewrite_checker_score(original, rewritten, self.0)
    }
}

/// Each character of one sentence is matched to its most similar character
/// in the other (cosine clamped to `[0, 1]`). Precision averages over the
/// rewritten sentence, recall over the original; the result is their
/// harmonic mean.
pub fn rewrite_checker_score(
    original: &str,
    rewritten: &str,
    emb: &EmbeddingTable,
) -> Result<f64, UwError> {
    if original.is_empty() || rewritten.is_empty() {
        return Err(UwError::EmptySentence);
    }
    let lookup = |s: &str| -> Result<Vec<&[f64]>, UwError> {
        s.chars()
            .map(|c| emb.get(c).ok_or(UwError::MissingEmbedding(c)))
            .collect()
    };
    let orig = lookup(original)?;
    let rewr = lookup(rewritten)?;
    let n = orig.len();
    let m = rewr.len();
    let mut sim = alloc::vec![0.0; n * m];
    for (i, u) in orig.iter().enumerate() {
        for (j, v) in rewr.iter().enumerate() {
            sim[i * m + j] = super::cosine_similarity(u, v)
                .unwrap_or(0.0)
                .clamp(0.0, 1.0);
        }
    }
    let recall = (0..n)
        .map(|i| sim[i * m..(i + 1) * m].iter().copied().fold(0.0, f64::max))
        .sum::<f64>()
        / n as f64;
    let precision = (0..m)
        .map(|j| (0..n).map(|i| sim[i * m + j]).fold(0.0, f64::max))
        .sum::<f64>()
        / m as f64;
    if precision + recall == 0.0 {
        return Ok(0.0);
    }
    Ok(2.0 * precision * recall / (precision + recall))
}

/// One checked sentence/pair combination.
#[derive(Debug, Clone, PartialEq)]
pub struct RewriteAudit {
    pub sentence_index: usize,
    pub variant: char,
    pub canonical: char,
    pub score: f64,
    pub kept: bool,
}

/// `true` when `a` should be the canonical form over `b`: more frequent, or
/// equally frequent and smaller by code point.
fn outranks(freq: &FrequencyTable, a: char, b: char) -> bool {
    (freq.get(b), a) < (freq.get(a), b)
}

/// Maps every variant to the final canonical character it rewrites to.
fn resolve_mapping(pairs: &[UnifiedPair], freq: &FrequencyTable) -> BTreeMap<char, char> {
    let mut step: BTreeMap<char, char> = BTreeMap::new();
    for pair in pairs {
        let (a, b) = (pair.canonical, pair.variant);
        if a == b {
            continue;
        }
        let (canonical, variant) = if outranks(freq, a, b) { (a, b) } else { (b, a) };
        step.entry(variant)
            .and_modify(|cur| {
                if outranks(freq, canonical, *cur) {
                    *cur = canonical;
                }
            })
            .or_insert(canonical);
    }
    // chains terminate: every step moves strictly up the (frequency, code point) order
    let mut resolved = BTreeMap::new();
    for &variant in step.keys() {
        let mut target = step[&variant];
        while let Some(&next) = step.get(&target) {
            target = next;
        }
        resolved.insert(variant, target);
    }
    resolved
}

/// Rewrites every sentence containing a variant to use its canonical form.
/// All substitutions in a sentence are checked together; the sentence keeps
/// them only if the checker scores the rewrite at least `checker_min`, and
/// is otherwise left untouched. A checker failure counts as a score of 0.
pub fn apply_unified_writing<S: AsRef<str>>(
    corpus: &[S],
    pairs: &[UnifiedPair],
    freq: &FrequencyTable,
    checker: &dyn RewriteChecker,
    config: &UwConfig,
) -> (Vec<String>, Vec<RewriteAudit>) {
    let mapping = resolve_mapping(pairs, freq);
    let mut out = Vec::with_capacity(corpus.len());
    let mut audit = Vec::new();
    for (sentence_index, sentence) in corpus.iter().enumerate() {
        let sentence = sentence.as_ref();
        let mut replaced = BTreeSet::new();
        let rewritten: String = sentence
            .chars()
            .map(|c| match mapping.get(&c) {
                Some(&canonical) => {
                    replaced.insert((c, canonical));
                    canonical
                }
                None => c,
            })
            .collect();
        if replaced.is_empty() {
            out.push(String::from(sentence));
            continue;
        }
        let score = checker.score(sentence, &rewritten).unwrap_or(0.0);
        let kept = score >= config.checker_min;
        audit.extend(
            replaced
                .into_iter()
                .map(|(variant, canonical)| RewriteAudit {
                    sentence_index,
                    variant,
                    canonical,
                    score,
                    kept,
                }),
        );
        out.push(if kept {
            rewritten
        } else {
            String::from(sentence)
        });
    }
    (out, audit)
}
