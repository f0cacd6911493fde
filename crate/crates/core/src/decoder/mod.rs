//! CTC prefix beam search with n-gram shallow fusion, a length bonus,
//! homophone extension, and final n-best rescoring.
//!
//! A hypothesis' fused score is
//! `logsumexp(p_blank, p_nonblank) + alpha * ln(10) * lm_score + beta * len`,
//! with the LM score kept in log10 and converted once here.

mod beam;
mod homophone;

use alloc::string::String;
use alloc::vec::Vec;
use core::cmp::Ordering;

pub use homophone::homophone_adjusted_prob;

use crate::emissions::{EmissionError, EmissionMatrix, Vocabulary};
use crate::lexicon::HomophoneIndex;
use crate::math::{log_add_exp, LN_10};
use crate::ngram::NGramModel;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum DecodeError {
    #[error("probability outside [0, 1]")]
    InvalidProbability,
    #[error("pronunciation count must be at least 1")]
    InvalidPronCount,
    #[error("invalid decoder config: {0}")]
    InvalidConfig(&'static str),
    #[error("emission matrix has no frames")]
    EmptyEmissions,
    #[error(transparent)]
    Emission(#[from] EmissionError),
}

#[derive(Debug, Clone, PartialEq)]
pub struct DecoderConfig {
    /// Hypotheses kept per step. `usize::MAX` disables pruning.
    pub beam_size: usize,
    /// LM fusion weight.
    pub alpha: f64,
    /// Per-token length bonus.
    pub beta: f64,
    /// Mixing weight of the homophone's own acoustic probability.
    pub gamma: f64,
    pub he_enabled: bool,
    pub nbest: usize,
    pub rescore_enabled: bool,
}

impl DecoderConfig {
    pub const DEFAULT_ALPHA: f64 = 0.45;
    pub const DEFAULT_BETA: f64 = 1.55;
    pub const DEFAULT_BEAM: usize = 20;
    pub const DEFAULT_GAMMA: f64 = 0.5;

    pub fn validate(&self) -> Result<(), DecodeError> {
        if self.beam_size == 0 {
            return Err(DecodeError::InvalidConfig("beam_size must be at least 1"));
        }
        if self.nbest == 0 {
            return Err(DecodeError::InvalidConfig("nbest must be at least 1"));
        }
        if !(self.alpha >= 0.0 && self.alpha.is_finite()) {
            return Err(DecodeError::InvalidConfig(
                "alpha must be finite and non-negative",
            ));
        }
        if !self.beta.is_finite() {
            return Err(DecodeError::InvalidConfig("beta must be finite"));
        }
        if !(0.0..=1.0).contains(&self.gamma) {
            return Err(DecodeError::InvalidConfig("gamma must lie in [0, 1]"));
        }
        Ok(())
    }
}

impl Default for DecoderConfig {
    fn default() -> Self {
        Self {
            beam_size: Self::DEFAULT_BEAM,
            alpha: Self::DEFAULT_ALPHA,
            beta: Self::DEFAULT_BETA,
            gamma: Self::DEFAULT_GAMMA,
            he_enabled: true,
            nbest: 1,
            rescore_enabled: true,
        }
    }
}

/// Where a prefix's newest token came from during the current step.
#[derive(Debug, Clone, PartialEq)]
pub(crate) struct Extension {
    pub token: u32,
    pub parent_p_blank: f64,
    pub parent_p_nonblank: f64,
    pub parent_lm_score: f64,
    pub parent_lm_context: Vec<u32>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BeamHypothesis {
    /// Vocabulary indices of the collapsed output.
    pub prefix: Vec<u32>,
    pub p_blank: f64,
    pub p_nonblank: f64,
    /// Accumulated log10 LM score.
    pub lm_score: f64,
    pub fused_score: f64,
    lm_context: Vec<u32>,
    extension: Option<Extension>,
    injected: Vec<usize>,
}

impl BeamHypothesis {
    pub fn acoustic_score(&self) -> f64 {
        log_add_exp(self.p_blank, self.p_nonblank)
    }

    /// Whether this prefix was extended by a new token in the latest step.
    pub fn extended_by(&self) -> Option<u32> {
        self.extension.as_ref().map(|e| e.token)
    }

    /// Prefix positions holding homophone-injected characters.
    pub fn injected_positions(&self) -> &[usize] {
        &self.injected
    }
}

/// One homophone injection, recorded whether or not it survived pruning.
#[derive(Debug, Clone, PartialEq)]
pub struct HeInjection {
    pub step: usize,
    pub source: char,
    pub injected: char,
    pub prob: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct NBestEntry {
    pub transcript: String,
    pub tokens: Vec<u32>,
    /// Final ranking score; the rescored value when rescoring is enabled.
    pub fused_score: f64,
    pub acoustic_score: f64,
    /// log10 LM score of the transcript.
    pub lm_score: f64,
    pub injected_positions: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct DecodeResult {
    pub nbest: Vec<NBestEntry>,
    pub he_injections: Vec<HeInjection>,
}

impl DecodeResult {
    pub fn best(&self) -> Option<&NBestEntry> {
        self.nbest.first()
    }

    pub fn best_transcript(&self) -> &str {
        self.best().map_or("", |e| e.transcript.as_str())
    }
}

/// Decoding state shared across utterances: borrowed resources plus lookup
/// tables derived from them.
pub struct Decoder<'a> {
    vocab: &'a Vocabulary,
    lm: &'a NGramModel,
    config: DecoderConfig,
    /// LM id of every vocabulary token.
    lm_ids: Vec<u32>,
    /// In-vocabulary homophones and their pronunciation counts, per token.
    homophones: Vec<Vec<(u32, u32)>>,
}

impl<'a> Decoder<'a> {
    pub fn new(
        vocab: &'a Vocabulary,
        index: &HomophoneIndex,
        lm: &'a NGramModel,
        config: DecoderConfig,
    ) -> Result<Self, DecodeError> {
        config.validate()?;
        let lm_ids = vocab.tokens().iter().map(|t| lm.token_id(t)).collect();
        let mut homophones = alloc::vec![Vec::new(); vocab.len()];
        for c in index.characters() {
            let Some(source) = vocab.index_of_char(c) else {
                continue;
            };
            homophones[source] = index
                .homophones_of(c)
                .into_iter()
                .filter_map(|h| Some((vocab.index_of_char(h)? as u32, index.pron_count(h))))
                .collect();
        }
        Ok(Self {
            vocab,
            lm,
            config,
            lm_ids,
            homophones,
        })
    }

    pub fn config(&self) -> &DecoderConfig {
        &self.config
    }

    pub fn vocab(&self) -> &Vocabulary {
        self.vocab
    }

    fn fuse(&self, p_blank: f64, p_nonblank: f64, lm_score: f64, len: usize) -> f64 {
        log_add_exp(p_blank, p_nonblank)
            + self.config.alpha * LN_10 * lm_score
            + self.config.beta * len as f64
    }

    /// The single empty-prefix hypothesis every decode starts from.
    pub fn initial_beam(&self) -> Vec<BeamHypothesis> {
        alloc::vec![BeamHypothesis {
            prefix: Vec::new(),
            p_blank: 0.0,
            p_nonblank: f64::NEG_INFINITY,
            lm_score: 0.0,
            fused_score: 0.0,
            lm_context: self.lm.start_context(),
            extension: None,
            injected: Vec::new(),
        }]
    }

    pub fn transcript(&self, prefix: &[u32]) -> String {
        prefix
            .iter()
            .map(|&t| self.vocab.token(t as usize))
            .collect()
    }

    fn compare_prefixes(&self, a: &[u32], b: &[u32]) -> Ordering {
        let chars = |p: &[u32]| {
            p.iter()
                .flat_map(|&t| self.vocab.token(t as usize).chars())
                .collect::<Vec<char>>()
        };
        if a == b {
            return Ordering::Equal;
        }
        chars(a).cmp(&chars(b))
    }

    /// Best first: higher score, then smaller transcript by code point.
    fn rank(&self, a_score: f64, a: &[u32], b_score: f64, b: &[u32]) -> Ordering {
        b_score
            .total_cmp(&a_score)
            .then_with(|| self.compare_prefixes(a, b))
    }

    fn prune(&self, hyps: &mut Vec<BeamHypothesis>) {
        hyps.sort_by(|a, b| self.rank(a.fused_score, &a.prefix, b.fused_score, &b.prefix));
        hyps.truncate(self.config.beam_size);
    }

    pub fn decode(&self, emissions: &EmissionMatrix) -> Result<DecodeResult, DecodeError> {
        emissions.check_vocab(self.vocab)?;
        if emissions.frames() == 0 {
            return Err(DecodeError::EmptyEmissions);
        }
        let mut beam = self.initial_beam();
        let mut he_injections = Vec::new();
        for (step, frame) in emissions.rows().enumerate() {
            beam = self.ctc_step(&beam, frame);
            beam = self.extend_homophones(beam, frame, step, &mut he_injections);
        }
        Ok(DecodeResult {
            nbest: self.finish(beam),
            he_injections,
        })
    }

    /// Turns the final beam into the ranked n-best list, rescoring it with the
    /// full-sentence LM score when enabled.
    pub fn finish(&self, beam: Vec<BeamHypothesis>) -> Vec<NBestEntry> {
        let mut nbest: Vec<NBestEntry> = beam
            .into_iter()
            .take(self.config.nbest)
            .map(|h| {
                let acoustic_score = h.acoustic_score();
                NBestEntry {
                    transcript: self.transcript(&h.prefix),
                    fused_score: h.fused_score,
                    acoustic_score,
                    lm_score: h.lm_score,
                    injected_positions: h.injected,
                    tokens: h.prefix,
                }
            })
            .collect();
        if self.config.rescore_enabled {
            for entry in &mut nbest {
                let tokens: Vec<&str> = entry
                    .tokens
                    .iter()
                    .map(|&t| self.vocab.token(t as usize))
                    .collect();
                entry.lm_score = self.lm.score_sequence(&tokens);
                entry.fused_score = entry.acoustic_score
                    + self.config.alpha * LN_10 * entry.lm_score
                    + self.config.beta * entry.tokens.len() as f64;
            }
            nbest.sort_by(|a, b| self.rank(a.fused_score, &a.tokens, b.fused_score, &b.tokens));
        }
        nbest
    }
}

/// Decodes one utterance.
pub fn decode(
    emissions: &EmissionMatrix,
    vocab: &Vocabulary,
    index: &HomophoneIndex,
    lm: &NGramModel,
    config: &DecoderConfig,
) -> Result<DecodeResult, DecodeError> {
    Decoder::new(vocab, index, lm, config.clone())?.decode(emissions)
}

/// Best-path decoding: per-frame argmax, repeats merged, blanks dropped.
/// Ties go to the lower token index.
pub fn greedy_decode(
    emissions: &EmissionMatrix,
    vocab: &Vocabulary,
) -> Result<NBestEntry, DecodeError> {
    emissions.check_vocab(vocab)?;
    if emissions.frames() == 0 {
        return Err(DecodeError::EmptyEmissions);
    }
    let blank = vocab.blank_index();
    let mut tokens = Vec::new();
    let mut score = 0.0;
    let mut last = blank;
    for row in emissions.rows() {
        let (best, value) = row
            .iter()
            .enumerate()
            .fold(
                (0, f64::NEG_INFINITY),
                |acc, (i, &v)| if v > acc.1 { (i, v) } else { acc },
            );
        score += value;
        if best != blank && best != last {
            tokens.push(best as u32);
        }
        last = best;
    }
    Ok(NBestEntry {
        transcript: tokens.iter().map(|&t| vocab.token(t as usize)).collect(),
        tokens,
        fused_score: score,
        acoustic_score: score,
        lm_score: 0.0,
        injected_positions: Vec::new(),
    })
}
