//! Back-off n-gram language model over string tokens, log10 scores.
//!
//! The model is built through [`NGramBuilder`], normally fed by an ARPA
//! reader. Conditional probabilities follow the usual back-off recursion:
//! `P(x | ctx) = p(ctx x)` when that n-gram exists, otherwise
//! `bow(ctx) + P(x | ctx[1..])`, where a missing back-off weight counts as 0.

use alloc::boxed::Box;
use alloc::string::String;
use alloc::vec::Vec;
use hashbrown::HashMap;
use smallvec::SmallVec;

pub const SENTENCE_START: &str = "<s>";
pub const SENTENCE_END: &str = "</s>";
pub const UNKNOWN: &str = "<unk>";

/// log10 probability used for `<unk>` when the model does not list it.
pub const UNKNOWN_FLOOR_LOG10: f64 = -100.0;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum NGramError {
    #[error("model order must be at least 1")]
    ZeroOrder,
    #[error("n-gram of length {len} does not fit model order {order}")]
    OrderOutOfRange { len: usize, order: usize },
    #[error("duplicate n-gram {0:?}")]
    Duplicate(String),
    #[error("n-gram {0:?} has no lower-order prefix entry")]
    MissingPrefix(String),
    #[error("n-gram {ngram:?} has positive log10 probability {log10_prob}")]
    PositiveProbability { ngram: String, log10_prob: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NGramEntry {
    pub log10_prob: f64,
    pub log10_backoff: f64,
}

type Key = Box<[u32]>;

pub struct NGramBuilder {
    order: usize,
    symbols: HashMap<String, u32>,
    names: Vec<String>,
    tables: Vec<HashMap<Key, NGramEntry>>,
}

impl NGramBuilder {
    pub fn new(order: usize) -> Result<Self, NGramError> {
        if order == 0 {
            return Err(NGramError::ZeroOrder);
        }
        let mut builder = Self {
            order,
            symbols: HashMap::new(),
            names: Vec::new(),
            tables: (0..order).map(|_| HashMap::new()).collect(),
        };
        for special in [SENTENCE_START, SENTENCE_END, UNKNOWN] {
            builder.intern(special);
        }
        Ok(builder)
    }

    fn intern(&mut self, token: &str) -> u32 {
        if let Some(&id) = self.symbols.get(token) {
            return id;
        }
        let id = self.names.len() as u32;
        self.names.push(String::from(token));
        self.symbols.insert(String::from(token), id);
        id
    }

    pub fn insert(
        &mut self,
        tokens: &[&str],
        log10_prob: f64,
        log10_backoff: f64,
    ) -> Result<(), NGramError> {
        if tokens.is_empty() || tokens.len() > self.order {
            return Err(NGramError::OrderOutOfRange {
                len: tokens.len(),
                order: self.order,
            });
        }
        if log10_prob > 0.0 {
            return Err(NGramError::PositiveProbability {
                ngram: tokens.join(" "),
                log10_prob,
            });
        }
        let key: Key = tokens.iter().map(|t| self.intern(t)).collect();
        let entry = NGramEntry {
            log10_prob,
            log10_backoff,
        };
        if self.tables[tokens.len() - 1].insert(key, entry).is_some() {
            return Err(NGramError::Duplicate(tokens.join(" ")));
        }
        Ok(())
    }

    /// Number of entries stored for n-grams of length `n`.
    pub fn count(&self, n: usize) -> usize {
        self.tables.get(n.wrapping_sub(1)).map_or(0, HashMap::len)
    }

    pub fn build(self) -> Result<NGramModel, NGramError> {
        for k in 1..self.order {
            for key in self.tables[k].keys() {
                if !self.tables[k - 1].contains_key(&key[..key.len() - 1]) {
                    let text: Vec<&str> = key
                        .iter()
                        .map(|&id| self.names[id as usize].as_str())
                        .collect();
                    return Err(NGramError::MissingPrefix(text.join(" ")));
                }
            }
        }
        let bos = self.symbols[SENTENCE_START];
        let unk = self.symbols[UNKNOWN];
        let unk_log10 = self.tables[0]
            .get(&[unk][..])
            .map_or(UNKNOWN_FLOOR_LOG10, |e| e.log10_prob);
        let max_prob = self
            .tables
            .iter()
            .flat_map(|t| t.values())
            .map(|e| e.log10_prob)
            .fold(unk_log10, f64::max);
        let max_backoff = self
            .tables
            .iter()
            .flat_map(|t| t.values())
            .map(|e| e.log10_backoff)
            .fold(0.0, f64::max);
        Ok(NGramModel {
            order: self.order,
            symbols: self.symbols,
            names: self.names,
            tables: self.tables,
            bos,
            unk,
            unk_log10,
            max_increment: max_prob + (self.order - 1) as f64 * max_backoff,
        })
    }
}

/// Immutable back-off model. All scores are log10.
#[derive(Debug, Clone)]
pub struct NGramModel {
    order: usize,
    symbols: HashMap<String, u32>,
    names: Vec<String>,
    tables: Vec<HashMap<Key, NGramEntry>>,
    bos: u32,
    unk: u32,
    unk_log10: f64,
    max_increment: f64,
}

impl NGramModel {
    /// A unigram model with no entries: every token scores the unknown floor.
    pub fn empty() -> Self {
        NGramBuilder::new(1)
            .and_then(NGramBuilder::build)
            .unwrap_or_else(|_| unreachable!())
    }

    pub fn order(&self) -> usize {
        self.order
    }

    /// Entry count for n-grams of length `n`.
    pub fn count(&self, n: usize) -> usize {
        self.tables.get(n.wrapping_sub(1)).map_or(0, HashMap::len)
    }

    pub fn entry(&self, tokens: &[&str]) -> Option<NGramEntry> {
        if tokens.is_empty() || tokens.len() > self.order {
            return None;
        }
        let mut key: SmallVec<[u32; 8]> = SmallVec::new();
        for t in tokens {
            key.push(*self.symbols.get(*t)?);
        }
        self.tables[tokens.len() - 1].get(&key[..]).copied()
    }

    pub fn sentence_start(&self) -> u32 {
        self.bos
    }

    pub fn unknown(&self) -> u32 {
        self.unk
    }

    /// Id used when scoring `token`: its own id when it has a unigram entry,
    /// the unknown symbol otherwise. `<s>` always keeps its id.
    pub fn token_id(&self, token: &str) -> u32 {
        match self.symbols.get(token) {
            Some(&id) if id == self.bos || self.tables[0].contains_key(&[id][..]) => id,
            _ => self.unk,
        }
    }

    pub fn token_name(&self, id: u32) -> &str {
        &self.names[id as usize]
    }

    /// Upper bound on any value [`increment_ids`](Self::increment_ids) can return.
    pub fn max_increment(&self) -> f64 {
        self.max_increment
    }

    /// Context for the first token of a sentence.
    pub fn start_context(&self) -> Vec<u32> {
        let mut ctx = Vec::with_capacity(self.order);
        if self.order > 1 {
            ctx.push(self.bos);
        }
        ctx
    }

    /// Appends `next` to a context window, keeping only the tokens the model
    /// can condition on.
    pub fn advance_context(&self, context: &mut Vec<u32>, next: u32) {
        let keep = self.order - 1;
        if keep == 0 {
            context.clear();
            return;
        }
        context.push(next);
        if context.len() > keep {
            let excess = context.len() - keep;
            context.drain(..excess);
        }
    }

    /// `log10 P(next | context)` with back-off. Only the last `order - 1`
    /// context ids are consulted.
    pub fn increment_ids(&self, context: &[u32], next: u32) -> f64 {
        let next = if self.tables[0].contains_key(&[next][..]) {
            next
        } else {
            self.unk
        };
        let used = context.len().min(self.order - 1);
        let context = &context[context.len() - used..];
        let mut backoff = 0.0;
        let mut key: SmallVec<[u32; 8]> = SmallVec::new();
        for k in (0..=used).rev() {
            let ctx = &context[used - k..];
            key.clear();
            key.extend_from_slice(ctx);
            key.push(next);
            if let Some(e) = self.tables[k].get(&key[..]) {
                return backoff + e.log10_prob;
            }
            if k > 0 {
                if let Some(e) = self.tables[k - 1].get(ctx) {
                    backoff += e.log10_backoff;
                }
            }
        }
        // only reached for an unlisted <unk>
        backoff + self.unk_log10
    }

    /// `log10 P(next | <s> context)`.
    pub fn score_increment(&self, context: &[&str], next: &str) -> f64 {
        let mut ctx = self.start_context();
        for t in context {
            self.advance_context(&mut ctx, self.token_id(t));
        }
        self.increment_ids(&ctx, self.token_id(next))
    }

    /// Sum of conditional log10 probabilities of `tokens` after `<s>`. No
    /// sentence-end term is added.
    pub fn score_sequence<S: AsRef<str>>(&self, tokens: &[S]) -> f64 {
        let mut ctx = self.start_context();
        let mut total = 0.0;
        for t in tokens {
            let id = self.token_id(t.as_ref());
            total += self.increment_ids(&ctx, id);
            self.advance_context(&mut ctx, id);
        }
        total
    }
}
