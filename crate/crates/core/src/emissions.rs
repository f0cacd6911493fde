//! Acoustic interface: the token vocabulary and per-frame CTC log-posteriors.

use alloc::string::String;
use alloc::vec::Vec;
use hashbrown::HashMap;

/// Rows of an emission matrix must exponentiate to a sum within this of 1.
pub const ROW_SUM_TOLERANCE: f64 = 1e-4;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum VocabularyError {
    #[error("duplicate token {0:?}")]
    DuplicateToken(String),
    #[error("empty token at index {0}")]
    EmptyToken(usize),
    #[error("blank index {blank} out of range for {len} tokens")]
    BlankOutOfRange { blank: usize, len: usize },
}

/// Ordered token list with one designated CTC blank.
///
/// Non-blank tokens are usually single characters; longer tokens are allowed
/// and are emitted verbatim, but never take part in homophone lookups.
#[derive(Debug, Clone)]
pub struct Vocabulary {
    tokens: Vec<String>,
    blank_index: usize,
    by_text: HashMap<String, u32>,
    by_char: HashMap<char, u32>,
}

impl Vocabulary {
    pub fn new(tokens: Vec<String>, blank_index: usize) -> Result<Self, VocabularyError> {
        if blank_index >= tokens.len() {
            return Err(VocabularyError::BlankOutOfRange {
                blank: blank_index,
                len: tokens.len(),
            });
        }
        let mut by_text = HashMap::with_capacity(tokens.len());
        let mut by_char = HashMap::with_capacity(tokens.len());
        for (i, token) in tokens.iter().enumerate() {
            if token.is_empty() {
                return Err(VocabularyError::EmptyToken(i));
            }
            if by_text.insert(token.clone(), i as u32).is_some() {
                return Err(VocabularyError::DuplicateToken(token.clone()));
            }
            if i != blank_index {
                if let Some(c) = single_char(token) {
                    by_char.insert(c, i as u32);
                }
            }
        }
        Ok(Self {
            tokens,
            blank_index,
            by_text,
            by_char,
        })
    }

    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }

    pub fn blank_index(&self) -> usize {
        self.blank_index
    }

    pub fn tokens(&self) -> &[String] {
        &self.tokens
    }

    pub fn token(&self, index: usize) -> &str {
        &self.tokens[index]
    }

    pub fn index_of(&self, token: &str) -> Option<usize> {
        self.by_text.get(token).map(|&i| i as usize)
    }

    /// Index of a non-blank single-character token.
    pub fn index_of_char(&self, c: char) -> Option<usize> {
        self.by_char.get(&c).map(|&i| i as usize)
    }

    /// The character a token spells, if it is a non-blank single character.
    pub fn char_of(&self, index: usize) -> Option<char> {
        if index == self.blank_index {
            return None;
        }
        single_char(&self.tokens[index])
    }
}

impl PartialEq for Vocabulary {
    fn eq(&self, other: &Self) -> bool {
        self.tokens == other.tokens && self.blank_index == other.blank_index
    }
}

fn single_char(s: &str) -> Option<char> {
    let mut it = s.chars();
    let c = it.next()?;
    it.next().is_none().then_some(c)
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum EmissionError {
    #[error("expected {expected} values for {frames}x{vocab_size}, got {got}")]
    ShapeMismatch {
        frames: usize,
        vocab_size: usize,
        expected: usize,
        got: usize,
    },
    #[error("emission vocab size {file} does not match vocabulary size {vocab}")]
    VocabSizeMismatch { file: usize, vocab: usize },
    #[error("frame {frame} is not a normalized log-distribution (sum {sum})")]
    RowNotNormalized { frame: usize, sum: f64 },
}

/// `frames x vocab_size` natural-log posteriors, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct EmissionMatrix {
    frames: usize,
    vocab_size: usize,
    values: Vec<f64>,
}

impl EmissionMatrix {
    /// Builds a matrix, requiring every row to exponentiate to a sum within
    /// [`ROW_SUM_TOLERANCE`] of 1.
    pub fn new(frames: usize, vocab_size: usize, values: Vec<f64>) -> Result<Self, EmissionError> {
        let expected = frames * vocab_size;
        if values.len() != expected {
            return Err(EmissionError::ShapeMismatch {
                frames,
                vocab_size,
                expected,
                got: values.len(),
            });
        }
        if vocab_size > 0 {
            for (frame, row) in values.chunks_exact(vocab_size).enumerate() {
                let sum: f64 = row.iter().map(|&v| libm::exp(v)).sum();
                if sum.is_nan() || (sum - 1.0).abs() > ROW_SUM_TOLERANCE {
                    return Err(EmissionError::RowNotNormalized { frame, sum });
                }
            }
        }
        Ok(Self {
            frames,
            vocab_size,
            values,
        })
    }

    /// Builds a matrix from linear probabilities.
    pub fn from_probabilities(rows: &[Vec<f64>]) -> Result<Self, EmissionError> {
        let vocab_size = rows.first().map_or(0, Vec::len);
        let mut values = Vec::with_capacity(rows.len() * vocab_size);
        for row in rows {
            if row.len() != vocab_size {
                return Err(EmissionError::ShapeMismatch {
                    frames: rows.len(),
                    vocab_size,
                    expected: rows.len() * vocab_size,
                    got: values.len() + row.len(),
                });
            }
            values.extend(row.iter().map(|&p| libm::log(p)));
        }
        Self::new(rows.len(), vocab_size, values)
    }

    pub fn frames(&self) -> usize {
        self.frames
    }

    pub fn vocab_size(&self) -> usize {
        self.vocab_size
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn row(&self, frame: usize) -> &[f64] {
        &self.values[frame * self.vocab_size..(frame + 1) * self.vocab_size]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[f64]> {
        // chunks_exact panics on zero width
        self.values.chunks_exact(self.vocab_size.max(1))
    }

    /// Linear posterior of `token` at `frame`.
    pub fn prob(&self, frame: usize, token: usize) -> f64 {
        libm::exp(self.row(frame)[token])
    }

    pub fn check_vocab(&self, vocab: &Vocabulary) -> Result<(), EmissionError> {
        if self.vocab_size != vocab.len() {
            return Err(EmissionError::VocabSizeMismatch {
                file: self.vocab_size,
                vocab: vocab.len(),
            });
        }
        Ok(())
    }
}
