//! Readers and writers for every on-disk format the toolkit uses.
//!
//! Each `parse_*`/`read_*` function works on an in-memory reader and reports
//! a [`FormatError`]; the matching `load_*` function opens a path and wraps
//! failures in a [`LoadError`] naming the file.

mod arpa;
mod audit;
mod cin;
mod emat;
mod embedding;
mod freq;
mod lexicon;
mod pairs;
mod vocab;

use std::fmt;
use std::io;
use std::path::{Path, PathBuf};

use homodecode_core::{EmissionError, NGramError, VocabularyError};

pub use arpa::{load_arpa, parse_arpa};
pub use audit::{
    write_he_audit, write_nbest, write_rewrite_audit, HeAuditRecord, NBestRecord,
    RewriteAuditRecord,
};
pub use cin::{load_cin_dir, load_cin_table, parse_cin};
pub use emat::{load_emissions, read_emissions, write_emissions, EMAT_MAGIC, EMAT_VERSION};
pub use embedding::{load_embeddings, parse_embeddings, write_embeddings};
pub use freq::{load_frequency, parse_frequency, write_frequency};
pub use lexicon::{load_lexicon, parse_lexicon, write_lexicon};
pub use pairs::{load_pairs, parse_pairs, write_pairs};
pub use vocab::{load_vocab, parse_vocab, write_vocab};

#[derive(Debug, thiserror::Error)]
pub enum FormatError {
    #[error(transparent)]
    Io(#[from] io::Error),
    #[error("line {line}: {reason}")]
    MalformedLine { line: usize, reason: String },
    #[error("line {line}: invalid tone {tone}, expected 1..=6")]
    InvalidTone { line: usize, tone: u8 },
    #[error("no %chardef begin block")]
    MissingChardefBlock,
    #[error("first line must be a #blank <index> directive")]
    MissingBlankDirective,
    #[error("line {line}: duplicate token {token:?}")]
    DuplicateToken { line: usize, token: String },
    #[error(transparent)]
    Vocabulary(#[from] VocabularyError),
    #[error("bad magic, expected EMAT")]
    BadMagic,
    #[error("unsupported EMAT version {0}")]
    UnsupportedVersion(u32),
    #[error("file ends before the declared {expected} bytes of data")]
    Truncated { expected: usize },
    #[error(transparent)]
    Emission(#[from] EmissionError),
    #[error("order {order}: declared {declared} n-grams, found {found}")]
    CountMismatch {
        order: usize,
        declared: usize,
        found: usize,
    },
    #[error("missing section {0}")]
    MissingSection(String),
    #[error("line {line}: {source}")]
    NGram { line: usize, source: NGramError },
    #[error(transparent)]
    Model(NGramError),
    #[error("line {line}: {message}")]
    Json { line: usize, message: String },
}

impl FormatError {
    pub(crate) fn malformed(line: usize, reason: impl Into<String>) -> Self {
        Self::MalformedLine {
            line,
            reason: reason.into(),
        }
    }
}

/// A format error tied to the file it came from.
#[derive(Debug)]
pub struct LoadError {
    pub path: PathBuf,
    pub error: FormatError,
}

impl fmt::Display for LoadError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.path.display(), self.error)
    }
}

impl std::error::Error for LoadError {
    fn source(&self) -> Option<&(dyn std::error::Error + 'static)> {
        Some(&self.error)
    }
}

pub(crate) fn with_path<T>(path: &Path, result: Result<T, FormatError>) -> Result<T, LoadError> {
    result.map_err(|error| LoadError {
        path: path.to_path_buf(),
        error,
    })
}

pub(crate) fn open(path: &Path) -> Result<io::BufReader<std::fs::File>, LoadError> {
    std::fs::File::open(path)
        .map(io::BufReader::new)
        .map_err(|e| LoadError {
            path: path.to_path_buf(),
            error: FormatError::Io(e),
        })
}

/// Reads a single scalar value, rejecting empty and multi-character text.
pub(crate) fn single_char(s: &str) -> Option<char> {
    let mut it = s.chars();
    let c = it.next()?;
    it.next().is_none().then_some(c)
}
