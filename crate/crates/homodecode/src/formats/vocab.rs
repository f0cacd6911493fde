use std::collections::HashSet;
use std::io::{BufRead, Write};
use std::path::Path;

use homodecode_core::Vocabulary;

use super::{open, with_path, FormatError, LoadError};

/// Reads a `#blank <index>` directive line followed by one token per line.
pub fn parse_vocab<R: BufRead>(reader: R) -> Result<Vocabulary, FormatError> {
    let mut lines = reader.lines();
    let first = lines
        .next()
        .transpose()?
        .ok_or(FormatError::MissingBlankDirective)?;
    let blank: usize = first
        .strip_prefix("#blank ")
        .and_then(|n| n.trim().parse().ok())
        .ok_or(FormatError::MissingBlankDirective)?;
    let mut tokens = Vec::new();
    let mut seen = HashSet::new();
    for (i, line) in lines.enumerate() {
        let line = line?;
        let line_no = i + 2;
        if line.is_empty() {
            return Err(FormatError::malformed(line_no, "empty token"));
        }
        if !seen.insert(line.clone()) {
            return Err(FormatError::DuplicateToken {
                line: line_no,
                token: line,
            });
        }
        tokens.push(line);
    }
    Ok(Vocabulary::new(tokens, blank)?)
}

pub fn load_vocab(path: &Path) -> Result<Vocabulary, LoadError> {
    let reader = open(path)?;
    with_path(path, parse_vocab(reader))
}

pub fn write_vocab<W: Write>(mut w: W, vocab: &Vocabulary) -> std::io::Result<()> {
    writeln!(w, "#blank {}", vocab.blank_index())?;
    for t in vocab.tokens() {
        writeln!(w, "{t}")?;
    }
    Ok(())
}
