use std::io::{BufRead, Write};
use std::path::Path;

use homodecode_core::{JyutpingCode, JyutpingError, Lexicon};

use super::{open, single_char, with_path, FormatError, LoadError};

/// Reads `<character>\t<jyutping>` lines. `#` lines and blank lines are
/// skipped.
pub fn parse_lexicon<R: BufRead>(reader: R) -> Result<Lexicon, FormatError> {
    let mut lex = Lexicon::new();
    for (i, line) in reader.lines().enumerate() {
        let line = line?;
        let line_no = i + 1;
        if line.trim().is_empty() || line.starts_with('#') {
            continue;
        }
        let (ch, code) = line
            .split_once('\t')
            .ok_or_else(|| FormatError::malformed(line_no, "expected <character>\\t<code>"))?;
        let ch = single_char(ch).ok_or_else(|| {
            FormatError::malformed(line_no, "character column must be one scalar")
        })?;
        let code: JyutpingCode = code.trim_end().parse().map_err(|e| match e {
            JyutpingError::InvalidTone(tone) => FormatError::InvalidTone {
                line: line_no,
                tone,
            },
            other => FormatError::malformed(line_no, other.to_string()),
        })?;
        lex.insert(ch, code);
    }
    Ok(lex)
}

pub fn load_lexicon(path: &Path) -> Result<Lexicon, LoadError> {
    let reader = open(path)?;
    with_path(path, parse_lexicon(reader))
}

pub fn write_lexicon<W: Write>(mut w: W, lex: &Lexicon) -> std::io::Result<()> {
    for entry in lex.entries() {
        writeln!(w, "{}\t{}", entry.character, entry.code)?;
    }
    Ok(())
}
