use std::io::BufRead;
use std::path::Path;

use homodecode_core::GlyphCodeTable;

use super::{open, single_char, with_path, FormatError, LoadError};

/// Reads the `%chardef begin` .. `%chardef end` block of a cin table.
///
/// Other `%` directives and blocks are ignored, as are `#` comments. Code and
/// character may be separated by tabs or spaces. Entries whose value is a
/// phrase rather than a single character are skipped.
pub fn parse_cin<R: BufRead>(reader: R, method: &str) -> Result<GlyphCodeTable, FormatError> {
    let mut table = GlyphCodeTable::new(method);
    let mut in_chardef = false;
    let mut seen_chardef = false;
    for (i, line) in reader.lines().enumerate() {
        let line = line?;
        let line_no = i + 1;
        let trimmed = line.trim();
        if let Some(directive) = trimmed.strip_prefix('%') {
            let mut words = directive.split_whitespace();
            if words.next() == Some("chardef") {
                match words.next() {
                    Some("begin") => {
                        in_chardef = true;
                        seen_chardef = true;
                    }
                    Some("end") => in_chardef = false,
                    _ => {
                        return Err(FormatError::malformed(
                            line_no,
                            "expected %chardef begin|end",
                        ))
                    }
                }
            }
            continue;
        }
        if !in_chardef || trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        let mut fields = trimmed.split_whitespace();
        let (Some(code), Some(value)) = (fields.next(), fields.next()) else {
            return Err(FormatError::malformed(
                line_no,
                "expected <code> <character>",
            ));
        };
        let Some(ch) = single_char(value) else {
            continue;
        };
        table
            .insert(ch, code)
            .map_err(|e| FormatError::malformed(line_no, e.to_string()))?;
    }
    if !seen_chardef {
        return Err(FormatError::MissingChardefBlock);
    }
    Ok(table)
}

/// Loads one table; the method is named after the file stem.
pub fn load_cin_table(path: &Path) -> Result<GlyphCodeTable, LoadError> {
    let method = path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default();
    let reader = open(path)?;
    with_path(path, parse_cin(reader, &method))
}

/// Loads every `*.cin` file in a directory, ordered by file name.
pub fn load_cin_dir(dir: &Path) -> Result<Vec<GlyphCodeTable>, LoadError> {
    let entries = std::fs::read_dir(dir).map_err(|e| LoadError {
        path: dir.to_path_buf(),
        error: e.into(),
    })?;
    let mut paths = Vec::new();
    for entry in entries {
        let entry = entry.map_err(|e| LoadError {
            path: dir.to_path_buf(),
            error: e.into(),
        })?;
        let path = entry.path();
        if path.extension().is_some_and(|ext| ext == "cin") {
            paths.push(path);
        }
    }
    paths.sort();
    paths.iter().map(|p| load_cin_table(p)).collect()
}
