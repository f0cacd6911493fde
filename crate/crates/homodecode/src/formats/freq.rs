use std::io::{BufRead, Write};
use std::path::Path;

use homodecode_core::FrequencyTable;

use super::{open, single_char, with_path, FormatError, LoadError};

/// Reads `<char>\t<count>` lines.
pub fn parse_frequency<R: BufRead>(reader: R) -> Result<FrequencyTable, FormatError> {
    let mut table = FrequencyTable::new();
    for (i, line) in reader.lines().enumerate() {
        let line = line?;
        let line_no = i + 1;
        if line.trim().is_empty() {
            continue;
        }
        let (c, n) = line
            .split_once('\t')
            .ok_or_else(|| FormatError::malformed(line_no, "expected <char>\\t<count>"))?;
        let c = single_char(c)
            .ok_or_else(|| FormatError::malformed(line_no, "expected one character"))?;
        let n: u64 = n
            .trim()
            .parse()
            .map_err(|_| FormatError::malformed(line_no, "count must be a non-negative integer"))?;
        table.set(c, n);
    }
    Ok(table)
}

pub fn load_frequency(path: &Path) -> Result<FrequencyTable, LoadError> {
    let reader = open(path)?;
    with_path(path, parse_frequency(reader))
}

pub fn write_frequency<W: Write>(mut w: W, table: &FrequencyTable) -> std::io::Result<()> {
    for (c, n) in table.iter() {
        writeln!(w, "{c}\t{n}")?;
    }
    Ok(())
}
