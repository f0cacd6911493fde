use std::io::{BufRead, Write};
use std::path::Path;

use homodecode_core::EmbeddingTable;

use super::{open, single_char, with_path, FormatError, LoadError};

/// Reads a word-vector text file: a `<count> <dim>` header, then
/// `<token> <f1> .. <fdim>` lines. Tokens longer than one character are
/// skipped; the header count covers them too.
pub fn parse_embeddings<R: BufRead>(reader: R) -> Result<EmbeddingTable, FormatError> {
    let mut lines = reader.lines();
    let header = lines
        .next()
        .transpose()?
        .ok_or_else(|| FormatError::malformed(1, "missing <count> <dim> header"))?;
    let mut parts = header.split_whitespace().map(str::parse::<usize>);
    let (Some(Ok(count)), Some(Ok(dim)), None) = (parts.next(), parts.next(), parts.next()) else {
        return Err(FormatError::malformed(1, "header must be <count> <dim>"));
    };
    let mut table = EmbeddingTable::new(dim);
    let mut rows = 0;
    for (i, line) in lines.enumerate() {
        let line = line?;
        let line_no = i + 2;
        if line.trim().is_empty() {
            continue;
        }
        rows += 1;
        let mut fields = line.split_whitespace();
        let token = fields.next().unwrap_or_default();
        let values: Result<Vec<f64>, _> = fields.map(str::parse::<f64>).collect();
        let values = values.map_err(|_| FormatError::malformed(line_no, "bad vector component"))?;
        let Some(c) = single_char(token) else {
            continue;
        };
        table
            .insert(c, values)
            .map_err(|e| FormatError::malformed(line_no, e.to_string()))?;
    }
    if rows != count {
        return Err(FormatError::malformed(
            1,
            format!("header declares {count} vectors, found {rows}"),
        ));
    }
    Ok(table)
}

pub fn load_embeddings(path: &Path) -> Result<EmbeddingTable, LoadError> {
    let reader = open(path)?;
    with_path(path, parse_embeddings(reader))
}

pub fn write_embeddings<W: Write>(mut w: W, table: &EmbeddingTable) -> std::io::Result<()> {
    writeln!(w, "{} {}", table.len(), table.dim())?;
    for (c, v) in table.iter() {
        write!(w, "{c}")?;
        for x in v {
            write!(w, " {x}")?;
        }
        writeln!(w)?;
    }
    Ok(())
}
