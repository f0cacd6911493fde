//! Pair files: `variant\tcanonical\tjyutping_distance\tcosine\tmethod=value;...`.

use std::io::{BufRead, Write};
use std::path::Path;

use homodecode_core::UnifiedPair;

use super::{open, single_char, with_path, FormatError, LoadError};

pub fn write_pairs<W: Write>(mut w: W, pairs: &[UnifiedPair]) -> std::io::Result<()> {
    for p in pairs {
        let methods: Vec<String> = p
            .glyph_distances
            .iter()
            .map(|(m, d)| format!("{m}={d}"))
            .collect();
        writeln!(
            w,
            "{}\t{}\t{}\t{}\t{}",
            p.variant,
            p.canonical,
            p.jyutping_distance,
            p.cosine,
            methods.join(";")
        )?;
    }
    Ok(())
}

pub fn parse_pairs<R: BufRead>(reader: R) -> Result<Vec<UnifiedPair>, FormatError> {
    let mut pairs = Vec::new();
    for (i, line) in reader.lines().enumerate() {
        let line = line?;
        let line_no = i + 1;
        if line.trim().is_empty() || line.starts_with('#') {
            continue;
        }
        let fields: Vec<&str> = line.split('\t').collect();
        if fields.len() != 5 {
            return Err(FormatError::malformed(
                line_no,
                "expected 5 tab-separated fields",
            ));
        }
        let ch = |s: &str| {
            single_char(s).ok_or_else(|| FormatError::malformed(line_no, "expected one character"))
        };
        let num = |s: &str| {
            s.parse::<f64>()
                .map_err(|_| FormatError::malformed(line_no, format!("bad number {s:?}")))
        };
        let mut glyph_distances = Vec::new();
        for part in fields[4].split(';').filter(|s| !s.is_empty()) {
            let (m, d) = part
                .split_once('=')
                .ok_or_else(|| FormatError::malformed(line_no, "expected method=value"))?;
            glyph_distances.push((m.to_string(), num(d)?));
        }
        pairs.push(UnifiedPair {
            variant: ch(fields[0])?,
            canonical: ch(fields[1])?,
            jyutping_distance: num(fields[2])?,
            cosine: num(fields[3])?,
            glyph_distances,
        });
    }
    Ok(pairs)
}

pub fn load_pairs(path: &Path) -> Result<Vec<UnifiedPair>, LoadError> {
    let reader = open(path)?;
    with_path(path, parse_pairs(reader))
}
