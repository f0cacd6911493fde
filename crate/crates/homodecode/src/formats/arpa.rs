use std::io::BufRead;
use std::path::Path;

use homodecode_core::{NGramBuilder, NGramModel};

use super::{open, with_path, FormatError, LoadError};

enum State {
    Preamble,
    Data,
    Grams(usize),
    Done,
}

/// Reads an ARPA back-off model. Fields may be separated by tabs or spaces;
/// an omitted back-off weight is 0.
pub fn parse_arpa<R: BufRead>(reader: R) -> Result<NGramModel, FormatError> {
    let mut state = State::Preamble;
    let mut declared: Vec<usize> = Vec::new();
    let mut found: Vec<usize> = Vec::new();
    let mut builder: Option<NGramBuilder> = None;

    for (i, line) in reader.lines().enumerate() {
        let line = line?;
        let line_no = i + 1;
        let text = line.trim();
        if text.is_empty() {
            continue;
        }
        if text == "\\data\\" {
            state = State::Data;
            continue;
        }
        if text == "\\end\\" {
            state = State::Done;
            break;
        }
        if let Some(n) = text
            .strip_prefix('\\')
            .and_then(|s| s.strip_suffix("-grams:"))
        {
            let n: usize = n
                .parse()
                .map_err(|_| FormatError::malformed(line_no, "bad n-gram section header"))?;
            if n == 0 || n > declared.len() {
                return Err(FormatError::malformed(
                    line_no,
                    format!("undeclared section \\{n}-grams:"),
                ));
            }
            if builder.is_none() {
                builder = Some(NGramBuilder::new(declared.len()).map_err(|source| {
                    FormatError::NGram {
                        line: line_no,
                        source,
                    }
                })?);
            }
            state = State::Grams(n);
            continue;
        }
        match state {
            State::Preamble | State::Done => {}
            State::Data => {
                let spec = text
                    .strip_prefix("ngram ")
                    .and_then(|s| s.split_once('='))
                    .ok_or_else(|| FormatError::malformed(line_no, "expected ngram N=count"))?;
                let (n, count) = (
                    spec.0.trim().parse::<usize>(),
                    spec.1.trim().parse::<usize>(),
                );
                let (Ok(n), Ok(count)) = (n, count) else {
                    return Err(FormatError::malformed(line_no, "expected ngram N=count"));
                };
                if n != declared.len() + 1 {
                    return Err(FormatError::malformed(
                        line_no,
                        "ngram counts must be listed in order",
                    ));
                }
                declared.push(count);
                found.push(0);
            }
            State::Grams(n) => {
                let fields: Vec<&str> = text.split_whitespace().collect();
                if fields.len() != n + 1 && fields.len() != n + 2 {
                    return Err(FormatError::malformed(
                        line_no,
                        format!("expected {n}-gram entry"),
                    ));
                }
                let prob: f64 = fields[0]
                    .parse()
                    .map_err(|_| FormatError::malformed(line_no, "bad log10 probability"))?;
                let backoff: f64 = match fields.get(n + 1) {
                    Some(b) => b
                        .parse()
                        .map_err(|_| FormatError::malformed(line_no, "bad back-off weight"))?,
                    None => 0.0,
                };
                let b = builder.as_mut().expect("builder exists inside a section");
                b.insert(&fields[1..=n], prob, backoff)
                    .map_err(|source| FormatError::NGram {
                        line: line_no,
                        source,
                    })?;
                found[n - 1] += 1;
            }
        }
    }

    if declared.is_empty() {
        return Err(FormatError::MissingSection("\\data\\".into()));
    }
    if !matches!(state, State::Done) {
        return Err(FormatError::MissingSection("\\end\\".into()));
    }
    for (k, (&d, &f)) in declared.iter().zip(&found).enumerate() {
        if d != f {
            return Err(FormatError::CountMismatch {
                order: k + 1,
                declared: d,
                found: f,
            });
        }
    }
    let builder = builder.ok_or_else(|| FormatError::MissingSection("\\1-grams:".into()))?;
    builder.build().map_err(FormatError::Model)
}

pub fn load_arpa(path: &Path) -> Result<NGramModel, LoadError> {
    let reader = open(path)?;
    with_path(path, parse_arpa(reader))
}
