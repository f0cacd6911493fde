//! `EMAT` emission matrices: the magic `EMAT`, then little-endian `u32`
//! version (1), frame count, and vocabulary size, then `frames * vocab`
//! little-endian `f32` natural-log posteriors in row-major order.

use std::io::{Read, Write};
use std::path::Path;

use homodecode_core::{EmissionMatrix, Vocabulary};

use super::{open, with_path, FormatError, LoadError};

pub const EMAT_MAGIC: [u8; 4] = *b"EMAT";
pub const EMAT_VERSION: u32 = 1;

fn read_u32(bytes: &[u8], at: usize) -> u32 {
    u32::from_le_bytes(bytes[at..at + 4].try_into().expect("4-byte slice"))
}

/// Parses an `EMAT` stream and checks it against `vocab` and the row
/// normalization tolerance.
pub fn read_emissions<R: Read>(
    mut reader: R,
    vocab: &Vocabulary,
) -> Result<EmissionMatrix, FormatError> {
    let mut bytes = Vec::new();
    reader.read_to_end(&mut bytes)?;
    if bytes.len() < 16 {
        if bytes.len() < 4 || bytes[..4] != EMAT_MAGIC {
            return Err(FormatError::BadMagic);
        }
        return Err(FormatError::Truncated { expected: 16 });
    }
    if bytes[..4] != EMAT_MAGIC {
        return Err(FormatError::BadMagic);
    }
    let version = read_u32(&bytes, 4);
    if version != EMAT_VERSION {
        return Err(FormatError::UnsupportedVersion(version));
    }
    let frames = read_u32(&bytes, 8) as usize;
    let width = read_u32(&bytes, 12) as usize;
    if width != vocab.len() {
        return Err(homodecode_core::EmissionError::VocabSizeMismatch {
            file: width,
            vocab: vocab.len(),
        }
        .into());
    }
    let expected = 16 + frames * width * 4;
    if bytes.len() < expected {
        return Err(FormatError::Truncated { expected });
    }
    let values = bytes[16..expected]
        .chunks_exact(4)
        .map(|c| f32::from_le_bytes(c.try_into().expect("4-byte chunk")) as f64)
        .collect();
    Ok(EmissionMatrix::new(frames, width, values)?)
}

pub fn load_emissions(path: &Path, vocab: &Vocabulary) -> Result<EmissionMatrix, LoadError> {
    let reader = open(path)?;
    with_path(path, read_emissions(reader, vocab))
}

/// Writes a matrix, narrowing values to `f32`.
pub fn write_emissions<W: Write>(mut w: W, matrix: &EmissionMatrix) -> std::io::Result<()> {
    w.write_all(&EMAT_MAGIC)?;
    w.write_all(&EMAT_VERSION.to_le_bytes())?;
    w.write_all(&(matrix.frames() as u32).to_le_bytes())?;
    w.write_all(&(matrix.vocab_size() as u32).to_le_bytes())?;
    for &v in matrix.values() {
        w.write_all(&(v as f32).to_le_bytes())?;
    }
    Ok(())
}
