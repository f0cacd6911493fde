use alloc::collections::BTreeMap;
use alloc::vec::Vec;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum EmbeddingError {
    #[error("zero vector")]
    ZeroVector,
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimMismatch { expected: usize, got: usize },
}

/// Fixed-dimension character vectors, each with a non-zero component.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct EmbeddingTable {
    dim: usize,
    vectors: BTreeMap<char, Vec<f64>>,
}

impl EmbeddingTable {
    pub fn new(dim: usize) -> Self {
        Self {
            dim,
            vectors: BTreeMap::new(),
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Inserts or replaces the vector for `c`.
    pub fn insert(&mut self, c: char, vector: Vec<f64>) -> Result<(), EmbeddingError> {
        if vector.len() != self.dim {
            return Err(EmbeddingError::DimMismatch {
                expected: self.dim,
                got: vector.len(),
            });
        }
        if vector.iter().all(|&x| x == 0.0) {
            return Err(EmbeddingError::ZeroVector);
        }
        self.vectors.insert(c, vector);
        Ok(())
    }

    pub fn get(&self, c: char) -> Option<&[f64]> {
        self.vectors.get(&c).map(Vec::as_slice)
    }

    pub fn len(&self) -> usize {
        self.vectors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vectors.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (char, &[f64])> {
        self.vectors.iter().map(|(c, v)| (*c, v.as_slice()))
    }

    /// Cosine between two stored characters, `None` if either is missing.
    pub fn cosine(&self, a: char, b: char) -> Option<f64> {
        cosine_similarity(self.get(a)?, self.get(b)?).ok()
    }
}

pub fn cosine_similarity(u: &[f64], v: &[f64]) -> Result<f64, EmbeddingError> {
    if u.len() != v.len() {
        return Err(EmbeddingError::DimMismatch {
            expected: u.len(),
            got: v.len(),
        });
    }
    let dot: f64 = u.iter().zip(v).map(|(a, b)| a * b).sum();
    let nu: f64 = u.iter().map(|a| a * a).sum();
    let nv: f64 = v.iter().map(|b| b * b).sum();
    if nu == 0.0 || nv == 0.0 {
        return Err(EmbeddingError::ZeroVector);
    }
    Ok((dot / libm::sqrt(nu * nv)).clamp(-1.0, 1.0))
}
