use alloc::vec::Vec;

#[derive(Debug, Clone, Copy, PartialEq, Eq, thiserror::Error)]
pub enum DistanceError {
    #[error("normalized edit distance needs non-empty strings")]
    EmptyString,
}

/// Unit-cost Levenshtein distance.
pub fn levenshtein<T: PartialEq>(a: &[T], b: &[T]) -> usize {
    if a.is_empty() {
        return b.len();
    }
    let mut row: Vec<usize> = (0..=b.len()).collect();
    for (i, x) in a.iter().enumerate() {
        let mut diag = row[0];
        row[0] = i + 1;
        for (j, y) in b.iter().enumerate() {
            let sub = diag + usize::from(x != y);
            diag = row[j + 1];
            row[j + 1] = sub.min(row[j] + 1).min(diag + 1);
        }
    }
    row[b.len()]
}

/// Levenshtein distance over Unicode scalars divided by the longer length.
pub fn normalized_edit_distance(a: &str, b: &str) -> Result<f64, DistanceError> {
    if a.is_empty() || b.is_empty() {
        return Err(DistanceError::EmptyString);
    }
    let a: Vec<char> = a.chars().collect();
    let b: Vec<char> = b.chars().collect();
    Ok(levenshtein(&a, &b) as f64 / a.len().max(b.len()) as f64)
}
