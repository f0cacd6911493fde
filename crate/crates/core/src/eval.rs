//! Character error rate.

use alloc::string::String;
use alloc::vec::Vec;

use crate::distance::levenshtein;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum EvalError {
    #[error("utterance {0:?} has an empty reference")]
    EmptyReference(String),
}

/// Edit distance between two strings over Unicode scalars. No
/// normalization is applied.
pub fn character_edit_distance(reference: &str, hypothesis: &str) -> usize {
    let r: Vec<char> = reference.chars().collect();
    let h: Vec<char> = hypothesis.chars().collect();
    levenshtein(&r, &h)
}

#[derive(Debug, Clone, PartialEq)]
pub struct UtteranceScore {
    pub id: String,
    pub reference: String,
    pub hypothesis: String,
    pub edits: usize,
    pub ref_len: usize,
    pub cer: f64,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct EvalReport {
    pub per_utterance: Vec<UtteranceScore>,
    /// Total edits over total reference characters.
    pub aggregate_cer: f64,
}

impl EvalReport {
    pub fn total_edits(&self) -> usize {
        self.per_utterance.iter().map(|u| u.edits).sum()
    }

    pub fn total_ref_len(&self) -> usize {
        self.per_utterance.iter().map(|u| u.ref_len).sum()
    }

    pub fn exact_matches(&self) -> usize {
        self.per_utterance.iter().filter(|u| u.edits == 0).count()
    }
}

/// Scores `(id, reference, hypothesis)` triples; the report is ordered by id.
pub fn evaluate<I, S>(pairs: I) -> Result<EvalReport, EvalError>
where
    I: IntoIterator<Item = (S, S, S)>,
    S: AsRef<str>,
{
    let mut per_utterance = Vec::new();
    for (id, reference, hypothesis) in pairs {
        let (id, reference, hypothesis) = (id.as_ref(), reference.as_ref(), hypothesis.as_ref());
        let ref_len = reference.chars().count();
        if ref_len == 0 {
            return Err(EvalError::EmptyReference(String::from(id)));
        }
        let edits = character_edit_distance(reference, hypothesis);
        per_utterance.push(UtteranceScore {
            id: String::from(id),
            reference: String::from(reference),
            hypothesis: String::from(hypothesis),
            edits,
            ref_len,
            cer: edits as f64 / ref_len as f64,
        });
    }
    per_utterance.sort_by(|a, b| a.id.cmp(&b.id));
    let mut report = EvalReport {
        per_utterance,
        aggregate_cer: 0.0,
    };
    let total = report.total_ref_len();
    if total > 0 {
        report.aggregate_cer = report.total_edits() as f64 / total as f64;
    }
    Ok(report)
}
