//! JSON-lines records written alongside decoding and rewriting runs.

use std::io::Write;

use homodecode_core::{DecodeResult, RewriteAudit};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RewriteAuditRecord {
    pub sentence_index: usize,
    pub variant: String,
    pub canonical: String,
    pub score: f64,
    pub kept: bool,
}

impl From<&RewriteAudit> for RewriteAuditRecord {
    fn from(a: &RewriteAudit) -> Self {
        Self {
            sentence_index: a.sentence_index,
            variant: a.variant.to_string(),
            canonical: a.canonical.to_string(),
            score: a.score,
            kept: a.kept,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HeAuditRecord {
    pub step: usize,
    pub source: String,
    pub injected: String,
    pub prob: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NBestRecord {
    pub rank: usize,
    pub transcript: String,
    pub fused_score: f64,
    pub acoustic_score: f64,
    pub lm_score: f64,
}

fn write_lines<W: Write, T: Serialize>(
    mut w: W,
    records: impl IntoIterator<Item = T>,
) -> std::io::Result<()> {
    for r in records {
        serde_json::to_writer(&mut w, &r)?;
        w.write_all(b"\n")?;
    }
    Ok(())
}

pub fn write_rewrite_audit<W: Write>(w: W, audit: &[RewriteAudit]) -> std::io::Result<()> {
    write_lines(w, audit.iter().map(RewriteAuditRecord::from))
}

pub fn write_he_audit<W: Write>(w: W, result: &DecodeResult) -> std::io::Result<()> {
    write_lines(
        w,
        result.he_injections.iter().map(|r| HeAuditRecord {
            step: r.step,
            source: r.source.to_string(),
            injected: r.injected.to_string(),
            prob: r.prob,
        }),
    )
}

pub fn write_nbest<W: Write>(w: W, result: &DecodeResult) -> std::io::Result<()> {
    write_lines(
        w,
        result
            .nbest
            .iter()
            .enumerate()
            .map(|(rank, e)| NBestRecord {
                rank,
                transcript: e.transcript.clone(),
                fused_score: e.fused_score,
                acoustic_score: e.acoustic_score,
                lm_score: e.lm_score,
            }),
    )
}
