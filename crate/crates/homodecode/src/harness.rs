//! Method-comparison runs: decode every utterance under each variant and
//! score the results.

use std::io::Write;

use homodecode_core::{
    apply_unified_writing, discover_pairs, evaluate, greedy_decode, DecodeError, Decoder,
    EmbeddingChecker, EmbeddingTable, EmissionMatrix, EvalError, EvalReport, FrequencyTable,
    HomophoneIndex, Lexicon, NGramModel, UnifiedPair, UwConfig, UwError, Vocabulary,
};
use rayon::prelude::*;
use serde::Serialize;

use crate::formats::{
    load_arpa, load_cin_dir, load_embeddings, load_emissions, load_frequency, load_lexicon,
    load_pairs, load_vocab, LoadError,
};
use crate::manifest::{DecoderSettings, Manifest, ManifestError, ToolConfig, Variant};

pub const THREADS_ENV: &str = "HOMODECODE_THREADS";

#[derive(Debug, thiserror::Error)]
pub enum HarnessError {
    #[error(transparent)]
    Manifest(#[from] ManifestError),
    #[error(transparent)]
    Load(#[from] LoadError),
    #[error("utterance {id}: {source}")]
    Emissions { id: String, source: LoadError },
    #[error("utterance {id}: {source}")]
    Decode { id: String, source: DecodeError },
    #[error(transparent)]
    Eval(#[from] EvalError),
    #[error(transparent)]
    Uw(#[from] UwError),
    #[error("{0}")]
    Config(String),
    #[error("thread pool: {0}")]
    ThreadPool(String),
}

/// Builds the worker pool, honouring `HOMODECODE_THREADS` when set.
pub fn thread_pool() -> Result<rayon::ThreadPool, HarnessError> {
    let threads = match std::env::var(THREADS_ENV) {
        Ok(v) => match v.trim().parse::<usize>() {
            Ok(n) if n > 0 => n,
            _ => {
                return Err(HarnessError::Config(format!(
                    "{THREADS_ENV} must be a positive integer, got {v:?}"
                )))
            }
        },
        Err(_) => 0,
    };
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| HarnessError::ThreadPool(e.to_string()))
}

/// Everything needed to normalize text with unified writing.
pub struct UwResources {
    pub pairs: Vec<UnifiedPair>,
    pub freq: FrequencyTable,
    pub embeddings: EmbeddingTable,
    pub config: UwConfig,
}

impl UwResources {
    pub fn normalize<S: AsRef<str>>(&self, sentences: &[S]) -> Vec<String> {
        let checker = EmbeddingChecker(&self.embeddings);
        apply_unified_writing(sentences, &self.pairs, &self.freq, &checker, &self.config).0
    }
}

pub struct Resources {
    pub vocab: Vocabulary,
    pub lexicon: Lexicon,
    pub index: HomophoneIndex,
    pub lm: NGramModel,
    pub uw: Option<UwResources>,
}

impl Resources {
    pub fn new(vocab: Vocabulary, lexicon: Lexicon, lm: NGramModel) -> Self {
        let index = HomophoneIndex::build(&lexicon);
        Self {
            vocab,
            lexicon,
            index,
            lm,
            uw: None,
        }
    }

    /// Loads the files named in `config`. `references` stand in for the
    /// training transcripts when no frequency table is given.
    pub fn load(config: &ToolConfig, references: &[&str]) -> Result<Self, HarnessError> {
        let mut res = Self::new(
            load_vocab(&config.vocab)?,
            load_lexicon(&config.lexicon)?,
            load_arpa(&config.lm)?,
        );
        if config.needs_uw() {
            let uw_config = config.uw.to_config();
            uw_config.validate()?;
            let emb_path = config
                .embeddings
                .as_ref()
                .ok_or_else(|| HarnessError::Config("UW variants need embeddings".into()))?;
            let embeddings = load_embeddings(emb_path)?;
            let pairs = match (&config.pairs, &config.cin_dir) {
                (Some(p), _) => load_pairs(p)?,
                (None, Some(dir)) => {
                    discover_pairs(&res.lexicon, &load_cin_dir(dir)?, &embeddings, &uw_config)
                }
                (None, None) => {
                    return Err(HarnessError::Config(
                        "UW variants need pairs or cin_dir".into(),
                    ))
                }
            };
            let freq = match &config.frequency {
                Some(p) => load_frequency(p)?,
                None => FrequencyTable::from_corpus(references),
            };
            res.uw = Some(UwResources {
                pairs,
                freq,
                embeddings,
                config: uw_config,
            });
        }
        Ok(res)
    }
}

pub struct Utterance {
    pub id: String,
    pub reference: String,
    pub emissions: EmissionMatrix,
    /// Emissions from the model trained on normalized transcripts, if any.
    pub uw_emissions: Option<EmissionMatrix>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ComparisonSettings {
    pub decoder: DecoderSettings,
    pub variants: Vec<Variant>,
    pub uw_on_references: bool,
}

impl ComparisonSettings {
    pub fn from_config(config: &ToolConfig) -> Self {
        Self {
            decoder: config.decoder.clone(),
            variants: config.variants.clone(),
            uw_on_references: config.uw_on_references,
        }
    }
}

impl Default for ComparisonSettings {
    fn default() -> Self {
        Self {
            decoder: DecoderSettings::default(),
            variants: Variant::all(),
            uw_on_references: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ComparisonRow {
    pub variant: Variant,
    pub report: EvalReport,
    /// Homophone injections made across all utterances.
    pub he_injections: usize,
    /// Injected characters that survived into the 1-best transcripts.
    pub he_in_best: usize,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct ComparisonTable {
    pub rows: Vec<ComparisonRow>,
}

#[derive(Serialize)]
struct RowRecord<'a> {
    variant: &'a str,
    label: &'a str,
    cer: f64,
    edits: usize,
    ref_len: usize,
    exact: usize,
    utterances: usize,
    he_injections: usize,
    he_in_best: usize,
}

#[derive(Serialize)]
struct HypothesisRecord<'a> {
    variant: &'a str,
    id: &'a str,
    reference: &'a str,
    hypothesis: &'a str,
    edits: usize,
    cer: f64,
}

impl ComparisonTable {
    pub fn row(&self, variant: Variant) -> Option<&ComparisonRow> {
        self.rows.iter().find(|r| r.variant == variant)
    }

    pub fn write_tsv<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(
            w,
            "variant\tcer\tedits\tref_len\texact\tutterances\the_injections\the_in_best"
        )?;
        for r in &self.rows {
            writeln!(
                w,
                "{}\t{:.6}\t{}\t{}\t{}\t{}\t{}\t{}",
                r.variant.label(),
                r.report.aggregate_cer,
                r.report.total_edits(),
                r.report.total_ref_len(),
                r.report.exact_matches(),
                r.report.per_utterance.len(),
                r.he_injections,
                r.he_in_best
            )?;
        }
        Ok(())
    }

    pub fn write_jsonl<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        for r in &self.rows {
            let rec = RowRecord {
                variant: r.variant.key(),
                label: r.variant.label(),
                cer: r.report.aggregate_cer,
                edits: r.report.total_edits(),
                ref_len: r.report.total_ref_len(),
                exact: r.report.exact_matches(),
                utterances: r.report.per_utterance.len(),
                he_injections: r.he_injections,
                he_in_best: r.he_in_best,
            };
            serde_json::to_writer(&mut w, &rec)?;
            w.write_all(b"\n")?;
        }
        Ok(())
    }

    /// Per-utterance hypotheses for every variant.
    pub fn write_hypotheses<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        for r in &self.rows {
            for u in &r.report.per_utterance {
                let rec = HypothesisRecord {
                    variant: r.variant.key(),
                    id: &u.id,
                    reference: &u.reference,
                    hypothesis: &u.hypothesis,
                    edits: u.edits,
                    cer: u.cer,
                };
                serde_json::to_writer(&mut w, &rec)?;
                w.write_all(b"\n")?;
            }
        }
        Ok(())
    }
}

struct Outcome {
    hypothesis: String,
    injections: usize,
    in_best: usize,
}

/// Decodes every utterance under each variant and evaluates the rows.
/// Runs on the current rayon pool; row and utterance order are fixed by
/// the inputs.
pub fn run_comparison(
    res: &Resources,
    settings: &ComparisonSettings,
    utterances: &[Utterance],
) -> Result<ComparisonTable, HarnessError> {
    let uw = if settings.variants.iter().any(|v| v.uses_uw()) {
        Some(res.uw.as_ref().ok_or_else(|| {
            HarnessError::Config("UW variants requested without UW resources".into())
        })?)
    } else {
        None
    };
    let decoder_for = |he| {
        Decoder::new(
            &res.vocab,
            &res.index,
            &res.lm,
            settings.decoder.to_config(he),
        )
    };
    let bad_config = |e: DecodeError| HarnessError::Config(format!("decoder settings: {e}"));
    let plain = decoder_for(false).map_err(bad_config)?;
    let with_he = decoder_for(true).map_err(bad_config)?;

    let outcomes: Vec<Vec<Outcome>> = utterances
        .par_iter()
        .map(|utt| {
            settings
                .variants
                .iter()
                .map(|&variant| {
                    let fail = |source| HarnessError::Decode {
                        id: utt.id.clone(),
                        source,
                    };
                    if variant == Variant::Baseline {
                        let best = greedy_decode(&utt.emissions, &res.vocab).map_err(fail)?;
                        return Ok(Outcome {
                            hypothesis: best.transcript,
                            injections: 0,
                            in_best: 0,
                        });
                    }
                    let decoder = if variant.uses_he() { &with_he } else { &plain };
                    let emissions = match (variant.uses_uw(), &utt.uw_emissions) {
                        (true, Some(m)) => m,
                        _ => &utt.emissions,
                    };
                    let result = decoder.decode(emissions).map_err(fail)?;
                    let in_best = result.best().map_or(0, |b| b.injected_positions.len());
                    let mut hypothesis = result.best_transcript().to_string();
                    if let (true, Some(uw)) = (variant.uses_uw(), uw) {
                        hypothesis = uw.normalize(&[hypothesis]).pop().unwrap_or_default();
                    }
                    Ok(Outcome {
                        hypothesis,
                        injections: result.he_injections.len(),
                        in_best,
                    })
                })
                .collect::<Result<Vec<_>, HarnessError>>()
        })
        .collect::<Result<_, _>>()?;

    let references: Vec<&str> = utterances.iter().map(|u| u.reference.as_str()).collect();
    let uw_references = match uw {
        Some(uw) if settings.uw_on_references => Some(uw.normalize(&references)),
        _ => None,
    };

    let mut rows = Vec::with_capacity(settings.variants.len());
    for (k, &variant) in settings.variants.iter().enumerate() {
        let refs: Vec<&str> = match (&uw_references, variant.uses_uw()) {
            (Some(normalized), true) => normalized.iter().map(String::as_str).collect(),
            _ => references.clone(),
        };
        let report = evaluate(
            utterances
                .iter()
                .zip(&refs)
                .zip(&outcomes)
                .map(|((u, r), o)| (u.id.as_str(), *r, o[k].hypothesis.as_str())),
        )?;
        rows.push(ComparisonRow {
            variant,
            report,
            he_injections: outcomes.iter().map(|o| o[k].injections).sum(),
            he_in_best: outcomes.iter().map(|o| o[k].in_best).sum(),
        });
    }
    Ok(ComparisonTable { rows })
}

/// Loads a manifest's resources and emissions, then runs the comparison
/// inside `pool`.
pub fn run_manifest(
    manifest: &Manifest,
    pool: &rayon::ThreadPool,
) -> Result<ComparisonTable, HarnessError> {
    manifest.validate_paths()?;
    let references: Vec<&str> = manifest
        .utterances
        .iter()
        .map(|u| u.reference.as_str())
        .collect();
    let res = Resources::load(&manifest.config, &references)?;
    let settings = ComparisonSettings::from_config(&manifest.config);
    let needs_uw = manifest.config.needs_uw();
    pool.install(|| {
        let utterances = manifest
            .utterances
            .par_iter()
            .map(|spec| {
                let load = |path| {
                    load_emissions(path, &res.vocab).map_err(|source| HarnessError::Emissions {
                        id: spec.id.clone(),
                        source,
                    })
                };
                let uw_emissions = match (&spec.uw_emissions_path, needs_uw) {
                    (Some(p), true) => Some(load(p)?),
                    _ => None,
                };
                Ok(Utterance {
                    id: spec.id.clone(),
                    reference: spec.reference.clone(),
                    emissions: load(&spec.emissions_path)?,
                    uw_emissions,
                })
            })
            .collect::<Result<Vec<_>, HarnessError>>()?;
        run_comparison(&res, &settings, &utterances)
    })
}
