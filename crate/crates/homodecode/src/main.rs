use std::fs::{self, File};
use std::io::{self, BufRead, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::Context;
use clap::{Args, Parser, Subcommand};
use homodecode::formats::{
    load_arpa, load_cin_dir, load_embeddings, load_emissions, load_frequency, load_lexicon,
    load_pairs, load_vocab, write_he_audit, write_nbest, write_pairs, write_rewrite_audit,
};
use homodecode::harness::{run_manifest, thread_pool, HarnessError};
use homodecode::manifest::{Manifest, Variant};
use homodecode_core::{
    apply_unified_writing, discover_pairs, Decoder, DecoderConfig, EmbeddingChecker,
    FrequencyTable, HomophoneIndex, MinMethods, UwConfig,
};

/// Homophone-aware CTC decoding and unified-writing tools for Cantonese ASR.
#[derive(Parser)]
#[command(name = "homodecode", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Beam-search decode one emission matrix and print the 1-best transcript.
    Decode(DecodeArgs),
    /// Unified-writing variant tools.
    #[command(subcommand)]
    Uw(UwCommand),
    /// Score each utterance of a manifest and print per-utterance CER.
    Eval(EvalArgs),
    /// Run every variant of a manifest and print the comparison table.
    Compare(CompareArgs),
}

#[derive(Subcommand)]
enum UwCommand {
    /// Find variant pairs among homophones and write them as TSV.
    Discover(DiscoverArgs),
    /// Rewrite a corpus so each variant uses its most frequent form.
    Apply(ApplyArgs),
}

fn parse_beam(s: &str) -> Result<usize, String> {
    if s == "inf" {
        return Ok(usize::MAX);
    }
    match s.parse::<usize>() {
        Ok(0) => Err("beam must be at least 1".into()),
        Ok(n) => Ok(n),
        Err(e) => Err(e.to_string()),
    }
}

#[derive(Args)]
struct DecodeArgs {
    /// EMAT emission matrix.
    #[arg(long)]
    emissions: PathBuf,
    /// Token list; first line is `#blank <index>`.
    #[arg(long)]
    vocab: PathBuf,
    /// Character-to-Jyutping lexicon TSV.
    #[arg(long)]
    lexicon: PathBuf,
    /// ARPA n-gram model.
    #[arg(long)]
    lm: PathBuf,
    /// LM fusion weight.
    #[arg(long, default_value_t = 0.45)]
    alpha: f64,
    /// Per-token length bonus.
    #[arg(long, default_value_t = 1.55)]
    beta: f64,
    /// Beam size; `inf` disables pruning.
    #[arg(long, default_value = "20", value_parser = parse_beam)]
    beam: usize,
    /// Weight of a homophone's own acoustic probability.
    #[arg(long, default_value_t = 0.5)]
    gamma: f64,
    /// Enable homophone extension (default).
    #[arg(long, overrides_with = "no_he")]
    he: bool,
    /// Disable homophone extension.
    #[arg(long, overrides_with = "he")]
    no_he: bool,
    /// Hypotheses to keep in the n-best list.
    #[arg(long, default_value_t = 1)]
    nbest: usize,
    /// Write the n-best list as JSON lines.
    #[arg(long)]
    nbest_out: Option<PathBuf>,
    /// Rescore the final beam with the LM (default).
    #[arg(long, overrides_with = "no_rescore")]
    rescore: bool,
    /// Skip final rescoring.
    #[arg(long, overrides_with = "rescore")]
    no_rescore: bool,
    /// Write homophone injections as JSON lines.
    #[arg(long)]
    audit: Option<PathBuf>,
}

#[derive(Args)]
struct DiscoverArgs {
    /// Character-to-Jyutping lexicon TSV.
    #[arg(long)]
    lexicon: PathBuf,
    /// Directory of glyph-based .cin tables.
    #[arg(long)]
    cin_dir: PathBuf,
    /// Character embeddings (`<count> <dim>` header).
    #[arg(long)]
    embeddings: PathBuf,
    /// Output pairs TSV.
    #[arg(long)]
    out: PathBuf,
    /// Maximum normalized Jyutping edit distance.
    #[arg(long, default_value_t = 0.0)]
    jyutping_max: f64,
    /// Maximum normalized glyph-code edit distance per method.
    #[arg(long, default_value_t = 0.25)]
    glyph_max: f64,
    /// Minimum embedding cosine similarity.
    #[arg(long, default_value_t = 0.5)]
    cosine_min: f64,
    /// Glyph methods that must pass [default: every method with codes for both]
    #[arg(long)]
    min_methods: Option<usize>,
}

#[derive(Args)]
struct ApplyArgs {
    /// Pairs TSV from `uw discover`.
    #[arg(long)]
    pairs: PathBuf,
    /// Corpus, one sentence per line.
    #[arg(long)]
    corpus: PathBuf,
    /// Character frequency TSV [default: counted from the corpus]
    #[arg(long)]
    freq: Option<PathBuf>,
    /// Minimum rewrite-checker score for a sentence rewrite to be kept.
    #[arg(long, default_value_t = 0.9)]
    checker_min: f64,
    /// Character embeddings used by the rewrite checker.
    #[arg(long)]
    embeddings: PathBuf,
    /// Output corpus.
    #[arg(long)]
    out: PathBuf,
    /// Write one JSON line per attempted rewrite.
    #[arg(long)]
    audit: Option<PathBuf>,
}

#[derive(Args)]
struct EvalArgs {
    /// Experiment manifest (JSON lines).
    #[arg(long)]
    manifest: PathBuf,
    /// Only score this variant [default: every variant in the manifest]
    #[arg(long)]
    variant: Option<Variant>,
}

#[derive(Args)]
struct CompareArgs {
    /// Experiment manifest (JSON lines).
    #[arg(long)]
    manifest: PathBuf,
    /// Write comparison.tsv, comparison.jsonl and hypotheses.jsonl here
    /// [default: the manifest's output_dir, if any]
    #[arg(long)]
    out_dir: Option<PathBuf>,
}

/// Exit 2 for bad input, 1 for everything else.
enum Failure {
    Input(anyhow::Error),
    Internal(anyhow::Error),
}

type CmdResult = Result<(), Failure>;

trait InputContext<T> {
    fn input(self) -> Result<T, Failure>;
    fn internal(self) -> Result<T, Failure>;
}

impl<T, E: Into<anyhow::Error>> InputContext<T> for Result<T, E> {
    fn input(self) -> Result<T, Failure> {
        self.map_err(|e| Failure::Input(e.into()))
    }
    fn internal(self) -> Result<T, Failure> {
        self.map_err(|e| Failure::Internal(e.into()))
    }
}

fn harness_failure(e: HarnessError) -> Failure {
    match e {
        HarnessError::ThreadPool(_) => Failure::Internal(e.into()),
        _ => Failure::Input(e.into()),
    }
}

fn create(path: &Path) -> Result<BufWriter<File>, Failure> {
    File::create(path)
        .map(BufWriter::new)
        .with_context(|| format!("cannot create {}", path.display()))
        .internal()
}

fn cmd_decode(args: DecodeArgs) -> CmdResult {
    let vocab = load_vocab(&args.vocab).input()?;
    let lexicon = load_lexicon(&args.lexicon).input()?;
    let lm = load_arpa(&args.lm).input()?;
    let emissions = load_emissions(&args.emissions, &vocab).input()?;
    let config = DecoderConfig {
        beam_size: args.beam,
        alpha: args.alpha,
        beta: args.beta,
        gamma: args.gamma,
        he_enabled: !args.no_he,
        nbest: args.nbest,
        rescore_enabled: !args.no_rescore,
    };
    let index = HomophoneIndex::build(&lexicon);
    let decoder = Decoder::new(&vocab, &index, &lm, config).input()?;
    let result = decoder
        .decode(&emissions)
        .with_context(|| format!("{}", args.emissions.display()))
        .input()?;
    if let Some(path) = &args.nbest_out {
        let mut w = create(path)?;
        write_nbest(&mut w, &result)
            .and_then(|_| w.flush())
            .internal()?;
    }
    if let Some(path) = &args.audit {
        let mut w = create(path)?;
        write_he_audit(&mut w, &result)
            .and_then(|_| w.flush())
            .internal()?;
    }
    println!("{}", result.best_transcript());
    Ok(())
}

fn cmd_discover(args: DiscoverArgs) -> CmdResult {
    let config = UwConfig {
        jyutping_max_distance: args.jyutping_max,
        glyph_max_distance: args.glyph_max,
        cosine_min: args.cosine_min,
        min_methods: args
            .min_methods
            .map_or(MinMethods::AllShared, MinMethods::AtLeast),
        ..UwConfig::default()
    };
    config.validate().input()?;
    let lexicon = load_lexicon(&args.lexicon).input()?;
    let glyphs = load_cin_dir(&args.cin_dir).input()?;
    let embeddings = load_embeddings(&args.embeddings).input()?;
    let pairs = discover_pairs(&lexicon, &glyphs, &embeddings, &config);
    let mut w = create(&args.out)?;
    write_pairs(&mut w, &pairs)
        .and_then(|_| w.flush())
        .internal()?;
    println!("{}", pairs.len());
    Ok(())
}

fn read_corpus(path: &Path) -> Result<Vec<String>, Failure> {
    let file = File::open(path)
        .with_context(|| format!("cannot open {}", path.display()))
        .input()?;
    io::BufReader::new(file)
        .lines()
        .enumerate()
        .map(|(i, line)| line.with_context(|| format!("{}: line {}", path.display(), i + 1)))
        .collect::<anyhow::Result<_>>()
        .input()
}

fn cmd_apply(args: ApplyArgs) -> CmdResult {
    let config = UwConfig {
        checker_min: args.checker_min,
        ..UwConfig::default()
    };
    config.validate().input()?;
    let pairs = load_pairs(&args.pairs).input()?;
    let corpus = read_corpus(&args.corpus)?;
    let embeddings = load_embeddings(&args.embeddings).input()?;
    let freq = match &args.freq {
        Some(p) => load_frequency(p).input()?,
        None => FrequencyTable::from_corpus(&corpus),
    };
    let checker = EmbeddingChecker(&embeddings);
    let (rewritten, audit) = apply_unified_writing(&corpus, &pairs, &freq, &checker, &config);
    let mut w = create(&args.out)?;
    for line in &rewritten {
        writeln!(w, "{line}").internal()?;
    }
    w.flush().internal()?;
    if let Some(path) = &args.audit {
        let mut w = create(path)?;
        write_rewrite_audit(&mut w, &audit)
            .and_then(|_| w.flush())
            .internal()?;
    }
    let changed = corpus
        .iter()
        .zip(&rewritten)
        .filter(|(a, b)| a != b)
        .count();
    println!("{changed}");
    Ok(())
}

fn load_manifest(path: &Path) -> Result<Manifest, Failure> {
    Manifest::load(path).map_err(|e| harness_failure(e.into()))
}

fn cmd_eval(args: EvalArgs) -> CmdResult {
    let mut manifest = load_manifest(&args.manifest)?;
    if let Some(v) = args.variant {
        manifest.config.variants = vec![v];
    }
    let pool = thread_pool().map_err(harness_failure)?;
    let table = run_manifest(&manifest, &pool).map_err(harness_failure)?;
    let stdout = io::stdout();
    let mut out = stdout.lock();
    writeln!(out, "variant\tid\tedits\tref_len\tcer\thypothesis").internal()?;
    for row in &table.rows {
        for u in &row.report.per_utterance {
            writeln!(
                out,
                "{}\t{}\t{}\t{}\t{:.6}\t{}",
                row.variant.label(),
                u.id,
                u.edits,
                u.ref_len,
                u.cer,
                u.hypothesis
            )
            .internal()?;
        }
    }
    for row in &table.rows {
        writeln!(
            out,
            "# {}\tcer={:.6}",
            row.variant.label(),
            row.report.aggregate_cer
        )
        .internal()?;
    }
    Ok(())
}

fn cmd_compare(args: CompareArgs) -> CmdResult {
    let manifest = load_manifest(&args.manifest)?;
    let pool = thread_pool().map_err(harness_failure)?;
    let table = run_manifest(&manifest, &pool).map_err(harness_failure)?;
    table.write_tsv(io::stdout().lock()).internal()?;
    if let Some(dir) = args
        .out_dir
        .as_ref()
        .or(manifest.config.output_dir.as_ref())
    {
        fs::create_dir_all(dir)
            .with_context(|| format!("cannot create {}", dir.display()))
            .internal()?;
        let mut w = create(&dir.join("comparison.tsv"))?;
        table.write_tsv(&mut w).and_then(|_| w.flush()).internal()?;
        let mut w = create(&dir.join("comparison.jsonl"))?;
        table
            .write_jsonl(&mut w)
            .and_then(|_| w.flush())
            .internal()?;
        let mut w = create(&dir.join("hypotheses.jsonl"))?;
        table
            .write_hypotheses(&mut w)
            .and_then(|_| w.flush())
            .internal()?;
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => e.exit(),
    };
    let result = match cli.command {
        Command::Decode(a) => cmd_decode(a),
        Command::Uw(UwCommand::Discover(a)) => cmd_discover(a),
        Command::Uw(UwCommand::Apply(a)) => cmd_apply(a),
        Command::Eval(a) => cmd_eval(a),
        Command::Compare(a) => cmd_compare(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Input(e)) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
        Err(Failure::Internal(e)) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
