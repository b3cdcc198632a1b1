//! Subcommand implementations. Input loading failures are validation
//! errors; failures past that point are runtime errors.

use std::collections::HashMap;
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::sync::Arc;

use clap::Args;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use stylemine::align::{self, ParallelGroup};
use stylemine::corpus::{
    load_corpus, normalize, save_corpus, Corpus, CorpusFormat, Sentence, StyleLabel,
};
use stylemine::distill::{distill_article, DistillPlan};
use stylemine::embed::{
    get_embedding, save_embedding_file, EmbeddingProvider, RemoteConfig, EMBED_URL_ENV,
};
use stylemine::metrics::{evaluate_with, load_eval_records, render_report_table};
use stylemine::reward::serve::{serve_stdio, serve_tcp, ServeContext};
use stylemine::scenegraph::{
    build_profiles, default_stopwords, load_stopwords, load_triplet_sidecar, EntityProfile,
};

use crate::config::{ConfigOverrides, RunConfig};
use crate::manifest::write_manifest;
use crate::CliError;

fn build_provider(config: &RunConfig) -> Result<EmbeddingProvider, CliError> {
    let emb = &config.embedding;
    match emb.provider.as_str() {
        "deterministic-test" => Ok(EmbeddingProvider::deterministic_test(emb.dim)),
        "file" => {
            let source = emb.source.as_deref().ok_or_else(|| {
                CliError::validation("file provider needs --embeddings <path>")
            })?;
            EmbeddingProvider::from_file(Path::new(source)).map_err(CliError::from_validation)
        }
        "remote" => {
            let url = emb
                .source
                .clone()
                .or_else(|| std::env::var(EMBED_URL_ENV).ok())
                .ok_or_else(|| {
                    CliError::validation(format!(
                        "remote provider needs --embed-url or {EMBED_URL_ENV}"
                    ))
                })?;
            Ok(EmbeddingProvider::remote(RemoteConfig {
                url,
                dim: emb.dim,
                timeout_secs: emb.timeout_secs,
                retries: emb.retries,
            }))
        }
        other => Err(CliError::validation(format!(
            "unknown embedding provider {other:?}"
        ))),
    }
}

fn load_corpus_arg(path: &Path, style: &str, format: CorpusFormat) -> Result<Corpus, CliError> {
    load_corpus(path, &StyleLabel::new(style), format).map_err(CliError::from_validation)
}

fn make_profiles(
    corpora: &[&Corpus],
    sidecar: Option<&PathBuf>,
    stopwords_path: Option<&PathBuf>,
) -> Result<HashMap<String, EntityProfile>, CliError> {
    let stopwords = match stopwords_path {
        Some(p) => load_stopwords(p).map_err(CliError::from_validation)?,
        None => default_stopwords(),
    };
    let sidecar = match sidecar {
        Some(p) => Some(load_triplet_sidecar(p).map_err(CliError::from_validation)?),
        None => None,
    };
    let mut profiles = HashMap::new();
    for corpus in corpora {
        profiles.extend(build_profiles(corpus, sidecar.as_ref(), &stopwords));
    }
    Ok(profiles)
}

fn write_jsonl<T: Serialize>(path: &Path, rows: &[T]) -> Result<(), CliError> {
    let file = File::create(path)
        .map_err(|e| CliError::runtime(format!("{}: {e}", path.display())))?;
    let mut w = BufWriter::new(file);
    for row in rows {
        serde_json::to_writer(&mut w, row).map_err(|e| CliError::runtime(e.to_string()))?;
        writeln!(w).map_err(|e| CliError::runtime(e.to_string()))?;
    }
    w.flush().map_err(|e| CliError::runtime(e.to_string()))
}

// --- parse ------------------------------------------------------------------

#[derive(Args)]
pub struct ParseArgs {
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long)]
    pub style: String,
    #[arg(long, default_value = "json-lines")]
    pub format: String,
    #[arg(long)]
    pub output: PathBuf,
    /// Triplet sidecar json-lines: {id, triplets: [[subj, rel, obj], ...]}.
    #[arg(long)]
    pub triplets: Option<PathBuf>,
    /// Stopword list (plain lines) for the heuristic extractor.
    #[arg(long)]
    pub stopwords: Option<PathBuf>,
    #[command(flatten)]
    pub overrides: ConfigOverrides,
}

pub fn parse(args: &ParseArgs, config: &RunConfig) -> Result<(), CliError> {
    let format: CorpusFormat = args.format.parse().map_err(CliError::from_validation)?;
    let corpus = load_corpus_arg(&args.input, &args.style, format)?;
    let profiles = make_profiles(&[&corpus], args.triplets.as_ref(), args.stopwords.as_ref())?;

    let mut enriched = corpus.clone();
    for s in &mut enriched.sentences {
        if s.lemmas.is_none() {
            s.lemmas = Some(normalize(&s.tokens));
        }
        s.entities = Some(profiles[&s.id].entity_seq.clone());
    }
    save_corpus(&enriched, &args.output).map_err(CliError::from_runtime)?;

    let mut inputs: Vec<&Path> = vec![&args.input];
    if let Some(t) = &args.triplets {
        inputs.push(t);
    }
    if let Some(sw) = &args.stopwords {
        inputs.push(sw);
    }
    write_manifest("parse", config, &inputs, &[&args.output])?;
    println!("parsed {} sentences -> {}", enriched.len(), args.output.display());
    Ok(())
}

// --- embed ------------------------------------------------------------------

#[derive(Args)]
pub struct EmbedArgs {
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long)]
    pub style: String,
    #[arg(long)]
    pub output: PathBuf,
    #[command(flatten)]
    pub overrides: ConfigOverrides,
}

pub fn embed(args: &EmbedArgs, config: &RunConfig) -> Result<(), CliError> {
    let corpus = load_corpus_arg(&args.input, &args.style, CorpusFormat::JsonLines)?;
    let provider = build_provider(config)?;
    let vectors: Vec<(String, stylemine::embed::EmbeddingVector)> = corpus
        .sentences
        .par_iter()
        .map(|s| Ok((s.id.clone(), get_embedding(&provider, s).map_err(CliError::from_runtime)?)))
        .collect::<Result<_, CliError>>()?;
    save_embedding_file(&args.output, &vectors).map_err(CliError::from_runtime)?;
    write_manifest("embed", config, &[&args.input], &[&args.output])?;
    println!("embedded {} sentences -> {}", vectors.len(), args.output.display());
    Ok(())
}

// --- mine -------------------------------------------------------------------

#[derive(Args)]
pub struct MineArgs {
    #[arg(long)]
    pub src: PathBuf,
    #[arg(long)]
    pub tgt: PathBuf,
    #[arg(long)]
    pub src_style: String,
    #[arg(long)]
    pub tgt_style: String,
    /// Parallel-group output (json-lines).
    #[arg(long)]
    pub out: PathBuf,
    /// Also export flattened training pairs here.
    #[arg(long)]
    pub pairs_out: Option<PathBuf>,
    #[arg(long)]
    pub triplets: Option<PathBuf>,
    #[arg(long)]
    pub stopwords: Option<PathBuf>,
    #[command(flatten)]
    pub overrides: ConfigOverrides,
}

pub fn mine(args: &MineArgs, config: &RunConfig) -> Result<(), CliError> {
    let src = load_corpus_arg(&args.src, &args.src_style, CorpusFormat::JsonLines)?;
    let tgt = load_corpus_arg(&args.tgt, &args.tgt_style, CorpusFormat::JsonLines)?;
    let profiles = make_profiles(&[&src, &tgt], args.triplets.as_ref(), args.stopwords.as_ref())?;
    let params = config.alignment_params();
    let provider = match params.strategy {
        align::Strategy::Rd => None,
        _ => Some(build_provider(config)?),
    };

    let output = align::mine(&src, &tgt, &profiles, provider.as_ref(), &params)
        .map_err(CliError::from_runtime)?;
    write_jsonl(&args.out, &output.groups)?;

    let mut outputs: Vec<&Path> = vec![&args.out];
    if let Some(pairs_path) = &args.pairs_out {
        let pairs = align::export_pairs(&output.groups, &src, &tgt, &config.sep_open, &config.sep_close)
            .map_err(CliError::from_runtime)?;
        write_jsonl(pairs_path, &pairs)?;
        outputs.push(pairs_path);
    }
    write_manifest("mine", config, &[&args.src as &Path, &args.tgt], &outputs)?;
    println!(
        "mined {} groups ({} sources dropped) -> {}",
        output.groups.len(),
        output.dropped_sources,
        args.out.display()
    );
    Ok(())
}

// --- distill ----------------------------------------------------------------

#[derive(Args)]
pub struct DistillArgs {
    /// Articles json-lines: {article_id, title, sentences: [...]}.
    #[arg(long)]
    pub input: PathBuf,
    /// Style label for the distilled corpus.
    #[arg(long)]
    pub style: String,
    #[arg(long)]
    pub plans_out: PathBuf,
    #[arg(long)]
    pub corpus_out: PathBuf,
    #[command(flatten)]
    pub overrides: ConfigOverrides,
}

#[derive(Deserialize)]
struct ArticleRecord {
    article_id: String,
    title: String,
    sentences: Vec<String>,
}

#[derive(Serialize)]
struct PlanRecord {
    article_id: String,
    #[serde(flatten)]
    plan: DistillPlan,
}

pub fn distill(args: &DistillArgs, config: &RunConfig) -> Result<(), CliError> {
    let file = File::open(&args.input)
        .map_err(|e| CliError::validation(format!("{}: {e}", args.input.display())))?;
    let mut articles = Vec::new();
    for (lineno, line) in BufReader::new(file).lines().enumerate() {
        let line = line.map_err(|e| CliError::runtime(e.to_string()))?;
        if line.trim().is_empty() {
            continue;
        }
        let rec: ArticleRecord = serde_json::from_str(&line).map_err(|e| {
            CliError::validation(format!("{}:{}: {e}", args.input.display(), lineno + 1))
        })?;
        articles.push(rec);
    }

    let style = StyleLabel::new(&args.style);
    let results: Vec<(PlanRecord, Vec<Sentence>)> = articles
        .par_iter()
        .map(|rec| {
            let title = Sentence::new(format!("{}-title", rec.article_id), style.clone(), &rec.title);
            let sentences: Vec<Sentence> = rec
                .sentences
                .iter()
                .enumerate()
                .map(|(i, text)| {
                    Sentence::new(format!("{}-s{i}", rec.article_id), style.clone(), text.clone())
                })
                .collect();
            let plan = distill_article(&title, &sentences, config.lambda)
                .map_err(CliError::from_validation)?;
            let kept: Vec<Sentence> = sentences
                .into_iter()
                .filter(|s| plan.selected_ids.contains(&s.id))
                .collect();
            Ok((
                PlanRecord {
                    article_id: rec.article_id.clone(),
                    plan,
                },
                kept,
            ))
        })
        .collect::<Result<_, CliError>>()?;

    let (plans, kept): (Vec<PlanRecord>, Vec<Vec<Sentence>>) = results.into_iter().unzip();
    write_jsonl(&args.plans_out, &plans)?;
    let corpus = Corpus::new(style.clone(), kept.into_iter().flatten().collect())
        .map_err(CliError::from_runtime)?;
    save_corpus(&corpus, &args.corpus_out).map_err(CliError::from_runtime)?;
    write_manifest(
        "distill",
        config,
        &[&args.input],
        &[&args.plans_out as &Path, &args.corpus_out],
    )?;
    println!(
        "distilled {} articles, kept {} sentences -> {}",
        plans.len(),
        corpus.len(),
        args.corpus_out.display()
    );
    Ok(())
}

// --- reward (batch) -----------------------------------------------------------

#[derive(Args)]
pub struct RewardArgs {
    /// Request file: one service-protocol json object per line.
    #[arg(long)]
    pub requests: PathBuf,
    #[arg(long)]
    pub output: PathBuf,
    #[command(flatten)]
    pub overrides: ConfigOverrides,
}

pub fn reward(args: &RewardArgs, config: &RunConfig) -> Result<(), CliError> {
    let text = std::fs::read_to_string(&args.requests)
        .map_err(|e| CliError::validation(format!("{}: {e}", args.requests.display())))?;
    let ctx = ServeContext::new(build_provider(config)?, config.reward_params());
    let lines: Vec<&str> = text.lines().filter(|l| !l.trim().is_empty()).collect();
    let responses: Vec<String> = lines
        .par_iter()
        .map(|line| stylemine::reward::serve::handle_line(&ctx, line))
        .collect();
    let file = File::create(&args.output)
        .map_err(|e| CliError::runtime(format!("{}: {e}", args.output.display())))?;
    let mut w = BufWriter::new(file);
    for r in &responses {
        writeln!(w, "{r}").map_err(|e| CliError::runtime(e.to_string()))?;
    }
    w.flush().map_err(|e| CliError::runtime(e.to_string()))?;
    write_manifest("reward", config, &[&args.requests], &[&args.output])?;
    println!("answered {} requests -> {}", responses.len(), args.output.display());
    Ok(())
}

// --- serve --------------------------------------------------------------------

#[derive(Args)]
pub struct ServeArgs {
    #[arg(long, default_value = "stdio")]
    pub transport: String,
    /// TCP bind address (transport = tcp).
    #[arg(long, default_value = "127.0.0.1:7878")]
    pub addr: String,
    #[command(flatten)]
    pub overrides: ConfigOverrides,
}

pub fn serve(args: &ServeArgs, config: &RunConfig) -> Result<(), CliError> {
    let ctx = Arc::new(ServeContext::new(build_provider(config)?, config.reward_params()));
    match args.transport.as_str() {
        "stdio" => {
            serve_stdio(ctx);
            Ok(())
        }
        "tcp" => {
            eprintln!("serving on {}", args.addr);
            serve_tcp(ctx, args.addr.as_str())
                .map_err(|e| CliError::runtime(format!("tcp serve: {e}")))
        }
        other => Err(CliError::validation(format!("unknown transport {other:?}"))),
    }
}

// --- eval ---------------------------------------------------------------------

#[derive(Args)]
pub struct EvalArgs {
    /// Eval records json-lines: {source, candidate, references, style_correct?}.
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long)]
    pub report_out: PathBuf,
    /// Print the aligned-column table (ACC, BLEU, GM, i-PINC; x100).
    #[arg(long)]
    pub table: bool,
    /// Also report the standard BLEU-4 geometric composite.
    #[arg(long)]
    pub composite: bool,
    #[command(flatten)]
    pub overrides: ConfigOverrides,
}

pub fn eval(args: &EvalArgs, config: &RunConfig) -> Result<(), CliError> {
    let records = load_eval_records(&args.input).map_err(CliError::from_validation)?;
    let report = evaluate_with(&records, args.composite).map_err(CliError::from_validation)?;
    let body = serde_json::to_string_pretty(&report).map_err(|e| CliError::runtime(e.to_string()))?;
    std::fs::write(&args.report_out, body)
        .map_err(|e| CliError::runtime(format!("{}: {e}", args.report_out.display())))?;
    write_manifest("eval", config, &[&args.input], &[&args.report_out])?;
    if args.table {
        print!("{}", render_report_table(&report));
    } else {
        println!("evaluated {} records -> {}", report.count, args.report_out.display());
    }
    Ok(())
}

// --- stats --------------------------------------------------------------------

#[derive(Args)]
pub struct StatsArgs {
    #[arg(long)]
    pub groups: PathBuf,
    #[arg(long)]
    pub src: PathBuf,
    #[arg(long)]
    pub tgt: PathBuf,
    #[arg(long)]
    pub src_style: String,
    #[arg(long)]
    pub tgt_style: String,
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long)]
    pub table: bool,
    #[arg(long)]
    pub stopwords: Option<PathBuf>,
    #[command(flatten)]
    pub overrides: ConfigOverrides,
}

pub fn stats(args: &StatsArgs, config: &RunConfig) -> Result<(), CliError> {
    let src = load_corpus_arg(&args.src, &args.src_style, CorpusFormat::JsonLines)?;
    let tgt = load_corpus_arg(&args.tgt, &args.tgt_style, CorpusFormat::JsonLines)?;
    let file = File::open(&args.groups)
        .map_err(|e| CliError::validation(format!("{}: {e}", args.groups.display())))?;
    let mut groups: Vec<ParallelGroup> = Vec::new();
    for (lineno, line) in BufReader::new(file).lines().enumerate() {
        let line = line.map_err(|e| CliError::runtime(e.to_string()))?;
        if line.trim().is_empty() {
            continue;
        }
        groups.push(serde_json::from_str(&line).map_err(|e| {
            CliError::validation(format!("{}:{}: {e}", args.groups.display(), lineno + 1))
        })?);
    }
    let profiles = make_profiles(&[&src, &tgt], None, args.stopwords.as_ref())?;
    let report = align::dataset_stats(&groups, &src, &tgt, &profiles)
        .map_err(CliError::from_validation)?;
    let body = serde_json::to_string_pretty(&report).map_err(|e| CliError::runtime(e.to_string()))?;
    std::fs::write(&args.out, body)
        .map_err(|e| CliError::runtime(format!("{}: {e}", args.out.display())))?;
    write_manifest("stats", config, &[&args.groups as &Path, &args.src, &args.tgt], &[&args.out])?;
    if args.table {
        print!("{}", align::render_stats_table(&report));
    } else {
        println!("stats over {} pairs -> {}", report.pair_count, args.out.display());
    }
    Ok(())
}
