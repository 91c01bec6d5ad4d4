use std::io::Write;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use expsum_core::check::check_metadata;
use expsum_core::code_model::{deserialize_metadata, CodeModeler, FunctionRecord};
use expsum_core::kb::{build_knowledge_base, build_knowledge_base_lexical, load_corpus, KnowledgeBase};
use expsum_core::metrics::{evaluate_corpus, EvaluationReport, ScorePair};
use expsum_core::retrieval::{retrieve, QueryText};

use crate::config::{Backend, EnvVars, Overrides, PipelineConfig};
use crate::corpus::{read_corpus, read_texts, write_lines};
use crate::pipeline::{dictionary, dmt_config, make_client, Pipeline};

#[derive(Debug, Parser)]
#[command(name = "expsum", version, about = "Metadata-driven, term-aware code summarization")]
pub struct Cli {
    /// Increase log verbosity (repeatable). Logs go to stderr.
    #[arg(short, long, action = clap::ArgAction::Count, global = true)]
    pub verbose: u8,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args, Default)]
pub struct LlmFlags {
    /// Pipeline config file (JSON).
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub backend: Option<Backend>,
    /// Scripted responses for the mock backend.
    #[arg(long)]
    pub mock_script: Option<PathBuf>,
    #[arg(long)]
    pub api_base: Option<String>,
    #[arg(long)]
    pub model: Option<String>,
    #[arg(long)]
    pub api_key: Option<String>,
}

impl LlmFlags {
    fn overrides(&self) -> Overrides {
        Overrides {
            backend: self.backend,
            mock_script: self.mock_script.clone(),
            api_base: self.api_base.clone(),
            model: self.model.clone(),
            api_key: self.api_key.clone(),
            ..Default::default()
        }
    }
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Build a term knowledge base from package documentation.
    KbBuild {
        /// Directory of documentation files, or a JSON manifest of {path_context, text}.
        #[arg(long)]
        corpus: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Skip the LLM-judged semantic term pass.
        #[arg(long)]
        lexical_only: bool,
        #[command(flatten)]
        llm: LlmFlags,
    },
    /// Model one function into its metadata set.
    Extract {
        /// A source file, or a FunctionRecord JSON file (`.json`).
        input: PathBuf,
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Remove uninformative fields from a metadata set.
    Check {
        /// MetadataSet JSON file.
        input: PathBuf,
        #[arg(long)]
        dictionary: Option<PathBuf>,
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Retrieve domain terms for a metadata set.
    Retrieve {
        /// MetadataSet JSON file.
        metadata: PathBuf,
        #[arg(long)]
        kb: Option<PathBuf>,
        #[arg(long)]
        config: Option<PathBuf>,
    },
    /// Summarize every record of a JSON-lines corpus.
    Summarize {
        #[arg(long)]
        corpus: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        kb: Option<PathBuf>,
        #[arg(long)]
        workers: Option<usize>,
        #[command(flatten)]
        llm: LlmFlags,
    },
    /// Score generated summaries against references.
    Evaluate {
        #[arg(long)]
        generated: PathBuf,
        #[arg(long)]
        references: PathBuf,
        #[arg(long)]
        report: PathBuf,
        /// Also write per-item scores as CSV.
        #[arg(long)]
        csv: Option<PathBuf>,
    },
}

fn write_output(out: Option<&Path>, text: &str) -> Result<()> {
    match out {
        Some(p) => std::fs::write(p, format!("{text}\n"))
            .with_context(|| format!("writing {}", p.display())),
        None => {
            let mut stdout = std::io::stdout().lock();
            writeln!(stdout, "{text}")?;
            Ok(())
        }
    }
}

pub fn run(cli: Cli) -> Result<()> {
    let env = EnvVars::from_process();
    match cli.command {
        Command::KbBuild { corpus, out, lexical_only, llm } => {
            kb_build(&corpus, &out, lexical_only, &llm, &env)
        }
        Command::Extract { input, config, out } => extract(&input, config.as_deref(), out.as_deref()),
        Command::Check { input, dictionary, config, out } => {
            check(&input, dictionary.as_deref(), config.as_deref(), out.as_deref())
        }
        Command::Retrieve { metadata, kb, config } => {
            cmd_retrieve(&metadata, kb.as_deref(), config.as_deref())
        }
        Command::Summarize { corpus, out, kb, workers, llm } => {
            let mut flags = llm.overrides();
            flags.kb_path = kb;
            flags.workers = workers;
            summarize(&corpus, &out, llm.config.as_deref(), &flags, &env).map(|_| ())
        }
        Command::Evaluate { generated, references, report, csv } => {
            evaluate(&generated, &references, &report, csv.as_deref()).map(|_| ())
        }
    }
}

pub fn kb_build(
    corpus: &Path,
    out: &Path,
    lexical_only: bool,
    llm: &LlmFlags,
    env: &EnvVars,
) -> Result<()> {
    let docs = load_corpus(corpus)?;
    if docs.is_empty() {
        bail!("empty corpus: no documents under {}", corpus.display());
    }
    let kb = if lexical_only {
        build_knowledge_base_lexical::<f64>(&docs)?
    } else {
        let resolved = PipelineConfig::load_or_default(llm.config.as_deref())?
            .resolve(&llm.overrides(), env)?;
        let backend = resolved
            .llm
            .as_ref()
            .context("semantic term extraction needs an LLM backend (or pass --lexical-only)")?;
        let client = make_client(backend)?;
        build_knowledge_base::<f64>(&docs, client.as_ref())?
    };
    kb.save(out).with_context(|| format!("writing {}", out.display()))?;
    println!(
        "{} entries, {} distinct terms, {} documents -> {}",
        kb.entries.len(),
        kb.terms().len(),
        docs.len(),
        out.display()
    );
    Ok(())
}

pub fn extract(input: &Path, config: Option<&Path>, out: Option<&Path>) -> Result<()> {
    let cfg = PipelineConfig::load_or_default(config)?;
    let text = std::fs::read_to_string(input)
        .with_context(|| format!("reading {}", input.display()))?;
    let record = if input.extension().is_some_and(|e| e == "json") {
        serde_json::from_str::<FunctionRecord>(&text)
            .with_context(|| format!("parsing function record {}", input.display()))?
    } else {
        FunctionRecord::from_source(text, input.to_string_lossy())
    };
    let meta = CodeModeler::default().model_function(&record, &dmt_config(cfg.dmt.as_ref()))?;
    write_output(out, &serde_json::to_string_pretty(&meta)?)
}

fn read_metadata(path: &Path) -> Result<expsum_core::code_model::MetadataSet> {
    let text =
        std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    deserialize_metadata(&text).with_context(|| format!("parsing metadata {}", path.display()))
}

pub fn check(
    input: &Path,
    dict_path: Option<&Path>,
    config: Option<&Path>,
    out: Option<&Path>,
) -> Result<()> {
    let cfg = PipelineConfig::load_or_default(config)?;
    let dict = dictionary(dict_path.or(cfg.dictionary_path.as_deref()))?;
    let report = check_metadata(&read_metadata(input)?, &dict);
    write_output(out, &serde_json::to_string_pretty(&report)?)
}

pub fn cmd_retrieve(metadata: &Path, kb: Option<&Path>, config: Option<&Path>) -> Result<()> {
    let cfg = PipelineConfig::load_or_default(config)?;
    let meta = read_metadata(metadata)?;
    let kb_path = kb
        .map(Path::to_path_buf)
        .or(cfg.kb_path.clone())
        .context("no knowledge base given (--kb or kb_path)")?;
    let kb = KnowledgeBase::<f64>::load(&kb_path)
        .with_context(|| format!("loading knowledge base {}", kb_path.display()))?;
    let result = retrieve(&QueryText::from_metadata(&meta), &kb, &cfg.retrieval);
    write_output(None, &serde_json::to_string_pretty(&result)?)
}

/// Returns the number of records that ended in an error line.
pub fn summarize(
    corpus: &Path,
    out: &Path,
    config: Option<&Path>,
    flags: &Overrides,
    env: &EnvVars,
) -> Result<usize> {
    let resolved = PipelineConfig::load_or_default(config)?.resolve(flags, env)?;
    let pipeline = Pipeline::from_resolved(&resolved)?;
    let records = read_corpus(corpus)?;
    let lines = pipeline.run(&records, resolved.workers)?;
    let file = std::fs::File::create(out).with_context(|| format!("creating {}", out.display()))?;
    write_lines(std::io::BufWriter::new(file), &lines)?;
    let failed = lines.iter().filter(|l| l.is_error()).count();
    if failed > 0 {
        log::warn!("{failed} of {} records failed", lines.len());
    }
    println!("{} records summarized, {failed} failed -> {}", lines.len() - failed, out.display());
    Ok(failed)
}

pub fn evaluate(
    generated: &Path,
    references: &Path,
    report_path: &Path,
    csv_path: Option<&Path>,
) -> Result<EvaluationReport<f64>> {
    let cands = read_texts(generated, &["candidate", "final_summary"])?;
    let refs: std::collections::HashMap<String, String> =
        read_texts(references, &["reference", "reference_summary"])?.into_iter().collect();
    let mut pairs = Vec::new();
    for (id, cand) in cands {
        let Some(reference) = refs.get(&id) else {
            log::warn!("no reference for `{id}`");
            continue;
        };
        match ScorePair::new(cand, reference.clone()) {
            Ok(p) => pairs.push((id, p)),
            Err(e) => log::warn!("skipping `{id}`: {e}"),
        }
    }
    if pairs.is_empty() {
        bail!("no joinable ids between {} and {}", generated.display(), references.display());
    }
    let report = evaluate_corpus::<f64>(&pairs)?;
    std::fs::write(report_path, serde_json::to_string_pretty(&report)? + "\n")
        .with_context(|| format!("writing {}", report_path.display()))?;
    if let Some(p) = csv_path {
        let mut w = csv::Writer::from_path(p)?;
        w.write_record(["id", "bleu4", "rouge_l"])?;
        for item in &report.per_item {
            w.write_record([item.id.clone(), item.bleu4.to_string(), item.rouge_l.to_string()])?;
        }
        w.flush()?;
    }
    println!(
        "n={} BLEU-4={:.3} ROUGE-L={:.3}",
        report.n, report.corpus_means.bleu4, report.corpus_means.rouge_l
    );
    Ok(report)
}
