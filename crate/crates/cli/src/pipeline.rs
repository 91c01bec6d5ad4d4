use std::sync::Arc;

use anyhow::{Context, Result};
use expsum_core::check::{check_metadata, load_dictionary, UninformativeDictionary};
use expsum_core::code_model::{CodeModeler, DmtConfig};
use expsum_core::kb::KnowledgeBase;
use expsum_core::llm::{HttpClient, LlmClient, MockClient, MockScript};
use expsum_core::retrieval::{retrieve, QueryText, RetrievalConfig};
use expsum_core::summarizer::{RefinerConstraints, SchemaSet, Summarizer, TermContext};
use rayon::prelude::*;

use crate::config::{Resolved, ResolvedLlm};
use crate::corpus::{CorpusRecord, ErrorLine, OutputLine, SummaryLine};

pub fn make_client(llm: &ResolvedLlm) -> Result<Arc<dyn LlmClient>> {
    Ok(match llm {
        ResolvedLlm::Mock(script) => Arc::new(MockClient::new(
            MockScript::load(script)
                .with_context(|| format!("loading mock script {}", script.display()))?,
        )),
        ResolvedLlm::Http(cfg) => Arc::new(HttpClient::new(cfg.clone())?),
    })
}

pub fn dmt_config(keys: Option<&Vec<String>>) -> DmtConfig {
    match keys {
        Some(k) => DmtConfig::new(k),
        None => DmtConfig::default(),
    }
}

pub fn dictionary(path: Option<&std::path::Path>) -> Result<UninformativeDictionary> {
    match path {
        Some(p) => Ok(load_dictionary(p)?),
        None => Ok(UninformativeDictionary::seed()),
    }
}

/// Shared read-only state for summarizing a corpus.
pub struct Pipeline {
    pub modeler: CodeModeler,
    pub dmt: DmtConfig,
    pub dictionary: UninformativeDictionary,
    pub kb: KnowledgeBase<f64>,
    pub retrieval: RetrievalConfig,
    pub summarizer: Summarizer,
    pub client: Arc<dyn LlmClient>,
}

impl Pipeline {
    pub fn from_resolved(r: &Resolved) -> Result<Self> {
        let cfg = &r.config;
        let kb_path = r.kb_path.as_ref().context("no knowledge base given (kb_path / --kb)")?;
        let kb = KnowledgeBase::load(kb_path)
            .with_context(|| format!("loading knowledge base {}", kb_path.display()))?;
        let schemas = match &cfg.schema_dir {
            Some(d) => SchemaSet::load_dir(d)?,
            None => SchemaSet::builtin(),
        };
        let constraints = match &cfg.refiner_constraints_path {
            Some(p) => RefinerConstraints::load(p)?,
            None => RefinerConstraints::builtin(),
        };
        let llm = r.llm.as_ref().context("no LLM backend configured")?;
        Ok(Pipeline {
            modeler: CodeModeler::default(),
            dmt: dmt_config(cfg.dmt.as_ref()),
            dictionary: dictionary(cfg.dictionary_path.as_deref())?,
            kb,
            retrieval: cfg.retrieval.clone(),
            summarizer: Summarizer::new(schemas, constraints, cfg.summarizer)?,
            client: make_client(llm)?,
        })
    }

    pub fn process(&self, rec: &CorpusRecord) -> OutputLine {
        let fail = |kind: &str, message: String| {
            log::warn!("{}: {kind}: {message}", rec.id);
            OutputLine::Error(ErrorLine { id: rec.id.clone(), error: kind.to_string(), message })
        };
        let meta = match self.modeler.model_function(&rec.function, &self.dmt) {
            Ok(m) => m,
            Err(e) => return fail(e.kind(), e.to_string()),
        };
        let checked = check_metadata(&meta, &self.dictionary).retained;
        let query = QueryText::from_metadata(&checked);
        let retrieved = retrieve(&query, &self.kb, &self.retrieval);
        let knowledge = TermContext::from_retrieval(&retrieved);
        match self.summarizer.summarize(&checked, &knowledge, self.client.as_ref()) {
            Ok(r) => OutputLine::Summary(SummaryLine::new(&rec.id, r)),
            Err(e) => fail(e.kind(), e.to_string()),
        }
    }

    /// Results in input order regardless of `workers`.
    pub fn run(&self, records: &[CorpusRecord], workers: usize) -> Result<Vec<OutputLine>> {
        let pool = rayon::ThreadPoolBuilder::new().num_threads(workers).build()?;
        Ok(pool.install(|| records.par_iter().map(|r| self.process(r)).collect()))
    }
}
