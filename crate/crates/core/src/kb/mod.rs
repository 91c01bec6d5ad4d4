//! Phase III, part one: the domain-term knowledge base.
//!
//! Every entry is the 4-tuple (term, package documentation, path context,
//! TF-IDF vector of the documentation). All vectors share one fitted model.

pub mod terms;
pub mod tfidf;
pub mod tokenize;
pub mod vector;

use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::llm::{ClientError, LlmClient};
use crate::scalar::Scalar;

pub use terms::{extract_terms_lexical, extract_terms_semantic};
pub use tfidf::{LogBase, TfIdfModel};
pub use vector::SparseVector;

#[derive(Debug, Error)]
pub enum KbError {
    #[error("empty corpus")]
    EmptyCorpus,
    #[error("term extraction failed for {path_context}")]
    Client {
        path_context: String,
        #[source]
        source: ClientError,
    },
    #[error("invalid package document: {0}")]
    InvalidDoc(String),
    #[error("invalid TF-IDF model: {0}")]
    InvalidModel(String),
    #[error("invalid knowledge entry: {0}")]
    InvalidEntry(String),
    #[error("cannot read {path}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("malformed JSON")]
    Json(#[from] serde_json::Error),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PackageDoc {
    pub path_context: String,
    pub text: String,
}

impl PackageDoc {
    pub fn new(path_context: impl Into<String>, text: impl Into<String>) -> Result<Self, KbError> {
        let doc = PackageDoc {
            path_context: path_context.into(),
            text: text.into(),
        };
        doc.validate()?;
        Ok(doc)
    }

    pub fn validate(&self) -> Result<(), KbError> {
        if self.path_context.trim().is_empty() {
            return Err(KbError::InvalidDoc("empty path_context".into()));
        }
        if self.text.trim().is_empty() {
            return Err(KbError::InvalidDoc(format!(
                "{}: empty documentation",
                self.path_context
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "F: Scalar")]
pub struct KnowledgeEntry<F = f64> {
    pub term: String,
    pub documentation: String,
    pub path_context: String,
    pub vector: SparseVector<F>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "F: Scalar")]
pub struct KnowledgeBase<F = f64> {
    pub model: TfIdfModel<F>,
    pub entries: Vec<KnowledgeEntry<F>>,
}

pub fn fit_tfidf<F: Scalar>(docs: &[PackageDoc]) -> Result<TfIdfModel<F>, KbError> {
    TfIdfModel::fit(docs.iter().map(|d| d.text.as_str()))
}

pub fn encode_tfidf<F: Scalar>(model: &TfIdfModel<F>, text: &str) -> SparseVector<F> {
    model.encode(text)
}

/// Build with lexical and LLM-judged semantic term extraction.
pub fn build_knowledge_base<F: Scalar>(
    docs: &[PackageDoc],
    client: &dyn LlmClient,
) -> Result<KnowledgeBase<F>, KbError> {
    build(docs, Some(client))
}

/// Build with lexical term extraction only (no LLM calls).
pub fn build_knowledge_base_lexical<F: Scalar>(
    docs: &[PackageDoc],
) -> Result<KnowledgeBase<F>, KbError> {
    build(docs, None)
}

fn build<F: Scalar>(
    docs: &[PackageDoc],
    client: Option<&dyn LlmClient>,
) -> Result<KnowledgeBase<F>, KbError> {
    for d in docs {
        d.validate()?;
    }
    let model = fit_tfidf::<F>(docs)?;
    let mut entries = Vec::new();
    for doc in docs {
        let mut doc_terms = extract_terms_lexical(doc);
        if let Some(client) = client {
            for t in extract_terms_semantic(doc, client)? {
                if !doc_terms.contains(&t) {
                    doc_terms.push(t);
                }
            }
        }
        if doc_terms.is_empty() {
            log::debug!("no terms extracted from {}", doc.path_context);
            continue;
        }
        let vector = model.encode(&doc.text);
        entries.extend(doc_terms.into_iter().map(|term| KnowledgeEntry {
            term,
            documentation: doc.text.clone(),
            path_context: doc.path_context.clone(),
            vector: vector.clone(),
        }));
    }
    Ok(KnowledgeBase { model, entries })
}

impl<F: Scalar> KnowledgeBase<F> {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("knowledge base is serializable")
    }

    pub fn from_json(text: &str) -> Result<Self, KbError> {
        let kb: Self = serde_json::from_str(text)?;
        kb.validate()?;
        Ok(kb)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<(), KbError> {
        let path = path.as_ref();
        std::fs::write(path, self.to_json() + "\n").map_err(|source| KbError::Io {
            path: path.display().to_string(),
            source,
        })
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self, KbError> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|source| KbError::Io {
            path: path.display().to_string(),
            source,
        })?;
        Self::from_json(&text)
    }

    pub fn validate(&self) -> Result<(), KbError> {
        self.model.validate()?;
        let vocab = self.model.vocabulary.len() as u64;
        for e in &self.entries {
            if e.term.is_empty() || e.documentation.is_empty() || e.path_context.is_empty() {
                return Err(KbError::InvalidEntry(format!(
                    "entry `{}` has an empty component",
                    e.term
                )));
            }
            if !e.vector.is_valid() || e.vector.iter().any(|(i, _)| u64::from(i) >= vocab) {
                return Err(KbError::InvalidEntry(format!(
                    "entry `{}` has a vector outside the model",
                    e.term
                )));
            }
        }
        Ok(())
    }

    /// Distinct terms in entry order.
    pub fn terms(&self) -> Vec<&str> {
        let mut out: Vec<&str> = Vec::new();
        for e in &self.entries {
            if !out.contains(&e.term.as_str()) {
                out.push(&e.term);
            }
        }
        out
    }
}

/// Read package documents from a directory of UTF-8 text files (file name
/// minus its last extension is the path context) or from a JSON manifest
/// `[{path_context, text}]`. Directory entries are sorted by name.
pub fn load_corpus(path: impl AsRef<Path>) -> Result<Vec<PackageDoc>, KbError> {
    let path = path.as_ref();
    let io = |source| KbError::Io {
        path: path.display().to_string(),
        source,
    };
    if path.is_file() {
        let text = std::fs::read_to_string(path).map_err(io)?;
        let docs: Vec<PackageDoc> = serde_json::from_str(&text)?;
        for d in &docs {
            d.validate()?;
        }
        return Ok(docs);
    }
    let mut files: Vec<_> = std::fs::read_dir(path)
        .map_err(io)?
        .filter_map(Result::ok)
        .map(|e| e.path())
        .filter(|p| p.is_file())
        .filter(|p| {
            p.file_name()
                .and_then(|n| n.to_str())
                .is_some_and(|n| !n.starts_with('.'))
        })
        .collect();
    files.sort();
    let mut docs = Vec::new();
    for file in files {
        let text = std::fs::read_to_string(&file).map_err(|source| KbError::Io {
            path: file.display().to_string(),
            source,
        })?;
        let context = file
            .file_stem()
            .and_then(|s| s.to_str())
            .unwrap_or_default()
            .to_string();
        if text.trim().is_empty() {
            log::warn!("skipping empty document {}", file.display());
            continue;
        }
        docs.push(PackageDoc::new(context, text)?);
    }
    Ok(docs)
}
