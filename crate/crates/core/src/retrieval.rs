//! Phase III, part two: context-aware cascaded retrieval.
//!
//! Stage 1 keeps entries whose path context covers enough of the query path,
//! stage 2 ranks the survivors by TF-IDF cosine and keeps the top n, stage 3
//! drops terms lexically nested in longer retrieved terms.

use std::cmp::Ordering;
use std::collections::HashMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::code_model::MetadataSet;
use crate::kb::tokenize::tokenize;
use crate::kb::{KnowledgeBase, KnowledgeEntry, TfIdfModel};
use crate::scalar::Scalar;

#[derive(Debug, Error, PartialEq)]
pub enum RetrievalError {
    #[error("invalid retrieval config: {0}")]
    InvalidConfig(String),
    #[error("query path is empty")]
    EmptyQueryPath,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct QueryText {
    pub concatenated: String,
    pub path: String,
}

impl QueryText {
    pub fn new(concatenated: impl Into<String>, path: impl Into<String>) -> Result<Self, RetrievalError> {
        let q = QueryText {
            concatenated: concatenated.into(),
            path: path.into(),
        };
        if q.path.trim().is_empty() {
            return Err(RetrievalError::EmptyQueryPath);
        }
        Ok(q)
    }

    /// Metadata values joined by commas; the path is the package/module when
    /// known, otherwise the file path.
    pub fn from_metadata(meta: &MetadataSet) -> Self {
        let path = meta
            .package_module
            .as_deref()
            .filter(|p| !p.trim().is_empty())
            .unwrap_or(&meta.file_path)
            .to_string();
        QueryText {
            concatenated: meta.values().join(", "),
            path,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RetrievalConfig {
    pub path_overlap_threshold: f64,
    pub top_n: usize,
    pub token_overlap_threshold: f64,
}

impl Default for RetrievalConfig {
    fn default() -> Self {
        RetrievalConfig {
            path_overlap_threshold: 0.75,
            top_n: 9,
            token_overlap_threshold: 0.75,
        }
    }
}

impl RetrievalConfig {
    pub fn new(
        path_overlap_threshold: f64,
        top_n: usize,
        token_overlap_threshold: f64,
    ) -> Result<Self, RetrievalError> {
        let cfg = RetrievalConfig {
            path_overlap_threshold,
            top_n,
            token_overlap_threshold,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<(), RetrievalError> {
        let in_range = |t: f64| t > 0.0 && t <= 1.0;
        if !in_range(self.path_overlap_threshold) {
            return Err(RetrievalError::InvalidConfig(format!(
                "path_overlap_threshold {} not in (0, 1]",
                self.path_overlap_threshold
            )));
        }
        if !in_range(self.token_overlap_threshold) {
            return Err(RetrievalError::InvalidConfig(format!(
                "token_overlap_threshold {} not in (0, 1]",
                self.token_overlap_threshold
            )));
        }
        if self.top_n == 0 {
            return Err(RetrievalError::InvalidConfig("top_n must be at least 1".into()));
        }
        Ok(())
    }
}

/// Survivor counts after each stage.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct StageTrace {
    pub path_matched: usize,
    pub ranked: usize,
    pub deduplicated: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "F: Scalar")]
pub struct RetrievalResult<F = f64> {
    pub terms: Vec<String>,
    pub entries: Vec<KnowledgeEntry<F>>,
    /// Stage-2 cosine score of each entry, same order as `entries`.
    pub scores: Vec<F>,
    pub stage_trace: StageTrace,
}

impl<F> RetrievalResult<F> {
    pub fn empty() -> Self {
        RetrievalResult {
            terms: Vec::new(),
            entries: Vec::new(),
            scores: Vec::new(),
            stage_trace: StageTrace::default(),
        }
    }
}

pub fn path_tokens(path: &str) -> Vec<String> {
    path.split(['/', '.', '@'])
        .filter(|t| !t.is_empty())
        .map(str::to_lowercase)
        .collect()
}

/// Left-aligned run of equal path tokens, over the number of query tokens.
pub fn path_overlap(query_path: &str, entry_path: &str) -> f64 {
    let q = path_tokens(query_path);
    if q.is_empty() {
        return 0.0;
    }
    let e = path_tokens(entry_path);
    let run = q.iter().zip(&e).take_while(|(a, b)| a == b).count();
    run as f64 / q.len() as f64
}

/// Multiset intersection of term tokens over the token count of the longer term.
pub fn token_overlap(a: &str, b: &str) -> f64 {
    let ta = tokenize(a);
    let tb = tokenize(b);
    let longer = ta.len().max(tb.len());
    if longer == 0 {
        return 0.0;
    }
    let mut counts: HashMap<&str, usize> = HashMap::new();
    for t in &ta {
        *counts.entry(t).or_default() += 1;
    }
    let mut shared = 0;
    for t in &tb {
        if let Some(c) = counts.get_mut(t.as_str()) {
            if *c > 0 {
                *c -= 1;
                shared += 1;
            }
        }
    }
    shared as f64 / longer as f64
}

pub fn stage1_filter<'a, F>(
    query: &QueryText,
    entries: &'a [KnowledgeEntry<F>],
    cfg: &RetrievalConfig,
) -> Vec<&'a KnowledgeEntry<F>> {
    entries
        .iter()
        .filter(|e| path_overlap(&query.path, &e.path_context) >= cfg.path_overlap_threshold)
        .collect()
}

/// Descending score, then ascending path context, then ascending term.
pub fn rank_order<F: Scalar>(a: (&KnowledgeEntry<F>, F), b: (&KnowledgeEntry<F>, F)) -> Ordering {
    b.1.partial_cmp(&a.1)
        .unwrap_or(Ordering::Equal)
        .then_with(|| a.0.path_context.cmp(&b.0.path_context))
        .then_with(|| a.0.term.cmp(&b.0.term))
}

pub fn stage2_rank<'a, F: Scalar>(
    query: &QueryText,
    model: &TfIdfModel<F>,
    survivors: &[&'a KnowledgeEntry<F>],
    cfg: &RetrievalConfig,
) -> Vec<(&'a KnowledgeEntry<F>, F)> {
    let q = model.encode(&query.concatenated);
    let mut scored: Vec<_> = survivors.iter().map(|&e| (e, q.cosine(&e.vector))).collect();
    scored.sort_by(|a, b| rank_order(*a, *b));
    scored.truncate(cfg.top_n);
    scored
}

pub fn stage3_dedup(terms: &[String], cfg: &RetrievalConfig) -> Vec<String> {
    let mut unique: Vec<&String> = Vec::new();
    for t in terms {
        if !unique.contains(&t) {
            unique.push(t);
        }
    }
    unique
        .iter()
        .filter(|ti| {
            let len_i = ti.chars().count();
            !unique.iter().any(|tj| {
                tj != *ti
                    && len_i < tj.chars().count()
                    && token_overlap(ti, tj) >= cfg.token_overlap_threshold
            })
        })
        .map(|t| (*t).clone())
        .collect()
}

pub fn retrieve<F: Scalar>(
    query: &QueryText,
    kb: &KnowledgeBase<F>,
    cfg: &RetrievalConfig,
) -> RetrievalResult<F> {
    let matched = stage1_filter(query, &kb.entries, cfg);
    let ranked = stage2_rank(query, &kb.model, &matched, cfg);
    let retrieved_terms: Vec<String> = ranked.iter().map(|(e, _)| e.term.clone()).collect();
    let terms = stage3_dedup(&retrieved_terms, cfg);
    RetrievalResult {
        stage_trace: StageTrace {
            path_matched: matched.len(),
            ranked: ranked.len(),
            deduplicated: terms.len(),
        },
        terms,
        scores: ranked.iter().map(|(_, s)| *s).collect(),
        entries: ranked.into_iter().map(|(e, _)| e.clone()).collect(),
    }
}
