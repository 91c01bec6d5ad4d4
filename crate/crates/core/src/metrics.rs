//! Reference-based summary metrics: sentence-level BLEU-4 and ROUGE-L F1, both on a 0-100 scale.
//!
//! BLEU uses uniform weights over the n-gram orders the candidate actually
//! has (up to 4), clipped precisions, the standard brevity penalty, and
//! epsilon smoothing (`EPSILON` added to the numerator of zero-match orders).

use std::collections::HashMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::scalar::Scalar;

pub const EPSILON: f64 = 0.1;
pub const MAX_ORDER: usize = 4;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum MetricsError {
    #[error("no pairs to evaluate")]
    EmptyCorpus,
    #[error("reference for `{0}` is empty")]
    EmptyReference(String),
}

/// Lowercase, split on whitespace and punctuation.
pub fn tokenize(text: &str) -> Vec<String> {
    text.split(|c: char| !c.is_alphanumeric())
        .filter(|t| !t.is_empty())
        .map(str::to_lowercase)
        .collect()
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ScorePair {
    pub candidate: String,
    pub reference: String,
}

impl ScorePair {
    pub fn new(candidate: impl Into<String>, reference: impl Into<String>) -> Result<Self, MetricsError> {
        let pair = ScorePair {
            candidate: candidate.into(),
            reference: reference.into(),
        };
        if pair.reference.trim().is_empty() {
            return Err(MetricsError::EmptyReference(pair.candidate));
        }
        Ok(pair)
    }
}

fn ngram_counts(tokens: &[String], n: usize) -> HashMap<&[String], usize> {
    let mut counts = HashMap::new();
    for g in tokens.windows(n) {
        *counts.entry(g).or_default() += 1;
    }
    counts
}

pub fn bleu4<F: Scalar>(pair: &ScorePair) -> F {
    bleu4_tokens(&tokenize(&pair.candidate), &tokenize(&pair.reference))
}

pub fn bleu4_tokens<F: Scalar>(cand: &[String], reference: &[String]) -> F {
    if cand.is_empty() {
        return F::zero();
    }
    let orders = cand.len().min(MAX_ORDER);
    let mut log_sum = F::zero();
    for n in 1..=orders {
        let ref_counts = ngram_counts(reference, n);
        let clipped: usize = ngram_counts(cand, n)
            .into_iter()
            .map(|(g, c)| c.min(ref_counts.get(g).copied().unwrap_or(0)))
            .sum();
        let total = F::from_count(cand.len() + 1 - n);
        let matched = if clipped == 0 {
            F::lit(EPSILON)
        } else {
            F::from_count(clipped)
        };
        log_sum = log_sum + (matched / total).ln();
    }
    let c = F::from_count(cand.len());
    let r = F::from_count(reference.len());
    let brevity = if c > r { F::one() } else { (F::one() - r / c).exp() };
    let score = F::hundred() * brevity * (log_sum / F::from_count(orders)).exp();
    score.max(F::zero()).min(F::hundred())
}

fn lcs_len(a: &[String], b: &[String]) -> usize {
    let mut row = vec![0usize; b.len() + 1];
    for x in a {
        let mut diag = 0;
        for (j, y) in b.iter().enumerate() {
            let up = row[j + 1];
            row[j + 1] = if x == y { diag + 1 } else { up.max(row[j]) };
            diag = up;
        }
    }
    row[b.len()]
}

pub fn rouge_l<F: Scalar>(pair: &ScorePair) -> F {
    rouge_l_tokens(&tokenize(&pair.candidate), &tokenize(&pair.reference))
}

pub fn rouge_l_tokens<F: Scalar>(cand: &[String], reference: &[String]) -> F {
    if cand.is_empty() || reference.is_empty() {
        return F::zero();
    }
    let lcs = F::from_count(lcs_len(cand, reference));
    let p = lcs / F::from_count(cand.len());
    let r = lcs / F::from_count(reference.len());
    if p + r == F::zero() {
        return F::zero();
    }
    let two = F::lit(2.0);
    (F::hundred() * two * p * r / (p + r)).min(F::hundred())
}

/// A similarity metric backed by an external encoder (e.g. sentence embeddings).
pub trait SemanticMetric<F: Scalar>: Send + Sync {
    fn name(&self) -> &str;

    /// Similarity on the same 0-100 scale as the lexical metrics.
    fn similarity(&self, candidate: &str, reference: &str) -> F;
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "F: Scalar")]
pub struct ItemScore<F = f64> {
    pub id: String,
    pub bleu4: F,
    pub rouge_l: F,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub semantic: Option<F>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "F: Scalar")]
pub struct CorpusMeans<F = f64> {
    pub bleu4: F,
    pub rouge_l: F,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub semantic: Option<F>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "F: Scalar")]
pub struct EvaluationReport<F = f64> {
    pub per_item: Vec<ItemScore<F>>,
    pub corpus_means: CorpusMeans<F>,
    pub n: usize,
}

pub fn evaluate_corpus<F: Scalar>(pairs: &[(String, ScorePair)]) -> Result<EvaluationReport<F>, MetricsError> {
    evaluate_corpus_with(pairs, None)
}

pub fn evaluate_corpus_with<F: Scalar>(
    pairs: &[(String, ScorePair)],
    semantic: Option<&dyn SemanticMetric<F>>,
) -> Result<EvaluationReport<F>, MetricsError> {
    if pairs.is_empty() {
        return Err(MetricsError::EmptyCorpus);
    }
    let per_item: Vec<ItemScore<F>> = pairs
        .iter()
        .map(|(id, pair)| ItemScore {
            id: id.clone(),
            bleu4: bleu4(pair),
            rouge_l: rouge_l(pair),
            semantic: semantic.map(|m| m.similarity(&pair.candidate, &pair.reference)),
        })
        .collect();
    let n = F::from_count(per_item.len());
    let mean = |f: &dyn Fn(&ItemScore<F>) -> F| per_item.iter().map(f).sum::<F>() / n;
    let corpus_means = CorpusMeans {
        bleu4: mean(&|i| i.bleu4),
        rouge_l: mean(&|i| i.rouge_l),
        semantic: semantic.map(|_| mean(&|i| i.semantic.unwrap_or_else(F::zero))),
    };
    Ok(EvaluationReport {
        n: per_item.len(),
        per_item,
        corpus_means,
    })
}
