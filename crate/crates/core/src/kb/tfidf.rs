//! Smoothed TF-IDF: `tf = n_ij / sum_k n_kj`, `idf = ln(M / (m_i + alpha))`.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use super::tokenize::tokenize;
use super::vector::SparseVector;
use super::KbError;
use crate::scalar::Scalar;

pub const DEFAULT_ALPHA: f64 = 0.01;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LogBase {
    #[default]
    Natural,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "F: Scalar")]
pub struct TfIdfModel<F = f64> {
    pub vocabulary: BTreeMap<String, u32>,
    pub doc_count: usize,
    pub doc_frequency: BTreeMap<String, usize>,
    pub alpha: F,
    #[serde(default)]
    pub log_base: LogBase,
}

impl<F: Scalar> TfIdfModel<F> {
    pub fn fit<'a>(texts: impl IntoIterator<Item = &'a str>) -> Result<Self, KbError> {
        Self::fit_with_alpha(texts, F::lit(DEFAULT_ALPHA))
    }

    pub fn fit_with_alpha<'a>(
        texts: impl IntoIterator<Item = &'a str>,
        alpha: F,
    ) -> Result<Self, KbError> {
        if alpha.is_nan() || alpha <= F::zero() {
            return Err(KbError::InvalidModel("alpha must be positive".into()));
        }
        let mut doc_count = 0;
        let mut doc_frequency: BTreeMap<String, usize> = BTreeMap::new();
        for text in texts {
            doc_count += 1;
            let distinct: BTreeSet<String> = tokenize(text).into_iter().collect();
            for token in distinct {
                *doc_frequency.entry(token).or_default() += 1;
            }
        }
        if doc_count == 0 {
            return Err(KbError::EmptyCorpus);
        }
        let vocabulary = doc_frequency
            .keys()
            .enumerate()
            .map(|(i, t)| (t.clone(), i as u32))
            .collect();
        Ok(TfIdfModel {
            vocabulary,
            doc_count,
            doc_frequency,
            alpha,
            log_base: LogBase::Natural,
        })
    }

    pub fn idf(&self, token: &str) -> Option<F> {
        let m = *self.doc_frequency.get(token)?;
        let ratio = F::from_count(self.doc_count) / (F::from_count(m) + self.alpha);
        Some(ratio.ln())
    }

    /// Encode `text`. The term-frequency denominator counts every token of the
    /// text; out-of-vocabulary tokens get no dimension.
    pub fn encode(&self, text: &str) -> SparseVector<F> {
        let tokens = tokenize(text);
        if tokens.is_empty() {
            return SparseVector::new();
        }
        let total = F::from_count(tokens.len());
        let mut counts: BTreeMap<&str, usize> = BTreeMap::new();
        for t in &tokens {
            *counts.entry(t.as_str()).or_default() += 1;
        }
        SparseVector::from_pairs(counts.into_iter().filter_map(|(tok, n)| {
            let index = *self.vocabulary.get(tok)?;
            let idf = self.idf(tok)?;
            Some((index, F::from_count(n) / total * idf))
        }))
    }

    pub fn validate(&self) -> Result<(), KbError> {
        let bad = |m: &str| Err(KbError::InvalidModel(m.into()));
        if self.alpha.is_nan() || self.alpha <= F::zero() {
            return bad("alpha must be positive");
        }
        if self.doc_count == 0 {
            return bad("doc_count must be positive");
        }
        if self.vocabulary.len() != self.doc_frequency.len()
            || !self.vocabulary.keys().all(|k| self.doc_frequency.contains_key(k))
        {
            return bad("vocabulary and doc_frequency disagree");
        }
        if !self
            .doc_frequency
            .values()
            .all(|&m| m > 0 && m <= self.doc_count)
        {
            return bad("document frequency outside (0, M]");
        }
        Ok(())
    }
}
