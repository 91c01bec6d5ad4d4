use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::scalar::Scalar;

/// Sparse vector keyed by vocabulary index. Zero and non-finite weights are never stored.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(transparent, bound = "F: Scalar")]
pub struct SparseVector<F = f64> {
    entries: BTreeMap<u32, F>,
}

impl<F: Scalar> SparseVector<F> {
    pub fn new() -> Self {
        SparseVector {
            entries: BTreeMap::new(),
        }
    }

    pub fn from_pairs(pairs: impl IntoIterator<Item = (u32, F)>) -> Self {
        let mut v = Self::new();
        for (i, w) in pairs {
            v.set(i, w);
        }
        v
    }

    pub fn set(&mut self, index: u32, weight: F) {
        if weight.is_finite() && weight != F::zero() {
            self.entries.insert(index, weight);
        } else {
            self.entries.remove(&index);
        }
    }

    pub fn get(&self, index: u32) -> F {
        self.entries.get(&index).copied().unwrap_or_else(F::zero)
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (u32, F)> + '_ {
        self.entries.iter().map(|(&i, &w)| (i, w))
    }

    pub fn norm(&self) -> F {
        self.entries.values().map(|&w| w * w).sum::<F>().sqrt()
    }

    pub fn dot(&self, other: &Self) -> F {
        let (small, large) = if self.len() <= other.len() {
            (self, other)
        } else {
            (other, self)
        };
        small
            .entries
            .iter()
            .filter_map(|(i, &w)| large.entries.get(i).map(|&o| w * o))
            .sum()
    }

    /// Cosine similarity; zero when either vector is zero.
    pub fn cosine(&self, other: &Self) -> F {
        let denom = self.norm() * other.norm();
        if denom == F::zero() {
            F::zero()
        } else {
            self.dot(other) / denom
        }
    }

    /// Entries with every weight widened or narrowed to another scalar type.
    pub fn cast<G: Scalar>(&self) -> SparseVector<G> {
        SparseVector::from_pairs(
            self.iter()
                .map(|(i, w)| (i, G::from_f64(w.to_f64().unwrap_or(0.0)).unwrap_or_else(G::zero))),
        )
    }

    pub(crate) fn is_valid(&self) -> bool {
        self.entries.values().all(|w| w.is_finite() && *w != F::zero())
    }
}
