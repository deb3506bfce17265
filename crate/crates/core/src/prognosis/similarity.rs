use std::cmp::Ordering;

use serde::{Deserialize, Serialize};

use super::library::ExemplarLibrary;
use crate::error::{Error, Result};
use crate::fuzzy::FuzzySignature;

/// Fuzzy Jaccard similarity on raw slices: `sum(min) / (sum(max) + eps)`.
/// Slices must have equal length.
#[inline]
pub fn jaccard(a: &[f64], b: &[f64], eps: f64) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    let (mut inter, mut union) = (0.0, 0.0);
    for (&x, &y) in a.iter().zip(b) {
        inter += x.min(y);
        union += x.max(y);
    }
    inter / (union + eps)
}

pub fn jaccard_similarity(a: &FuzzySignature, b: &FuzzySignature, eps: f64) -> Result<f64> {
    if a.values().len() != b.values().len() {
        return Err(Error::Precondition(format!(
            "signature lengths differ: {} vs {}",
            a.values().len(),
            b.values().len()
        )));
    }
    Ok(jaccard(a.values(), b.values(), eps))
}

/// One retrieved exemplar acting as a rule.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Match {
    /// Index into the library.
    pub exemplar: usize,
    pub similarity: f64,
    pub rul: u32,
    pub run_id: usize,
    pub cycle: usize,
}

/// Ranking order: similarity descending, then exemplar index ascending.
pub fn rank_order(a: &Match, b: &Match) -> Ordering {
    b.similarity
        .total_cmp(&a.similarity)
        .then(a.exemplar.cmp(&b.exemplar))
}

/// Top-`k` exemplars by similarity, by exhaustive scan. When
/// `exclude_run` is set, exemplars drawn from that run are skipped.
pub fn retrieve_top_k(
    query: &[f64],
    library: &ExemplarLibrary,
    k: usize,
    exclude_run: Option<usize>,
    eps: f64,
) -> Result<Vec<Match>> {
    if library.is_empty() {
        return Err(Error::EmptyLibrary);
    }
    if k == 0 {
        return Err(Error::Precondition("k must be at least 1".into()));
    }
    if query.len() != library.dims() {
        return Err(Error::Precondition(format!(
            "query has {} values, library rows have {}",
            query.len(),
            library.dims()
        )));
    }
    let mut scored: Vec<Match> = (0..library.len())
        .filter(|&i| exclude_run != Some(library.provenance(i).0))
        .map(|i| {
            let (run_id, cycle) = library.provenance(i);
            Match {
                exemplar: i,
                similarity: jaccard(query, library.row(i), eps),
                rul: library.rul(i),
                run_id,
                cycle,
            }
        })
        .collect();
    if scored.is_empty() {
        return Err(Error::EmptyLibrary);
    }
    if scored.len() > k {
        scored.select_nth_unstable_by(k - 1, rank_order);
        scored.truncate(k);
    }
    scored.sort_unstable_by(rank_order);
    Ok(scored)
}
