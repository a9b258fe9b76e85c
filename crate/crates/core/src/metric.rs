//! Sentence-level smoothed BLEU and the ternary reward derived from it.

use std::collections::HashMap;

use crate::error::{invalid, Result};
use crate::TokenId;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BleuConfig {
    pub max_ngram_order: usize,
    /// Add one to both the clipped match count and the total count of every
    /// order ≥ 2.
    pub smoothing: bool,
}

impl Default for BleuConfig {
    fn default() -> Self {
        BleuConfig {
            max_ngram_order: 4,
            smoothing: true,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RewardConfig {
    pub equality_tolerance: f64,
}

impl Default for RewardConfig {
    fn default() -> Self {
        RewardConfig {
            equality_tolerance: 1e-9,
        }
    }
}

fn ngram_counts(tokens: &[TokenId], n: usize) -> HashMap<&[TokenId], usize> {
    let mut counts = HashMap::new();
    if tokens.len() >= n {
        for gram in tokens.windows(n) {
            *counts.entry(gram).or_insert(0) += 1;
        }
    }
    counts
}

/// Modified n-gram precision numerator and denominator for one order.
fn clipped_matches(candidate: &[TokenId], reference: &[TokenId], n: usize) -> (usize, usize) {
    let cand = ngram_counts(candidate, n);
    let refc = ngram_counts(reference, n);
    let matches = cand
        .iter()
        .map(|(g, &c)| c.min(refc.get(g).copied().unwrap_or(0)))
        .sum();
    (matches, candidate.len().saturating_sub(n - 1))
}

/// Smoothed sentence BLEU of `candidate` against a single `reference`.
///
/// Orders ≥ 2 use add-one smoothing when enabled; unigram precision is never
/// smoothed, so sentences without a shared token score exactly 0. The brevity
/// penalty is `exp(1 − r/c)` for candidates shorter than the reference.
pub fn smoothed_bleu(candidate: &[TokenId], reference: &[TokenId], config: &BleuConfig) -> Result<f64> {
    if reference.is_empty() {
        return invalid("BLEU reference is empty");
    }
    if config.max_ngram_order == 0 {
        return invalid("max n-gram order must be at least 1");
    }
    if candidate.is_empty() {
        return Ok(0.0);
    }
    let mut log_sum = 0.0;
    for n in 1..=config.max_ngram_order {
        let (mut m, mut c) = clipped_matches(candidate, reference, n);
        if n >= 2 && config.smoothing {
            m += 1;
            c += 1;
        }
        if m == 0 || c == 0 {
            return Ok(0.0);
        }
        log_sum += (m as f64 / c as f64).ln();
    }
    let precision = (log_sum / config.max_ngram_order as f64).exp();
    let (c, r) = (candidate.len() as f64, reference.len() as f64);
    let brevity = if c < r { (1.0 - r / c).exp() } else { 1.0 };
    Ok(precision * brevity)
}

/// `+1` if the score rose by more than the tolerance, `−1` if it fell by more
/// than the tolerance, else `0`.
pub fn reward_from_bleu(previous_score: f64, current_score: f64, config: &RewardConfig) -> Result<i8> {
    for s in [previous_score, current_score] {
        if !(0.0..=1.0).contains(&s) {
            return invalid(format!("BLEU score {s} outside [0, 1]"));
        }
    }
    let diff = current_score - previous_score;
    Ok(if diff > config.equality_tolerance {
        1
    } else if diff < -config.equality_tolerance {
        -1
    } else {
        0
    })
}

/// Arithmetic mean of per-sentence smoothed BLEU.
pub fn corpus_average_bleu<C, R>(pairs: &[(C, R)], config: &BleuConfig) -> Result<f64>
where
    C: AsRef<[TokenId]>,
    R: AsRef<[TokenId]>,
{
    if pairs.is_empty() {
        return invalid("cannot average BLEU over an empty set");
    }
    let mut total = 0.0;
    for (c, r) in pairs {
        total += smoothed_bleu(c.as_ref(), r.as_ref(), config)?;
    }
    Ok(total / pairs.len() as f64)
}
