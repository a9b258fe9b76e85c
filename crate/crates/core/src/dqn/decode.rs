//! Test-time iterative decoding and evaluation.

use rand::Rng;
use rayon::prelude::*;

use super::policy::{apply_action, select_action};
use super::qnet::{q_values, state_features, DqnState, QNetParams};
use super::train::DqnTrainConfig;
use crate::corpus::Pair;
use crate::error::{invalid, Result};
use crate::metric::{smoothed_bleu, BleuConfig};
use crate::rng::{item_stream, Phase};
use crate::stategf::{greedy_decode, StateGfParams};
use crate::TokenId;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DecodeConfig {
    pub episode_length_multiplier: usize,
    pub max_length: usize,
}

impl Default for DecodeConfig {
    fn default() -> Self {
        DecodeConfig {
            episode_length_multiplier: 2,
            max_length: 30,
        }
    }
}

impl From<&DqnTrainConfig> for DecodeConfig {
    fn from(c: &DqnTrainConfig) -> Self {
        DecodeConfig {
            episode_length_multiplier: c.episode_length_multiplier,
            max_length: c.max_length,
        }
    }
}

/// Greedy decode refined by `multiplier · l` Q-network edits, `l` being the
/// source length. Exploration at rate `epsilon` is uniform over actions.
/// An empty greedy decode is returned as is.
pub fn decode_iterative<R: Rng + ?Sized>(
    qnet: &QNetParams,
    stategf: &StateGfParams,
    source: &[TokenId],
    epsilon: f64,
    config: &DecodeConfig,
    rng: &mut R,
) -> Result<Vec<TokenId>> {
    let desen0 = greedy_decode(stategf, source, config.max_length)?.output_tokens();
    if desen0.is_empty() {
        return Ok(desen0);
    }
    let mut state = DqnState::new(source.to_vec(), desen0)?;
    for _ in 0..config.episode_length_multiplier * source.len() {
        let features = state_features(stategf, &state)?;
        let q = q_values(qnet, &features)?;
        let action = select_action(&q, epsilon, &[], 1.0, &features.candidates, rng)?;
        let next = apply_action(&state, &action)?;
        // with no exploration an unchanged state repeats the same choice forever
        if epsilon == 0.0 && next == state {
            break;
        }
        state = next;
    }
    Ok(state.decoded)
}

/// Mean smoothed BLEU of greedy decodes.
pub fn baseline_bleu(stategf: &StateGfParams, pairs: &[Pair], max_length: usize) -> Result<f64> {
    crate::stategf::greedy_corpus_bleu(stategf, pairs, max_length)
}

/// Iterative decodes of every source, in input order. Sentence `i` draws from
/// its own stream so results do not depend on scheduling.
pub fn decode_all(
    qnet: &QNetParams,
    stategf: &StateGfParams,
    sources: &[Vec<TokenId>],
    epsilon: f64,
    config: &DecodeConfig,
    seed: u64,
) -> Result<Vec<Vec<TokenId>>> {
    sources
        .par_iter()
        .enumerate()
        .map(|(i, s)| {
            let mut rng = item_stream(seed, Phase::Eval, i as u64);
            decode_iterative(qnet, stategf, s, epsilon, config, &mut rng)
        })
        .collect()
}

/// Mean smoothed BLEU of iterative decodes.
pub fn dqn_bleu(
    qnet: &QNetParams,
    stategf: &StateGfParams,
    pairs: &[Pair],
    epsilon: f64,
    config: &DecodeConfig,
    seed: u64,
) -> Result<f64> {
    if pairs.is_empty() {
        return invalid("cannot evaluate on an empty set");
    }
    let sources: Vec<Vec<TokenId>> = pairs.iter().map(|(s, _)| s.clone()).collect();
    let outputs = decode_all(qnet, stategf, &sources, epsilon, config, seed)?;
    let bleu = BleuConfig::default();
    let mut total = 0.0;
    for (out, (_, target)) in outputs.iter().zip(pairs) {
        total += smoothed_bleu(out, target, &bleu)?;
    }
    Ok(total / pairs.len() as f64)
}

/// `(ε, mean BLEU)` for each exploration rate.
pub fn epsilon_sweep(
    qnet: &QNetParams,
    stategf: &StateGfParams,
    testset: &[Pair],
    epsilons: &[f64],
    config: &DecodeConfig,
    seed: u64,
) -> Result<Vec<(f64, f64)>> {
    if epsilons.is_empty() {
        return invalid("no epsilon values to sweep");
    }
    epsilons
        .iter()
        .map(|&e| Ok((e, dqn_bleu(qnet, stategf, testset, e, config, seed)?)))
        .collect()
}
