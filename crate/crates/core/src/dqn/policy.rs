//! Actions, error-biased ε-greedy selection and state edits.

use rand::distributions::{Distribution, WeightedIndex};
use rand::Rng;

use super::qnet::DqnState;
use crate::error::{invalid, Result};
use crate::TokenId;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum ActionChoice {
    Replace { position: usize, new_token: TokenId },
    NoModification,
}

impl ActionChoice {
    /// Index into a `T + 1` Q-value vector.
    pub fn index(&self, decoded_len: usize) -> usize {
        match *self {
            ActionChoice::Replace { position, .. } => position,
            ActionChoice::NoModification => decoded_len,
        }
    }
}

/// Positions `t < decoded.len()` that disagree with the target, counting any
/// overhang past the target's end.
pub fn compute_error_positions(decoded: &[TokenId], target: &[TokenId]) -> Vec<usize> {
    (0..decoded.len())
        .filter(|&t| t >= target.len() || decoded[t] != target[t])
        .collect()
}

/// Picks an index into `q_values`.
///
/// With probability `1 − ε` the greedy action (lowest index on ties). With
/// probability `ε` a random action where indices in `error_positions` have
/// weight `error_bias_weight` and every other action, no-op included, has
/// weight 1.
pub fn select_action_index<R: Rng + ?Sized>(
    q_values: &[f64],
    epsilon: f64,
    error_positions: &[usize],
    error_bias_weight: f64,
    rng: &mut R,
) -> Result<usize> {
    if q_values.is_empty() {
        return invalid("no actions to choose from");
    }
    if !(0.0..=1.0).contains(&epsilon) {
        return invalid(format!("epsilon {epsilon} outside [0, 1]"));
    }
    if !(error_bias_weight > 0.0 && error_bias_weight.is_finite()) {
        return invalid("error bias weight must be positive");
    }
    let explore = rng.gen::<f64>() < epsilon;
    if explore {
        let noop = q_values.len() - 1;
        let mut weights = vec![1.0; q_values.len()];
        for &t in error_positions {
            if t < noop {
                weights[t] = error_bias_weight;
            }
        }
        let dist = WeightedIndex::new(&weights).expect("weights are positive");
        return Ok(dist.sample(rng));
    }
    let mut best = 0;
    for (i, &q) in q_values.iter().enumerate() {
        if q.is_nan() {
            return invalid("Q-value is NaN");
        }
        if q > q_values[best] {
            best = i;
        }
    }
    Ok(best)
}

/// [`select_action_index`] mapped onto an action; replace actions write the
/// position's entry of `candidates`.
pub fn select_action<R: Rng + ?Sized>(
    q_values: &[f64],
    epsilon: f64,
    error_positions: &[usize],
    error_bias_weight: f64,
    candidates: &[TokenId],
    rng: &mut R,
) -> Result<ActionChoice> {
    if q_values.len() != candidates.len() + 1 {
        return invalid("need one Q-value per position plus no-op");
    }
    let i = select_action_index(q_values, epsilon, error_positions, error_bias_weight, rng)?;
    Ok(if i < candidates.len() {
        ActionChoice::Replace {
            position: i,
            new_token: candidates[i],
        }
    } else {
        ActionChoice::NoModification
    })
}

/// Next state after `action`; the source never changes.
pub fn apply_action(state: &DqnState, action: &ActionChoice) -> Result<DqnState> {
    let mut next = state.clone();
    if let ActionChoice::Replace { position, new_token } = *action {
        if position >= next.decoded.len() {
            return invalid(format!(
                "replace position {position} outside decoded length {}",
                next.decoded.len()
            ));
        }
        next.decoded[position] = new_token;
    }
    Ok(next)
}
