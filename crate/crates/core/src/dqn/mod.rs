//! Deep Q-Network that edits a greedy decode one token at a time.
//!
//! The state is the sentence pair (source, current decode). The frozen state
//! generation function re-reads the current decode with teacher forcing; each
//! position's decoder hidden vector, the probability of the token currently
//! there and the probability of its best alternative feed a bidirectional
//! LSTM. A shared linear head scores replacing each position with that
//! alternative and a second head on the mean of the bidirectional outputs
//! scores leaving the sentence unchanged.

mod decode;
mod policy;
mod qnet;
mod replay;
mod train;

pub use decode::{baseline_bleu, decode_all, decode_iterative, dqn_bleu, epsilon_sweep, DecodeConfig};
pub use policy::{apply_action, compute_error_positions, select_action, select_action_index, ActionChoice};
pub use qnet::{
    q_forward, q_loss_and_gradient, q_values, replacement_candidate, state_features, DqnState, LinearHead, QNetParams,
    StateFeatures, CHECKPOINT_KIND, EXTRA_FEATURES,
};
pub use replay::{ReplayMemory, Transition};
pub use train::{compute_target, dqn_gradient_step, train_dqn, train_dqn_with, DqnTrainConfig, EpochLog, TrainOutput};
