//! Iterative sequence decoding with a Deep Q-Network.
//!
//! A pretrained encoder-decoder LSTM (the state generation function, see
//! [`stategf`]) produces an initial greedy decode together with per-step
//! word-probability lists. A bidirectional-LSTM Q-network ([`dqn`]) then edits
//! that decode one token at a time, trained with experience replay and
//! epsilon-greedy exploration against a smoothed-BLEU reward ([`metric`]).
//!
//! The crate is organized bottom-up:
//!
//! - [`nn`]: LSTM / bidirectional LSTM kernels with hand-written
//!   backpropagation through time, softmax, AdaGrad, gradient clipping,
//!   dropout, finite-difference checking and the checkpoint container.
//! - [`stategf`]: encoder, decoder, greedy decoding and supervised pretraining.
//! - [`metric`]: sentence-level smoothed BLEU and reward shaping.
//! - [`dqn`]: Q-network, replay memory, exploration, training and decoding.
//! - [`corpus`]: vocabulary, synthetic corpora, splits and file formats.
//! - [`config`] and [`cli`]: the run configuration and the command layer used
//!   by the `seqdqn` binary.

// `!(x > 0.0)` also rejects NaN
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod config;
pub mod corpus;
pub mod dqn;
mod error;
pub mod metric;
pub mod nn;
pub mod rng;
pub mod stategf;

pub use error::{Error, Result};

/// Index into a [`corpus::Vocab`].
pub type TokenId = u32;
