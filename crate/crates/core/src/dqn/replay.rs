//! Bounded FIFO experience replay.

use std::collections::VecDeque;

use rand::Rng;

use super::policy::ActionChoice;
use super::qnet::DqnState;
use crate::error::{Error, Result};
use crate::TokenId;

/// One stored step of experience.
///
/// `target` is the reference sentence the episode was scored against, kept so
/// that `reward` and `next_bleu` can be re-derived from the stored states.
#[derive(Clone, Debug, PartialEq)]
pub struct Transition {
    pub state: DqnState,
    pub action: ActionChoice,
    pub reward: i8,
    pub next_state: DqnState,
    pub next_bleu: f64,
    pub terminal: bool,
    pub target: Vec<TokenId>,
}

#[derive(Clone, Debug)]
pub struct ReplayMemory {
    buffer: VecDeque<Transition>,
    capacity: usize,
}

impl ReplayMemory {
    pub fn new(capacity: usize) -> Result<Self> {
        if capacity == 0 {
            return Err(Error::InvalidArgument("replay capacity must be positive".into()));
        }
        Ok(ReplayMemory {
            buffer: VecDeque::with_capacity(capacity.min(1 << 16)),
            capacity,
        })
    }

    pub fn capacity(&self) -> usize {
        self.capacity
    }

    pub fn len(&self) -> usize {
        self.buffer.len()
    }

    pub fn is_empty(&self) -> bool {
        self.buffer.is_empty()
    }

    /// Appends, evicting the oldest transition when full.
    pub fn store(&mut self, transition: Transition) {
        if self.buffer.len() == self.capacity {
            self.buffer.pop_front();
        }
        self.buffer.push_back(transition);
    }

    /// Uniform draw over the current contents.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Result<&Transition> {
        if self.buffer.is_empty() {
            return Err(Error::InvalidState("replay memory is empty".into()));
        }
        Ok(&self.buffer[rng.gen_range(0..self.buffer.len())])
    }

    /// Oldest first.
    pub fn iter(&self) -> impl Iterator<Item = &Transition> {
        self.buffer.iter()
    }
}
