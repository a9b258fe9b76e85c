//! Seeded random streams.
//!
//! Every phase of a run draws from its own ChaCha stream derived from the run
//! seed, so changing how many numbers one phase consumes never shifts the
//! draws of another.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type Rng = ChaCha8Rng;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Phase {
    Corpus,
    Pretrain,
    Dqn,
    Eval,
}

impl Phase {
    fn id(self) -> u64 {
        match self {
            Phase::Corpus => 1,
            Phase::Pretrain => 2,
            Phase::Dqn => 3,
            Phase::Eval => 4,
        }
    }
}

/// Random source for one phase of a run.
pub fn stream(seed: u64, phase: Phase) -> Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(phase.id() << 32);
    rng
}

/// Random source for item `index` of a phase (e.g. one test sentence), so that
/// per-item draws do not depend on evaluation order.
pub fn item_stream(seed: u64, phase: Phase, index: u64) -> Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream((phase.id() << 32) | (index & 0x7fff_ffff) | (1 << 31));
    rng
}
