#![allow(dead_code)]

use std::sync::atomic::{AtomicBool, Ordering};
use std::time::{Duration, Instant};

use seqdqn::corpus::{split_dataset, synthesize_corpus, DatasetSplits, SplitSizes, SynthConfig};
use seqdqn::rng::{stream, Phase};
use seqdqn::stategf::{pretrain, PretrainConfig, PretrainReport, StateGfConfig, StateGfParams};

/// Set once a criterion has printed its verdict line.
pub static VERDICT_PRINTED: AtomicBool = AtomicBool::new(false);

/// Prints the single verdict line of an acceptance criterion and fails the
/// test when it did not pass.
pub fn verdict(id: u32, name: &str, passed: bool, runtime: Duration, budget: Duration, detail: &str) {
    let in_budget = runtime <= budget;
    let ok = passed && in_budget;
    println!(
        "criterion {id} [{name}]: {} | {detail} | runtime {:.1}s (budget {:.0}s)",
        if ok { "PASS" } else { "FAIL" },
        runtime.as_secs_f64(),
        budget.as_secs_f64()
    );
    VERDICT_PRINTED.store(true, Ordering::SeqCst);
    assert!(passed, "criterion {id} failed: {detail}");
    assert!(in_budget, "criterion {id} exceeded its runtime budget");
}

pub struct Timer(Instant);

impl Timer {
    pub fn start() -> Self {
        Timer(Instant::now())
    }

    pub fn elapsed(&self) -> Duration {
        self.0.elapsed()
    }
}

/// Synthetic copy corpus with vocabulary 50 and lengths 3..=10.
pub fn toy_splits(seed: u64, train: usize, unseen: usize, seen: usize) -> DatasetSplits {
    let synth = SynthConfig {
        pairs: train + unseen + 50,
        ..SynthConfig::default()
    };
    let pairs = synthesize_corpus(&synth, &mut stream(seed, Phase::Corpus)).unwrap();
    let sizes = SplitSizes {
        train,
        validation: 50,
        unseen_test: unseen,
        seen_test: seen,
    };
    split_dataset(&pairs, sizes, &mut stream(seed, Phase::Corpus)).unwrap()
}

/// Encoder-decoder for the toy task: reversed source, no dropout.
pub fn toy_stategf(seed: u64, splits: &DatasetSplits, hidden: usize, epochs: usize) -> (StateGfParams, PretrainReport) {
    let cfg = StateGfConfig {
        vocab_size: SynthConfig::default().vocab_size,
        embed_dim: hidden,
        hidden_dim: hidden,
        init_halfwidth: 0.15,
        reverse_source: true,
    };
    let mut rng = stream(seed, Phase::Pretrain);
    let mut params = StateGfParams::new(&cfg, &mut rng).unwrap();
    let pre = PretrainConfig {
        epochs,
        learning_rate: 0.1,
        dropout: 0.0,
        ..PretrainConfig::default()
    };
    let report = pretrain(&mut params, &splits.train, &pre, &mut rng).unwrap();
    (params, report)
}
