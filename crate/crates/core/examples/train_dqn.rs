//! Full toy pipeline: synthetic copy corpus, a deliberately under-trained
//! encoder-decoder, Q-network training, and held-out evaluation.
//!
//! ```text
//! cargo run --release --example train_dqn -- --seed 2
//! ```

use clap::Parser;
use seqdqn::corpus::{split_dataset, synthesize_corpus, SplitSizes, SynthConfig};
use seqdqn::dqn::{baseline_bleu, dqn_bleu, train_dqn_with, DecodeConfig, DqnTrainConfig};
use seqdqn::rng::{stream, Phase};
use seqdqn::stategf::{freeze, pretrain, PretrainConfig, StateGfConfig, StateGfParams};

#[derive(Parser)]
struct Args {
    #[arg(long, default_value_t = 1)]
    seed: u64,
    #[arg(long, default_value_t = 2000)]
    train_pairs: usize,
    /// Few epochs leave errors for the Q-network to fix.
    #[arg(long, default_value_t = 12)]
    pretrain_epochs: usize,
    #[arg(long, default_value_t = 3)]
    dqn_epochs: usize,
    #[arg(long, default_value_t = 32)]
    hidden: usize,
    #[arg(long, default_value_t = 0.5)]
    discount: f64,
    #[arg(long, default_value_t = 20_000)]
    anneal_steps: usize,
}

fn main() -> seqdqn::Result<()> {
    let args = Args::parse();
    let synth = SynthConfig {
        pairs: args.train_pairs + 200,
        ..SynthConfig::default()
    };
    let pairs = synthesize_corpus(&synth, &mut stream(args.seed, Phase::Corpus))?;
    let sizes = SplitSizes {
        train: args.train_pairs,
        validation: 50,
        unseen_test: 150,
        seen_test: 150,
    };
    let splits = split_dataset(&pairs, sizes, &mut stream(args.seed, Phase::Corpus))?;

    let model = StateGfConfig {
        vocab_size: synth.vocab_size,
        embed_dim: args.hidden,
        hidden_dim: args.hidden,
        init_halfwidth: 0.15,
        reverse_source: true,
    };
    let mut rng = stream(args.seed, Phase::Pretrain);
    let mut params = StateGfParams::new(&model, &mut rng)?;
    let pre = PretrainConfig {
        epochs: args.pretrain_epochs,
        learning_rate: 0.1,
        dropout: 0.0,
        ..PretrainConfig::default()
    };
    let report = pretrain(&mut params, &splits.train, &pre, &mut rng)?;
    println!(
        "pretrained, train BLEU {:.4}",
        report.per_epoch_train_bleu.last().unwrap()
    );
    let gf = freeze(params);

    let config = DqnTrainConfig {
        epochs: args.dqn_epochs,
        discount: args.discount,
        epsilon_anneal_steps: args.anneal_steps,
        ..DqnTrainConfig::default()
    };
    let start = std::time::Instant::now();
    println!("epoch  mean_reward  mean_bleu  epsilon");
    let out = train_dqn_with(&gf, &splits.train, &config, &mut stream(args.seed, Phase::Dqn), |e| {
        println!(
            "{:>5}  {:>11.4}  {:>9.4}  {:.3}   ({:.0}s)",
            e.epoch,
            e.mean_reward,
            e.mean_bleu,
            e.epsilon,
            start.elapsed().as_secs_f64()
        );
    })?;

    let dc = DecodeConfig::from(&config);
    for (name, set) in [("seen", &splits.seen_test), ("unseen", &splits.unseen_test)] {
        let base = baseline_bleu(&gf, set, dc.max_length)?;
        let dqn = dqn_bleu(&out.qnet, &gf, set, 0.0, &dc, args.seed)?;
        println!("{name:<7} baseline {base:.4}  dqn {dqn:.4}");
    }
    Ok(())
}
