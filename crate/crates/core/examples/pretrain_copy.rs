//! Pretrains the encoder-decoder on a synthetic copy corpus and prints the
//! per-epoch cost and greedy-decode training BLEU.
//!
//! ```text
//! cargo run --release --example pretrain_copy -- --epochs 30 --hidden 64 --reverse
//! ```

use clap::Parser;
use seqdqn::corpus::{synthesize_corpus, SynthConfig};
use seqdqn::rng::{stream, Phase};
use seqdqn::stategf::{greedy_decode, pretrain_with, PretrainConfig, StateGfConfig, StateGfParams};

#[derive(Parser)]
struct Args {
    #[arg(long, default_value_t = 30)]
    epochs: usize,
    #[arg(long, default_value_t = 64)]
    hidden: usize,
    #[arg(long, default_value_t = 500)]
    pairs: usize,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    #[arg(long, default_value_t = 0.1)]
    lr: f64,
    #[arg(long, default_value_t = 0.0)]
    dropout: f64,
    /// Feed the source to the encoder back to front.
    #[arg(long)]
    reverse: bool,
}

fn main() -> seqdqn::Result<()> {
    let args = Args::parse();
    let synth = SynthConfig {
        pairs: args.pairs,
        ..SynthConfig::default()
    };
    let corpus = synthesize_corpus(&synth, &mut stream(args.seed, Phase::Corpus))?;
    let model = StateGfConfig {
        vocab_size: synth.vocab_size,
        embed_dim: args.hidden,
        hidden_dim: args.hidden,
        init_halfwidth: 0.15,
        reverse_source: args.reverse,
    };
    let mut rng = stream(args.seed, Phase::Pretrain);
    let mut params = StateGfParams::new(&model, &mut rng)?;
    let config = PretrainConfig {
        epochs: args.epochs,
        learning_rate: args.lr,
        dropout: args.dropout,
        ..PretrainConfig::default()
    };
    println!("epoch  cost        train_bleu");
    let start = std::time::Instant::now();
    pretrain_with(&mut params, &corpus, &config, &mut rng, |e, cost, bleu| {
        println!(
            "{e:>5}  {cost:<10.3}  {bleu:.4}   ({:.1}s)",
            start.elapsed().as_secs_f64()
        );
    })?;

    for (source, _) in corpus.iter().take(3) {
        let out = greedy_decode(&params, source, config.max_length)?.output_tokens();
        println!("{source:?} -> {out:?}");
    }
    Ok(())
}
