//! Trains a small model, then shows held-out sentences the Q-network edited
//! next to their greedy decodes.
//!
//! ```text
//! cargo run --release --example iterative_decode -- --show 10
//! ```

use clap::Parser;
use seqdqn::corpus::{split_dataset, synthesize_corpus, synthetic_vocab, SplitSizes, SynthConfig};
use seqdqn::dqn::{decode_iterative, train_dqn, DecodeConfig, DqnTrainConfig};
use seqdqn::metric::{smoothed_bleu, BleuConfig};
use seqdqn::rng::{item_stream, stream, Phase};
use seqdqn::stategf::{freeze, greedy_decode, pretrain, PretrainConfig, StateGfConfig, StateGfParams};

#[derive(Parser)]
struct Args {
    #[arg(long, default_value_t = 2)]
    seed: u64,
    #[arg(long, default_value_t = 10)]
    show: usize,
    #[arg(long, default_value_t = 0.0)]
    epsilon: f64,
}

fn main() -> seqdqn::Result<()> {
    let args = Args::parse();
    let synth = SynthConfig {
        pairs: 1000,
        ..SynthConfig::default()
    };
    let vocab = synthetic_vocab(&synth);
    let pairs = synthesize_corpus(&synth, &mut stream(args.seed, Phase::Corpus))?;
    let sizes = SplitSizes {
        train: 800,
        validation: 50,
        unseen_test: 150,
        seen_test: 0,
    };
    let splits = split_dataset(&pairs, sizes, &mut stream(args.seed, Phase::Corpus))?;

    let model = StateGfConfig {
        vocab_size: synth.vocab_size,
        embed_dim: 32,
        hidden_dim: 32,
        init_halfwidth: 0.15,
        reverse_source: true,
    };
    let mut rng = stream(args.seed, Phase::Pretrain);
    let mut params = StateGfParams::new(&model, &mut rng)?;
    let pre = PretrainConfig {
        epochs: 12,
        learning_rate: 0.1,
        dropout: 0.0,
        ..PretrainConfig::default()
    };
    pretrain(&mut params, &splits.train, &pre, &mut rng)?;
    let gf = freeze(params);
    let config = DqnTrainConfig {
        epochs: 2,
        discount: 0.5,
        epsilon_anneal_steps: 10_000,
        ..DqnTrainConfig::default()
    };
    let qnet = train_dqn(&gf, &splits.train, &config, &mut stream(args.seed, Phase::Dqn))?.qnet;

    let decode = DecodeConfig::from(&config);
    let bleu = BleuConfig::default();
    let (mut better, mut worse, mut shown) = (0, 0, 0);
    for (i, (source, target)) in splits.unseen_test.iter().enumerate() {
        let greedy = greedy_decode(&gf, source, decode.max_length)?.output_tokens();
        let mut rng = item_stream(args.seed, Phase::Eval, i as u64);
        let edited = decode_iterative(&qnet, &gf, source, args.epsilon, &decode, &mut rng)?;
        if edited == greedy {
            continue;
        }
        let (before, after) = (
            smoothed_bleu(&greedy, target, &bleu)?,
            smoothed_bleu(&edited, target, &bleu)?,
        );
        if after > before {
            better += 1;
        } else if after < before {
            worse += 1;
        }
        if shown < args.show {
            shown += 1;
            println!("target  {}", vocab.decode_line(target)?);
            println!("greedy  {}  ({before:.3})", vocab.decode_line(&greedy)?);
            println!("edited  {}  ({after:.3})\n", vocab.decode_line(&edited)?);
        }
    }
    println!(
        "{} held-out sentences: {better} improved, {worse} got worse, the rest unchanged in score",
        splits.unseen_test.len()
    );
    Ok(())
}
