//! Average held-out BLEU of iterative decoding as the test-time exploration
//! rate grows.
//!
//! ```text
//! cargo run --release --example epsilon_sweep -- --epsilons 0,0.05,0.1,0.2,0.5
//! ```

use clap::Parser;
use seqdqn::corpus::{split_dataset, synthesize_corpus, SplitSizes, SynthConfig};
use seqdqn::dqn::{baseline_bleu, epsilon_sweep, train_dqn, DecodeConfig, DqnTrainConfig};
use seqdqn::rng::{stream, Phase};
use seqdqn::stategf::{freeze, pretrain, PretrainConfig, StateGfConfig, StateGfParams};

#[derive(Parser)]
struct Args {
    #[arg(long, default_value_t = 1)]
    seed: u64,
    #[arg(long, value_delimiter = ',', default_value = "0,0.05,0.1,0.2,0.5,1")]
    epsilons: Vec<f64>,
}

fn main() -> seqdqn::Result<()> {
    let args = Args::parse();
    let synth = SynthConfig {
        pairs: 1000,
        ..SynthConfig::default()
    };
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
    println!(
        "greedy baseline {:.4}",
        baseline_bleu(&gf, &splits.unseen_test, decode.max_length)?
    );
    println!("epsilon  avg_bleu");
    for (eps, bleu) in epsilon_sweep(&qnet, &gf, &splits.unseen_test, &args.epsilons, &decode, args.seed)? {
        println!("{eps:<7}  {bleu:.4}");
    }
    Ok(())
}
