//! Scores tokenized sentences with smoothed sentence BLEU and shows the
//! reward an edit would earn.
//!
//! ```text
//! cargo run --example smoothed_bleu -- "the cat sat on the mat" "the cat sat on a mat"
//! ```

use clap::Parser;
use seqdqn::corpus::{tokenize, Vocab};
use seqdqn::metric::{reward_from_bleu, smoothed_bleu, BleuConfig, RewardConfig};

#[derive(Parser)]
struct Args {
    reference: String,
    candidates: Vec<String>,
    /// Disable add-one smoothing of orders 2 and up.
    #[arg(long)]
    no_smoothing: bool,
}

fn main() -> seqdqn::Result<()> {
    let args = Args::parse();
    let mut words: Vec<&str> = tokenize(&args.reference);
    for c in &args.candidates {
        words.extend(tokenize(c));
    }
    words.sort_unstable();
    words.dedup();
    let vocab = Vocab::from_tokens(words)?;
    let config = BleuConfig {
        smoothing: !args.no_smoothing,
        ..BleuConfig::default()
    };

    let reference = vocab.encode_line(&args.reference);
    let mut previous = None;
    for c in &args.candidates {
        let score = smoothed_bleu(&vocab.encode_line(c), &reference, &config)?;
        match previous {
            Some(p) => {
                let r = reward_from_bleu(p, score, &RewardConfig::default())?;
                println!("{score:.4}  reward {r:+}  {c}");
            }
            None => println!("{score:.4}            {c}"),
        }
        previous = Some(score);
    }
    Ok(())
}
