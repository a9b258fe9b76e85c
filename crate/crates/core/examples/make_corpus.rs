//! Generates a Zipf-distributed copy corpus, splits it, and writes the files
//! the command-line tool reads.
//!
//! ```text
//! cargo run --example make_corpus -- --out data/toy --pairs 700
//! ```

use std::fs;
use std::path::PathBuf;

use clap::Parser;
use seqdqn::corpus::{split_dataset, synthesize_corpus, synthetic_vocab, write_corpus, SplitSizes, SynthConfig};
use seqdqn::rng::{stream, Phase};

#[derive(Parser)]
struct Args {
    #[arg(long, default_value = "data/toy")]
    out: PathBuf,
    #[arg(long, default_value_t = 700)]
    pairs: usize,
    #[arg(long, default_value_t = 50)]
    vocab: usize,
    #[arg(long, default_value_t = 1)]
    seed: u64,
}

fn main() -> seqdqn::Result<()> {
    let args = Args::parse();
    let synth = SynthConfig {
        vocab_size: args.vocab,
        pairs: args.pairs,
        ..SynthConfig::default()
    };
    let vocab = synthetic_vocab(&synth);
    let pairs = synthesize_corpus(&synth, &mut stream(args.seed, Phase::Corpus))?;
    let held_out = args.pairs / 5;
    let sizes = SplitSizes {
        train: args.pairs - held_out - 50,
        validation: 50,
        unseen_test: held_out,
        seen_test: held_out,
    };
    let splits = split_dataset(&pairs, sizes, &mut stream(args.seed, Phase::Corpus))?;

    fs::create_dir_all(&args.out)?;
    vocab.save(&args.out.join("vocab.txt"))?;
    fs::write(args.out.join("manifest.txt"), splits.manifest.to_text())?;
    for (name, set) in [
        ("train.txt", &splits.train),
        ("validation.txt", &splits.validation),
        ("seen_test.txt", &splits.seen_test),
        ("unseen_test.txt", &splits.unseen_test),
    ] {
        write_corpus(&args.out.join(name), &vocab, set)?;
        println!("{name:<16} {:>5} sentences", set.len());
    }
    for (source, _) in splits.train.iter().take(3) {
        println!("  {}", vocab.decode_line(source)?);
    }
    Ok(())
}
