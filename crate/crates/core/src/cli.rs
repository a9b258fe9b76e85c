//! Command layer behind the `seqdqn` binary.
//!
//! Every command reads a [`RunConfig`], draws randomness from the run seed's
//! named streams and writes its artifacts into `out_dir`:
//!
//! | command         | writes                                                     |
//! |-----------------|------------------------------------------------------------|
//! | `pretrain`      | `stategf.ckpt`, `pretrain.csv`, `vocab.txt` (+ synthetic corpus files) |
//! | `train-dqn`     | `qnet.ckpt`, `dqn_train.csv`                               |
//! | `decode`        | `--output` file (or stdout)                                |
//! | `eval`          | `eval.csv`                                                 |
//! | `sweep-epsilon` | `sweep.csv`                                                |

use std::ffi::OsString;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};

use crate::config::{parse_override, RunConfig, Split};
use crate::corpus::{
    build_vocab, load_corpus, read_tokenized, split_dataset, synthesize_corpus, synthetic_vocab, write_corpus, Pair,
    Vocab,
};
use crate::dqn::{baseline_bleu, decode_all, dqn_bleu, epsilon_sweep, train_dqn_with, EpochLog, QNetParams};
use crate::error::{Error, Result};
use crate::nn::checkpoint::Checkpoint;
use crate::rng::{stream, Phase};
use crate::stategf::{freeze, greedy_decode, pretrain_with, FrozenStateGf, StateGfParams};
use crate::TokenId;

#[derive(Debug, Parser)]
#[command(
    name = "seqdqn",
    version,
    about = "Iterative sequence decoding with a Deep Q-Network"
)]
pub struct Cli {
    /// TOML run configuration.
    #[arg(long, global = true, value_name = "PATH")]
    pub config: Option<PathBuf>,
    /// Overrides the config's seed.
    #[arg(long, global = true, value_name = "N")]
    pub seed: Option<u64>,
    /// Overrides the config's output directory.
    #[arg(long, global = true, value_name = "DIR")]
    pub out: Option<PathBuf>,
    /// Overrides any config key, e.g. `--set hidden_dim=32`. Repeatable.
    #[arg(long = "set", global = true, value_name = "KEY=VALUE")]
    pub overrides: Vec<String>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Pretrain the encoder-decoder (synthesizing a corpus if none is configured).
    Pretrain,
    /// Train the Q-network against the frozen pretrained model.
    TrainDqn,
    /// Decode one sentence per input line.
    Decode {
        #[arg(long, value_name = "PATH")]
        input: PathBuf,
        /// Defaults to stdout.
        #[arg(long, value_name = "PATH")]
        output: Option<PathBuf>,
        #[arg(long, value_enum, default_value_t = DecodeMode::Dqn)]
        mode: DecodeMode,
    },
    /// Baseline vs DQN smoothed BLEU on the seen and unseen test sets.
    Eval,
    /// Test-time exploration sweep.
    SweepEpsilon {
        /// Comma-separated list; defaults to the config's `sweep_epsilons`.
        #[arg(long, value_delimiter = ',')]
        epsilons: Option<Vec<f64>>,
        #[arg(long, value_enum, default_value_t = TestSplit::Unseen)]
        split: TestSplit,
    },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum DecodeMode {
    Baseline,
    Dqn,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum TestSplit {
    Seen,
    Unseen,
}

/// Parses `args` (program name first), runs the command and returns the
/// process exit code: 0 success, 1 usage or configuration error, 2 runtime
/// error.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match run(&cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}

pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::Config(_) => 1,
        _ => 2,
    }
}

/// Resolves the configuration from the file and flags.
pub fn resolve_config(cli: &Cli) -> Result<RunConfig> {
    let mut overrides = cli
        .overrides
        .iter()
        .map(|raw| parse_override(raw))
        .collect::<Result<Vec<_>>>()?;
    if let Some(seed) = cli.seed {
        overrides.push(("seed".into(), seed.to_string()));
    }
    if let Some(out) = &cli.out {
        overrides.push(("out_dir".into(), format!("{:?}", out.display().to_string())));
    }
    RunConfig::load(cli.config.as_deref(), &overrides)
}

pub fn run(cli: &Cli) -> Result<()> {
    let config = resolve_config(cli)?;
    match &cli.command {
        Command::Pretrain => cmd_pretrain(&config),
        Command::TrainDqn => cmd_train_dqn(&config),
        Command::Decode { input, output, mode } => cmd_decode(&config, input, output.as_deref(), *mode),
        Command::Eval => cmd_eval(&config),
        Command::SweepEpsilon { epsilons, split } => {
            let eps = epsilons.clone().unwrap_or_else(|| config.sweep_epsilons.clone());
            cmd_sweep_epsilon(&config, &eps, *split)
        }
    }
}

fn require_file(path: &Path, what: &str) -> Result<()> {
    if path.is_file() {
        Ok(())
    } else {
        Err(Error::Io(std::io::Error::new(
            std::io::ErrorKind::NotFound,
            format!("{what} {} not found", path.display()),
        )))
    }
}

/// Writes through a sibling temporary file so readers never see a partial file.
fn write_atomic(path: &Path, contents: &str) -> Result<()> {
    let tmp = path.with_extension("tmp");
    fs::write(&tmp, contents)?;
    fs::rename(&tmp, path)?;
    Ok(())
}

/// Training data and vocabulary for `pretrain`: either the configured corpus
/// files, or a synthetic corpus written into `out_dir`.
fn prepare_training_data(config: &RunConfig) -> Result<(Vocab, Vec<Pair>)> {
    if let Some(train) = &config.train_corpus {
        require_file(train, "training corpus")?;
        let vocab = match &config.vocab_path {
            Some(p) => {
                require_file(p, "vocabulary")?;
                Vocab::load(p)?
            }
            None => build_vocab(&read_tokenized(train)?, config.max_vocab)?,
        };
        let pairs = load_corpus(train, &vocab, config.max_length)?;
        fs::create_dir_all(&config.out_dir)?;
        if config.vocab_path.is_none() {
            vocab.save(&config.out_dir.join("vocab.txt"))?;
        }
        return Ok((vocab, pairs));
    }
    let synth = config.synth_config();
    let mut rng = stream(config.seed, Phase::Corpus);
    let pairs = synthesize_corpus(&synth, &mut rng)?;
    let splits = split_dataset(&pairs, config.split_sizes(), &mut rng)?;
    let vocab = synthetic_vocab(&synth);
    let out = &config.out_dir;
    fs::create_dir_all(out)?;
    write_corpus(&out.join("corpus.txt"), &vocab, &pairs)?;
    write_atomic(&out.join("manifest.txt"), &splits.manifest.to_text())?;
    write_corpus(&out.join("train.txt"), &vocab, &splits.train)?;
    write_corpus(&out.join("validation.txt"), &vocab, &splits.validation)?;
    write_corpus(&out.join("seen_test.txt"), &vocab, &splits.seen_test)?;
    write_corpus(&out.join("unseen_test.txt"), &vocab, &splits.unseen_test)?;
    vocab.save(&out.join("vocab.txt"))?;
    Ok((vocab, splits.train))
}

pub fn cmd_pretrain(config: &RunConfig) -> Result<()> {
    let (vocab, train) = prepare_training_data(config)?;
    let mut rng = stream(config.seed, Phase::Pretrain);
    let mut params = StateGfParams::new(&config.stategf_config(vocab.len()), &mut rng)?;
    let mut csv = String::from("epoch,cost,train_bleu\n");
    pretrain_with(
        &mut params,
        &train,
        &config.pretrain_config(),
        &mut rng,
        |e, cost, bleu| {
            let _ = writeln!(csv, "{e},{cost},{bleu}");
        },
    )?;
    write_atomic(&config.out_dir.join("pretrain.csv"), &csv)?;
    let path = config.stategf_path();
    if let Some(dir) = path.parent() {
        fs::create_dir_all(dir)?;
    }
    params.to_checkpoint().save(&path)
}

/// Vocabulary and frozen model, refusing a checkpoint whose embedding table
/// does not match the vocabulary.
pub fn load_stategf(config: &RunConfig) -> Result<(Vocab, FrozenStateGf)> {
    let vocab_path = config.vocab_file();
    let ck_path = config.stategf_path();
    require_file(&vocab_path, "vocabulary")?;
    require_file(&ck_path, "state generation checkpoint")?;
    let vocab = Vocab::load(&vocab_path)?;
    let params = StateGfParams::from_checkpoint(&Checkpoint::load(&ck_path)?)?;
    if params.vocab_size() != vocab.len() {
        return Err(Error::Config(format!(
            "checkpoint {} has {} embedding rows but vocabulary {} has {} entries",
            ck_path.display(),
            params.vocab_size(),
            vocab_path.display(),
            vocab.len()
        )));
    }
    Ok((vocab, freeze(params)))
}

pub fn load_qnet(config: &RunConfig, stategf: &StateGfParams) -> Result<QNetParams> {
    let path = config.qnet_path();
    require_file(&path, "Q-network checkpoint")?;
    let q = QNetParams::from_checkpoint(&Checkpoint::load(&path)?)?;
    if q.hidden_dim() != stategf.hidden_dim() {
        return Err(Error::Config(format!(
            "Q-network hidden size {} does not match the state generation function's {}",
            q.hidden_dim(),
            stategf.hidden_dim()
        )));
    }
    Ok(q)
}

fn load_split(config: &RunConfig, vocab: &Vocab, split: Split) -> Result<Vec<Pair>> {
    let path = config.corpus_file(split);
    require_file(&path, "corpus")?;
    load_corpus(&path, vocab, config.max_length)
}

pub fn dqn_log_csv(log: &[EpochLog]) -> String {
    let mut csv = String::from("epoch,mean_reward,mean_bleu,epsilon\n");
    for e in log {
        let _ = writeln!(csv, "{},{},{},{}", e.epoch, e.mean_reward, e.mean_bleu, e.epsilon);
    }
    csv
}

pub fn cmd_train_dqn(config: &RunConfig) -> Result<()> {
    let (vocab, gf) = load_stategf(config)?;
    let train = load_split(config, &vocab, Split::Train)?;
    let mut rng = stream(config.seed, Phase::Dqn);
    let out = train_dqn_with(&gf, &train, &config.dqn_config(), &mut rng, |_| {})?;
    if out.skipped_episodes > 0 {
        log::warn!("{} episodes skipped: empty greedy decode", out.skipped_episodes);
    }
    fs::create_dir_all(&config.out_dir)?;
    write_atomic(&config.out_dir.join("dqn_train.csv"), &dqn_log_csv(&out.log))?;
    out.qnet.to_checkpoint().save(&config.qnet_path())
}

pub fn cmd_decode(config: &RunConfig, input: &Path, output: Option<&Path>, mode: DecodeMode) -> Result<()> {
    require_file(input, "input")?;
    let (vocab, gf) = load_stategf(config)?;
    let qnet = match mode {
        DecodeMode::Dqn => Some(load_qnet(config, &gf)?),
        DecodeMode::Baseline => None,
    };
    let text = fs::read_to_string(input)?;
    let mut sources: Vec<Vec<TokenId>> = Vec::new();
    for (n, line) in text.lines().enumerate() {
        let ids = vocab.encode_line(line);
        if ids.is_empty() {
            log::warn!("{}:{}: empty line skipped", input.display(), n + 1);
            continue;
        }
        sources.push(ids);
    }
    let decoded: Vec<Vec<TokenId>> = match &qnet {
        Some(q) => decode_all(q, &gf, &sources, 0.0, &config.decode_config(), config.seed)?,
        None => sources
            .iter()
            .map(|s| Ok(greedy_decode(&gf, s, config.max_length)?.output_tokens()))
            .collect::<Result<_>>()?,
    };
    let mut out = String::new();
    for ids in &decoded {
        out.push_str(&vocab.decode_line(ids)?);
        out.push('\n');
    }
    match output {
        Some(p) => write_atomic(p, &out),
        None => {
            print!("{out}");
            Ok(())
        }
    }
}

pub fn cmd_eval(config: &RunConfig) -> Result<()> {
    let (vocab, gf) = load_stategf(config)?;
    let qnet = load_qnet(config, &gf)?;
    let dc = config.decode_config();
    let mut csv = String::from("split,lstm_decoder,dqn\n");
    for (name, split) in [("seen", Split::SeenTest), ("unseen", Split::UnseenTest)] {
        let pairs = load_split(config, &vocab, split)?;
        let base = baseline_bleu(&gf, &pairs, config.max_length)?;
        let dqn = dqn_bleu(&qnet, &gf, &pairs, 0.0, &dc, config.seed)?;
        let _ = writeln!(csv, "{name},{base},{dqn}");
    }
    fs::create_dir_all(&config.out_dir)?;
    write_atomic(&config.out_dir.join("eval.csv"), &csv)
}

pub fn cmd_sweep_epsilon(config: &RunConfig, epsilons: &[f64], split: TestSplit) -> Result<()> {
    if epsilons.is_empty() {
        return Err(Error::Config("empty epsilon list".into()));
    }
    if epsilons.iter().any(|e| !(0.0..=1.0).contains(e)) {
        return Err(Error::Config("epsilons must lie in [0, 1]".into()));
    }
    let (vocab, gf) = load_stategf(config)?;
    let qnet = load_qnet(config, &gf)?;
    let split = match split {
        TestSplit::Seen => Split::SeenTest,
        TestSplit::Unseen => Split::UnseenTest,
    };
    let pairs = load_split(config, &vocab, split)?;
    let rows = epsilon_sweep(&qnet, &gf, &pairs, epsilons, &config.decode_config(), config.seed)?;
    let mut csv = String::from("epsilon,avg_bleu\n");
    for (e, b) in rows {
        let _ = writeln!(csv, "{e},{b}");
    }
    fs::create_dir_all(&config.out_dir)?;
    write_atomic(&config.out_dir.join("sweep.csv"), &csv)
}
