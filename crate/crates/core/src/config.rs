//! Run configuration: a flat TOML file plus `key=value` overrides.
//!
//! Precedence is override > file > built-in default. Unknown keys are
//! rejected, and every value is range-checked before any command touches the
//! file system.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::corpus::{SplitSizes, SynthConfig, NUM_SPECIALS};
use crate::dqn::{DecodeConfig, DqnTrainConfig};
use crate::error::{Error, Result};
use crate::stategf::{PretrainConfig, StateGfConfig};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub seed: u64,
    pub out_dir: PathBuf,

    // corpus files; when `train_corpus` is unset, `pretrain` synthesizes one
    pub train_corpus: Option<PathBuf>,
    pub validation_corpus: Option<PathBuf>,
    pub seen_test_corpus: Option<PathBuf>,
    pub unseen_test_corpus: Option<PathBuf>,
    pub vocab_path: Option<PathBuf>,
    pub stategf_checkpoint: Option<PathBuf>,
    pub qnet_checkpoint: Option<PathBuf>,

    pub synth_vocab_size: usize,
    pub synth_min_len: usize,
    pub synth_max_len: usize,
    pub synth_pairs: usize,
    pub synth_zipf_exponent: f64,
    pub split_train: usize,
    pub split_validation: usize,
    pub split_unseen_test: usize,
    pub split_seen_test: usize,

    pub max_vocab: usize,
    pub max_length: usize,
    pub hidden_dim: usize,
    pub embed_dim: usize,
    pub init_halfwidth: f64,
    pub reverse_source: bool,

    pub pretrain_epochs: usize,
    pub learning_rate: f64,
    pub clip_threshold: f64,
    pub weight_decay: f64,
    pub stabilizer: f64,
    pub dropout: f64,

    pub dqn_epochs: usize,
    pub dqn_learning_rate: f64,
    pub discount: f64,
    pub bleu_threshold: f64,
    pub epsilon_start: f64,
    pub epsilon_final: f64,
    pub epsilon_anneal_steps: usize,
    pub error_bias_weight: f64,
    pub target_sync_period: usize,
    pub episode_length_multiplier: usize,
    pub replay_capacity: usize,
    pub batch_size: usize,

    pub sweep_epsilons: Vec<f64>,
}

impl Default for RunConfig {
    fn default() -> Self {
        let synth = SynthConfig::default();
        let pre = PretrainConfig::default();
        let dqn = DqnTrainConfig::default();
        RunConfig {
            seed: 1,
            out_dir: PathBuf::from("runs/default"),
            train_corpus: None,
            validation_corpus: None,
            seen_test_corpus: None,
            unseen_test_corpus: None,
            vocab_path: None,
            stategf_checkpoint: None,
            qnet_checkpoint: None,
            synth_vocab_size: synth.vocab_size,
            synth_min_len: synth.min_len,
            synth_max_len: synth.max_len,
            synth_pairs: 700,
            synth_zipf_exponent: synth.zipf_exponent,
            split_train: 500,
            split_validation: 50,
            split_unseen_test: 150,
            split_seen_test: 150,
            max_vocab: 10_000,
            max_length: 30,
            hidden_dim: 100,
            embed_dim: 100,
            init_halfwidth: 0.15,
            reverse_source: false,
            pretrain_epochs: pre.epochs,
            learning_rate: pre.learning_rate,
            clip_threshold: pre.clip_threshold,
            weight_decay: pre.weight_decay,
            stabilizer: pre.stabilizer,
            dropout: pre.dropout,
            dqn_epochs: dqn.epochs,
            dqn_learning_rate: dqn.learning_rate,
            discount: dqn.discount,
            bleu_threshold: dqn.bleu_threshold,
            epsilon_start: dqn.epsilon_start,
            epsilon_final: dqn.epsilon_final,
            epsilon_anneal_steps: dqn.epsilon_anneal_steps,
            error_bias_weight: dqn.error_bias_weight,
            target_sync_period: dqn.target_sync_period,
            episode_length_multiplier: dqn.episode_length_multiplier,
            replay_capacity: dqn.replay_capacity,
            batch_size: dqn.batch_size,
            sweep_epsilons: vec![0.0, 0.05, 0.1, 0.2, 0.5],
        }
    }
}

fn config_err<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Config(msg.into()))
}

/// Splits `key=value`.
pub fn parse_override(raw: &str) -> Result<(String, String)> {
    match raw.split_once('=') {
        Some((k, v)) if !k.trim().is_empty() => Ok((k.trim().to_string(), v.trim().to_string())),
        _ => config_err(format!("override {raw:?} is not of the form key=value")),
    }
}

/// Interprets an override value as a TOML literal, falling back to a bare
/// string (so paths need no quoting).
fn override_value(raw: &str, current: Option<&toml::Value>) -> toml::Value {
    let parsed = toml::from_str::<toml::Table>(&format!("v = {raw}"))
        .ok()
        .and_then(|mut t| t.remove("v"));
    match (parsed, current) {
        (Some(toml::Value::Integer(i)), Some(toml::Value::Float(_))) => toml::Value::Float(i as f64),
        (Some(toml::Value::Array(a)), _) => toml::Value::Array(
            a.into_iter()
                .map(|v| match v {
                    toml::Value::Integer(i) => toml::Value::Float(i as f64),
                    other => other,
                })
                .collect(),
        ),
        (Some(v), _) => v,
        (None, _) => toml::Value::String(raw.to_string()),
    }
}

impl RunConfig {
    pub fn from_toml_str(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn to_toml_string(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    /// Defaults, then `path` (if any), then `overrides` in order; validated.
    pub fn load(path: Option<&Path>, overrides: &[(String, String)]) -> Result<Self> {
        let mut config = match path {
            Some(p) => {
                let text = std::fs::read_to_string(p)
                    .map_err(|e| Error::Config(format!("cannot read config {}: {e}", p.display())))?;
                RunConfig::from_toml_str(&text)?
            }
            None => RunConfig::default(),
        };
        for (k, v) in overrides {
            config.set(k, v)?;
        }
        config.validate()?;
        Ok(config)
    }

    /// Sets one key from its textual value.
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        let mut table = toml::Table::try_from(&*self).map_err(|e| Error::Config(e.to_string()))?;
        let known = RunConfig::keys();
        if !known.contains(&key) {
            return config_err(format!("unknown config key {key:?}"));
        }
        let v = override_value(value, table.get(key));
        table.insert(key.to_string(), v);
        *self = table
            .try_into()
            .map_err(|e: toml::de::Error| Error::Config(format!("bad value for {key}: {e}")))?;
        Ok(())
    }

    /// Every accepted key.
    pub fn keys() -> Vec<&'static str> {
        vec![
            "seed",
            "out_dir",
            "train_corpus",
            "validation_corpus",
            "seen_test_corpus",
            "unseen_test_corpus",
            "vocab_path",
            "stategf_checkpoint",
            "qnet_checkpoint",
            "synth_vocab_size",
            "synth_min_len",
            "synth_max_len",
            "synth_pairs",
            "synth_zipf_exponent",
            "split_train",
            "split_validation",
            "split_unseen_test",
            "split_seen_test",
            "max_vocab",
            "max_length",
            "hidden_dim",
            "embed_dim",
            "init_halfwidth",
            "reverse_source",
            "pretrain_epochs",
            "learning_rate",
            "clip_threshold",
            "weight_decay",
            "stabilizer",
            "dropout",
            "dqn_epochs",
            "dqn_learning_rate",
            "discount",
            "bleu_threshold",
            "epsilon_start",
            "epsilon_final",
            "epsilon_anneal_steps",
            "error_bias_weight",
            "target_sync_period",
            "episode_length_multiplier",
            "replay_capacity",
            "batch_size",
            "sweep_epsilons",
        ]
    }

    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("synth_pairs", self.synth_pairs),
            ("split_train", self.split_train),
            ("max_length", self.max_length),
            ("hidden_dim", self.hidden_dim),
            ("embed_dim", self.embed_dim),
            ("target_sync_period", self.target_sync_period),
            ("episode_length_multiplier", self.episode_length_multiplier),
            ("replay_capacity", self.replay_capacity),
            ("batch_size", self.batch_size),
        ];
        for (name, v) in positive {
            if v == 0 {
                return config_err(format!("{name} must be positive"));
            }
        }
        if self.synth_vocab_size <= NUM_SPECIALS || self.max_vocab <= NUM_SPECIALS {
            return config_err(format!("vocabulary sizes must exceed {NUM_SPECIALS}"));
        }
        if self.synth_min_len == 0 || self.synth_min_len > self.synth_max_len {
            return config_err("need 1 <= synth_min_len <= synth_max_len");
        }
        if self.synth_max_len > self.max_length {
            return config_err("synth_max_len exceeds max_length");
        }
        if !(self.synth_zipf_exponent >= 0.0 && self.synth_zipf_exponent.is_finite()) {
            return config_err("synth_zipf_exponent must be non-negative");
        }
        if self.split_seen_test > self.split_train {
            return config_err("split_seen_test cannot exceed split_train");
        }
        if self.split_train + self.split_validation + self.split_unseen_test > self.synth_pairs {
            return config_err("splits need more pairs than synth_pairs");
        }
        let pos_real = [
            ("init_halfwidth", self.init_halfwidth),
            ("learning_rate", self.learning_rate),
            ("clip_threshold", self.clip_threshold),
            ("stabilizer", self.stabilizer),
            ("dqn_learning_rate", self.dqn_learning_rate),
        ];
        for (name, v) in pos_real {
            if !(v > 0.0 && v.is_finite()) {
                return config_err(format!("{name} must be positive, got {v}"));
            }
        }
        if !(self.weight_decay >= 0.0 && self.weight_decay.is_finite()) {
            return config_err("weight_decay must be non-negative");
        }
        if !(0.0..1.0).contains(&self.dropout) {
            return config_err(format!("dropout {} outside [0, 1)", self.dropout));
        }
        if self.sweep_epsilons.iter().any(|e| !(0.0..=1.0).contains(e)) {
            return config_err("sweep_epsilons must lie in [0, 1]");
        }
        self.dqn_config().validate().map_err(|e| Error::Config(e.to_string()))
    }

    pub fn synth_config(&self) -> SynthConfig {
        SynthConfig {
            vocab_size: self.synth_vocab_size,
            min_len: self.synth_min_len,
            max_len: self.synth_max_len,
            pairs: self.synth_pairs,
            zipf_exponent: self.synth_zipf_exponent,
        }
    }

    pub fn split_sizes(&self) -> SplitSizes {
        SplitSizes {
            train: self.split_train,
            validation: self.split_validation,
            unseen_test: self.split_unseen_test,
            seen_test: self.split_seen_test,
        }
    }

    pub fn stategf_config(&self, vocab_size: usize) -> StateGfConfig {
        StateGfConfig {
            vocab_size,
            embed_dim: self.embed_dim,
            hidden_dim: self.hidden_dim,
            init_halfwidth: self.init_halfwidth,
            reverse_source: self.reverse_source,
        }
    }

    pub fn pretrain_config(&self) -> PretrainConfig {
        PretrainConfig {
            epochs: self.pretrain_epochs,
            learning_rate: self.learning_rate,
            stabilizer: self.stabilizer,
            weight_decay: self.weight_decay,
            clip_threshold: self.clip_threshold,
            dropout: self.dropout,
            max_length: self.max_length,
        }
    }

    pub fn dqn_config(&self) -> DqnTrainConfig {
        DqnTrainConfig {
            discount: self.discount,
            bleu_threshold: self.bleu_threshold,
            epsilon_start: self.epsilon_start,
            epsilon_final: self.epsilon_final,
            epsilon_anneal_steps: self.epsilon_anneal_steps,
            error_bias_weight: self.error_bias_weight,
            target_sync_period: self.target_sync_period,
            episode_length_multiplier: self.episode_length_multiplier,
            replay_capacity: self.replay_capacity,
            batch_size: self.batch_size,
            epochs: self.dqn_epochs,
            learning_rate: self.dqn_learning_rate,
            stabilizer: self.stabilizer,
            weight_decay: self.weight_decay,
            clip_threshold: self.clip_threshold,
            init_halfwidth: self.init_halfwidth,
            max_length: self.max_length,
        }
    }

    pub fn decode_config(&self) -> DecodeConfig {
        DecodeConfig {
            episode_length_multiplier: self.episode_length_multiplier,
            max_length: self.max_length,
        }
    }

    pub fn stategf_path(&self) -> PathBuf {
        self.stategf_checkpoint
            .clone()
            .unwrap_or_else(|| self.out_dir.join("stategf.ckpt"))
    }

    pub fn qnet_path(&self) -> PathBuf {
        self.qnet_checkpoint
            .clone()
            .unwrap_or_else(|| self.out_dir.join("qnet.ckpt"))
    }

    pub fn vocab_file(&self) -> PathBuf {
        self.vocab_path
            .clone()
            .unwrap_or_else(|| self.out_dir.join("vocab.txt"))
    }

    /// Corpus file of a split: the configured path, else the file `pretrain`
    /// writes into the output directory.
    pub fn corpus_file(&self, split: Split) -> PathBuf {
        let (configured, default) = match split {
            Split::Train => (&self.train_corpus, "train.txt"),
            Split::Validation => (&self.validation_corpus, "validation.txt"),
            Split::SeenTest => (&self.seen_test_corpus, "seen_test.txt"),
            Split::UnseenTest => (&self.unseen_test_corpus, "unseen_test.txt"),
        };
        configured.clone().unwrap_or_else(|| self.out_dir.join(default))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Split {
    Train,
    Validation,
    SeenTest,
    UnseenTest,
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_validate_and_round_trip() {
        let c = RunConfig::default();
        c.validate().unwrap();
        assert_eq!(RunConfig::from_toml_str(&c.to_toml_string()).unwrap(), c);
        assert_eq!(c.hidden_dim, 100);
        assert_eq!(c.learning_rate, 0.05);
        assert_eq!(c.clip_threshold, 15.0);
        assert_eq!(c.dropout, 0.2);
        assert_eq!(c.discount, 0.95);
        assert_eq!(c.bleu_threshold, 0.92);
        assert_eq!(c.epsilon_final, 0.1);
        assert_eq!(c.max_length, 30);
    }

    #[test]
    fn keys_list_is_complete() {
        let table = toml::Table::try_from(RunConfig::default()).unwrap();
        let mut known = RunConfig::keys();
        known.sort();
        for k in table.keys() {
            assert!(known.contains(&k.as_str()), "{k}");
        }
        // Option fields default to None and are absent from the table
        assert_eq!(known.len(), table.len() + 7);
    }

    #[test]
    fn unknown_keys_rejected() {
        assert!(matches!(
            RunConfig::from_toml_str("hiden_dim = 3"),
            Err(Error::Config(_))
        ));
        let mut c = RunConfig::default();
        assert!(c.set("nope", "1").is_err());
    }

    #[test]
    fn overrides_take_precedence() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("run.toml");
        std::fs::write(&path, "hidden_dim = 16\nlearning_rate = 0.2\nseed = 4\n").unwrap();
        let c = RunConfig::load(
            Some(&path),
            &[
                ("seed".into(), "9".into()),
                ("dropout".into(), "0".into()),
                ("train_corpus".into(), "data/train.txt".into()),
                ("sweep_epsilons".into(), "[0, 0.5]".into()),
            ],
        )
        .unwrap();
        assert_eq!(c.hidden_dim, 16);
        assert_eq!(c.learning_rate, 0.2);
        assert_eq!(c.seed, 9);
        assert_eq!(c.dropout, 0.0);
        assert_eq!(c.train_corpus, Some(PathBuf::from("data/train.txt")));
        assert_eq!(c.sweep_epsilons, vec![0.0, 0.5]);
        assert_eq!(c.embed_dim, 100);
    }

    #[test]
    fn out_of_range_values_rejected() {
        for (k, v) in [
            ("dropout", "1.0"),
            ("discount", "1.0"),
            ("bleu_threshold", "0"),
            ("hidden_dim", "0"),
            ("learning_rate", "-1"),
            ("error_bias_weight", "0.5"),
            ("sweep_epsilons", "[0.0, 2.0]"),
        ] {
            let r = RunConfig::load(None, &[(k.into(), v.into())]);
            assert!(matches!(r, Err(Error::Config(_))), "{k}={v}");
        }
        assert!(RunConfig::load(None, &[("hidden_dim".into(), "abc".into())]).is_err());
        assert!(RunConfig::load(Some(Path::new("/no/such/file.toml")), &[]).is_err());
    }

    #[test]
    fn override_parsing() {
        assert_eq!(parse_override("a=b=c").unwrap(), ("a".into(), "b=c".into()));
        assert!(parse_override("novalue").is_err());
        assert!(parse_override("=3").is_err());
    }
}
