//! Vocabulary, synthetic regeneration corpora, dataset splits and the plain
//! text file formats used by the command line.
//!
//! File formats:
//!
//! - corpus: UTF-8, one sentence per line, tokens separated by whitespace;
//! - vocabulary: one token per line, line `k` (0-based) holds id `k + 4`,
//!   the four special ids are implicit;
//! - split manifest: one line per split, `<name> <index> <index> ...`, where
//!   indices are 0-based line numbers of the corpus file.

use std::collections::{HashMap, HashSet};
use std::fs;
use std::path::Path;

use rand::distributions::{Distribution, WeightedIndex};
use rand::seq::{index, SliceRandom};
use rand::Rng;

use crate::error::{invalid, Error, Result};
use crate::TokenId;

pub const PAD: TokenId = 0;
pub const SOS: TokenId = 1;
pub const EOS: TokenId = 2;
pub const UNK: TokenId = 3;
pub const NUM_SPECIALS: usize = 4;
const SPECIAL_NAMES: [&str; NUM_SPECIALS] = ["<pad>", "<s>", "</s>", "<unk>"];

/// A source/target pair of token-id sequences, without EOS.
pub type Pair = (Vec<TokenId>, Vec<TokenId>);

#[derive(Clone, Debug, PartialEq)]
pub struct Vocab {
    token_to_id: HashMap<String, TokenId>,
    id_to_token: Vec<String>,
}

impl Vocab {
    /// Builds a vocabulary from the given regular tokens, in order, after the
    /// four specials.
    pub fn from_tokens<I, S>(tokens: I) -> Result<Self>
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        let mut id_to_token: Vec<String> = SPECIAL_NAMES.iter().map(|s| s.to_string()).collect();
        let mut token_to_id: HashMap<String, TokenId> = id_to_token
            .iter()
            .enumerate()
            .map(|(i, s)| (s.clone(), i as TokenId))
            .collect();
        for tok in tokens {
            let tok = tok.into();
            if tok.is_empty() || tok.chars().any(char::is_whitespace) {
                return invalid(format!("vocabulary token {tok:?} is empty or contains whitespace"));
            }
            if token_to_id.contains_key(&tok) {
                return invalid(format!("duplicate vocabulary token {tok:?}"));
            }
            token_to_id.insert(tok.clone(), id_to_token.len() as TokenId);
            id_to_token.push(tok);
        }
        Ok(Vocab {
            token_to_id,
            id_to_token,
        })
    }

    pub fn len(&self) -> usize {
        self.id_to_token.len()
    }

    pub fn is_empty(&self) -> bool {
        self.id_to_token.is_empty()
    }

    pub fn id(&self, token: &str) -> TokenId {
        self.token_to_id.get(token).copied().unwrap_or(UNK)
    }

    pub fn token(&self, id: TokenId) -> Result<&str> {
        self.id_to_token
            .get(id as usize)
            .map(String::as_str)
            .ok_or_else(|| Error::InvalidArgument(format!("token id {id} outside vocabulary of {}", self.len())))
    }

    /// Regular (non-special) tokens in id order.
    pub fn regular_tokens(&self) -> &[String] {
        &self.id_to_token[NUM_SPECIALS..]
    }

    pub fn encode_sentence<S: AsRef<str>>(&self, tokens: &[S]) -> Vec<TokenId> {
        tokens.iter().map(|t| self.id(t.as_ref())).collect()
    }

    pub fn decode_sentence(&self, ids: &[TokenId]) -> Result<Vec<String>> {
        ids.iter().map(|&i| self.token(i).map(str::to_string)).collect()
    }

    pub fn encode_line(&self, line: &str) -> Vec<TokenId> {
        let toks: Vec<&str> = tokenize(line);
        self.encode_sentence(&toks)
    }

    pub fn decode_line(&self, ids: &[TokenId]) -> Result<String> {
        Ok(self.decode_sentence(ids)?.join(" "))
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        let mut text = String::new();
        for tok in self.regular_tokens() {
            text.push_str(tok);
            text.push('\n');
        }
        fs::write(path, text)?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path)?;
        Vocab::from_tokens(text.lines().map(str::trim).filter(|l| !l.is_empty()))
    }
}

/// Whitespace tokenization.
pub fn tokenize(line: &str) -> Vec<&str> {
    line.split_whitespace().collect()
}

/// Keeps the `max_size − 4` most frequent tokens (ties broken by
/// lexicographic order) behind the four specials.
pub fn build_vocab<S: AsRef<str>>(sentences: &[Vec<S>], max_size: usize) -> Result<Vocab> {
    if sentences.iter().all(|s| s.is_empty()) {
        return invalid("cannot build a vocabulary from an empty corpus");
    }
    if max_size < NUM_SPECIALS {
        return invalid(format!("vocabulary size must be at least {NUM_SPECIALS}"));
    }
    let mut freq: HashMap<&str, usize> = HashMap::new();
    for s in sentences {
        for t in s {
            let t = t.as_ref();
            if !SPECIAL_NAMES.contains(&t) {
                *freq.entry(t).or_insert(0) += 1;
            }
        }
    }
    let mut ranked: Vec<(&str, usize)> = freq.into_iter().collect();
    ranked.sort_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.cmp(b.0)));
    ranked.truncate(max_size - NUM_SPECIALS);
    Vocab::from_tokens(ranked.into_iter().map(|(t, _)| t.to_string()))
}

/// Parameters of the synthetic regeneration corpus.
#[derive(Clone, Debug, PartialEq)]
pub struct SynthConfig {
    /// Total vocabulary size including the four specials.
    pub vocab_size: usize,
    pub min_len: usize,
    pub max_len: usize,
    pub pairs: usize,
    /// Token `k` (0-based rank among regular words) has weight `1/(k+1)^s`.
    pub zipf_exponent: f64,
}

impl Default for SynthConfig {
    fn default() -> Self {
        SynthConfig {
            vocab_size: 50,
            min_len: 3,
            max_len: 10,
            pairs: 500,
            zipf_exponent: 1.0,
        }
    }
}

impl SynthConfig {
    fn validate(&self) -> Result<()> {
        if self.vocab_size <= NUM_SPECIALS {
            return invalid("synthetic vocabulary must have regular words");
        }
        if self.min_len == 0 || self.min_len > self.max_len {
            return invalid("synthetic length range is empty");
        }
        if !(self.zipf_exponent >= 0.0) {
            return invalid("zipf exponent must be non-negative");
        }
        Ok(())
    }

    /// Probability of each regular word, rank order.
    pub fn unigram_distribution(&self) -> Vec<f64> {
        let w: Vec<f64> = (0..self.vocab_size - NUM_SPECIALS)
            .map(|k| 1.0 / ((k + 1) as f64).powf(self.zipf_exponent))
            .collect();
        let z: f64 = w.iter().sum();
        w.into_iter().map(|v| v / z).collect()
    }
}

/// Vocabulary `w00, w01, ...` matching a [`SynthConfig`].
pub fn synthetic_vocab(config: &SynthConfig) -> Vocab {
    let n = config.vocab_size.saturating_sub(NUM_SPECIALS);
    let width = n.saturating_sub(1).to_string().len();
    Vocab::from_tokens((0..n).map(|k| format!("w{k:0width$}"))).expect("generated tokens are unique")
}

/// Draws distinct random sentences with Zipf-skewed unigram frequencies and
/// returns them as regeneration pairs (target = source).
pub fn synthesize_corpus<R: Rng + ?Sized>(config: &SynthConfig, rng: &mut R) -> Result<Vec<Pair>> {
    config.validate()?;
    let words = WeightedIndex::new(config.unigram_distribution()).map_err(|e| Error::InvalidArgument(e.to_string()))?;
    let mut seen = HashSet::new();
    let mut out = Vec::with_capacity(config.pairs);
    let mut attempts = 0usize;
    while out.len() < config.pairs {
        attempts += 1;
        if attempts > 100 * config.pairs + 1000 {
            return invalid("could not draw enough distinct sentences; widen the length range or vocabulary");
        }
        let len = rng.gen_range(config.min_len..=config.max_len);
        let s: Vec<TokenId> = (0..len)
            .map(|_| (words.sample(rng) + NUM_SPECIALS) as TokenId)
            .collect();
        if seen.insert(s.clone()) {
            out.push((s.clone(), s));
        }
    }
    Ok(out)
}

/// Requested split sizes. `seen_test` is sampled from `train`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SplitSizes {
    pub train: usize,
    pub validation: usize,
    pub unseen_test: usize,
    pub seen_test: usize,
}

/// Line indices of each split.
#[derive(Clone, Debug, PartialEq, Default)]
pub struct SplitManifest {
    pub train: Vec<usize>,
    pub validation: Vec<usize>,
    pub seen_test: Vec<usize>,
    pub unseen_test: Vec<usize>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct DatasetSplits {
    pub train: Vec<Pair>,
    pub validation: Vec<Pair>,
    pub seen_test: Vec<Pair>,
    pub unseen_test: Vec<Pair>,
    pub manifest: SplitManifest,
}

/// Partitions `pairs` into disjoint train/validation/unseen-test sets and
/// samples the seen-test set from train without replacement.
///
/// Duplicate pairs are assigned as a group, so an unseen sentence never also
/// occurs in train.
pub fn split_dataset<R: Rng + ?Sized>(pairs: &[Pair], sizes: SplitSizes, rng: &mut R) -> Result<DatasetSplits> {
    let mut first_index: HashMap<&Pair, usize> = HashMap::new();
    let mut distinct = Vec::new();
    for (i, p) in pairs.iter().enumerate() {
        first_index.entry(p).or_insert_with(|| {
            distinct.push(i);
            i
        });
    }
    let needed = sizes.train + sizes.validation + sizes.unseen_test;
    if needed > distinct.len() {
        return invalid(format!(
            "split needs {needed} distinct pairs, corpus has {}",
            distinct.len()
        ));
    }
    if sizes.seen_test > sizes.train {
        return invalid("seen test set cannot be larger than the training set");
    }
    distinct.shuffle(rng);
    let train = distinct[..sizes.train].to_vec();
    let validation = distinct[sizes.train..sizes.train + sizes.validation].to_vec();
    let unseen_test = distinct[sizes.train + sizes.validation..needed].to_vec();
    let seen_test: Vec<usize> = index::sample(rng, train.len(), sizes.seen_test)
        .into_iter()
        .map(|k| train[k])
        .collect();
    let manifest = SplitManifest {
        train,
        validation,
        seen_test,
        unseen_test,
    };
    apply_manifest(pairs, manifest)
}

pub fn apply_manifest(pairs: &[Pair], manifest: SplitManifest) -> Result<DatasetSplits> {
    let pick = |idx: &[usize]| -> Result<Vec<Pair>> {
        idx.iter()
            .map(|&i| {
                pairs
                    .get(i)
                    .cloned()
                    .ok_or_else(|| Error::InvalidArgument(format!("split index {i} out of range")))
            })
            .collect()
    };
    Ok(DatasetSplits {
        train: pick(&manifest.train)?,
        validation: pick(&manifest.validation)?,
        seen_test: pick(&manifest.seen_test)?,
        unseen_test: pick(&manifest.unseen_test)?,
        manifest,
    })
}

impl SplitManifest {
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for (name, idx) in [
            ("train", &self.train),
            ("validation", &self.validation),
            ("seen_test", &self.seen_test),
            ("unseen_test", &self.unseen_test),
        ] {
            out.push_str(name);
            for i in idx {
                out.push(' ');
                out.push_str(&i.to_string());
            }
            out.push('\n');
        }
        out
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let mut m = SplitManifest::default();
        for line in text.lines().filter(|l| !l.trim().is_empty()) {
            let mut parts = line.split_whitespace();
            let name = parts.next().unwrap_or_default();
            let idx = parts
                .map(|p| {
                    p.parse::<usize>()
                        .map_err(|_| Error::InvalidArgument(format!("bad split index {p:?}")))
                })
                .collect::<Result<Vec<_>>>()?;
            match name {
                "train" => m.train = idx,
                "validation" => m.validation = idx,
                "seen_test" => m.seen_test = idx,
                "unseen_test" => m.unseen_test = idx,
                other => return invalid(format!("unknown split {other:?}")),
            }
        }
        Ok(m)
    }
}

/// Reads a corpus file into regeneration pairs, rejecting sentences that are
/// empty or longer than `max_length`.
pub fn load_corpus(path: &Path, vocab: &Vocab, max_length: usize) -> Result<Vec<Pair>> {
    let text = fs::read_to_string(path)?;
    let mut out = Vec::new();
    for (n, line) in text.lines().enumerate() {
        let ids = vocab.encode_line(line);
        if ids.is_empty() {
            return invalid(format!("{}:{}: empty sentence", path.display(), n + 1));
        }
        if ids.len() > max_length {
            return invalid(format!(
                "{}:{}: sentence has {} tokens, maximum is {max_length}",
                path.display(),
                n + 1,
                ids.len()
            ));
        }
        out.push((ids.clone(), ids));
    }
    if out.is_empty() {
        return invalid(format!("{} contains no sentences", path.display()));
    }
    Ok(out)
}

/// Raw whitespace-tokenized lines of a corpus file.
pub fn read_tokenized(path: &Path) -> Result<Vec<Vec<String>>> {
    let text = fs::read_to_string(path)?;
    Ok(text
        .lines()
        .map(|l| tokenize(l).into_iter().map(str::to_string).collect())
        .collect())
}

/// Writes the source side of `pairs`, one sentence per line.
pub fn write_corpus(path: &Path, vocab: &Vocab, pairs: &[Pair]) -> Result<()> {
    let mut text = String::new();
    for (s, _) in pairs {
        text.push_str(&vocab.decode_line(s)?);
        text.push('\n');
    }
    fs::write(path, text)?;
    Ok(())
}
