//! State generation function: encoder and decoder LSTMs with a shared
//! embedding and a softmax output layer.
//!
//! The encoder reads the source (EOS appended) from a zero state; its final
//! state seeds the decoder, whose first input is SOS. Pretraining uses teacher
//! forcing: decoder inputs are the target shifted right by SOS and outputs are
//! the target followed by EOS.
//!
//! With `reverse_source` the encoder reads the source right to left (EOS still
//! last), which shortens the path between matching positions on copy-like
//! tasks.

use std::ops::Deref;
use std::sync::Arc;

use rand::seq::SliceRandom;
use rand::Rng;
use rayon::prelude::*;

use crate::corpus::{Pair, EOS, SOS};
use crate::error::{invalid, Error, Result};
use crate::metric::{smoothed_bleu, BleuConfig};
use crate::nn::checkpoint::Checkpoint;
use crate::nn::{
    clip_gradient_norm, cross_entropy_loss, dropout_mask, init_uniform, lstm_cell_forward, lstm_sequence_forward,
    lstm_sequence_forward_recorded, optimizer_step, softmax, LstmParams, LstmState, OptimizerState, Parameters, Tensor,
};
use crate::TokenId;

pub const CHECKPOINT_KIND: &str = "stategf";
/// Checkpoint kind of a model whose encoder reads the source reversed.
pub const CHECKPOINT_KIND_REVERSED: &str = "stategf.reversed-source";

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct StateGfConfig {
    pub vocab_size: usize,
    pub embed_dim: usize,
    pub hidden_dim: usize,
    pub init_halfwidth: f64,
    pub reverse_source: bool,
}

#[derive(Clone, Debug, PartialEq)]
pub struct StateGfParams {
    pub encoder: LstmParams,
    pub decoder: LstmParams,
    /// `V × E`, shared by encoder and decoder inputs.
    pub embedding: Tensor,
    /// `V × H`
    pub output_projection: Tensor,
    pub reverse_source: bool,
}

impl StateGfParams {
    pub fn new<R: Rng + ?Sized>(config: &StateGfConfig, rng: &mut R) -> Result<Self> {
        if config.vocab_size <= crate::corpus::NUM_SPECIALS || config.embed_dim == 0 || config.hidden_dim == 0 {
            return invalid("state generation function dimensions must be positive");
        }
        let (v, e, h, w) = (
            config.vocab_size,
            config.embed_dim,
            config.hidden_dim,
            config.init_halfwidth,
        );
        Ok(StateGfParams {
            encoder: LstmParams::uniform(e, h, w, rng)?,
            decoder: LstmParams::uniform(e, h, w, rng)?,
            embedding: init_uniform(&[v, e], w, rng)?,
            output_projection: init_uniform(&[v, h], w, rng)?,
            reverse_source: config.reverse_source,
        })
    }

    pub fn zeros(vocab_size: usize, embed_dim: usize, hidden_dim: usize) -> Self {
        StateGfParams {
            encoder: LstmParams::zeros(embed_dim, hidden_dim),
            decoder: LstmParams::zeros(embed_dim, hidden_dim),
            embedding: Tensor::zeros(&[vocab_size, embed_dim]),
            output_projection: Tensor::zeros(&[vocab_size, hidden_dim]),
            reverse_source: false,
        }
    }

    pub fn zeros_like(&self) -> Self {
        StateGfParams {
            reverse_source: self.reverse_source,
            ..StateGfParams::zeros(self.vocab_size(), self.embed_dim(), self.hidden_dim())
        }
    }

    pub fn checkpoint_kind(&self) -> &'static str {
        if self.reverse_source {
            CHECKPOINT_KIND_REVERSED
        } else {
            CHECKPOINT_KIND
        }
    }

    pub fn to_checkpoint(&self) -> Checkpoint {
        Checkpoint::from_params(self.checkpoint_kind(), self)
    }

    pub fn vocab_size(&self) -> usize {
        self.embedding.rows()
    }

    pub fn embed_dim(&self) -> usize {
        self.embedding.cols()
    }

    pub fn hidden_dim(&self) -> usize {
        self.encoder.hidden_dim()
    }

    pub fn from_checkpoint(ck: &Checkpoint) -> Result<Self> {
        let reverse_source = match ck.kind.as_str() {
            CHECKPOINT_KIND => false,
            CHECKPOINT_KIND_REVERSED => true,
            other => {
                return Err(Error::Format(format!(
                    "expected a {CHECKPOINT_KIND} checkpoint, found {other}"
                )))
            }
        };
        let emb = ck.get("embedding")?.shape().to_vec();
        let proj = ck.get("output_projection")?.shape().to_vec();
        if emb.len() != 2 || proj.len() != 2 {
            return Err(Error::Format("embedding and projection must be matrices".into()));
        }
        let mut p = StateGfParams::zeros(emb[0], emb[1], proj[1]);
        p.reverse_source = reverse_source;
        ck.restore_into(&mut p)?;
        Ok(p)
    }

    fn embed(&self, token: TokenId) -> Result<Vec<f64>> {
        if (token as usize) >= self.vocab_size() {
            return invalid(format!("token id {token} outside vocabulary of {}", self.vocab_size()));
        }
        Ok(self.embedding.row(token as usize).to_vec())
    }

    fn probabilities(&self, hidden: &[f64]) -> Result<Vec<f64>> {
        let mut logits = vec![0.0; self.vocab_size()];
        self.output_projection.matvec_acc(hidden, &mut logits);
        softmax(&logits)
    }
}

impl Parameters for StateGfParams {
    fn tensors(&self) -> Vec<(String, &Tensor)> {
        let mut out = crate::nn::prefixed("encoder", self.encoder.tensors());
        out.extend(crate::nn::prefixed("decoder", self.decoder.tensors()));
        out.push(("embedding".into(), &self.embedding));
        out.push(("output_projection".into(), &self.output_projection));
        out
    }

    fn tensors_mut(&mut self) -> Result<Vec<&mut Tensor>> {
        let mut out = self.encoder.tensors_mut()?;
        out.extend(self.decoder.tensors_mut()?);
        out.push(&mut self.embedding);
        out.push(&mut self.output_projection);
        Ok(out)
    }
}

/// Read-only state generation function used once pretraining is over.
///
/// Every forward pass through a frozen model runs in inference mode (no
/// dropout), and its tensors cannot be borrowed mutably, so an optimizer step
/// against it fails with an invalid-state error.
#[derive(Clone, Debug)]
pub struct FrozenStateGf {
    params: Arc<StateGfParams>,
}

pub fn freeze(params: StateGfParams) -> FrozenStateGf {
    FrozenStateGf {
        params: Arc::new(params),
    }
}

impl Deref for FrozenStateGf {
    type Target = StateGfParams;

    fn deref(&self) -> &StateGfParams {
        &self.params
    }
}

impl Parameters for FrozenStateGf {
    fn tensors(&self) -> Vec<(String, &Tensor)> {
        self.params.tensors()
    }

    fn tensors_mut(&mut self) -> Result<Vec<&mut Tensor>> {
        Err(Error::InvalidState("state generation function is frozen".into()))
    }
}

/// One decoder pass.
#[derive(Clone, Debug, PartialEq)]
pub struct DecodeTrace {
    pub encoder_final: LstmState,
    pub decoder_hiddens: Vec<Vec<f64>>,
    pub probability_lists: Vec<Vec<f64>>,
    pub argmax_tokens: Vec<TokenId>,
    pub input_tokens: Vec<TokenId>,
}

impl DecodeTrace {
    pub fn len(&self) -> usize {
        self.argmax_tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.argmax_tokens.is_empty()
    }

    /// Argmax tokens with a trailing EOS removed.
    pub fn output_tokens(&self) -> Vec<TokenId> {
        let mut out = self.argmax_tokens.clone();
        if out.last() == Some(&EOS) {
            out.pop();
        }
        out
    }
}

/// Index of the largest entry; the lowest index wins ties.
pub fn argmax(values: &[f64]) -> usize {
    let mut best = 0;
    for (i, &v) in values.iter().enumerate() {
        if v > values[best] {
            best = i;
        }
    }
    best
}

/// Encoder input order: the source (optionally reversed) followed by EOS.
fn encoder_tokens(params: &StateGfParams, source: &[TokenId]) -> Vec<TokenId> {
    let body = source.strip_suffix(&[EOS]).unwrap_or(source);
    let mut s = body.to_vec();
    if params.reverse_source {
        s.reverse();
    }
    s.push(EOS);
    s
}

/// Final encoder state after reading `source` (EOS appended if absent).
pub fn encode(params: &StateGfParams, source: &[TokenId]) -> Result<LstmState> {
    if source.is_empty() {
        return invalid("source sentence is empty");
    }
    let inputs = encoder_tokens(params, source)
        .into_iter()
        .map(|t| params.embed(t))
        .collect::<Result<Vec<_>>>()?;
    let states = lstm_sequence_forward(&params.encoder, &inputs, &LstmState::zeros(params.hidden_dim()))?;
    Ok(states.into_iter().last().expect("non-empty"))
}

/// Runs the decoder from `encoder_final` over the given input tokens.
pub fn decode_forward(
    params: &StateGfParams,
    encoder_final: &LstmState,
    decoder_inputs: &[TokenId],
) -> Result<DecodeTrace> {
    if decoder_inputs.is_empty() {
        return invalid("decoder input sequence is empty");
    }
    if encoder_final.dim() != params.hidden_dim() {
        return Err(Error::Internal("encoder state does not match decoder size".into()));
    }
    let mut trace = DecodeTrace {
        encoder_final: encoder_final.clone(),
        decoder_hiddens: Vec::with_capacity(decoder_inputs.len()),
        probability_lists: Vec::with_capacity(decoder_inputs.len()),
        argmax_tokens: Vec::with_capacity(decoder_inputs.len()),
        input_tokens: decoder_inputs.to_vec(),
    };
    let mut state = encoder_final.clone();
    for &tok in decoder_inputs {
        state = lstm_cell_forward(&params.decoder, &params.embed(tok)?, &state)?;
        let p = params.probabilities(&state.hidden)?;
        trace.argmax_tokens.push(argmax(&p) as TokenId);
        trace.probability_lists.push(p);
        trace.decoder_hiddens.push(state.hidden.clone());
    }
    Ok(trace)
}

/// Beam-1 left-to-right decoding until EOS is emitted or `max_length` steps.
pub fn greedy_decode(params: &StateGfParams, source: &[TokenId], max_length: usize) -> Result<DecodeTrace> {
    if max_length == 0 {
        return invalid("max_length must be positive");
    }
    let encoder_final = encode(params, source)?;
    let mut trace = DecodeTrace {
        encoder_final: encoder_final.clone(),
        decoder_hiddens: Vec::new(),
        probability_lists: Vec::new(),
        argmax_tokens: Vec::new(),
        input_tokens: Vec::new(),
    };
    let mut state = encoder_final;
    let mut input = SOS;
    for _ in 0..max_length {
        state = lstm_cell_forward(&params.decoder, &params.embed(input)?, &state)?;
        let p = params.probabilities(&state.hidden)?;
        let next = argmax(&p) as TokenId;
        trace.input_tokens.push(input);
        trace.argmax_tokens.push(next);
        trace.probability_lists.push(p);
        trace.decoder_hiddens.push(state.hidden.clone());
        if next == EOS {
            break;
        }
        input = next;
    }
    Ok(trace)
}

/// Decoder inputs and outputs for teacher forcing.
fn teacher_forcing(target: &[TokenId]) -> (Vec<TokenId>, Vec<TokenId>) {
    let mut inputs = Vec::with_capacity(target.len() + 1);
    inputs.push(SOS);
    inputs.extend_from_slice(target);
    let mut outputs = target.to_vec();
    outputs.push(EOS);
    (inputs, outputs)
}

/// Summed teacher-forced cross-entropy, the number of predicted tokens, and
/// exact gradients with respect to every parameter.
///
/// With `dropout = Some((rate, rng))` masks are drawn for the embedding
/// inputs of both LSTMs and for the decoder outputs feeding the softmax.
pub fn loss_and_gradient<R: Rng + ?Sized>(
    params: &StateGfParams,
    source: &[TokenId],
    target: &[TokenId],
    mut dropout: Option<(f64, &mut R)>,
) -> Result<(f64, usize, StateGfParams)> {
    if source.is_empty() || target.is_empty() {
        return invalid("source and target must be non-empty");
    }
    let (e, h) = (params.embed_dim(), params.hidden_dim());
    let src = encoder_tokens(params, source);
    let (dec_in, dec_out) = teacher_forcing(target);
    let mut mask = |len: usize| -> Result<Option<Vec<f64>>> {
        match dropout.as_mut() {
            Some((rate, rng)) if *rate > 0.0 => Ok(Some(dropout_mask(len, *rate, &mut **rng)?)),
            _ => Ok(None),
        }
    };
    let apply = |v: &mut Vec<f64>, m: &Option<Vec<f64>>| {
        if let Some(m) = m {
            v.iter_mut().zip(m).for_each(|(a, b)| *a *= b);
        }
    };

    let mut enc_masks = Vec::with_capacity(src.len());
    let mut enc_inputs = Vec::with_capacity(src.len());
    for &t in &src {
        let mut x = params.embed(t)?;
        let m = mask(e)?;
        apply(&mut x, &m);
        enc_inputs.push(x);
        enc_masks.push(m);
    }
    let (enc_states, enc_tape) = lstm_sequence_forward_recorded(&params.encoder, &enc_inputs, &LstmState::zeros(h))?;
    let enc_final = enc_states.last().expect("non-empty").clone();

    let mut dec_masks = Vec::with_capacity(dec_in.len());
    let mut dec_inputs = Vec::with_capacity(dec_in.len());
    for &t in &dec_in {
        let mut x = params.embed(t)?;
        let m = mask(e)?;
        apply(&mut x, &m);
        dec_inputs.push(x);
        dec_masks.push(m);
    }
    let (dec_states, dec_tape) = lstm_sequence_forward_recorded(&params.decoder, &dec_inputs, &enc_final)?;

    let mut grads = params.zeros_like();
    let mut loss = 0.0;
    let mut d_dec_hidden = Vec::with_capacity(dec_states.len());
    for (state, &gold) in dec_states.iter().zip(&dec_out) {
        if (gold as usize) >= params.vocab_size() {
            return invalid(format!("token id {gold} outside vocabulary"));
        }
        let mut hid = state.hidden.clone();
        let m = mask(h)?;
        apply(&mut hid, &m);
        let p = params.probabilities(&hid)?;
        loss += cross_entropy_loss(&p, gold as usize)?;
        let mut dlogits = p;
        dlogits[gold as usize] -= 1.0;
        grads.output_projection.outer_acc(&dlogits, &hid);
        let mut dh = vec![0.0; h];
        params.output_projection.matvec_t_acc(&dlogits, &mut dh);
        apply(&mut dh, &m);
        d_dec_hidden.push(dh);
    }

    let dec_back = params.decoder.backward(&dec_tape, &d_dec_hidden, None)?;
    grads.decoder = dec_back.params;
    for ((&t, dx), m) in dec_in.iter().zip(dec_back.inputs.iter()).zip(&dec_masks) {
        let mut dx = dx.clone();
        apply(&mut dx, m);
        crate::nn::axpy(1.0, &dx, grads.embedding.row_mut(t as usize));
    }

    let mut d_enc_hidden = vec![vec![0.0; h]; src.len()];
    *d_enc_hidden.last_mut().expect("non-empty") = dec_back.init.hidden.clone();
    let enc_back = params
        .encoder
        .backward(&enc_tape, &d_enc_hidden, Some(&dec_back.init.cell))?;
    grads.encoder = enc_back.params;
    for ((&t, dx), m) in src.iter().zip(enc_back.inputs.iter()).zip(&enc_masks) {
        let mut dx = dx.clone();
        apply(&mut dx, m);
        crate::nn::axpy(1.0, &dx, grads.embedding.row_mut(t as usize));
    }
    Ok((loss, dec_out.len(), grads))
}

/// Mean per-token teacher-forced cross-entropy in inference mode.
pub fn teacher_forced_loss(params: &StateGfParams, source: &[TokenId], target: &[TokenId]) -> Result<f64> {
    let encoder_final = encode(params, source)?;
    let (inputs, outputs) = teacher_forcing(target);
    let trace = decode_forward(params, &encoder_final, &inputs)?;
    let mut total = 0.0;
    for (p, &gold) in trace.probability_lists.iter().zip(&outputs) {
        total += cross_entropy_loss(p, gold as usize)?;
    }
    Ok(total / outputs.len() as f64)
}

#[derive(Clone, Debug, PartialEq)]
pub struct PretrainConfig {
    pub epochs: usize,
    pub learning_rate: f64,
    pub stabilizer: f64,
    pub weight_decay: f64,
    pub clip_threshold: f64,
    pub dropout: f64,
    pub max_length: usize,
}

impl Default for PretrainConfig {
    fn default() -> Self {
        PretrainConfig {
            epochs: 30,
            learning_rate: 0.05,
            stabilizer: 1e-8,
            weight_decay: 0.00016,
            clip_threshold: 15.0,
            dropout: 0.2,
            max_length: 30,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Default)]
pub struct PretrainReport {
    /// Mean per-token training cross-entropy of each epoch.
    pub per_epoch_cost: Vec<f64>,
    /// Mean smoothed BLEU of greedy decodes of the training set after each epoch.
    pub per_epoch_train_bleu: Vec<f64>,
}

/// Mean smoothed BLEU of greedy decodes against the targets.
pub fn greedy_corpus_bleu(params: &StateGfParams, pairs: &[Pair], max_length: usize) -> Result<f64> {
    if pairs.is_empty() {
        return invalid("cannot evaluate on an empty set");
    }
    let bleu = BleuConfig::default();
    let scores = pairs
        .par_iter()
        .map(|(s, t)| {
            let out = greedy_decode(params, s, max_length)?.output_tokens();
            smoothed_bleu(&out, t, &bleu)
        })
        .collect::<Result<Vec<f64>>>()?;
    Ok(scores.iter().sum::<f64>() / scores.len() as f64)
}

/// Supervised pretraining with per-pair AdaGrad updates.
pub fn pretrain<R: Rng + ?Sized>(
    params: &mut StateGfParams,
    corpus: &[Pair],
    config: &PretrainConfig,
    rng: &mut R,
) -> Result<PretrainReport> {
    pretrain_with(params, corpus, config, rng, |_, _, _| {})
}

/// [`pretrain`] with a callback receiving `(epoch, cost, train_bleu)` after
/// every epoch (1-based).
pub fn pretrain_with<R, F>(
    params: &mut StateGfParams,
    corpus: &[Pair],
    config: &PretrainConfig,
    rng: &mut R,
    mut on_epoch: F,
) -> Result<PretrainReport>
where
    R: Rng + ?Sized,
    F: FnMut(usize, f64, f64),
{
    if corpus.is_empty() {
        return invalid("pretraining corpus is empty");
    }
    if let Some((s, _)) = corpus
        .iter()
        .find(|(s, t)| s.is_empty() || t.is_empty() || s.len() > config.max_length || t.len() > config.max_length)
    {
        return invalid(format!(
            "corpus pair of length {} violates 1..={}",
            s.len(),
            config.max_length
        ));
    }
    let mut opt = OptimizerState::new(config.learning_rate, config.stabilizer, config.weight_decay)?;
    let mut order: Vec<usize> = (0..corpus.len()).collect();
    let mut report = PretrainReport::default();
    for epoch in 1..=config.epochs {
        order.shuffle(rng);
        let mut cost = 0.0;
        for &i in &order {
            let (src, tgt) = &corpus[i];
            let (loss, tokens, mut grads) = loss_and_gradient(params, src, tgt, Some((config.dropout, &mut *rng)))?;
            cost += loss / tokens as f64;
            clip_gradient_norm(&mut grads, config.clip_threshold)?;
            optimizer_step(&mut opt, params, &grads)?;
        }
        let cost = cost / corpus.len() as f64;
        let bleu = greedy_corpus_bleu(params, corpus, config.max_length)?;
        log::info!("pretrain epoch {epoch}: cost {cost:.4} train BLEU {bleu:.4}");
        report.per_epoch_cost.push(cost);
        report.per_epoch_train_bleu.push(bleu);
        on_epoch(epoch, cost, bleu);
    }
    Ok(report)
}
