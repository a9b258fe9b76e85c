//! Bidirectional-LSTM Q-network over the frozen decoder's hidden states.

use rand::Rng;

use crate::corpus::{EOS, PAD, SOS};
use crate::error::{invalid, Error, Result};
use crate::nn::checkpoint::Checkpoint;
use crate::nn::{
    bilstm_forward, bilstm_forward_recorded, init_uniform, prefixed, BiLstmParams, LstmState, Parameters, Tensor,
};
use crate::stategf::{decode_forward, encode, DecodeTrace, StateGfParams};
use crate::TokenId;

pub const CHECKPOINT_KIND: &str = "qnet";

/// Number of scalar features appended to each decoder hidden vector.
pub const EXTRA_FEATURES: usize = 2;

/// The sentence pair the Q-network acts on.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct DqnState {
    pub source: Vec<TokenId>,
    pub decoded: Vec<TokenId>,
}

impl DqnState {
    pub fn new(source: Vec<TokenId>, decoded: Vec<TokenId>) -> Result<Self> {
        if source.is_empty() || decoded.is_empty() {
            return invalid("state needs a non-empty source and decoded sentence");
        }
        Ok(DqnState { source, decoded })
    }
}

/// `q = w · x + b` with a single output.
#[derive(Clone, Debug, PartialEq)]
pub struct LinearHead {
    /// `1 × D`
    pub weights: Tensor,
    /// `[1]`
    pub bias: Tensor,
}

impl LinearHead {
    fn zeros(dim: usize) -> Self {
        LinearHead {
            weights: Tensor::zeros(&[1, dim]),
            bias: Tensor::zeros(&[1]),
        }
    }

    fn apply(&self, x: &[f64]) -> f64 {
        crate::nn::dot(self.weights.data(), x) + self.bias.data()[0]
    }

    /// Accumulates gradients of `d · apply(x)` and returns `d · w`.
    fn backward(&self, x: &[f64], d: f64, grads: &mut LinearHead) -> Vec<f64> {
        crate::nn::axpy(d, x, grads.weights.data_mut());
        grads.bias.data_mut()[0] += d;
        self.weights.data().iter().map(|w| w * d).collect()
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct QNetParams {
    pub bilstm: BiLstmParams,
    /// Per-position replace value from each bidirectional output.
    pub position_head: LinearHead,
    /// No-modification value from the mean of the bidirectional outputs.
    pub noop_head: LinearHead,
}

impl QNetParams {
    /// `hidden_dim` must equal the state generation function's hidden size,
    /// since both LSTM directions start from the encoder's final state.
    pub fn new<R: Rng + ?Sized>(hidden_dim: usize, halfwidth: f64, rng: &mut R) -> Result<Self> {
        if hidden_dim == 0 {
            return invalid("Q-network hidden size must be positive");
        }
        let d = 2 * hidden_dim;
        Ok(QNetParams {
            bilstm: BiLstmParams::uniform(hidden_dim + EXTRA_FEATURES, hidden_dim, halfwidth, rng)?,
            position_head: LinearHead {
                weights: init_uniform(&[1, d], halfwidth, rng)?,
                bias: Tensor::zeros(&[1]),
            },
            noop_head: LinearHead {
                weights: init_uniform(&[1, d], halfwidth, rng)?,
                bias: Tensor::zeros(&[1]),
            },
        })
    }

    pub fn zeros(hidden_dim: usize) -> Self {
        QNetParams {
            bilstm: BiLstmParams::zeros(hidden_dim + EXTRA_FEATURES, hidden_dim),
            position_head: LinearHead::zeros(2 * hidden_dim),
            noop_head: LinearHead::zeros(2 * hidden_dim),
        }
    }

    pub fn zeros_like(&self) -> Self {
        QNetParams::zeros(self.hidden_dim())
    }

    pub fn hidden_dim(&self) -> usize {
        self.bilstm.hidden_dim()
    }

    pub fn to_checkpoint(&self) -> Checkpoint {
        Checkpoint::from_params(CHECKPOINT_KIND, self)
    }

    pub fn from_checkpoint(ck: &Checkpoint) -> Result<Self> {
        if ck.kind != CHECKPOINT_KIND {
            return Err(Error::Format(format!(
                "expected a {CHECKPOINT_KIND} checkpoint, found {}",
                ck.kind
            )));
        }
        let shape = ck.get("position_head.weights")?.shape().to_vec();
        if shape.len() != 2 || shape[1] % 2 != 0 {
            return Err(Error::Format("malformed position head".into()));
        }
        let mut q = QNetParams::zeros(shape[1] / 2);
        ck.restore_into(&mut q)?;
        Ok(q)
    }
}

impl Parameters for QNetParams {
    fn tensors(&self) -> Vec<(String, &Tensor)> {
        let mut out = prefixed("bilstm", self.bilstm.tensors());
        out.push(("position_head.weights".into(), &self.position_head.weights));
        out.push(("position_head.bias".into(), &self.position_head.bias));
        out.push(("noop_head.weights".into(), &self.noop_head.weights));
        out.push(("noop_head.bias".into(), &self.noop_head.bias));
        out
    }

    fn tensors_mut(&mut self) -> Result<Vec<&mut Tensor>> {
        let mut out = self.bilstm.tensors_mut()?;
        out.push(&mut self.position_head.weights);
        out.push(&mut self.position_head.bias);
        out.push(&mut self.noop_head.weights);
        out.push(&mut self.noop_head.bias);
        Ok(out)
    }
}

/// Highest-probability token other than `current` and the PAD/SOS/EOS
/// markers; lowest id on ties.
pub fn replacement_candidate(probabilities: &[f64], current: TokenId) -> TokenId {
    let mut best: Option<usize> = None;
    for (id, &p) in probabilities.iter().enumerate() {
        let tok = id as TokenId;
        if tok == current || tok == PAD || tok == SOS || tok == EOS {
            continue;
        }
        if best.is_none_or(|b| p > probabilities[b]) {
            best = Some(id);
        }
    }
    best.unwrap_or(current as usize) as TokenId
}

/// Everything the Q-network reads from the frozen state generation function.
#[derive(Clone, Debug, PartialEq)]
pub struct StateFeatures {
    /// Teacher-forced decoder pass with inputs `[SOS] + decoded[..T-1]`, so
    /// step `t` scores position `t` of the decoded sentence.
    pub trace: DecodeTrace,
    /// Token each replace action would write, one per position.
    pub candidates: Vec<TokenId>,
    /// `[h_t ; p_t(decoded[t]) ; p_t(candidate[t])]` per position.
    pub inputs: Vec<Vec<f64>>,
}

impl StateFeatures {
    pub fn len(&self) -> usize {
        self.inputs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.inputs.is_empty()
    }

    pub fn encoder_final(&self) -> &LstmState {
        &self.trace.encoder_final
    }
}

pub fn state_features(stategf: &StateGfParams, state: &DqnState) -> Result<StateFeatures> {
    if state.decoded.is_empty() {
        return invalid("decoded sentence is empty");
    }
    let encoder_final = encode(stategf, &state.source)?;
    let mut inputs_tokens = Vec::with_capacity(state.decoded.len());
    inputs_tokens.push(SOS);
    inputs_tokens.extend_from_slice(&state.decoded[..state.decoded.len() - 1]);
    let trace = decode_forward(stategf, &encoder_final, &inputs_tokens)?;
    let mut candidates = Vec::with_capacity(trace.len());
    let mut inputs = Vec::with_capacity(trace.len());
    for (t, &cur) in state.decoded.iter().enumerate() {
        let p = &trace.probability_lists[t];
        if (cur as usize) >= p.len() {
            return invalid(format!("token id {cur} outside vocabulary"));
        }
        let cand = replacement_candidate(p, cur);
        let mut x = trace.decoder_hiddens[t].clone();
        x.push(p[cur as usize]);
        x.push(p[cand as usize]);
        candidates.push(cand);
        inputs.push(x);
    }
    Ok(StateFeatures {
        trace,
        candidates,
        inputs,
    })
}

fn check_dims(qnet: &QNetParams, features: &StateFeatures) -> Result<()> {
    if features.is_empty() {
        return invalid("decoded sentence is empty");
    }
    if features.encoder_final().dim() != qnet.hidden_dim() {
        return Err(Error::Internal(format!(
            "Q-network hidden size {} differs from the encoder's {}",
            qnet.hidden_dim(),
            features.encoder_final().dim()
        )));
    }
    Ok(())
}

fn mean(rows: &[Vec<f64>]) -> Vec<f64> {
    let mut m = vec![0.0; rows[0].len()];
    for r in rows {
        crate::nn::axpy(1.0, r, &mut m);
    }
    let n = rows.len() as f64;
    m.iter_mut().for_each(|v| *v /= n);
    m
}

/// `T + 1` values: replace at each position, then no-modification.
pub fn q_values(qnet: &QNetParams, features: &StateFeatures) -> Result<Vec<f64>> {
    check_dims(qnet, features)?;
    let init = features.encoder_final();
    let outputs = bilstm_forward(&qnet.bilstm, &features.inputs, init, init)?;
    let mut q: Vec<f64> = outputs.iter().map(|o| qnet.position_head.apply(o)).collect();
    q.push(qnet.noop_head.apply(&mean(&outputs)));
    Ok(q)
}

/// Q-values of `state` together with the features they were computed from.
pub fn q_forward(qnet: &QNetParams, stategf: &StateGfParams, state: &DqnState) -> Result<(Vec<f64>, StateFeatures)> {
    let features = state_features(stategf, state)?;
    let q = q_values(qnet, &features)?;
    Ok((q, features))
}

/// Squared error `(target − Q(s, a))²`, the current `Q(s, a)`, and the
/// gradient with respect to the Q-network only.
pub fn q_loss_and_gradient(
    qnet: &QNetParams,
    features: &StateFeatures,
    action_index: usize,
    target: f64,
) -> Result<(f64, f64, QNetParams)> {
    check_dims(qnet, features)?;
    let n = features.len();
    if action_index > n {
        return invalid(format!("action {action_index} outside 0..={n}"));
    }
    let init = features.encoder_final();
    let (outputs, tape) = bilstm_forward_recorded(&qnet.bilstm, &features.inputs, init, init)?;
    let mut grads = qnet.zeros_like();
    let mut d_out = vec![vec![0.0; 2 * qnet.hidden_dim()]; n];
    let q = if action_index < n {
        qnet.position_head.apply(&outputs[action_index])
    } else {
        qnet.noop_head.apply(&mean(&outputs))
    };
    let residual = q - target;
    let dq = 2.0 * residual;
    if action_index < n {
        d_out[action_index] = qnet
            .position_head
            .backward(&outputs[action_index], dq, &mut grads.position_head);
    } else {
        let d_mean = qnet.noop_head.backward(&mean(&outputs), dq, &mut grads.noop_head);
        for d in d_out.iter_mut() {
            crate::nn::axpy(1.0 / n as f64, &d_mean, d);
        }
    }
    grads.bilstm = qnet.bilstm.backward(&tape, &d_out)?.params;
    Ok((residual * residual, q, grads))
}
