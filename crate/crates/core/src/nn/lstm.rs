use rand::Rng;

use super::activation::sigmoid;
use super::init_uniform;
use super::params::Parameters;
use super::tensor::{axpy, Tensor};
use crate::error::{invalid, Error, Result};

/// Weights of a single LSTM layer without peepholes.
///
/// The four gate blocks are stacked row-wise in the order input, forget,
/// output, candidate: rows `[k·H, (k+1)·H)` of every tensor belong to gate `k`.
#[derive(Clone, Debug, PartialEq)]
pub struct LstmParams {
    /// `4H × I`
    pub input_weights: Tensor,
    /// `4H × H`
    pub recurrent_weights: Tensor,
    /// `4H`
    pub biases: Tensor,
}

#[derive(Clone, Debug, PartialEq)]
pub struct LstmState {
    pub hidden: Vec<f64>,
    pub cell: Vec<f64>,
}

impl LstmState {
    pub fn zeros(hidden_dim: usize) -> Self {
        LstmState {
            hidden: vec![0.0; hidden_dim],
            cell: vec![0.0; hidden_dim],
        }
    }

    pub fn dim(&self) -> usize {
        self.hidden.len()
    }
}

impl LstmParams {
    pub fn zeros(input_dim: usize, hidden_dim: usize) -> Self {
        LstmParams {
            input_weights: Tensor::zeros(&[4 * hidden_dim, input_dim]),
            recurrent_weights: Tensor::zeros(&[4 * hidden_dim, hidden_dim]),
            biases: Tensor::zeros(&[4 * hidden_dim]),
        }
    }

    pub fn uniform<R: Rng + ?Sized>(input_dim: usize, hidden_dim: usize, halfwidth: f64, rng: &mut R) -> Result<Self> {
        Ok(LstmParams {
            input_weights: init_uniform(&[4 * hidden_dim, input_dim], halfwidth, rng)?,
            recurrent_weights: init_uniform(&[4 * hidden_dim, hidden_dim], halfwidth, rng)?,
            biases: init_uniform(&[4 * hidden_dim], halfwidth, rng)?,
        })
    }

    pub fn input_dim(&self) -> usize {
        self.input_weights.cols()
    }

    pub fn hidden_dim(&self) -> usize {
        self.recurrent_weights.cols()
    }

    pub fn zeros_like(&self) -> Self {
        LstmParams::zeros(self.input_dim(), self.hidden_dim())
    }

    fn check(&self, x: &[f64], prev: &LstmState) -> Result<()> {
        let h = self.hidden_dim();
        if self.input_weights.rows() != 4 * h || self.recurrent_weights.rows() != 4 * h || self.biases.len() != 4 * h {
            return invalid("LSTM parameter shapes are inconsistent");
        }
        if x.len() != self.input_dim() {
            return invalid(format!(
                "LSTM input has length {}, expected {}",
                x.len(),
                self.input_dim()
            ));
        }
        if prev.hidden.len() != h || prev.cell.len() != h {
            return invalid(format!("LSTM state has wrong size, expected {h}"));
        }
        Ok(())
    }

    /// Activated gates `[i, f, o, g]` for one step.
    fn gates(&self, x: &[f64], h_prev: &[f64]) -> Vec<f64> {
        let h = self.hidden_dim();
        let mut z = self.biases.data().to_vec();
        self.input_weights.matvec_acc(x, &mut z);
        self.recurrent_weights.matvec_acc(h_prev, &mut z);
        for v in &mut z[..3 * h] {
            *v = sigmoid(*v);
        }
        for v in &mut z[3 * h..] {
            *v = v.tanh();
        }
        z
    }

    fn step_unchecked(&self, x: &[f64], prev: &LstmState) -> (LstmState, Vec<f64>, Vec<f64>) {
        let h = self.hidden_dim();
        let z = self.gates(x, &prev.hidden);
        let (i, rest) = z.split_at(h);
        let (f, rest) = rest.split_at(h);
        let (o, g) = rest.split_at(h);
        let cell: Vec<f64> = (0..h).map(|k| f[k] * prev.cell[k] + i[k] * g[k]).collect();
        let tanh_c: Vec<f64> = cell.iter().map(|c| c.tanh()).collect();
        let hidden = (0..h).map(|k| o[k] * tanh_c[k]).collect();
        (LstmState { hidden, cell }, z, tanh_c)
    }
}

impl Parameters for LstmParams {
    fn tensors(&self) -> Vec<(String, &Tensor)> {
        vec![
            ("input_weights".into(), &self.input_weights),
            ("recurrent_weights".into(), &self.recurrent_weights),
            ("biases".into(), &self.biases),
        ]
    }

    fn tensors_mut(&mut self) -> Result<Vec<&mut Tensor>> {
        Ok(vec![
            &mut self.input_weights,
            &mut self.recurrent_weights,
            &mut self.biases,
        ])
    }
}

/// One LSTM step: `c = f⊙c' + i⊙g`, `h = o⊙tanh(c)`.
pub fn lstm_cell_forward(params: &LstmParams, x: &[f64], prev: &LstmState) -> Result<LstmState> {
    params.check(x, prev)?;
    Ok(params.step_unchecked(x, prev).0)
}

/// Runs the cell left to right from `init`, returning one state per input.
pub fn lstm_sequence_forward(params: &LstmParams, inputs: &[Vec<f64>], init: &LstmState) -> Result<Vec<LstmState>> {
    if inputs.is_empty() {
        return invalid("LSTM sequence is empty");
    }
    let mut out: Vec<LstmState> = Vec::with_capacity(inputs.len());
    for x in inputs {
        let prev = out.last().unwrap_or(init);
        out.push(lstm_cell_forward(params, x, prev)?);
    }
    Ok(out)
}

#[derive(Clone, Debug)]
struct StepRecord {
    x: Vec<f64>,
    h_prev: Vec<f64>,
    c_prev: Vec<f64>,
    gates: Vec<f64>,
    tanh_c: Vec<f64>,
}

/// Everything the backward pass needs from a recorded forward run.
#[derive(Clone, Debug, Default)]
pub struct LstmTape {
    steps: Vec<StepRecord>,
}

impl LstmTape {
    pub fn len(&self) -> usize {
        self.steps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.steps.is_empty()
    }
}

/// Gradients produced by [`LstmParams::backward`].
#[derive(Clone, Debug)]
pub struct LstmBackward {
    pub params: LstmParams,
    pub inputs: Vec<Vec<f64>>,
    pub init: LstmState,
}

pub fn lstm_sequence_forward_recorded(
    params: &LstmParams,
    inputs: &[Vec<f64>],
    init: &LstmState,
) -> Result<(Vec<LstmState>, LstmTape)> {
    if inputs.is_empty() {
        return invalid("LSTM sequence is empty");
    }
    let mut out: Vec<LstmState> = Vec::with_capacity(inputs.len());
    let mut tape = LstmTape::default();
    for x in inputs {
        let prev = out.last().unwrap_or(init);
        params.check(x, prev)?;
        let (state, gates, tanh_c) = params.step_unchecked(x, prev);
        tape.steps.push(StepRecord {
            x: x.clone(),
            h_prev: prev.hidden.clone(),
            c_prev: prev.cell.clone(),
            gates,
            tanh_c,
        });
        out.push(state);
    }
    Ok((out, tape))
}

impl LstmParams {
    /// Backpropagation through time over a recorded run.
    ///
    /// `d_hidden[t]` is the loss gradient flowing into the hidden output of
    /// step `t`; `d_final_cell` is an extra gradient on the last cell state
    /// (used when the final state seeds another network).
    pub fn backward(
        &self,
        tape: &LstmTape,
        d_hidden: &[Vec<f64>],
        d_final_cell: Option<&[f64]>,
    ) -> Result<LstmBackward> {
        if tape.is_empty() {
            return Err(Error::InvalidState(
                "backward called without a recorded forward pass".into(),
            ));
        }
        if d_hidden.len() != tape.len() {
            return invalid(format!(
                "{} hidden gradients for a tape of length {}",
                d_hidden.len(),
                tape.len()
            ));
        }
        let h = self.hidden_dim();
        let mut grads = self.zeros_like();
        let mut d_inputs = vec![Vec::new(); tape.len()];
        let mut dh_next = vec![0.0; h];
        let mut dc_next = match d_final_cell {
            Some(dc) if dc.len() == h => dc.to_vec(),
            Some(_) => return invalid("final cell gradient has wrong size"),
            None => vec![0.0; h],
        };
        let mut da = vec![0.0; 4 * h];
        for (t, step) in tape.steps.iter().enumerate().rev() {
            if d_hidden[t].len() != h {
                return invalid("hidden gradient has wrong size");
            }
            let (i, rest) = step.gates.split_at(h);
            let (f, rest) = rest.split_at(h);
            let (o, g) = rest.split_at(h);
            for k in 0..h {
                let dh = d_hidden[t][k] + dh_next[k];
                let do_ = dh * step.tanh_c[k];
                let dc = dc_next[k] + dh * o[k] * (1.0 - step.tanh_c[k] * step.tanh_c[k]);
                let di = dc * g[k];
                let dg = dc * i[k];
                let df = dc * step.c_prev[k];
                dc_next[k] = dc * f[k];
                da[k] = di * i[k] * (1.0 - i[k]);
                da[h + k] = df * f[k] * (1.0 - f[k]);
                da[2 * h + k] = do_ * o[k] * (1.0 - o[k]);
                da[3 * h + k] = dg * (1.0 - g[k] * g[k]);
            }
            grads.input_weights.outer_acc(&da, &step.x);
            grads.recurrent_weights.outer_acc(&da, &step.h_prev);
            axpy(1.0, &da, grads.biases.data_mut());
            let mut dx = vec![0.0; self.input_dim()];
            self.input_weights.matvec_t_acc(&da, &mut dx);
            d_inputs[t] = dx;
            dh_next.iter_mut().for_each(|v| *v = 0.0);
            self.recurrent_weights.matvec_t_acc(&da, &mut dh_next);
        }
        Ok(LstmBackward {
            params: grads,
            inputs: d_inputs,
            init: LstmState {
                hidden: dh_next,
                cell: dc_next,
            },
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::nn::{finite_difference_check, Parameters};
    use crate::rng::{stream, Phase};
    use rand::Rng;

    fn scalar_sigmoid(x: f64) -> f64 {
        1.0 / (1.0 + (-x).exp())
    }

    // Recomputes every gate component from the raw weights, one scalar at a time.
    fn scalar_oracle(p: &LstmParams, x: &[f64], prev: &LstmState) -> LstmState {
        let h = p.hidden_dim();
        let pre = |gate: usize, k: usize| {
            let r = gate * h + k;
            let mut s = p.biases.data()[r];
            for (j, xj) in x.iter().enumerate() {
                s += p.input_weights.row(r)[j] * xj;
            }
            for j in 0..h {
                s += p.recurrent_weights.row(r)[j] * prev.hidden[j];
            }
            s
        };
        let mut hidden = vec![0.0; h];
        let mut cell = vec![0.0; h];
        for k in 0..h {
            let i = scalar_sigmoid(pre(0, k));
            let f = scalar_sigmoid(pre(1, k));
            let o = scalar_sigmoid(pre(2, k));
            let g = pre(3, k).tanh();
            cell[k] = f * prev.cell[k] + i * g;
            hidden[k] = o * cell[k].tanh();
        }
        LstmState { hidden, cell }
    }

    fn random_vec(n: usize, rng: &mut impl Rng) -> Vec<f64> {
        (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect()
    }

    #[test]
    fn zero_params_fixed_point() {
        let p = LstmParams::zeros(3, 4);
        let s = lstm_cell_forward(&p, &[1.0, -2.0, 0.5], &LstmState::zeros(4)).unwrap();
        assert_eq!(s.hidden, vec![0.0; 4]);
        assert_eq!(s.cell, vec![0.0; 4]);
        let seq = lstm_sequence_forward(&p, &vec![vec![0.7, 0.7, 0.7]; 5], &LstmState::zeros(4)).unwrap();
        assert!(seq.iter().all(|s| s.hidden.iter().all(|&v| v == 0.0)));
    }

    #[test]
    fn saturated_forget_gate_erases_memory() {
        let mut rng = stream(5, Phase::Pretrain);
        let mut p = LstmParams::uniform(3, 2, 0.15, &mut rng).unwrap();
        for k in 2..4 {
            p.biases.data_mut()[k] = -60.0;
        }
        let prev = LstmState {
            hidden: vec![0.1, -0.2],
            cell: vec![50.0, -40.0],
        };
        let x = [0.3, -0.1, 0.9];
        let s = lstm_cell_forward(&p, &x, &prev).unwrap();
        let fresh = lstm_cell_forward(
            &p,
            &x,
            &LstmState {
                hidden: prev.hidden.clone(),
                cell: vec![0.0; 2],
            },
        )
        .unwrap();
        for k in 0..2 {
            assert!((s.cell[k] - fresh.cell[k]).abs() < 1e-12);
        }
    }

    #[test]
    fn matches_scalar_oracle() {
        let mut rng = stream(9, Phase::Pretrain);
        for _ in 0..20 {
            let p = LstmParams::uniform(5, 4, 0.8, &mut rng).unwrap();
            let x = random_vec(5, &mut rng);
            let prev = LstmState {
                hidden: random_vec(4, &mut rng),
                cell: random_vec(4, &mut rng),
            };
            let got = lstm_cell_forward(&p, &x, &prev).unwrap();
            let want = scalar_oracle(&p, &x, &prev);
            for k in 0..4 {
                assert!((got.hidden[k] - want.hidden[k]).abs() < 1e-14);
                assert!((got.cell[k] - want.cell[k]).abs() < 1e-14);
            }
        }
    }

    #[test]
    fn sequence_composes_cells() {
        let mut rng = stream(10, Phase::Pretrain);
        let p = LstmParams::uniform(3, 4, 0.5, &mut rng).unwrap();
        let xs: Vec<Vec<f64>> = (0..3).map(|_| random_vec(3, &mut rng)).collect();
        let init = LstmState::zeros(4);
        let seq = lstm_sequence_forward(&p, &xs[..1], &init).unwrap();
        assert_eq!(seq[0], lstm_cell_forward(&p, &xs[0], &init).unwrap());
        let seq = lstm_sequence_forward(&p, &xs, &init).unwrap();
        let mut s = init.clone();
        for x in &xs {
            s = scalar_oracle(&p, x, &s);
        }
        for k in 0..4 {
            assert!((seq[2].hidden[k] - s.hidden[k]).abs() < 1e-14);
        }
    }

    #[test]
    fn errors() {
        let p = LstmParams::zeros(3, 2);
        assert!(lstm_cell_forward(&p, &[1.0], &LstmState::zeros(2)).is_err());
        assert!(lstm_cell_forward(&p, &[1.0; 3], &LstmState::zeros(3)).is_err());
        assert!(lstm_sequence_forward(&p, &[], &LstmState::zeros(2)).is_err());
        let r = p.backward(&LstmTape::default(), &[], None);
        assert!(matches!(r, Err(Error::InvalidState(_))));
    }

    #[test]
    fn bptt_matches_finite_differences() {
        for seed in 0..5u64 {
            let mut rng = stream(100 + seed, Phase::Pretrain);
            let p = LstmParams::uniform(3, 4, 0.5, &mut rng).unwrap();
            let xs: Vec<Vec<f64>> = (0..5).map(|_| random_vec(3, &mut rng)).collect();
            let weights: Vec<Vec<f64>> = (0..5).map(|_| random_vec(4, &mut rng)).collect();
            let cell_w = random_vec(4, &mut rng);
            let init = LstmState {
                hidden: random_vec(4, &mut rng),
                cell: random_vec(4, &mut rng),
            };
            // loss = Σ_t w_t·h_t + u·c_T
            let loss = |q: &LstmParams| {
                let seq = lstm_sequence_forward(q, &xs, &init).unwrap();
                let mut l = 0.0;
                for (s, w) in seq.iter().zip(&weights) {
                    l += s.hidden.iter().zip(w).map(|(a, b)| a * b).sum::<f64>();
                }
                l + seq[4].cell.iter().zip(&cell_w).map(|(a, b)| a * b).sum::<f64>()
            };
            let (_, tape) = lstm_sequence_forward_recorded(&p, &xs, &init).unwrap();
            let back = p.backward(&tape, &weights, Some(&cell_w)).unwrap();
            let report = finite_difference_check(&p, &back.params, loss, 1e-5, 1e-4).unwrap();
            assert!(report.max_relative_error < 1e-4, "seed {seed}: {report:?}");
            assert_eq!(report.checked, p.num_parameters());
        }
    }
}
