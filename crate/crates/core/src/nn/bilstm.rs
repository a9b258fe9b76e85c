use rand::Rng;

use super::lstm::{lstm_sequence_forward, lstm_sequence_forward_recorded, LstmParams, LstmState, LstmTape};
use super::params::{prefixed, Parameters};
use super::Tensor;
use crate::error::{invalid, Error, Result};

/// Forward (left-to-right) and backward (right-to-left) LSTMs over the same
/// input sequence.
#[derive(Clone, Debug, PartialEq)]
pub struct BiLstmParams {
    pub forward: LstmParams,
    pub backward: LstmParams,
}

impl BiLstmParams {
    pub fn zeros(input_dim: usize, hidden_dim: usize) -> Self {
        BiLstmParams {
            forward: LstmParams::zeros(input_dim, hidden_dim),
            backward: LstmParams::zeros(input_dim, hidden_dim),
        }
    }

    pub fn uniform<R: Rng + ?Sized>(input_dim: usize, hidden_dim: usize, halfwidth: f64, rng: &mut R) -> Result<Self> {
        Ok(BiLstmParams {
            forward: LstmParams::uniform(input_dim, hidden_dim, halfwidth, rng)?,
            backward: LstmParams::uniform(input_dim, hidden_dim, halfwidth, rng)?,
        })
    }

    pub fn hidden_dim(&self) -> usize {
        self.forward.hidden_dim()
    }

    pub fn input_dim(&self) -> usize {
        self.forward.input_dim()
    }

    pub fn zeros_like(&self) -> Self {
        BiLstmParams::zeros(self.input_dim(), self.hidden_dim())
    }

    fn check(&self) -> Result<()> {
        if self.forward.input_dim() != self.backward.input_dim()
            || self.forward.hidden_dim() != self.backward.hidden_dim()
        {
            return invalid("forward and backward LSTMs disagree on dimensions");
        }
        Ok(())
    }
}

impl Parameters for BiLstmParams {
    fn tensors(&self) -> Vec<(String, &Tensor)> {
        let mut out = prefixed("forward", self.forward.tensors());
        out.extend(prefixed("backward", self.backward.tensors()));
        out
    }

    fn tensors_mut(&mut self) -> Result<Vec<&mut Tensor>> {
        let mut out = self.forward.tensors_mut()?;
        out.extend(self.backward.tensors_mut()?);
        Ok(out)
    }
}

fn concat(fwd: &[LstmState], bwd_rev: &[LstmState]) -> Vec<Vec<f64>> {
    let n = fwd.len();
    (0..n)
        .map(|t| {
            let mut v = fwd[t].hidden.clone();
            v.extend_from_slice(&bwd_rev[n - 1 - t].hidden);
            v
        })
        .collect()
}

/// `output[t] = [forward_hidden[t]; backward_hidden[t]]`, where the backward
/// LSTM reads the inputs right to left.
pub fn bilstm_forward(
    params: &BiLstmParams,
    inputs: &[Vec<f64>],
    init_fwd: &LstmState,
    init_bwd: &LstmState,
) -> Result<Vec<Vec<f64>>> {
    params.check()?;
    if inputs.is_empty() {
        return invalid("bidirectional LSTM sequence is empty");
    }
    let fwd = lstm_sequence_forward(&params.forward, inputs, init_fwd)?;
    let reversed: Vec<Vec<f64>> = inputs.iter().rev().cloned().collect();
    let bwd = lstm_sequence_forward(&params.backward, &reversed, init_bwd)?;
    Ok(concat(&fwd, &bwd))
}

#[derive(Clone, Debug, Default)]
pub struct BiLstmTape {
    forward: LstmTape,
    backward: LstmTape,
}

#[derive(Clone, Debug)]
pub struct BiLstmBackward {
    pub params: BiLstmParams,
    pub inputs: Vec<Vec<f64>>,
    pub init_fwd: LstmState,
    pub init_bwd: LstmState,
}

pub fn bilstm_forward_recorded(
    params: &BiLstmParams,
    inputs: &[Vec<f64>],
    init_fwd: &LstmState,
    init_bwd: &LstmState,
) -> Result<(Vec<Vec<f64>>, BiLstmTape)> {
    params.check()?;
    if inputs.is_empty() {
        return invalid("bidirectional LSTM sequence is empty");
    }
    let (fwd, ftape) = lstm_sequence_forward_recorded(&params.forward, inputs, init_fwd)?;
    let reversed: Vec<Vec<f64>> = inputs.iter().rev().cloned().collect();
    let (bwd, btape) = lstm_sequence_forward_recorded(&params.backward, &reversed, init_bwd)?;
    Ok((
        concat(&fwd, &bwd),
        BiLstmTape {
            forward: ftape,
            backward: btape,
        },
    ))
}

impl BiLstmParams {
    /// Gradients given `d_output[t]` (length `2H`) for every output position.
    pub fn backward(&self, tape: &BiLstmTape, d_output: &[Vec<f64>]) -> Result<BiLstmBackward> {
        if tape.forward.is_empty() {
            return Err(Error::InvalidState(
                "backward called without a recorded forward pass".into(),
            ));
        }
        let h = self.hidden_dim();
        let n = d_output.len();
        if d_output.iter().any(|d| d.len() != 2 * h) {
            return invalid("bidirectional output gradient has wrong size");
        }
        let d_fwd: Vec<Vec<f64>> = d_output.iter().map(|d| d[..h].to_vec()).collect();
        let d_bwd: Vec<Vec<f64>> = (0..n).map(|k| d_output[n - 1 - k][h..].to_vec()).collect();
        let fb = self.forward.backward(&tape.forward, &d_fwd, None)?;
        let bb = self.backward.backward(&tape.backward, &d_bwd, None)?;
        let inputs = (0..n)
            .map(|t| {
                fb.inputs[t]
                    .iter()
                    .zip(&bb.inputs[n - 1 - t])
                    .map(|(a, b)| a + b)
                    .collect()
            })
            .collect();
        Ok(BiLstmBackward {
            params: BiLstmParams {
                forward: fb.params,
                backward: bb.params,
            },
            inputs,
            init_fwd: fb.init,
            init_bwd: bb.init,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::nn::{finite_difference_check, lstm_cell_forward};
    use crate::rng::{stream, Phase};

    fn rv(n: usize, rng: &mut impl Rng) -> Vec<f64> {
        (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect()
    }

    #[test]
    fn single_step_is_concat_of_cells() {
        let mut rng = stream(1, Phase::Dqn);
        let p = BiLstmParams::uniform(3, 2, 0.5, &mut rng).unwrap();
        let x = rv(3, &mut rng);
        let z = LstmState::zeros(2);
        let out = bilstm_forward(&p, std::slice::from_ref(&x), &z, &z).unwrap();
        let mut want = lstm_cell_forward(&p.forward, &x, &z).unwrap().hidden;
        want.extend(lstm_cell_forward(&p.backward, &x, &z).unwrap().hidden);
        assert_eq!(out, vec![want]);
    }

    #[test]
    fn palindrome_with_tied_directions_mirrors() {
        let mut rng = stream(2, Phase::Dqn);
        let fwd = LstmParams::uniform(3, 2, 0.5, &mut rng).unwrap();
        let p = BiLstmParams {
            forward: fwd.clone(),
            backward: fwd,
        };
        let a = rv(3, &mut rng);
        let b = rv(3, &mut rng);
        let xs = vec![a.clone(), b.clone(), b, a];
        let z = LstmState::zeros(2);
        let out = bilstm_forward(&p, &xs, &z, &z).unwrap();
        let n = out.len();
        for t in 0..n {
            let mirrored = &out[n - 1 - t];
            assert_eq!(out[t][..2], mirrored[2..]);
            assert_eq!(out[t][2..], mirrored[..2]);
        }
    }

    #[test]
    fn equals_two_sequence_runs() {
        let mut rng = stream(3, Phase::Dqn);
        let p = BiLstmParams::uniform(4, 3, 0.5, &mut rng).unwrap();
        let xs: Vec<Vec<f64>> = (0..6).map(|_| rv(4, &mut rng)).collect();
        let i1 = LstmState {
            hidden: rv(3, &mut rng),
            cell: rv(3, &mut rng),
        };
        let i2 = LstmState {
            hidden: rv(3, &mut rng),
            cell: rv(3, &mut rng),
        };
        let out = bilstm_forward(&p, &xs, &i1, &i2).unwrap();
        let f = lstm_sequence_forward(&p.forward, &xs, &i1).unwrap();
        let rev: Vec<_> = xs.iter().rev().cloned().collect();
        let b = lstm_sequence_forward(&p.backward, &rev, &i2).unwrap();
        for t in 0..6 {
            assert_eq!(out[t].len(), 6);
            assert_eq!(out[t][..3], f[t].hidden[..]);
            assert_eq!(out[t][3..], b[5 - t].hidden[..]);
        }
        assert!(bilstm_forward(&p, &[], &i1, &i2).is_err());
    }

    #[test]
    fn gradients_match_finite_differences() {
        for seed in 0..5u64 {
            let mut rng = stream(20 + seed, Phase::Dqn);
            let p = BiLstmParams::uniform(3, 3, 0.5, &mut rng).unwrap();
            let xs: Vec<Vec<f64>> = (0..5).map(|_| rv(3, &mut rng)).collect();
            let w: Vec<Vec<f64>> = (0..5).map(|_| rv(6, &mut rng)).collect();
            let z = LstmState {
                hidden: rv(3, &mut rng),
                cell: rv(3, &mut rng),
            };
            let loss = |q: &BiLstmParams| {
                let out = bilstm_forward(q, &xs, &z, &z).unwrap();
                out.iter()
                    .zip(&w)
                    .map(|(o, w)| o.iter().zip(w).map(|(a, b)| a * b).sum::<f64>())
                    .sum::<f64>()
            };
            let (_, tape) = bilstm_forward_recorded(&p, &xs, &z, &z).unwrap();
            let back = p.backward(&tape, &w).unwrap();
            let r = finite_difference_check(&p, &back.params, loss, 1e-5, 1e-4).unwrap();
            assert!(r.max_relative_error < 1e-4, "{r:?}");

            // input gradients by central differences
            for t in 0..5 {
                for j in 0..3 {
                    let mut plus = xs.clone();
                    plus[t][j] += 1e-5;
                    let mut minus = xs.clone();
                    minus[t][j] -= 1e-5;
                    let f = |inp: &[Vec<f64>]| {
                        bilstm_forward(&p, inp, &z, &z)
                            .unwrap()
                            .iter()
                            .zip(&w)
                            .map(|(o, w)| o.iter().zip(w).map(|(a, b)| a * b).sum::<f64>())
                            .sum::<f64>()
                    };
                    let num = (f(&plus) - f(&minus)) / 2e-5;
                    assert!(crate::nn::relative_error(back.inputs[t][j], num) < 1e-4);
                }
            }
        }
    }
}
