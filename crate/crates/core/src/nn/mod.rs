//! Recurrent network kernel with hand-written reverse-mode gradients.
//!
//! All arithmetic is `f64`. Forward passes are pure functions of explicit
//! parameter values; the `*_recorded` variants additionally return a tape
//! that the matching `backward` consumes.

mod activation;
mod bilstm;
pub mod checkpoint;
mod dropout;
mod gradcheck;
mod init;
mod lstm;
mod optim;
mod params;
mod tensor;

pub use activation::{cross_entropy_loss, sigmoid, softmax, softmax_cross_entropy_grad};
pub use bilstm::{bilstm_forward, bilstm_forward_recorded, BiLstmBackward, BiLstmParams, BiLstmTape};
pub use dropout::{apply_dropout, dropout_mask};
pub use gradcheck::{finite_difference_check, relative_error, GradCheckReport};
pub use init::init_uniform;
pub use lstm::{
    lstm_cell_forward, lstm_sequence_forward, lstm_sequence_forward_recorded, LstmBackward, LstmParams, LstmState,
    LstmTape,
};
pub use optim::{clip_gradient_norm, global_norm, optimizer_step, OptimizerState};
pub use params::Parameters;
pub use tensor::Tensor;

pub(crate) use params::prefixed;
pub(crate) use tensor::{axpy, dot};
