//! Finite-difference check of the encoder-decoder loss and the Q-network loss
//! on a tiny random model.
//!
//! ```text
//! cargo run --release --example gradient_check
//! ```

use rand::Rng as _;
use seqdqn::dqn::{q_loss_and_gradient, q_values, state_features, DqnState, QNetParams};
use seqdqn::nn::finite_difference_check;
use seqdqn::rng::{stream, Phase, Rng};
use seqdqn::stategf::{loss_and_gradient, teacher_forced_loss, StateGfConfig, StateGfParams};
use seqdqn::TokenId;

fn sentence(rng: &mut Rng, len: usize) -> Vec<TokenId> {
    (0..len).map(|_| rng.gen_range(4..16)).collect()
}

fn main() -> seqdqn::Result<()> {
    let mut rng = stream(1, Phase::Pretrain);
    let cfg = StateGfConfig {
        vocab_size: 16,
        embed_dim: 8,
        hidden_dim: 8,
        init_halfwidth: 0.3,
        reverse_source: false,
    };
    let gf = StateGfParams::new(&cfg, &mut rng)?;
    let (source, target) = (sentence(&mut rng, 5), sentence(&mut rng, 6));

    let (loss, predicted, grads) = loss_and_gradient(&gf, &source, &target, None::<(f64, &mut Rng)>)?;
    let summed = |p: &StateGfParams| teacher_forced_loss(p, &source, &target).unwrap() * predicted as f64;
    let report = finite_difference_check(&gf, &grads, summed, 1e-2, 1e-4)?;
    println!(
        "encoder-decoder: loss {loss:.4}, {} scalars, max relative error {:.2e}",
        report.checked, report.max_relative_error
    );

    let state = DqnState::new(source, sentence(&mut rng, 6))?;
    let features = state_features(&gf, &state)?;
    let qnet = QNetParams::new(8, 0.3, &mut rng)?;
    let action = 2;
    let (loss, q, grads) = q_loss_and_gradient(&qnet, &features, action, 0.5)?;
    let squared = |p: &QNetParams| (q_values(p, &features).unwrap()[action] - 0.5).powi(2);
    let report = finite_difference_check(&qnet, &grads, squared, 1e-2, 1e-4)?;
    println!(
        "Q-network: Q {q:.4}, loss {loss:.4}, {} scalars, max relative error {:.2e}",
        report.checked, report.max_relative_error
    );
    Ok(())
}
