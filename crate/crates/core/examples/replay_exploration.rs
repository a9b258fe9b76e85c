//! Replay eviction order, uniform sampling, and error-biased exploration
//! frequencies against their closed forms.
//!
//! ```text
//! cargo run --release --example replay_exploration
//! ```

use seqdqn::dqn::{compute_error_positions, select_action_index, ActionChoice, DqnState, ReplayMemory, Transition};
use seqdqn::rng::{stream, Phase};

fn transition(id: u32) -> seqdqn::Result<Transition> {
    let state = DqnState::new(vec![4], vec![id])?;
    Ok(Transition {
        state: state.clone(),
        action: ActionChoice::NoModification,
        reward: 0,
        next_state: state,
        next_bleu: 0.0,
        terminal: false,
        target: vec![4],
    })
}

fn main() -> seqdqn::Result<()> {
    let mut rng = stream(1, Phase::Dqn);

    let mut memory = ReplayMemory::new(4)?;
    for id in 0..7 {
        memory.store(transition(id)?);
    }
    let kept: Vec<u32> = memory.iter().map(|t| t.state.decoded[0]).collect();
    println!("capacity 4 after storing 0..7: {kept:?}");

    let draws = 100_000;
    let mut counts = [0usize; 4];
    for _ in 0..draws {
        counts[(memory.sample(&mut rng)?.state.decoded[0] - 3) as usize] += 1;
    }
    let freq: Vec<String> = counts
        .iter()
        .map(|&c| format!("{:.4}", c as f64 / draws as f64))
        .collect();
    println!("uniform sampling, expected 0.25 each: {freq:?}");

    let decoded = [4, 9, 6, 7, 8];
    let target = [4, 5, 6, 7];
    let errors = compute_error_positions(&decoded, &target);
    let beta = 3.0;
    let actions = decoded.len() + 1;
    let total = actions as f64 - errors.len() as f64 + beta * errors.len() as f64;
    let q = vec![0.0; actions];
    let mut counts = vec![0usize; actions];
    for _ in 0..draws {
        counts[select_action_index(&q, 1.0, &errors, beta, &mut rng)?] += 1;
    }
    println!("errors at {errors:?}, beta {beta}");
    for (a, &c) in counts.iter().enumerate() {
        let expected = if errors.contains(&a) { beta } else { 1.0 } / total;
        println!("  action {a}: {:.4} (expected {expected:.4})", c as f64 / draws as f64);
    }
    Ok(())
}
