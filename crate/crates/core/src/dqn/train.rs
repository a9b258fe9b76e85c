//! Q-network training: episodes over greedy decodes, replay, Bellman targets.

use rand::seq::SliceRandom;
use rand::Rng;

use super::policy::{apply_action, compute_error_positions, select_action};
use super::qnet::{q_forward, q_loss_and_gradient, q_values, state_features, DqnState, QNetParams};
use super::replay::{ReplayMemory, Transition};
use crate::corpus::Pair;
use crate::error::{invalid, Result};
use crate::metric::{reward_from_bleu, smoothed_bleu, BleuConfig, RewardConfig};
use crate::nn::{clip_gradient_norm, optimizer_step, OptimizerState, Parameters};
use crate::stategf::{greedy_decode, FrozenStateGf, StateGfParams};

#[derive(Clone, Debug, PartialEq)]
pub struct DqnTrainConfig {
    /// λ
    pub discount: f64,
    /// σ: an episode ends once BLEU exceeds it.
    pub bleu_threshold: f64,
    pub epsilon_start: f64,
    pub epsilon_final: f64,
    pub epsilon_anneal_steps: usize,
    /// β
    pub error_bias_weight: f64,
    pub target_sync_period: usize,
    /// Episodes take `multiplier · l` actions for a length-`l` target.
    pub episode_length_multiplier: usize,
    pub replay_capacity: usize,
    pub batch_size: usize,
    pub epochs: usize,
    pub learning_rate: f64,
    pub stabilizer: f64,
    pub weight_decay: f64,
    pub clip_threshold: f64,
    pub init_halfwidth: f64,
    pub max_length: usize,
}

impl Default for DqnTrainConfig {
    fn default() -> Self {
        DqnTrainConfig {
            discount: 0.95,
            bleu_threshold: 0.92,
            epsilon_start: 1.0,
            epsilon_final: 0.1,
            epsilon_anneal_steps: 20_000,
            error_bias_weight: 3.0,
            target_sync_period: 100,
            episode_length_multiplier: 2,
            replay_capacity: 50_000,
            batch_size: 1,
            epochs: 15,
            learning_rate: 0.05,
            stabilizer: 1e-8,
            weight_decay: 0.00016,
            clip_threshold: 15.0,
            init_halfwidth: 0.15,
            max_length: 30,
        }
    }
}

impl DqnTrainConfig {
    pub fn validate(&self) -> Result<()> {
        let unit = |v: f64| (0.0..=1.0).contains(&v);
        if !(0.0..1.0).contains(&self.discount) {
            return invalid(format!("discount {} outside [0, 1)", self.discount));
        }
        if !(self.bleu_threshold > 0.0 && self.bleu_threshold < 1.0) {
            return invalid(format!("BLEU threshold {} outside (0, 1)", self.bleu_threshold));
        }
        if !unit(self.epsilon_start) || !unit(self.epsilon_final) {
            return invalid("epsilon values must lie in [0, 1]");
        }
        if !(self.error_bias_weight >= 1.0 && self.error_bias_weight.is_finite()) {
            return invalid("error bias weight must be at least 1");
        }
        if self.target_sync_period == 0
            || self.episode_length_multiplier == 0
            || self.replay_capacity == 0
            || self.batch_size == 0
            || self.max_length == 0
        {
            return invalid("periods, capacities and sizes must be positive");
        }
        if !(self.learning_rate > 0.0) || !(self.clip_threshold > 0.0) || !(self.init_halfwidth > 0.0) {
            return invalid("learning rate, clip threshold and init half-width must be positive");
        }
        if !(self.stabilizer > 0.0) || !(self.weight_decay >= 0.0) {
            return invalid("stabilizer must be positive and weight decay non-negative");
        }
        Ok(())
    }

    /// Linear anneal from `epsilon_start` to `epsilon_final`, then constant.
    pub fn epsilon_at(&self, step: usize) -> f64 {
        if self.epsilon_anneal_steps == 0 || step >= self.epsilon_anneal_steps {
            return self.epsilon_final;
        }
        let frac = step as f64 / self.epsilon_anneal_steps as f64;
        self.epsilon_start + (self.epsilon_final - self.epsilon_start) * frac
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EpochLog {
    pub epoch: usize,
    /// Mean over episodes of the summed rewards.
    pub mean_reward: f64,
    /// Mean smoothed BLEU of the final decode of each episode.
    pub mean_bleu: f64,
    /// ε at the end of the epoch.
    pub epsilon: f64,
}

#[derive(Clone, Debug)]
pub struct TrainOutput {
    pub qnet: QNetParams,
    pub log: Vec<EpochLog>,
    pub replay: ReplayMemory,
    pub steps: usize,
    /// Episodes skipped because the greedy decode was empty.
    pub skipped_episodes: usize,
}

/// `r` for terminal transitions, else `r + λ · max_a' Q_target(s', a')`.
pub fn compute_target(
    transition: &Transition,
    target_qnet: &QNetParams,
    stategf: &StateGfParams,
    config: &DqnTrainConfig,
) -> Result<f64> {
    let r = transition.reward as f64;
    if transition.terminal {
        return Ok(r);
    }
    let (q, _) = q_forward(target_qnet, stategf, &transition.next_state)?;
    let best = q.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    Ok(r + config.discount * best)
}

/// One optimizer step on `Σ (q_i − Q(s_i, a_i))²` over `batch` (averaged).
/// Only the Q-network is updated. Returns the mean loss.
pub fn dqn_gradient_step(
    qnet: &mut QNetParams,
    stategf: &StateGfParams,
    batch: &[(&Transition, f64)],
    optimizer: &mut OptimizerState,
    clip_threshold: f64,
) -> Result<f64> {
    if batch.is_empty() {
        return invalid("empty update batch");
    }
    let mut grads = qnet.zeros_like();
    let mut loss = 0.0;
    for (transition, target_q) in batch {
        let features = state_features(stategf, &transition.state)?;
        let action = transition.action.index(transition.state.decoded.len());
        let (l, _, g) = q_loss_and_gradient(qnet, &features, action, *target_q)?;
        loss += l;
        for (dst, src) in grads.tensors_mut()?.into_iter().zip(g.tensors()) {
            dst.add_assign(src.1);
        }
    }
    let n = batch.len() as f64;
    if batch.len() > 1 {
        for t in grads.tensors_mut()? {
            t.scale(1.0 / n);
        }
    }
    clip_gradient_norm(&mut grads, clip_threshold)?;
    optimizer_step(optimizer, qnet, &grads)?;
    Ok(loss / n)
}

/// Trains a fresh Q-network against a frozen state generation function.
pub fn train_dqn<R: Rng + ?Sized>(
    stategf: &FrozenStateGf,
    corpus: &[Pair],
    config: &DqnTrainConfig,
    rng: &mut R,
) -> Result<TrainOutput> {
    train_dqn_with(stategf, corpus, config, rng, |_| {})
}

/// [`train_dqn`] with a callback after every epoch.
pub fn train_dqn_with<R, F>(
    stategf: &FrozenStateGf,
    corpus: &[Pair],
    config: &DqnTrainConfig,
    rng: &mut R,
    mut on_epoch: F,
) -> Result<TrainOutput>
where
    R: Rng + ?Sized,
    F: FnMut(&EpochLog),
{
    config.validate()?;
    if corpus.is_empty() {
        return invalid("DQN training corpus is empty");
    }
    if corpus.iter().any(|(s, t)| s.is_empty() || t.is_empty()) {
        return invalid("DQN training pairs must be non-empty");
    }
    let gf: &StateGfParams = stategf;
    let bleu_cfg = BleuConfig::default();
    let reward_cfg = RewardConfig::default();
    let mut qnet = QNetParams::new(gf.hidden_dim(), config.init_halfwidth, rng)?;
    let mut target_net = qnet.clone();
    let mut optimizer = OptimizerState::new(config.learning_rate, config.stabilizer, config.weight_decay)?;
    let mut replay = ReplayMemory::new(config.replay_capacity)?;
    let mut order: Vec<usize> = (0..corpus.len()).collect();
    let mut log = Vec::with_capacity(config.epochs);
    let mut step = 0usize;
    let mut skipped = 0usize;

    for epoch in 1..=config.epochs {
        order.shuffle(rng);
        let (mut reward_sum, mut bleu_sum, mut episodes) = (0.0, 0.0, 0usize);
        for &i in &order {
            let (source, target) = &corpus[i];
            let desen0 = greedy_decode(gf, source, config.max_length)?.output_tokens();
            if desen0.is_empty() {
                skipped += 1;
                continue;
            }
            let mut state = DqnState::new(source.clone(), desen0)?;
            let mut bleu = smoothed_bleu(&state.decoded, target, &bleu_cfg)?;
            let mut episode_reward = 0.0;
            for _ in 0..config.episode_length_multiplier * target.len() {
                let epsilon = config.epsilon_at(step);
                let features = state_features(gf, &state)?;
                let q = q_values(&qnet, &features)?;
                let errors = compute_error_positions(&state.decoded, target);
                let action = select_action(
                    &q,
                    epsilon,
                    &errors,
                    config.error_bias_weight,
                    &features.candidates,
                    rng,
                )?;
                let next_state = apply_action(&state, &action)?;
                let next_bleu = smoothed_bleu(&next_state.decoded, target, &bleu_cfg)?;
                let reward = reward_from_bleu(bleu, next_bleu, &reward_cfg)?;
                let terminal = next_bleu > config.bleu_threshold;
                replay.store(Transition {
                    state: state.clone(),
                    action,
                    reward,
                    next_state: next_state.clone(),
                    next_bleu,
                    terminal,
                    target: target.clone(),
                });

                let mut batch = Vec::with_capacity(config.batch_size);
                for _ in 0..config.batch_size {
                    let sample = replay.sample(rng)?;
                    let q_target = compute_target(sample, &target_net, gf, config)?;
                    batch.push((sample, q_target));
                }
                dqn_gradient_step(&mut qnet, gf, &batch, &mut optimizer, config.clip_threshold)?;

                step += 1;
                if step.is_multiple_of(config.target_sync_period) {
                    target_net = qnet.clone();
                }
                episode_reward += reward as f64;
                state = next_state;
                bleu = next_bleu;
                if terminal {
                    break;
                }
            }
            reward_sum += episode_reward;
            bleu_sum += bleu;
            episodes += 1;
        }
        let n = episodes.max(1) as f64;
        let entry = EpochLog {
            epoch,
            mean_reward: reward_sum / n,
            mean_bleu: bleu_sum / n,
            epsilon: config.epsilon_at(step),
        };
        log::info!(
            "dqn epoch {epoch}: mean reward {:.4} mean BLEU {:.4} epsilon {:.3}",
            entry.mean_reward,
            entry.mean_bleu,
            entry.epsilon
        );
        on_epoch(&entry);
        log.push(entry);
    }
    Ok(TrainOutput {
        qnet,
        log,
        replay,
        steps: step,
        skipped_episodes: skipped,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dqn::policy::ActionChoice;
    use crate::rng::{stream, Phase};
    use crate::stategf::{freeze, StateGfConfig};

    fn gf() -> StateGfParams {
        let cfg = StateGfConfig {
            vocab_size: 12,
            embed_dim: 4,
            hidden_dim: 4,
            init_halfwidth: 0.3,
            reverse_source: false,
        };
        StateGfParams::new(&cfg, &mut stream(5, Phase::Pretrain)).unwrap()
    }

    fn transition(reward: i8, next_bleu: f64, terminal: bool) -> Transition {
        let s = DqnState::new(vec![4, 5], vec![4, 6]).unwrap();
        Transition {
            state: s.clone(),
            action: ActionChoice::Replace {
                position: 1,
                new_token: 5,
            },
            reward,
            next_state: DqnState::new(vec![4, 5], vec![4, 5]).unwrap(),
            next_bleu,
            terminal,
            target: vec![4, 5],
        }
    }

    #[test]
    fn epsilon_schedule() {
        let c = DqnTrainConfig {
            epsilon_anneal_steps: 10,
            ..DqnTrainConfig::default()
        };
        assert_eq!(c.epsilon_at(0), 1.0);
        assert!((c.epsilon_at(5) - 0.55).abs() < 1e-12);
        assert_eq!(c.epsilon_at(10), 0.1);
        assert_eq!(c.epsilon_at(1000), 0.1);
    }

    #[test]
    fn config_validation() {
        assert!(DqnTrainConfig::default().validate().is_ok());
        for bad in [
            DqnTrainConfig {
                discount: 1.0,
                ..Default::default()
            },
            DqnTrainConfig {
                bleu_threshold: 0.0,
                ..Default::default()
            },
            DqnTrainConfig {
                epsilon_final: 1.2,
                ..Default::default()
            },
            DqnTrainConfig {
                error_bias_weight: 0.5,
                ..Default::default()
            },
            DqnTrainConfig {
                batch_size: 0,
                ..Default::default()
            },
        ] {
            assert!(bad.validate().is_err());
        }
    }

    #[test]
    fn target_examples() {
        let g = gf();
        let c = DqnTrainConfig::default();
        let zero = QNetParams::zeros(4);
        assert_eq!(compute_target(&transition(1, 0.95, true), &zero, &g, &c).unwrap(), 1.0);
        assert_eq!(
            compute_target(&transition(-1, 0.3, false), &zero, &g, &c).unwrap(),
            -1.0
        );
        let mut q = QNetParams::zeros(4);
        q.noop_head.bias.data_mut()[0] = 0.8;
        let t = compute_target(&transition(0, 0.3, false), &q, &g, &c).unwrap();
        assert!((t - 0.76).abs() < 1e-12);
    }

    #[test]
    fn zero_residual_only_decays() {
        let g = gf();
        let q0 = QNetParams::new(4, 0.3, &mut stream(1, Phase::Dqn)).unwrap();
        let t = transition(0, 0.5, false);
        let f = state_features(&g, &t.state).unwrap();
        let current = q_values(&q0, &f).unwrap()[1];
        let mut q = q0.clone();
        let mut opt = OptimizerState::new(0.05, 1e-8, 0.001).unwrap();
        dqn_gradient_step(&mut q, &g, &[(&t, current)], &mut opt, 15.0).unwrap();
        for (a, b) in q.flatten().iter().zip(q0.flatten()) {
            assert!((a - b * (1.0 - 0.05 * 0.001)).abs() < 1e-15);
        }
    }

    #[test]
    fn training_is_deterministic_and_leaves_stategf_untouched() {
        let g = gf();
        let before = g.flatten();
        let frozen = freeze(g);
        let corpus: Vec<Pair> = (4..9u32)
            .map(|k| (vec![k, k + 1, k + 2], vec![k, k + 1, k + 2]))
            .collect();
        let cfg = DqnTrainConfig {
            epochs: 2,
            epsilon_anneal_steps: 20,
            max_length: 6,
            ..DqnTrainConfig::default()
        };
        let a = train_dqn(&frozen, &corpus, &cfg, &mut stream(3, Phase::Dqn)).unwrap();
        let b = train_dqn(&frozen, &corpus, &cfg, &mut stream(3, Phase::Dqn)).unwrap();
        assert_eq!(a.log, b.log);
        assert_eq!(a.qnet, b.qnet);
        assert_eq!(a.log.len(), 2);
        let after = frozen.flatten();
        assert!(before.iter().zip(&after).all(|(x, y)| x.to_bits() == y.to_bits()));
        assert!(train_dqn(&frozen, &[], &cfg, &mut stream(3, Phase::Dqn)).is_err());
    }
}
