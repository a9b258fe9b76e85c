use super::params::Parameters;
use crate::error::{invalid, Result};

/// AdaGrad with decoupled weight decay and no momentum.
///
/// Accumulators are allocated lazily on the first step so one state can be
/// created before the parameter set it will drive.
#[derive(Clone, Debug, PartialEq)]
pub struct OptimizerState {
    accumulated_squared_gradients: Vec<Vec<f64>>,
    pub learning_rate: f64,
    pub epsilon_stabilizer: f64,
    pub weight_decay: f64,
}

impl OptimizerState {
    pub fn new(learning_rate: f64, epsilon_stabilizer: f64, weight_decay: f64) -> Result<Self> {
        if !(learning_rate > 0.0) || !learning_rate.is_finite() {
            return invalid(format!("learning rate must be positive, got {learning_rate}"));
        }
        if !(epsilon_stabilizer >= 0.0) || !(weight_decay >= 0.0) {
            return invalid("stabilizer and weight decay must be non-negative");
        }
        Ok(OptimizerState {
            accumulated_squared_gradients: Vec::new(),
            learning_rate,
            epsilon_stabilizer,
            weight_decay,
        })
    }

    pub fn accumulators(&self) -> &[Vec<f64>] {
        &self.accumulated_squared_gradients
    }
}

/// One AdaGrad update:
/// `acc += g²; θ ← θ·(1 − lr·wd) − lr·g / (√acc + ε)`.
pub fn optimizer_step<P, G>(state: &mut OptimizerState, params: &mut P, gradients: &G) -> Result<()>
where
    P: Parameters + ?Sized,
    G: Parameters + ?Sized,
{
    let grads = gradients.tensors();
    if grads.iter().any(|(_, g)| !g.all_finite()) {
        return invalid("gradient contains NaN or infinity");
    }
    let shapes: Vec<Vec<usize>> = params.tensors().iter().map(|(_, t)| t.shape().to_vec()).collect();
    if shapes.len() != grads.len() || shapes.iter().zip(&grads).any(|(s, (_, g))| s != g.shape()) {
        return invalid("gradient layout does not match parameters");
    }
    let tensors = params.tensors_mut()?;
    if state.accumulated_squared_gradients.is_empty() {
        state.accumulated_squared_gradients = tensors.iter().map(|t| vec![0.0; t.len()]).collect();
    } else if state.accumulated_squared_gradients.len() != tensors.len()
        || state
            .accumulated_squared_gradients
            .iter()
            .zip(&tensors)
            .any(|(a, t)| a.len() != t.len())
    {
        return invalid("optimizer state belongs to a different parameter layout");
    }
    let lr = state.learning_rate;
    let decay = 1.0 - lr * state.weight_decay;
    let eps = state.epsilon_stabilizer;
    for ((tensor, (_, grad)), acc) in tensors
        .into_iter()
        .zip(&grads)
        .zip(state.accumulated_squared_gradients.iter_mut())
    {
        for ((theta, &g), a) in tensor.data_mut().iter_mut().zip(grad.data()).zip(acc.iter_mut()) {
            *a += g * g;
            let step = if g == 0.0 { 0.0 } else { lr * g / (a.sqrt() + eps) };
            *theta = *theta * decay - step;
        }
    }
    Ok(())
}

/// L2 norm over every entry of every tensor.
pub fn global_norm<G: Parameters + ?Sized>(gradients: &G) -> f64 {
    gradients
        .tensors()
        .iter()
        .flat_map(|(_, t)| t.data().iter())
        .map(|v| v * v)
        .sum::<f64>()
        .sqrt()
}

/// Rescales all gradients by `threshold / norm` when the global norm exceeds
/// `threshold`. Returns the norm before clipping.
pub fn clip_gradient_norm<G: Parameters + ?Sized>(gradients: &mut G, threshold: f64) -> Result<f64> {
    if !(threshold > 0.0) {
        return invalid(format!("clip threshold must be positive, got {threshold}"));
    }
    let norm = global_norm(gradients);
    if norm > threshold {
        let k = threshold / norm;
        for t in gradients.tensors_mut()? {
            t.scale(k);
        }
    }
    Ok(norm)
}
