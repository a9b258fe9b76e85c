use rand::Rng;

use super::Tensor;
use crate::error::{invalid, Result};

/// Tensor with entries drawn i.i.d. from `U[-halfwidth, +halfwidth]`.
pub fn init_uniform<R: Rng + ?Sized>(shape: &[usize], halfwidth: f64, rng: &mut R) -> Result<Tensor> {
    if !(halfwidth > 0.0) || !halfwidth.is_finite() {
        return invalid(format!("uniform init halfwidth must be positive, got {halfwidth}"));
    }
    let n: usize = shape.iter().product();
    let data = (0..n).map(|_| rng.gen_range(-halfwidth..=halfwidth)).collect();
    Tensor::from_vec(shape, data)
}
