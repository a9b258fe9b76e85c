use rand::Rng;

use crate::error::{invalid, Result};

/// Inverted-dropout mask: each entry is `0` with probability `rate`, otherwise
/// `1 / (1 - rate)`.
pub fn dropout_mask<R: Rng + ?Sized>(len: usize, rate: f64, rng: &mut R) -> Result<Vec<f64>> {
    if !(0.0..1.0).contains(&rate) {
        return invalid(format!("dropout rate must be in [0, 1), got {rate}"));
    }
    if rate == 0.0 {
        return Ok(vec![1.0; len]);
    }
    let keep = 1.0 / (1.0 - rate);
    Ok((0..len)
        .map(|_| if rng.gen::<f64>() < rate { 0.0 } else { keep })
        .collect())
}

/// Applies dropout when `training` is set; identity otherwise.
pub fn apply_dropout<R: Rng + ?Sized>(values: &[f64], rate: f64, rng: &mut R, training: bool) -> Result<Vec<f64>> {
    if !(0.0..1.0).contains(&rate) {
        return invalid(format!("dropout rate must be in [0, 1), got {rate}"));
    }
    if !training {
        return Ok(values.to_vec());
    }
    let mask = dropout_mask(values.len(), rate, rng)?;
    Ok(values.iter().zip(&mask).map(|(v, m)| v * m).collect())
}
