use crate::error::{invalid, Result};

#[inline]
pub fn sigmoid(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}

/// Numerically stable softmax (max-subtracted).
pub fn softmax(logits: &[f64]) -> Result<Vec<f64>> {
    if logits.is_empty() {
        return invalid("softmax of an empty vector");
    }
    if logits.iter().any(|v| !v.is_finite()) {
        return invalid("softmax input contains NaN or infinity");
    }
    let max = logits.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let mut out: Vec<f64> = logits.iter().map(|&v| (v - max).exp()).collect();
    let sum: f64 = out.iter().sum();
    out.iter_mut().for_each(|v| *v /= sum);
    Ok(out)
}

/// `-ln p[target]`.
pub fn cross_entropy_loss(probabilities: &[f64], target: usize) -> Result<f64> {
    match probabilities.get(target) {
        Some(&p) => Ok(-p.ln()),
        None => invalid(format!(
            "target class {target} out of range for {} classes",
            probabilities.len()
        )),
    }
}

/// Gradient of `cross_entropy_loss(softmax(z), target)` with respect to `z`.
pub fn softmax_cross_entropy_grad(probabilities: &[f64], target: usize) -> Result<Vec<f64>> {
    if target >= probabilities.len() {
        return invalid(format!(
            "target class {target} out of range for {} classes",
            probabilities.len()
        ));
    }
    let mut g = probabilities.to_vec();
    g[target] -= 1.0;
    Ok(g)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn softmax_examples() {
        assert_eq!(softmax(&[0.0, 0.0]).unwrap(), vec![0.5, 0.5]);
        let p = softmax(&[3f64.ln(), 0.0]).unwrap();
        assert!((p[0] - 0.75).abs() < 1e-15 && (p[1] - 0.25).abs() < 1e-15);
        let a = softmax(&[1000.0, 1000.5]).unwrap();
        let b = softmax(&[0.0, 0.5]).unwrap();
        for (x, y) in a.iter().zip(&b) {
            assert!((x - y).abs() < 1e-12);
        }
    }

    #[test]
    fn softmax_rejects_non_finite() {
        assert!(softmax(&[f64::NAN, 1.0]).is_err());
        assert!(softmax(&[f64::INFINITY]).is_err());
        assert!(softmax(&[]).is_err());
    }

    #[test]
    fn cross_entropy_examples() {
        assert_eq!(cross_entropy_loss(&[0.0, 1.0], 1).unwrap(), 0.0);
        let uniform = cross_entropy_loss(&[0.25; 4], 2).unwrap();
        assert!((uniform - 4f64.ln()).abs() < 1e-12);
        assert!((uniform - 1.3863).abs() < 1e-4);
        let p = cross_entropy_loss(&[0.9, 0.1], 1).unwrap();
        assert!((p - 10f64.ln()).abs() < 1e-12);
        assert!(cross_entropy_loss(&[1.0], 1).is_err());
    }

    #[test]
    fn softmax_ce_gradient_closed_form() {
        let p = softmax(&[0.3, -1.2, 2.0]).unwrap();
        let g = softmax_cross_entropy_grad(&p, 2).unwrap();
        assert_eq!(g, vec![p[0], p[1], p[2] - 1.0]);
    }
}
