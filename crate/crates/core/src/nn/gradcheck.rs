use super::params::Parameters;
use crate::error::{invalid, Result};

#[derive(Clone, Debug, PartialEq)]
pub struct GradCheckReport {
    pub max_relative_error: f64,
    /// Flat indices (canonical tensor order) whose error exceeded the tolerance.
    pub failing_parameter_indices: Vec<usize>,
    pub checked: usize,
}

impl GradCheckReport {
    pub fn passed(&self) -> bool {
        self.failing_parameter_indices.is_empty()
    }
}

/// `|a − n| / max(|a|, |n|, 1e-8)`
pub fn relative_error(analytic: f64, numeric: f64) -> f64 {
    (analytic - numeric).abs() / analytic.abs().max(numeric.abs()).max(1e-8)
}

/// Compares `analytic` against central differences of `loss` at `params`,
/// perturbing every scalar parameter in turn.
///
/// The five-point central stencil
/// `(−f(x+2h) + 8f(x+h) − 8f(x−h) + f(x−2h)) / 12h` is used. Its O(h⁴)
/// truncation error allows steps around 1e-3, where cancellation noise stays
/// near 1e-12 and tiny gradients can still be resolved.
pub fn finite_difference_check<P, F>(
    params: &P,
    analytic: &P,
    loss: F,
    step: f64,
    tolerance: f64,
) -> Result<GradCheckReport>
where
    P: Parameters + Clone,
    F: Fn(&P) -> f64,
{
    if !(step > 0.0) {
        return invalid(format!("finite-difference step must be positive, got {step}"));
    }
    let grad = analytic.flatten();
    if grad.len() != params.num_parameters() {
        return invalid("analytic gradient has a different layout from the parameters");
    }
    let mut probe = params.clone();
    let mut report = GradCheckReport {
        max_relative_error: 0.0,
        failing_parameter_indices: Vec::new(),
        checked: 0,
    };
    let mut flat_index = 0;
    let n_tensors = probe.tensors().len();
    for ti in 0..n_tensors {
        let len = probe.tensors()[ti].1.len();
        for k in 0..len {
            let original = probe.tensors()[ti].1.data()[k];
            let mut at = |offset: f64| -> Result<f64> {
                probe.tensors_mut()?[ti].data_mut()[k] = original + offset;
                Ok(loss(&probe))
            };
            let (p2, p1, m1, m2) = (at(2.0 * step)?, at(step)?, at(-step)?, at(-2.0 * step)?);
            probe.tensors_mut()?[ti].data_mut()[k] = original;
            let numeric = (8.0 * (p1 - m1) - (p2 - m2)) / (12.0 * step);
            let err = relative_error(grad[flat_index], numeric);
            if err > report.max_relative_error {
                report.max_relative_error = err;
            }
            if err > tolerance {
                report.failing_parameter_indices.push(flat_index);
            }
            report.checked += 1;
            flat_index += 1;
        }
    }
    Ok(report)
}
