use super::Tensor;
use crate::error::Result;

/// A named collection of tensors that optimizers, clipping, gradient checks
/// and checkpoints can walk in a fixed order.
///
/// Gradients use the same type as the parameters they belong to.
pub trait Parameters {
    /// Tensors in canonical order with dotted names.
    fn tensors(&self) -> Vec<(String, &Tensor)>;

    /// Mutable tensors in the same order as [`Parameters::tensors`]. Frozen
    /// parameter sets refuse with an invalid-state error.
    fn tensors_mut(&mut self) -> Result<Vec<&mut Tensor>>;

    fn num_parameters(&self) -> usize {
        self.tensors().iter().map(|(_, t)| t.len()).sum()
    }

    /// Copy of every value in canonical order.
    fn flatten(&self) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.num_parameters());
        for (_, t) in self.tensors() {
            out.extend_from_slice(t.data());
        }
        out
    }
}

pub(crate) fn prefixed<'a>(prefix: &str, inner: Vec<(String, &'a Tensor)>) -> Vec<(String, &'a Tensor)> {
    inner.into_iter().map(|(n, t)| (format!("{prefix}.{n}"), t)).collect()
}
