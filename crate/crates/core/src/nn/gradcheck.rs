use super::{Network, Tensor};
use crate::{Error, Result};

/// Largest relative disagreement between backpropagated gradients and
/// central differences of the training-mode loss, over every parameter.
/// The relative error of one entry is `|a - n| / max(|a|, |n|, 1e-8)`.
pub fn gradient_check(net: &Network, batch: &Tensor, labels: &[usize], epsilon: f64) -> Result<f64> {
    if !(1e-7..=1e-3).contains(&epsilon) {
        return Err(Error::InvalidParameter(format!("epsilon {epsilon} outside [1e-7, 1e-3]")));
    }
    let (loss, _, analytic, _) = net.loss_and_gradients(batch, labels)?;
    if !loss.is_finite() {
        return Err(Error::NonFiniteLoss { epoch: 0, batch: 0 });
    }
    let mut probe = net.clone();
    let mut worst = 0.0f64;
    for (t, grad) in analytic.iter().enumerate() {
        for (i, &a) in grad.iter().enumerate() {
            let original = probe.parameters_mut()[t][i];
            probe.parameters_mut()[t][i] = original + epsilon;
            let plus = probe.loss(batch, labels)?;
            probe.parameters_mut()[t][i] = original - epsilon;
            let minus = probe.loss(batch, labels)?;
            probe.parameters_mut()[t][i] = original;
            if !plus.is_finite() || !minus.is_finite() {
                return Err(Error::NonFiniteLoss { epoch: 0, batch: 0 });
            }
            let numeric = (plus - minus) / (2.0 * epsilon);
            let rel = (a - numeric).abs() / a.abs().max(numeric.abs()).max(1e-8);
            worst = worst.max(rel);
        }
    }
    Ok(worst)
}
