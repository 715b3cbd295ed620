use super::Tensor;
use crate::error::{Error, Result};

/// Floor on the relative-error denominator so exact zeros compare cleanly.
const REL_FLOOR: f64 = 1e-12;

/// Compares an analytic gradient to central finite differences.
///
/// Returns the largest elementwise `|analytic - numeric| / max(|analytic|, |numeric|)`.
pub fn grad_check<F, G>(f: F, grad: G, t: &Tensor, eps: f64) -> Result<f64>
where
    F: Fn(&Tensor) -> Result<f64>,
    G: Fn(&Tensor) -> Result<Tensor>,
{
    if !(1e-6..=1e-3).contains(&eps) {
        return Err(Error::Range(format!("eps {eps} outside [1e-6, 1e-3]")));
    }
    let base = f(t)?;
    if !base.is_finite() {
        return Err(Error::NonFinite(format!("f(t) = {base}")));
    }
    let analytic = grad(t)?;
    if analytic.shape() != t.shape() {
        return Err(Error::shape(format!(
            "gradient shape {:?} differs from input {:?}",
            analytic.shape(),
            t.shape()
        )));
    }
    let mut worst = 0.0f64;
    let mut probe = t.data().to_vec();
    for i in 0..probe.len() {
        let orig = probe[i];
        probe[i] = orig + eps;
        let plus = f(&Tensor::new(t.shape().to_vec(), probe.clone())?)?;
        probe[i] = orig - eps;
        let minus = f(&Tensor::new(t.shape().to_vec(), probe.clone())?)?;
        probe[i] = orig;
        if !plus.is_finite() || !minus.is_finite() {
            return Err(Error::NonFinite(format!("f perturbed at element {i}")));
        }
        let numeric = (plus - minus) / (2.0 * eps);
        let a = analytic.data()[i];
        let denom = a.abs().max(numeric.abs()).max(REL_FLOOR);
        worst = worst.max((a - numeric).abs() / denom);
    }
    Ok(worst)
}
