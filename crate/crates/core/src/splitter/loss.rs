//! Split-stage objectives and their analytic gradients.

use crate::error::{Error, Result};
use crate::numerics::{bce_grad, bce_loss, sigmoid_focal_grad, sigmoid_focal_loss, LossConfig, Tensor};

fn check_len(scores: &[f64], target: &[bool]) -> Result<()> {
    if scores.len() != target.len() {
        return Err(Error::shape(format!("{} scores for {} targets", scores.len(), target.len())));
    }
    if scores.is_empty() {
        return Err(Error::shape("empty score vector"));
    }
    Ok(())
}

/// Mean binary cross-entropy between start-point logits and the instance
/// vector.
pub fn loss_instance(scores: &[f64], target: &[bool]) -> Result<f64> {
    check_len(scores, target)?;
    let n = scores.len() as f64;
    Ok(scores.iter().zip(target).map(|(&x, &y)| bce_loss(x, y)).sum::<f64>() / n)
}

pub fn loss_instance_grad(scores: &[f64], target: &[bool]) -> Result<Vec<f64>> {
    check_len(scores, target)?;
    let n = scores.len() as f64;
    Ok(scores.iter().zip(target).map(|(&x, &y)| bce_grad(x, y) / n).collect())
}

/// Positive-pixel count of every channel; errors on an empty channel.
fn positives(pred: &Tensor, target: &Tensor) -> Result<Vec<f64>> {
    let (_, _, k) = pred.dims3()?;
    if pred.shape() != target.shape() {
        return Err(Error::shape(format!(
            "prediction {:?} and target {:?} differ",
            pred.shape(),
            target.shape()
        )));
    }
    if k == 0 {
        return Err(Error::shape("segmentation loss needs at least one channel"));
    }
    let mut count = vec![0.0; k];
    for (i, &t) in target.data().iter().enumerate() {
        if t > 0.5 {
            count[i % k] += 1.0;
        }
    }
    if let Some(ch) = count.iter().position(|&c| c == 0.0) {
        return Err(Error::Degenerate(format!("target channel {ch} has no positive pixel")));
    }
    Ok(count)
}

/// Focal loss per channel normalized by the channel's positive-pixel count,
/// averaged over channels.
pub fn loss_segmentation(pred: &Tensor, target: &Tensor, cfg: &LossConfig) -> Result<f64> {
    let count = positives(pred, target)?;
    let k = count.len();
    let mut sum = vec![0.0; k];
    for (i, (&x, &t)) in pred.data().iter().zip(target.data()).enumerate() {
        sum[i % k] += sigmoid_focal_loss(x, t > 0.5, cfg);
    }
    Ok(sum.iter().zip(&count).map(|(s, c)| s / c).sum::<f64>() / k as f64)
}

pub fn loss_segmentation_grad(pred: &Tensor, target: &Tensor, cfg: &LossConfig) -> Result<Tensor> {
    let count = positives(pred, target)?;
    let k = count.len();
    let data = pred
        .data()
        .iter()
        .zip(target.data())
        .enumerate()
        .map(|(i, (&x, &t))| sigmoid_focal_grad(x, t > 0.5, cfg) / (count[i % k] * k as f64))
        .collect();
    Tensor::new(pred.shape().to_vec(), data)
}
