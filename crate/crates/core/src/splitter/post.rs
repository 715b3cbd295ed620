//! From Gather outputs to separation lines: instance NMS, dynamic-kernel
//! masks and per-row (per-column) argmax.

use super::grid::Line;
use crate::error::{Error, Result};
use crate::numerics::{sigmoid, Tensor};
use crate::Axis;

pub const DEFAULT_THRESHOLD: f64 = 0.5;

/// Keeps the strongest index of every run whose probability reaches
/// `threshold`. Ties resolve to the earliest index.
pub fn instance_nms(scores: &[f64], threshold: f64) -> Vec<usize> {
    let mut out = Vec::new();
    let mut best: Option<(usize, f64)> = None;
    for (i, &s) in scores.iter().enumerate() {
        let p = sigmoid(s);
        if p >= threshold {
            if best.map_or(true, |(_, b)| p > b) {
                best = Some((i, p));
            }
        } else if let Some((j, _)) = best.take() {
            out.push(j);
        }
    }
    out.extend(best.map(|(j, _)| j));
    out
}

fn kernel_rows(kernels: &Tensor, c: usize) -> Result<usize> {
    let s = kernels.shape();
    if s.len() != 3 || (s[0] != 1 && s[1] != 1) || s[2] != c {
        return Err(Error::shape(format!("kernels must be 1×L×{c} or L×1×{c}, got {s:?}")));
    }
    Ok(s[0] * s[1])
}

/// Per-pixel dot products of `f_branch` with the picked kernels.
pub fn line_mask_logits(f_branch: &Tensor, kernels: &Tensor, picked: &[usize]) -> Result<Tensor> {
    let (h, w, c) = f_branch.dims3()?;
    let len = kernel_rows(kernels, c)?;
    if let Some(&bad) = picked.iter().find(|&&p| p >= len) {
        return Err(Error::Range(format!("picked index {bad} outside {len} kernels")));
    }
    let k = picked.len();
    let kd = kernels.data();
    let mut out = vec![0.0; h * w * k];
    for (px, feat) in f_branch.data().chunks_exact(c).enumerate() {
        for (ch, &p) in picked.iter().enumerate() {
            let kv = &kd[p * c..(p + 1) * c];
            out[px * k + ch] = feat.iter().zip(kv).map(|(a, b)| a * b).sum();
        }
    }
    Tensor::new(vec![h, w, k], out)
}

/// Instance masks in `(0, 1)`, one channel per picked kernel.
pub fn predict_line_masks(f_branch: &Tensor, kernels: &Tensor, picked: &[usize]) -> Result<Tensor> {
    Ok(line_mask_logits(f_branch, kernels, picked)?.map(sigmoid))
}

/// Traces one line through a single-channel `H×W` mask.
///
/// A column line takes the argmax over x in every row; a row line the
/// argmax over y in every column. Ties pick the smallest coordinate.
pub fn mask_to_line(mask: &Tensor, axis: Axis) -> Result<Line> {
    let (h, w) = match mask.rank() {
        2 => mask.dims2()?,
        3 if mask.shape()[2] == 1 => (mask.shape()[0], mask.shape()[1]),
        _ => return Err(Error::shape(format!("mask must be H×W, got {:?}", mask.shape()))),
    };
    if h == 0 || w == 0 {
        return Err(Error::shape("empty mask"));
    }
    if !mask.all_finite() {
        return Err(Error::NonFinite("line mask".into()));
    }
    let d = mask.data();
    let argmax = |vals: &mut dyn Iterator<Item = f64>| {
        let mut best = (0usize, f64::NEG_INFINITY);
        for (i, v) in vals.enumerate() {
            if v > best.1 {
                best = (i, v);
            }
        }
        best.0 as f64
    };
    let points = match axis {
        Axis::Col => (0..h)
            .map(|y| (argmax(&mut d[y * w..(y + 1) * w].iter().copied()), y as f64))
            .collect(),
        Axis::Row => (0..w).map(|x| (x as f64, argmax(&mut (0..h).map(|y| d[y * w + x])))).collect(),
    };
    Line::new(axis, points)
}

/// Traces every channel of an `H×W×K` mask stack.
pub fn masks_to_lines(masks: &Tensor, axis: Axis) -> Result<Vec<Line>> {
    let (_, _, k) = masks.dims3()?;
    (0..k).map(|ch| mask_to_line(&masks.channel(ch)?, axis)).collect()
}
