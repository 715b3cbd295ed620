//! The Gather module: collapses a feature map into one context vector per
//! column (or row) position, then derives dynamic kernels and start-point
//! scores from it.

use crate::error::{Error, Result};
use crate::numerics::{conv2d, linear, max_pool, relu, Tensor};
use crate::params::{Conv, Dense};
use crate::Axis;

/// Weights of one Gather instance.
///
/// For the column axis the propagation kernels are `1×5` and the downsample
/// convolutions pool vertically; the row axis uses `5×1` kernels and pools
/// horizontally.
#[derive(Clone, Debug, PartialEq)]
pub struct GatherParams {
    pub down: [Conv; 3],
    pub prop_forward: Conv,
    pub prop_backward: Conv,
    pub kernel_head: Dense,
    pub score_head: Dense,
}

impl GatherParams {
    pub fn channels(&self) -> usize {
        self.kernel_head.inputs()
    }

    fn check(&self, axis: Axis, c: usize) -> Result<()> {
        let prop = match axis {
            Axis::Col => [1, 5],
            Axis::Row => [5, 1],
        };
        for (i, d) in self.down.iter().enumerate() {
            if d.weight.shape() != [3, 3, c, c] {
                return Err(Error::shape(format!(
                    "downsample conv {i} must be 3×3×{c}×{c}, got {:?}",
                    d.weight.shape()
                )));
            }
        }
        for p in [&self.prop_forward, &self.prop_backward] {
            if p.weight.shape() != [prop[0], prop[1], c, c] {
                return Err(Error::shape(format!(
                    "{axis} propagation kernel must be {}×{}×{c}×{c}, got {:?}",
                    prop[0],
                    prop[1],
                    p.weight.shape()
                )));
            }
        }
        if self.kernel_head.weight.shape() != [c, c] || self.score_head.weight.shape() != [c, 1] {
            return Err(Error::shape(format!(
                "heads must be {c}×{c} and {c}×1, got {:?} and {:?}",
                self.kernel_head.weight.shape(),
                self.score_head.weight.shape()
            )));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct GatherOutput {
    pub axis: Axis,
    /// `1×Wf×C` for columns, `Hf×1×C` for rows.
    pub context: Tensor,
    /// Same shape as `context`; one dynamic `1×1` kernel per position.
    pub kernels: Tensor,
    /// Start-point logits, one per position.
    pub scores: Vec<f64>,
}

impl GatherOutput {
    /// Kernel vector at a position along the gathered axis.
    pub fn kernel(&self, index: usize) -> &[f64] {
        let c = self.kernels.shape()[2];
        &self.kernels.data()[index * c..(index + 1) * c]
    }
}

/// Number of `×2` downsample blocks.
pub const DOWNSAMPLE_BLOCKS: usize = 3;

/// Smallest pooled extent that survives the three downsample blocks.
pub const MIN_EXTENT: usize = 1 << DOWNSAMPLE_BLOCKS;

/// Splits `t` into `Hf` slices of shape `1×W×C` (column axis) or `W` slices
/// of `H×1×C` (row axis).
fn slices(t: &Tensor, axis: Axis) -> Result<Vec<Tensor>> {
    let (h, w, c) = t.dims3()?;
    Ok(match axis {
        Axis::Col => (0..h)
            .map(|y| Tensor::new(vec![1, w, c], t.data()[y * w * c..(y + 1) * w * c].to_vec()))
            .collect::<Result<_>>()?,
        Axis::Row => (0..w).map(|x| Tensor::from_fn(&[h, 1, c], |i| t.at3(i[0], x, i[2]))).collect(),
    })
}

/// Forward pass of Gather on an `Hf×Wf×C` map.
pub fn gather_forward(f: &Tensor, axis: Axis, params: &GatherParams) -> Result<GatherOutput> {
    let (h, w, c) = f.dims3()?;
    if !f.all_finite() {
        return Err(Error::NonFinite("gather input".into()));
    }
    params.check(axis, c)?;
    let pooled = match axis {
        Axis::Col => h,
        Axis::Row => w,
    };
    if pooled < MIN_EXTENT {
        return Err(Error::shape(format!(
            "{axis} gather pools a dimension of {pooled}; need at least {MIN_EXTENT}"
        )));
    }
    let mut t = f.clone();
    for d in &params.down {
        t = match axis {
            Axis::Col => max_pool(&t, 2, 1)?,
            Axis::Row => max_pool(&t, 1, 2)?,
        };
        t = relu(&conv2d(&t, &d.weight, &d.bias)?);
    }

    let mut s = slices(&t, axis)?;
    for i in 1..s.len() {
        let msg = conv2d(&s[i - 1], &params.prop_forward.weight, &params.prop_forward.bias)?;
        s[i] = s[i].add(&msg)?;
    }
    for i in (0..s.len().saturating_sub(1)).rev() {
        let msg = conv2d(&s[i + 1], &params.prop_backward.weight, &params.prop_backward.bias)?;
        s[i] = s[i].add(&msg)?;
    }

    let len = match axis {
        Axis::Col => w,
        Axis::Row => h,
    };
    let mut mean = vec![0.0; len * c];
    for slice in &s {
        for (m, v) in mean.iter_mut().zip(slice.data()) {
            *m += v / s.len() as f64;
        }
    }
    let shape = match axis {
        Axis::Col => vec![1, len, c],
        Axis::Row => vec![len, 1, c],
    };
    let mut kernels = Vec::with_capacity(len * c);
    let mut scores = Vec::with_capacity(len);
    for g in mean.chunks_exact(c) {
        kernels.extend(linear(g, &params.kernel_head.weight, Some(&params.kernel_head.bias))?);
        scores.push(linear(g, &params.score_head.weight, Some(&params.score_head.bias))?[0]);
    }
    Ok(GatherOutput {
        axis,
        context: Tensor::new(shape.clone(), mean)?,
        kernels: Tensor::new(shape, kernels)?,
        scores,
    })
}
