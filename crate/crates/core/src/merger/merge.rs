//! Merged-map prediction: every grid's kernel vector is convolved (`1×1`)
//! with the feature vectors of all grids.

use super::embed::GridEmbedding;
use crate::error::{Error, Result};
use crate::labelgen::MergeLabels;
use crate::numerics::{sigmoid, sigmoid_focal_grad, sigmoid_focal_loss, LossConfig, Tensor};
use crate::params::Dense;

#[derive(Clone, Debug, PartialEq)]
pub struct MergeParams {
    /// Feature branch `E^f`, `D×D`.
    pub feature: Dense,
    /// Kernel branch `E^k`, `D×D`.
    pub kernel: Dense,
}

/// Probabilities and binary merge votes for every grid pair.
#[derive(Clone, Debug, PartialEq)]
pub struct MergedMaps {
    m: usize,
    n: usize,
    /// `M×N×M×N` logits.
    logits: Tensor,
    binary: Vec<bool>,
}

impl MergedMaps {
    /// Thresholds `σ(logits)` at `threshold` and forces every grid to vote
    /// for itself.
    pub fn from_logits(logits: Tensor, threshold: f64) -> Result<Self> {
        let s = logits.shape();
        if s.len() != 4 || s[0] != s[2] || s[1] != s[3] {
            return Err(Error::shape(format!("merged maps must be M×N×M×N, got {s:?}")));
        }
        if !logits.all_finite() {
            return Err(Error::NonFinite("merge logits".into()));
        }
        let (m, n) = (s[0], s[1]);
        let g = m * n;
        let mut binary: Vec<bool> = logits.data().iter().map(|&x| sigmoid(x) >= threshold).collect();
        for a in 0..g {
            binary[a * g + a] = true;
        }
        Ok(Self { m, n, logits, binary })
    }

    /// Maps that vote exactly for the members of each annotated cell.
    pub fn from_labels(labels: &MergeLabels, magnitude: f64) -> Self {
        let logits = labels.to_tensor().map(|t| if t > 0.5 { magnitude } else { -magnitude });
        Self::from_logits(logits, 0.5).expect("label tensor is square and finite")
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.m, self.n)
    }

    pub fn logits(&self) -> &Tensor {
        &self.logits
    }

    fn index(&self, i: usize, j: usize, k: usize, l: usize) -> usize {
        ((i * self.n + j) * self.m + k) * self.n + l
    }

    /// `m̂_{i,j}[k, l]`.
    pub fn prob(&self, i: usize, j: usize, k: usize, l: usize) -> f64 {
        sigmoid(self.logits.data()[self.index(i, j, k, l)])
    }

    /// `m_{i,j}[k, l]`.
    pub fn vote(&self, i: usize, j: usize, k: usize, l: usize) -> bool {
        self.binary[self.index(i, j, k, l)]
    }
}

pub fn merger_forward(e: &GridEmbedding, params: &MergeParams) -> Result<MergedMaps> {
    let (m, n, d) = e.shape();
    if params.feature.inputs() != d || params.kernel.inputs() != d {
        return Err(Error::shape(format!(
            "merge branches take {} and {} inputs, embeddings have {d}",
            params.feature.inputs(),
            params.kernel.inputs()
        )));
    }
    if params.feature.outputs() != params.kernel.outputs() {
        return Err(Error::shape("merge branches disagree on output width"));
    }
    let g = m * n;
    let mut feats = Vec::with_capacity(g);
    let mut kernels = Vec::with_capacity(g);
    for s in 0..g {
        let v = e.vector(s / n, s % n);
        feats.push(params.feature.apply(v)?);
        kernels.push(params.kernel.apply(v)?);
    }
    let mut logits = Vec::with_capacity(g * g);
    for k in &kernels {
        for f in &feats {
            logits.push(k.iter().zip(f).map(|(a, b)| a * b).sum());
        }
    }
    MergedMaps::from_logits(Tensor::new(vec![m, n, m, n], logits)?, 0.5)
}

fn check_target(logits: &Tensor, target: &MergeLabels) -> Result<()> {
    let (m, n) = (target.rows(), target.cols());
    if logits.shape() != [m, n, m, n] {
        return Err(Error::shape(format!("merge logits {:?} for a {m}×{n} target", logits.shape())));
    }
    Ok(())
}

/// Focal loss of every map normalized by the L1 norm of its target map,
/// averaged over grids.
pub fn loss_merge(logits: &Tensor, target: &MergeLabels, cfg: &LossConfig) -> Result<f64> {
    check_target(logits, target)?;
    let (m, n) = (target.rows(), target.cols());
    let g = m * n;
    let mut total = 0.0;
    for a in 0..g {
        let (i, j) = (a / n, a % n);
        let map = target.map(i, j);
        let norm = target.map_norm(i, j) as f64;
        let s: f64 = logits.data()[a * g..(a + 1) * g]
            .iter()
            .zip(&map)
            .map(|(&x, &y)| sigmoid_focal_loss(x, y, cfg))
            .sum();
        total += s / norm;
    }
    Ok(total / g as f64)
}

pub fn loss_merge_grad(logits: &Tensor, target: &MergeLabels, cfg: &LossConfig) -> Result<Tensor> {
    check_target(logits, target)?;
    let (m, n) = (target.rows(), target.cols());
    let g = m * n;
    let mut out = Vec::with_capacity(g * g);
    for a in 0..g {
        let (i, j) = (a / n, a % n);
        let map = target.map(i, j);
        let scale = 1.0 / (target.map_norm(i, j) as f64 * g as f64);
        out.extend(
            logits.data()[a * g..(a + 1) * g]
                .iter()
                .zip(&map)
                .map(|(&x, &y)| sigmoid_focal_grad(x, y, cfg) * scale),
        );
    }
    Tensor::new(logits.shape().to_vec(), out)
}
