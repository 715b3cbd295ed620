//! Grid embeddings: RoIAlign pooling, a two-layer projection and one
//! residual self-attention block over all grids.

use crate::error::{Error, Result};
use crate::numerics::{roi_align, Tensor};
use crate::params::Dense;
use crate::splitter::GridStructure;

#[derive(Clone, Debug, PartialEq)]
pub struct EmbedParams {
    /// RoIAlign output size `R`.
    pub roi: usize,
    /// `C·R² × D`.
    pub w1: Dense,
    /// `D × D`.
    pub w2: Dense,
    pub query: Dense,
    pub key: Dense,
    pub value: Dense,
}

impl EmbedParams {
    pub fn dim(&self) -> usize {
        self.w2.outputs()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct EmbedOptions {
    /// Add a 2-D sinusoidal encoding of `(i, j)` to the attention inputs.
    pub positional: bool,
}

impl Default for EmbedOptions {
    fn default() -> Self {
        Self { positional: true }
    }
}

/// `M×N×D` grid embeddings.
#[derive(Clone, Debug, PartialEq)]
pub struct GridEmbedding {
    pub e: Tensor,
}

impl GridEmbedding {
    pub fn shape(&self) -> (usize, usize, usize) {
        let s = self.e.shape();
        (s[0], s[1], s[2])
    }

    pub fn vector(&self, i: usize, j: usize) -> &[f64] {
        let (_, n, d) = self.shape();
        &self.e.data()[(i * n + j) * d..(i * n + j + 1) * d]
    }
}

/// Sinusoidal code of `(i, j)`: the first half of the channels encodes the
/// row index, the second half the column index.
pub fn positional_encoding(i: usize, j: usize, d: usize) -> Vec<f64> {
    let half = d / 2;
    let mut out = vec![0.0; d];
    let (rows, cols) = out.split_at_mut(half);
    for (pos, part) in [(i, rows), (j, cols)] {
        let len = part.len();
        for (k, v) in part.iter_mut().enumerate() {
            let freq = 10000f64.powf(-((k / 2 * 2) as f64) / len.max(1) as f64);
            let a = pos as f64 * freq;
            *v = if k % 2 == 0 { a.sin() } else { a.cos() };
        }
    }
    out
}

fn check_box(b: [f64; 4], h: usize, w: usize) -> Result<()> {
    let (bw, bh) = (b[2] - b[0], b[3] - b[1]);
    if b[0] < -bw || b[1] < -bh || b[2] > w as f64 + bw || b[3] > h as f64 + bh {
        return Err(Error::Range(format!(
            "grid box {b:?} lies outside the {h}×{w} map by more than its own size"
        )));
    }
    Ok(())
}

/// Per-grid projection before the context block.
pub fn embed_local(f: &Tensor, grid: &GridStructure, params: &EmbedParams) -> Result<Tensor> {
    let (h, w, c) = f.dims3()?;
    let r = params.roi;
    if params.w1.inputs() != c * r * r {
        return Err(Error::shape(format!(
            "embedding expects C·R² = {} inputs, map gives {c}·{r}²",
            params.w1.inputs()
        )));
    }
    let d = params.dim();
    let mut out = Vec::with_capacity(grid.m * grid.n * d);
    for b in &grid.boxes {
        check_box(*b, h, w)?;
        let pooled = roi_align(f, *b, r)?;
        let hidden: Vec<f64> = params.w1.apply(pooled.data())?.into_iter().map(|v| v.max(0.0)).collect();
        out.extend(params.w2.apply(&hidden)?);
    }
    Tensor::new(vec![grid.m, grid.n, d], out)
}

/// Single-head residual self-attention over all `M·N` embeddings.
pub fn attend(e: &Tensor, params: &EmbedParams, opts: EmbedOptions) -> Result<Tensor> {
    let (m, n, d) = e.dims3()?;
    let count = m * n;
    let x: Vec<Vec<f64>> = (0..count)
        .map(|s| {
            let v = &e.data()[s * d..(s + 1) * d];
            if opts.positional {
                let pe = positional_encoding(s / n, s % n, d);
                v.iter().zip(pe).map(|(a, b)| a + b).collect()
            } else {
                v.to_vec()
            }
        })
        .collect();
    let proj = |l: &Dense| -> Result<Vec<Vec<f64>>> { x.iter().map(|v| l.apply(v)).collect() };
    let (q, k, v) = (proj(&params.query)?, proj(&params.key)?, proj(&params.value)?);
    let scale = (d as f64).sqrt();
    let mut out = e.data().to_vec();
    for a in 0..count {
        let logits: Vec<f64> = k
            .iter()
            .map(|kb| q[a].iter().zip(kb).map(|(x, y)| x * y).sum::<f64>() / scale)
            .collect();
        let mx = logits.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let w: Vec<f64> = logits.iter().map(|l| (l - mx).exp()).collect();
        let z: f64 = w.iter().sum();
        let row = &mut out[a * d..(a + 1) * d];
        for (wb, vb) in w.iter().zip(&v) {
            for (o, val) in row.iter_mut().zip(vb) {
                *o += wb / z * val;
            }
        }
    }
    Tensor::new(vec![m, n, d], out)
}

pub fn embed_grids(f: &Tensor, grid: &GridStructure, params: &EmbedParams, opts: EmbedOptions) -> Result<GridEmbedding> {
    let local = embed_local(f, grid, params)?;
    Ok(GridEmbedding {
        e: attend(&local, params, opts)?,
    })
}
