//! Model weights: layer types, seeded initialization and the weights bundle.
//!
//! A bundle is a sequence of concatenated `SEM2` records in a fixed order:
//! column Gather, row Gather, column and row feature branches, embedder,
//! merger. Every layer contributes its weight followed by its bias (rank 1).
//! Channel width, embedding size and RoI resolution are recovered from the
//! shapes.

use crate::error::{Error, Result};
use crate::merger::{EmbedParams, MergeParams};
use crate::numerics::{io, Tensor};
use crate::splitter::GatherParams;
use crate::Axis;
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use std::path::Path;

/// Convolution weights `kh×kw×Cin×Cout` and bias.
#[derive(Clone, Debug, PartialEq)]
pub struct Conv {
    pub weight: Tensor,
    pub bias: Vec<f64>,
}

/// Linear map `in×out` and bias.
#[derive(Clone, Debug, PartialEq)]
pub struct Dense {
    pub weight: Tensor,
    pub bias: Vec<f64>,
}

impl Dense {
    pub fn inputs(&self) -> usize {
        self.weight.shape()[0]
    }

    pub fn outputs(&self) -> usize {
        self.weight.shape()[1]
    }

    pub fn zeros(fin: usize, fout: usize) -> Self {
        Self {
            weight: Tensor::zeros(&[fin, fout]),
            bias: vec![0.0; fout],
        }
    }

    pub fn apply(&self, x: &[f64]) -> Result<Vec<f64>> {
        crate::numerics::linear(x, &self.weight, Some(&self.bias))
    }
}

fn normal_tensor<R: Rng>(shape: &[usize], fan_in: usize, rng: &mut R) -> Tensor {
    let dist = Normal::new(0.0, (1.0 / fan_in.max(1) as f64).sqrt()).expect("positive std");
    Tensor::from_fn(shape, |_| dist.sample(rng))
}

pub fn random_conv<R: Rng>(kh: usize, kw: usize, cin: usize, cout: usize, rng: &mut R) -> Conv {
    Conv {
        weight: normal_tensor(&[kh, kw, cin, cout], kh * kw * cin, rng),
        bias: vec![0.0; cout],
    }
}

pub fn random_dense<R: Rng>(fin: usize, fout: usize, rng: &mut R) -> Dense {
    Dense {
        weight: normal_tensor(&[fin, fout], fin, rng),
        bias: vec![0.0; fout],
    }
}

pub fn random_gather<R: Rng>(axis: Axis, c: usize, rng: &mut R) -> GatherParams {
    let (ph, pw) = match axis {
        Axis::Col => (1, 5),
        Axis::Row => (5, 1),
    };
    GatherParams {
        down: [
            random_conv(3, 3, c, c, rng),
            random_conv(3, 3, c, c, rng),
            random_conv(3, 3, c, c, rng),
        ],
        prop_forward: random_conv(ph, pw, c, c, rng),
        prop_backward: random_conv(ph, pw, c, c, rng),
        kernel_head: random_dense(c, c, rng),
        score_head: random_dense(c, 1, rng),
    }
}

/// Sizes of a randomly initialized model.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ModelConfig {
    /// Feature channels `C`.
    pub channels: usize,
    /// Grid embedding size `D`.
    pub dim: usize,
    /// RoIAlign output size `R`.
    pub roi: usize,
}

impl Default for ModelConfig {
    fn default() -> Self {
        Self {
            channels: 256,
            dim: 512,
            roi: 3,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ModelParams {
    pub gather_col: GatherParams,
    pub gather_row: GatherParams,
    /// `1×1` convolutions producing the mask feature branch, as `C×C` maps.
    pub branch_col: Dense,
    pub branch_row: Dense,
    pub embed: EmbedParams,
    pub merge: MergeParams,
}

impl ModelParams {
    pub fn random(cfg: ModelConfig, seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let (c, d, r) = (cfg.channels, cfg.dim, cfg.roi);
        Self {
            gather_col: random_gather(Axis::Col, c, &mut rng),
            gather_row: random_gather(Axis::Row, c, &mut rng),
            branch_col: random_dense(c, c, &mut rng),
            branch_row: random_dense(c, c, &mut rng),
            embed: EmbedParams {
                roi: r,
                w1: random_dense(c * r * r, d, &mut rng),
                w2: random_dense(d, d, &mut rng),
                query: random_dense(d, d, &mut rng),
                key: random_dense(d, d, &mut rng),
                value: random_dense(d, d, &mut rng),
            },
            merge: MergeParams {
                feature: random_dense(d, d, &mut rng),
                kernel: random_dense(d, d, &mut rng),
            },
        }
    }

    pub fn config(&self) -> ModelConfig {
        ModelConfig {
            channels: self.gather_col.channels(),
            dim: self.embed.dim(),
            roi: self.embed.roi,
        }
    }

    fn gather_layers(g: &GatherParams) -> Vec<(&Tensor, &[f64])> {
        let mut v: Vec<(&Tensor, &[f64])> = g.down.iter().map(|c| (&c.weight, c.bias.as_slice())).collect();
        for c in [&g.prop_forward, &g.prop_backward] {
            v.push((&c.weight, &c.bias));
        }
        for d in [&g.kernel_head, &g.score_head] {
            v.push((&d.weight, &d.bias));
        }
        v
    }

    fn layers(&self) -> Vec<(&Tensor, &[f64])> {
        let mut v = Self::gather_layers(&self.gather_col);
        v.extend(Self::gather_layers(&self.gather_row));
        let e = &self.embed;
        let dense = [
            &self.branch_col,
            &self.branch_row,
            &e.w1,
            &e.w2,
            &e.query,
            &e.key,
            &e.value,
            &self.merge.feature,
            &self.merge.kernel,
        ];
        v.extend(dense.into_iter().map(|d| (&d.weight, d.bias.as_slice())));
        v
    }

    pub fn write<W: std::io::Write>(&self, w: &mut W) -> Result<()> {
        for (weight, bias) in self.layers() {
            io::write_tensor(w, weight)?;
            io::write_tensor(w, &Tensor::new(vec![bias.len()], bias.to_vec())?)?;
        }
        Ok(())
    }

    pub fn read<R: std::io::Read>(r: &mut R) -> Result<Self> {
        let mut rd = BundleReader(io::read_all(r)?.into_iter());
        let gather_col = rd.gather("column gather")?;
        let gather_row = rd.gather("row gather")?;
        let branch_col = rd.dense("column branch")?;
        let branch_row = rd.dense("row branch")?;
        let w1 = rd.dense("embedding layer 1")?;
        let w2 = rd.dense("embedding layer 2")?;
        let query = rd.dense("attention query")?;
        let key = rd.dense("attention key")?;
        let value = rd.dense("attention value")?;
        let feature = rd.dense("merge feature branch")?;
        let kernel = rd.dense("merge kernel branch")?;
        if rd.0.next().is_some() {
            return Err(Error::Format("trailing records after the merger".into()));
        }
        let c = gather_col.channels();
        let roi_sq = w1.inputs() / c.max(1);
        let roi = (roi_sq as f64).sqrt().round() as usize;
        if c == 0 || roi * roi * c != w1.inputs() {
            return Err(Error::Format(format!("embedding input {} is not C·R² for C = {c}", w1.inputs())));
        }
        let p = Self {
            gather_col,
            gather_row,
            branch_col,
            branch_row,
            embed: EmbedParams {
                roi,
                w1,
                w2,
                query,
                key,
                value,
            },
            merge: MergeParams { feature, kernel },
        };
        p.validate()?;
        Ok(p)
    }

    /// Checks that all layer shapes agree with one `(C, D, R)`.
    pub fn validate(&self) -> Result<()> {
        let ModelConfig {
            channels: c,
            dim: d,
            roi: r,
        } = self.config();
        let expect = |what: &str, got: &[usize], want: &[usize]| -> Result<()> {
            if got != want {
                return Err(Error::shape(format!("{what}: expected {want:?}, got {got:?}")));
            }
            Ok(())
        };
        for (what, g, (ph, pw)) in [
            ("column gather", &self.gather_col, (1, 5)),
            ("row gather", &self.gather_row, (5, 1)),
        ] {
            for conv in &g.down {
                expect(what, conv.weight.shape(), &[3, 3, c, c])?;
            }
            expect(what, g.prop_forward.weight.shape(), &[ph, pw, c, c])?;
            expect(what, g.prop_backward.weight.shape(), &[ph, pw, c, c])?;
            expect(what, g.kernel_head.weight.shape(), &[c, c])?;
            expect(what, g.score_head.weight.shape(), &[c, 1])?;
        }
        expect("column branch", self.branch_col.weight.shape(), &[c, c])?;
        expect("row branch", self.branch_row.weight.shape(), &[c, c])?;
        expect("embedding layer 1", self.embed.w1.weight.shape(), &[c * r * r, d])?;
        for (what, l) in [
            ("embedding layer 2", &self.embed.w2),
            ("attention query", &self.embed.query),
            ("attention key", &self.embed.key),
            ("attention value", &self.embed.value),
            ("merge feature branch", &self.merge.feature),
            ("merge kernel branch", &self.merge.kernel),
        ] {
            expect(what, l.weight.shape(), &[d, d])?;
        }
        for (weight, bias) in self.layers() {
            let out = *weight.shape().last().unwrap();
            if bias.len() != out {
                return Err(Error::shape(format!("bias of {} for {out} outputs", bias.len())));
            }
        }
        Ok(())
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        let mut f = std::io::BufWriter::new(std::fs::File::create(path)?);
        self.write(&mut f)?;
        std::io::Write::flush(&mut f)?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Self> {
        let mut f = std::io::BufReader::new(std::fs::File::open(path)?);
        Self::read(&mut f)
    }
}

struct BundleReader(std::vec::IntoIter<Tensor>);

impl BundleReader {
    fn layer(&mut self, what: &str, rank: usize) -> Result<(Tensor, Vec<f64>)> {
        let w = self.0.next().ok_or_else(|| Error::Format(format!("bundle ends before {what}")))?;
        let b = self
            .0
            .next()
            .ok_or_else(|| Error::Format(format!("bundle ends before {what} bias")))?;
        if w.rank() != rank || b.rank() != 1 {
            return Err(Error::Format(format!(
                "{what}: expected a rank-{rank} weight and rank-1 bias, got {:?} and {:?}",
                w.shape(),
                b.shape()
            )));
        }
        Ok((w, b.into_data()))
    }

    fn conv(&mut self, what: &str) -> Result<Conv> {
        let (weight, bias) = self.layer(what, 4)?;
        Ok(Conv { weight, bias })
    }

    fn dense(&mut self, what: &str) -> Result<Dense> {
        let (weight, bias) = self.layer(what, 2)?;
        Ok(Dense { weight, bias })
    }

    fn gather(&mut self, what: &str) -> Result<GatherParams> {
        Ok(GatherParams {
            down: [self.conv(what)?, self.conv(what)?, self.conv(what)?],
            prop_forward: self.conv(what)?,
            prop_backward: self.conv(what)?,
            kernel_head: self.dense(what)?,
            score_head: self.dense(what)?,
        })
    }
}
