use super::Tensor;
use crate::error::{Error, Result};

/// Bilinear upsampling of an `H×W×C` map by an integer factor.
///
/// Uses the half-pixel (align-corners off) convention: output pixel `o` reads
/// the input at `(o + 0.5) / factor - 0.5`, clamped to the valid range.
pub fn bilinear_upsample(t: &Tensor, factor: usize) -> Result<Tensor> {
    let (h, w, c) = t.dims3()?;
    if factor == 0 {
        return Err(Error::Range("upsample factor must be >= 1".into()));
    }
    if factor == 1 {
        return Ok(t.clone());
    }
    if h == 0 || w == 0 {
        return Err(Error::shape("cannot upsample an empty map"));
    }
    let (oh, ow) = (h * factor, w * factor);
    let taps = |o: usize, n: usize| -> (usize, usize, f64) {
        let src = ((o as f64 + 0.5) / factor as f64 - 0.5).max(0.0);
        let i0 = (src.floor() as usize).min(n - 1);
        let i1 = (i0 + 1).min(n - 1);
        (i0, i1, src - i0 as f64)
    };
    let ys: Vec<_> = (0..oh).map(|o| taps(o, h)).collect();
    let xs: Vec<_> = (0..ow).map(|o| taps(o, w)).collect();
    let mut data = Vec::with_capacity(oh * ow * c);
    for &(y0, y1, ly) in &ys {
        for &(x0, x1, lx) in &xs {
            for k in 0..c {
                let top = t.at3(y0, x0, k) * (1.0 - lx) + t.at3(y0, x1, k) * lx;
                let bot = t.at3(y1, x0, k) * (1.0 - lx) + t.at3(y1, x1, k) * lx;
                data.push(top * (1.0 - ly) + bot * ly);
            }
        }
    }
    Tensor::new(vec![oh, ow, c], data)
}

/// Sums the four pyramid levels at the resolution of `p2`.
///
/// `p3`, `p4`, `p5` are upsampled by 2, 4 and 8 so every term matches `p2`.
pub fn fuse_fpn(p2: &Tensor, p3: &Tensor, p4: &Tensor, p5: &Tensor) -> Result<Tensor> {
    let (h, w, c) = p2.dims3()?;
    let mut out = p2.clone();
    for (level, p) in [(1u32, p3), (2, p4), (3, p5)] {
        let (lh, lw, lc) = p.dims3()?;
        if lc != c {
            return Err(Error::shape(format!("pyramid level P{} has {lc} channels, P2 has {c}", level + 2)));
        }
        let factor = 1usize << level;
        if lh * factor != h || lw * factor != w {
            return Err(Error::shape(format!(
                "P{} is {lh}×{lw}, expected {}×{}",
                level + 2,
                h / factor,
                w / factor
            )));
        }
        out = out.add(&bilinear_upsample(p, factor)?)?;
    }
    Ok(out)
}

/// Zero-padded same-size cross-correlation.
///
/// `weights` is `kh×kw×Cin×Cout` with odd `kh`, `kw`; `bias` has `Cout` entries.
pub fn conv2d(t: &Tensor, weights: &Tensor, bias: &[f64]) -> Result<Tensor> {
    let (h, w, cin) = t.dims3()?;
    let [kh, kw, wcin, cout] = weights.shape()[..] else {
        return Err(Error::shape(format!(
            "conv weights must be kh×kw×Cin×Cout, got {:?}",
            weights.shape()
        )));
    };
    if kh % 2 == 0 || kw % 2 == 0 {
        return Err(Error::Unsupported(format!(
            "even kernel {kh}×{kw}; only odd kernels keep the spatial size"
        )));
    }
    if wcin != cin {
        return Err(Error::shape(format!("conv expects {wcin} input channels, map has {cin}")));
    }
    if bias.len() != cout {
        return Err(Error::shape(format!("bias has {} entries for {cout} output channels", bias.len())));
    }
    let (ph, pw) = (kh / 2, kw / 2);
    let wd = weights.data();
    let td = t.data();
    let mut out = vec![0.0; h * w * cout];
    for y in 0..h {
        for x in 0..w {
            let acc = &mut out[(y * w + x) * cout..(y * w + x + 1) * cout];
            acc.copy_from_slice(bias);
            for dy in 0..kh {
                let Some(sy) = (y + dy).checked_sub(ph).filter(|&v| v < h) else {
                    continue;
                };
                for dx in 0..kw {
                    let Some(sx) = (x + dx).checked_sub(pw).filter(|&v| v < w) else {
                        continue;
                    };
                    let src = &td[(sy * w + sx) * cin..(sy * w + sx + 1) * cin];
                    let wbase = (dy * kw + dx) * cin * cout;
                    for (i, &v) in src.iter().enumerate() {
                        if v == 0.0 {
                            continue;
                        }
                        let wrow = &wd[wbase + i * cout..wbase + (i + 1) * cout];
                        for (a, &wv) in acc.iter_mut().zip(wrow) {
                            *a += v * wv;
                        }
                    }
                }
            }
        }
    }
    Tensor::new(vec![h, w, cout], out)
}

/// Max pooling with window and stride `ph×pw`.
///
/// A ragged last window is padded by replicating the last row or column.
pub fn max_pool(t: &Tensor, ph: usize, pw: usize) -> Result<Tensor> {
    let (h, w, c) = t.dims3()?;
    if ph == 0 || pw == 0 {
        return Err(Error::Range("pool window must be positive".into()));
    }
    if h == 0 || w == 0 {
        return Err(Error::shape("cannot pool an empty map"));
    }
    let (oh, ow) = (h.div_ceil(ph), w.div_ceil(pw));
    let mut data = Vec::with_capacity(oh * ow * c);
    for oy in 0..oh {
        for ox in 0..ow {
            for k in 0..c {
                let mut m = f64::NEG_INFINITY;
                for dy in 0..ph {
                    let y = (oy * ph + dy).min(h - 1);
                    for dx in 0..pw {
                        let x = (ox * pw + dx).min(w - 1);
                        m = m.max(t.at3(y, x, k));
                    }
                }
                data.push(m);
            }
        }
    }
    Tensor::new(vec![oh, ow, c], data)
}

/// Vertical `2×1` max pooling, halving the height.
pub fn maxpool_2x1(t: &Tensor) -> Result<Tensor> {
    max_pool(t, 2, 1)
}

pub fn relu(t: &Tensor) -> Tensor {
    t.map(|v| v.max(0.0))
}

/// Reads `f` at a continuous position in pixel-center coordinates.
///
/// Positions more than one pixel outside the map read as zero; the rest are
/// clamped to the border before interpolation.
fn sample_bilinear(f: &Tensor, y: f64, x: f64, out: &mut [f64]) {
    let (h, w) = (f.shape()[0], f.shape()[1]);
    let (u, v) = (y - 0.5, x - 0.5);
    if u < -1.0 || u > h as f64 || v < -1.0 || v > w as f64 {
        return;
    }
    let u = u.clamp(0.0, (h - 1) as f64);
    let v = v.clamp(0.0, (w - 1) as f64);
    let (y0, x0) = (u.floor() as usize, v.floor() as usize);
    let (y1, x1) = ((y0 + 1).min(h - 1), (x0 + 1).min(w - 1));
    let (ly, lx) = (u - y0 as f64, v - x0 as f64);
    let wts = [
        (y0, x0, (1.0 - ly) * (1.0 - lx)),
        (y0, x1, (1.0 - ly) * lx),
        (y1, x0, ly * (1.0 - lx)),
        (y1, x1, ly * lx),
    ];
    for (yy, xx, wt) in wts {
        if wt == 0.0 {
            continue;
        }
        for (k, o) in out.iter_mut().enumerate() {
            *o += wt * f.at3(yy, xx, k);
        }
    }
}

/// Samples per RoIAlign bin along each axis.
pub const ROI_SAMPLES: usize = 2;

/// RoIAlign of one box into an `r×r×C` patch.
///
/// `bbox` is `[x0, y0, x1, y1]` in feature coordinates where pixel `i` covers
/// `[i, i + 1)`. Each bin averages a `2×2` grid of bilinear samples.
pub fn roi_align(f: &Tensor, bbox: [f64; 4], r: usize) -> Result<Tensor> {
    let (h, w, c) = f.dims3()?;
    let [x0, y0, x1, y1] = bbox;
    if r == 0 {
        return Err(Error::Range("RoIAlign output size must be positive".into()));
    }
    if !(x1 > x0 && y1 > y0) || !bbox.iter().all(|v| v.is_finite()) {
        return Err(Error::Degenerate(format!("RoI box {bbox:?} has no area")));
    }
    if h == 0 || w == 0 {
        return Err(Error::shape("RoIAlign on an empty map"));
    }
    let (bw, bh) = ((x1 - x0) / r as f64, (y1 - y0) / r as f64);
    let n = (ROI_SAMPLES * ROI_SAMPLES) as f64;
    let mut data = vec![0.0; r * r * c];
    let mut acc = vec![0.0; c];
    for by in 0..r {
        for bx in 0..r {
            acc.iter_mut().for_each(|a| *a = 0.0);
            for sy in 0..ROI_SAMPLES {
                let y = y0 + bh * (by as f64 + (sy as f64 + 0.5) / ROI_SAMPLES as f64);
                for sx in 0..ROI_SAMPLES {
                    let x = x0 + bw * (bx as f64 + (sx as f64 + 0.5) / ROI_SAMPLES as f64);
                    sample_bilinear(f, y, x, &mut acc);
                }
            }
            let base = (by * r + bx) * c;
            for (k, a) in acc.iter().enumerate() {
                data[base + k] = a / n;
            }
        }
    }
    Tensor::new(vec![r, r, c], data)
}

/// Row-vector times matrix plus bias: `x·W + b` with `W` of shape `in×out`.
pub fn linear(x: &[f64], weight: &Tensor, bias: Option<&[f64]>) -> Result<Vec<f64>> {
    let [fin, fout] = weight.shape()[..] else {
        return Err(Error::shape(format!("linear weight must be in×out, got {:?}", weight.shape())));
    };
    if x.len() != fin {
        return Err(Error::shape(format!("linear expects {fin} inputs, got {}", x.len())));
    }
    let mut out = match bias {
        Some(b) if b.len() != fout => return Err(Error::shape(format!("bias has {} entries for {fout} outputs", b.len()))),
        Some(b) => b.to_vec(),
        None => vec![0.0; fout],
    };
    let wd = weight.data();
    for (i, &v) in x.iter().enumerate() {
        if v == 0.0 {
            continue;
        }
        for (o, &wv) in out.iter_mut().zip(&wd[i * fout..(i + 1) * fout]) {
            *o += v * wv;
        }
    }
    Ok(out)
}

pub fn sigmoid(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}
