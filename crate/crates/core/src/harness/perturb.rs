//! Seeded corruption of oracle outputs for robustness curves.

use super::synth::{OracleOutputs, SATURATION};
use crate::error::{Error, Result};
use crate::numerics::Tensor;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};
use std::fmt;
use std::str::FromStr;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PerturbKind {
    /// Gaussian noise of standard deviation `magnitude` on every start
    /// score logit.
    ScoreNoise,
    /// Mask logits smoothed across the line by a Gaussian of width
    /// `magnitude / 4` feature pixels, then given Gaussian noise of standard
    /// deviation `magnitude`.
    MaskBlur,
    /// Each line start score is suppressed with probability `magnitude`.
    Dropout,
}

impl PerturbKind {
    pub const ALL: [PerturbKind; 3] = [Self::ScoreNoise, Self::MaskBlur, Self::Dropout];

    /// Magnitudes `{0, small, large}` of the robustness sweep.
    pub fn sweep_levels(self) -> [f64; 3] {
        match self {
            Self::ScoreNoise | Self::MaskBlur => [0.0, 4.0, 16.0],
            Self::Dropout => [0.0, 0.1, 0.4],
        }
    }
}

impl fmt::Display for PerturbKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::ScoreNoise => "score_noise",
            Self::MaskBlur => "mask_blur",
            Self::Dropout => "dropout",
        })
    }
}

impl FromStr for PerturbKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|k| k.to_string() == s)
            .ok_or_else(|| Error::Validation(format!("unknown perturbation `{s}`")))
    }
}

fn noisy(values: &[f64], sd: f64, rng: &mut ChaCha8Rng) -> Vec<f64> {
    let n = Normal::new(0.0, sd).expect("finite positive sd");
    values.iter().map(|v| v + n.sample(rng)).collect()
}

/// Gaussian smoothing along the across axis of every channel, with clamped
/// borders.
fn blur_across(t: &Tensor, row_axis: bool, sigma: f64) -> Result<Tensor> {
    let (h, w, k) = t.dims3()?;
    let radius = (3.0 * sigma).ceil() as isize;
    let taps: Vec<f64> = (-radius..=radius)
        .map(|d| (-(d * d) as f64 / (2.0 * sigma * sigma)).exp())
        .collect();
    let norm: f64 = taps.iter().sum();
    Ok(Tensor::from_fn(&[h, w, k], |i| {
        let (y, x, ch) = (i[0] as isize, i[1] as isize, i[2]);
        let mut acc = 0.0;
        for (tap, d) in taps.iter().zip(-radius..=radius) {
            let (yy, xx) = if row_axis {
                ((y + d).clamp(0, h as isize - 1), x)
            } else {
                (y, (x + d).clamp(0, w as isize - 1))
            };
            acc += tap * t.at3(yy as usize, xx as usize, ch);
        }
        acc / norm
    }))
}

/// Corrupts oracle outputs. Magnitude 0 returns an identical copy.
pub fn perturb(o: &OracleOutputs, kind: PerturbKind, magnitude: f64, seed: u64) -> Result<OracleOutputs> {
    if !(magnitude >= 0.0 && magnitude.is_finite()) {
        return Err(Error::Range(format!("perturbation magnitude {magnitude}")));
    }
    if kind == PerturbKind::Dropout && magnitude > 1.0 {
        return Err(Error::Range(format!("dropout probability {magnitude} above 1")));
    }
    let mut out = o.clone();
    if magnitude == 0.0 {
        return Ok(out);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    match kind {
        PerturbKind::ScoreNoise => {
            out.scores_row = noisy(&o.scores_row, magnitude, &mut rng);
            out.scores_col = noisy(&o.scores_col, magnitude, &mut rng);
        }
        PerturbKind::MaskBlur => {
            let sigma = magnitude / 4.0;
            for (mask, row_axis) in [(&mut out.masks_row, true), (&mut out.masks_col, false)] {
                let blurred = blur_across(mask, row_axis, sigma)?;
                let data = noisy(blurred.data(), magnitude, &mut rng);
                *mask = Tensor::new(blurred.shape().to_vec(), data)?;
            }
        }
        PerturbKind::Dropout => {
            for scores in [&mut out.scores_row, &mut out.scores_col] {
                for s in scores.iter_mut().filter(|s| **s > 0.0) {
                    if rng.gen_bool(magnitude) {
                        *s = -SATURATION;
                    }
                }
            }
        }
    }
    Ok(out)
}
