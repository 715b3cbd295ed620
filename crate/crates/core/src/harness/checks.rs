//! Finite-difference checks of every loss gradient on seeded random inputs.

use crate::error::Result;
use crate::labelgen::MergeLabels;
use crate::merger::{loss_merge, loss_merge_grad};
use crate::numerics::{bce_grad, bce_loss, grad_check, sigmoid_focal_grad, sigmoid_focal_loss, LossConfig, Tensor};
use crate::splitter::{loss_instance, loss_instance_grad, loss_segmentation, loss_segmentation_grad};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

/// Largest relative error a gradient may show.
pub const GRAD_TOLERANCE: f64 = 1e-4;

const EPS: f64 = 1e-5;
/// Logits stay well inside the probability clamp, where the losses are
/// smooth.
const LOGIT_RANGE: f64 = 3.0;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct GradCheck {
    pub name: &'static str,
    pub max_rel_err: f64,
}

impl GradCheck {
    pub fn passed(&self) -> bool {
        self.max_rel_err < GRAD_TOLERANCE
    }
}

fn logits<R: Rng>(shape: &[usize], rng: &mut R) -> Tensor {
    Tensor::from_fn(shape, |_| rng.gen_range(-LOGIT_RANGE..LOGIT_RANGE))
}

fn labels<R: Rng>(len: usize, rng: &mut R) -> Vec<bool> {
    (0..len).map(|_| rng.gen_bool(0.5)).collect()
}

/// Runs the focal, BCE, instance, segmentation and merge checks for one
/// seed.
pub fn loss_gradient_checks(seed: u64) -> Result<Vec<GradCheck>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let cfg = LossConfig::new(rng.gen_range(0.1..0.9), rng.gen_range(0.0..3.0))?;
    let mut out = Vec::new();

    let x = logits(&[rng.gen_range(1..=32)], &mut rng);
    let y = labels(x.len(), &mut rng);
    let focal = grad_check(
        |t| Ok(t.data().iter().zip(&y).map(|(&v, &l)| sigmoid_focal_loss(v, l, &cfg)).sum()),
        |t| {
            Tensor::new(
                t.shape().to_vec(),
                t.data().iter().zip(&y).map(|(&v, &l)| sigmoid_focal_grad(v, l, &cfg)).collect(),
            )
        },
        &x,
        EPS,
    )?;
    out.push(GradCheck {
        name: "focal",
        max_rel_err: focal,
    });
    let bce = grad_check(
        |t| Ok(t.data().iter().zip(&y).map(|(&v, &l)| bce_loss(v, l)).sum()),
        |t| Tensor::new(t.shape().to_vec(), t.data().iter().zip(&y).map(|(&v, &l)| bce_grad(v, l)).collect()),
        &x,
        EPS,
    )?;
    out.push(GradCheck {
        name: "bce",
        max_rel_err: bce,
    });

    let s = logits(&[rng.gen_range(1..=64)], &mut rng);
    let p = labels(s.len(), &mut rng);
    let inst = grad_check(
        |t| loss_instance(t.data(), &p),
        |t| Tensor::new(t.shape().to_vec(), loss_instance_grad(t.data(), &p)?),
        &s,
        EPS,
    )?;
    out.push(GradCheck {
        name: "instance",
        max_rel_err: inst,
    });

    let (h, w, k) = (rng.gen_range(1..=6), rng.gen_range(1..=6), rng.gen_range(1..=3));
    let pred = logits(&[h, w, k], &mut rng);
    let mut target = Tensor::from_fn(&[h, w, k], |_| if rng.gen_bool(0.3) { 1.0 } else { 0.0 });
    // every channel needs a positive pixel
    for ch in 0..k {
        let at = (rng.gen_range(0..h * w)) * k + ch;
        let mut d = target.into_data();
        d[at] = 1.0;
        target = Tensor::new(vec![h, w, k], d)?;
    }
    let seg = grad_check(
        |t| loss_segmentation(t, &target, &cfg),
        |t| loss_segmentation_grad(t, &target, &cfg),
        &pred,
        EPS,
    )?;
    out.push(GradCheck {
        name: "segmentation",
        max_rel_err: seg,
    });

    let (m, n) = (rng.gen_range(1..=3), rng.gen_range(1..=3));
    let classes = (0..m * n).map(|_| rng.gen_range(0..m * n)).collect();
    let merge_t = MergeLabels::new(m, n, classes)?;
    let ml = logits(&[m, n, m, n], &mut rng);
    let merge = grad_check(|t| loss_merge(t, &merge_t, &cfg), |t| loss_merge_grad(t, &merge_t, &cfg), &ml, EPS)?;
    out.push(GradCheck {
        name: "merge",
        max_rel_err: merge,
    });
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn all_losses_pass_for_a_few_seeds() {
        for seed in 0..5 {
            let checks = loss_gradient_checks(seed).unwrap();
            assert_eq!(checks.len(), 5);
            for c in checks {
                assert!(c.passed(), "seed {seed}: {} at {}", c.name, c.max_rel_err);
            }
        }
    }

    #[test]
    fn deterministic_per_seed() {
        assert_eq!(loss_gradient_checks(3).unwrap(), loss_gradient_checks(3).unwrap());
    }
}
