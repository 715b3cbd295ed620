//! Pointwise losses on logits and their derivatives with respect to the logit.

use super::ops::sigmoid;
use crate::error::{Error, Result};

/// Probabilities are clamped into `[PROB_CLAMP, 1 - PROB_CLAMP]` before logs.
pub const PROB_CLAMP: f64 = 1e-7;

#[derive(Clone, Copy, Debug, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct LossConfig {
    pub alpha: f64,
    pub gamma: f64,
}

impl Default for LossConfig {
    fn default() -> Self {
        Self { alpha: 0.25, gamma: 2.0 }
    }
}

impl LossConfig {
    pub fn new(alpha: f64, gamma: f64) -> Result<Self> {
        if !(alpha > 0.0 && alpha < 1.0) {
            return Err(Error::Range(format!("alpha {alpha} outside (0, 1)")));
        }
        if !(gamma >= 0.0) || !gamma.is_finite() {
            return Err(Error::Range(format!("gamma {gamma} must be >= 0")));
        }
        Ok(Self { alpha, gamma })
    }
}

/// `(p, dp/dx)` where the derivative is zero wherever the clamp is active.
fn clamped_sigmoid(x: f64) -> (f64, f64) {
    let p = sigmoid(x);
    if p < PROB_CLAMP {
        (PROB_CLAMP, 0.0)
    } else if p > 1.0 - PROB_CLAMP {
        (1.0 - PROB_CLAMP, 0.0)
    } else {
        (p, p * (1.0 - p))
    }
}

pub fn bce_loss(x: f64, y: bool) -> f64 {
    let (p, _) = clamped_sigmoid(x);
    if y {
        -p.ln()
    } else {
        -(1.0 - p).ln()
    }
}

pub fn bce_grad(x: f64, y: bool) -> f64 {
    let (p, dp) = clamped_sigmoid(x);
    if y {
        -dp / p
    } else {
        dp / (1.0 - p)
    }
}

/// Sigmoid focal loss of one logit.
pub fn sigmoid_focal_loss(x: f64, y: bool, cfg: &LossConfig) -> f64 {
    let s = sigmoid(x);
    let (p, _) = clamped_sigmoid(x);
    let LossConfig { alpha, gamma } = *cfg;
    if y {
        alpha * (1.0 - s).powf(gamma) * -p.ln()
    } else {
        (1.0 - alpha) * s.powf(gamma) * -(1.0 - p).ln()
    }
}

pub fn sigmoid_focal_grad(x: f64, y: bool, cfg: &LossConfig) -> f64 {
    let s = sigmoid(x);
    let (p, dp) = clamped_sigmoid(x);
    let LossConfig { alpha, gamma } = *cfg;
    if y {
        // d/dx (1-s)^g = -g (1-s)^(g-1) s (1-s) = -g s (1-s)^g
        let modulator = (1.0 - s).powf(gamma);
        let dmod = -gamma * s * modulator;
        alpha * (dmod * -p.ln() + modulator * (-dp / p))
    } else {
        let modulator = s.powf(gamma);
        let dmod = gamma * modulator * (1.0 - s);
        (1.0 - alpha) * (dmod * -(1.0 - p).ln() + modulator * (dp / (1.0 - p)))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use std::f64::consts::LN_2;

    #[test]
    fn focal_hand_values() {
        let cfg = LossConfig::default();
        let v = sigmoid_focal_loss(0.0, true, &cfg);
        assert!((v - 0.25 * 0.25 * LN_2).abs() < 1e-12);
        assert!((v - 0.043_321_698_784_996_58).abs() < 1e-12);
        assert!(sigmoid_focal_loss(60.0, true, &cfg) < 1e-12);
        assert!(sigmoid_focal_loss(-60.0, false, &cfg) < 1e-12);
    }

    #[test]
    fn bce_hand_values() {
        assert!((bce_loss(0.0, true) - LN_2).abs() < 1e-12);
        assert!(bce_loss(50.0, true) < 1e-6);
        assert!(bce_loss(1e6, true).is_finite());
        assert!((bce_loss(-1e6, true) - -(PROB_CLAMP.ln())).abs() < 1e-9);
        for x in [-3.0, -0.2, 0.0, 1.7] {
            assert!((bce_loss(x, true) - bce_loss(-x, false)).abs() < 1e-12);
        }
    }

    #[test]
    fn config_bounds() {
        assert!(LossConfig::new(0.0, 2.0).is_err());
        assert!(LossConfig::new(0.5, -1.0).is_err());
        assert_eq!(LossConfig::new(0.25, 2.0).unwrap(), LossConfig::default());
    }

    fn central(f: impl Fn(f64) -> f64, x: f64) -> f64 {
        let h = 1e-6;
        (f(x + h) - f(x - h)) / (2.0 * h)
    }

    #[test]
    fn derivatives_match_central_differences() {
        let cfg = LossConfig::default();
        for x in [-4.0, -1.3, -0.01, 0.0, 0.4, 2.2, 5.0] {
            for y in [true, false] {
                let num = central(|v| sigmoid_focal_loss(v, y, &cfg), x);
                let ana = sigmoid_focal_grad(x, y, &cfg);
                assert!((num - ana).abs() <= 1e-6 * ana.abs().max(1e-3), "focal {x} {y}");
                let num = central(|v| bce_loss(v, y), x);
                assert!((num - bce_grad(x, y)).abs() < 1e-7, "bce {x} {y}");
            }
        }
    }

    proptest! {
        #[test]
        fn focal_reduces_to_half_bce(x in -30.0f64..30.0, y: bool) {
            let cfg = LossConfig { alpha: 0.5, gamma: 0.0 };
            prop_assert!((sigmoid_focal_loss(x, y, &cfg) - 0.5 * bce_loss(x, y)).abs() < 1e-12);
        }

        #[test]
        fn losses_are_finite_and_non_negative(x in -1e8f64..1e8, y: bool, alpha in 0.01f64..0.99, gamma in 0.0f64..5.0) {
            let cfg = LossConfig { alpha, gamma };
            for v in [sigmoid_focal_loss(x, y, &cfg), bce_loss(x, y)] {
                prop_assert!(v.is_finite() && v >= 0.0);
            }
            prop_assert!(sigmoid_focal_grad(x, y, &cfg).is_finite());
            prop_assert!(bce_grad(x, y).is_finite());
        }
    }
}
