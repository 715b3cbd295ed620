use crate::error::{Error, Result};
use std::f64::consts::PI;

#[derive(Clone, Copy, Debug, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct ScheduleConfig {
    pub eta_min: f64,
    pub eta_max: f64,
    pub t_max: u64,
}

impl Default for ScheduleConfig {
    fn default() -> Self {
        Self {
            eta_min: 1e-6,
            eta_max: 1e-4,
            t_max: 1,
        }
    }
}

impl ScheduleConfig {
    pub fn new(eta_min: f64, eta_max: f64, t_max: u64) -> Result<Self> {
        if !(eta_min > 0.0) || !(eta_max >= eta_min) || !eta_max.is_finite() {
            return Err(Error::Range(format!("need 0 < eta_min <= eta_max, got {eta_min}, {eta_max}")));
        }
        if t_max == 0 {
            return Err(Error::Range("t_max must be positive".into()));
        }
        Ok(Self { eta_min, eta_max, t_max })
    }
}

/// Cosine-annealed learning rate at iteration `t_cur`.
pub fn cosine_lr(t_cur: u64, cfg: &ScheduleConfig) -> Result<f64> {
    if t_cur > cfg.t_max {
        return Err(Error::Range(format!("iteration {t_cur} beyond t_max {}", cfg.t_max)));
    }
    if t_cur == 0 {
        return Ok(cfg.eta_max);
    }
    if t_cur == cfg.t_max {
        return Ok(cfg.eta_min);
    }
    let phase = PI * t_cur as f64 / cfg.t_max as f64;
    Ok(cfg.eta_min + 0.5 * (cfg.eta_max - cfg.eta_min) * (1.0 + phase.cos()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn endpoints_and_midpoint() {
        let cfg = ScheduleConfig::new(1e-6, 1e-4, 1000).unwrap();
        assert_eq!(cosine_lr(0, &cfg).unwrap(), 1e-4);
        assert_eq!(cosine_lr(1000, &cfg).unwrap(), 1e-6);
        let mid = cosine_lr(500, &cfg).unwrap();
        assert!((mid - (1e-6 + 1e-4) / 2.0).abs() < 1e-18);
        assert!(matches!(cosine_lr(1001, &cfg), Err(Error::Range(_))));
    }

    #[test]
    fn monotone_decay() {
        let cfg = ScheduleConfig::new(0.1, 2.0, 37).unwrap();
        let lrs: Vec<f64> = (0..=37).map(|t| cosine_lr(t, &cfg).unwrap()).collect();
        assert!(lrs.windows(2).all(|w| w[1] <= w[0]));
    }

    #[test]
    fn rejects_bad_config() {
        assert!(ScheduleConfig::new(0.0, 1.0, 10).is_err());
        assert!(ScheduleConfig::new(0.5, 0.1, 10).is_err());
        assert!(ScheduleConfig::new(0.1, 0.5, 0).is_err());
    }
}
