//! Plain-text `key=value` run configuration.
//!
//! ```text
//! # comments and blank lines are ignored
//! threshold=0.5
//! alpha=0.25
//! gamma=2
//! R=3
//! C=256
//! D=512
//! ```

use crate::error::{Error, Result};
use crate::numerics::LossConfig;
use crate::params::ModelConfig;
use std::path::Path;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Config {
    /// Binarization threshold for NMS and merge votes.
    pub threshold: f64,
    pub alpha: f64,
    pub gamma: f64,
    /// RoIAlign output size.
    pub roi: usize,
    /// Feature channels.
    pub channels: usize,
    /// Grid embedding size.
    pub dim: usize,
}

impl Default for Config {
    fn default() -> Self {
        let m = ModelConfig::default();
        let l = LossConfig::default();
        Self {
            threshold: 0.5,
            alpha: l.alpha,
            gamma: l.gamma,
            roi: m.roi,
            channels: m.channels,
            dim: m.dim,
        }
    }
}

impl Config {
    pub fn parse(text: &str, origin: &str) -> Result<Self> {
        let mut cfg = Self::default();
        for (no, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let err = |message: String| Error::Parse {
                path: format!("{origin}:{}", no + 1),
                message,
            };
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| err(format!("expected key=value, got `{line}`")))?;
            cfg.set(key.trim(), value.trim()).map_err(|e| err(e.to_string()))?;
        }
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::parse(&std::fs::read_to_string(path)?, &path.display().to_string())
    }

    /// Sets one key. Keys are the file keys: `threshold`, `alpha`, `gamma`,
    /// `R`, `C`, `D`.
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        fn num<T: std::str::FromStr>(key: &str, v: &str) -> Result<T> {
            v.parse().map_err(|_| Error::Validation(format!("`{key}` has invalid value `{v}`")))
        }
        match key {
            "threshold" => self.threshold = num(key, value)?,
            "alpha" => self.alpha = num(key, value)?,
            "gamma" => self.gamma = num(key, value)?,
            "R" => self.roi = num(key, value)?,
            "C" => self.channels = num(key, value)?,
            "D" => self.dim = num(key, value)?,
            _ => return Err(Error::Validation(format!("unknown key `{key}`"))),
        }
        Ok(())
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.threshold > 0.0 && self.threshold < 1.0) {
            return Err(Error::Range(format!("threshold {} outside (0, 1)", self.threshold)));
        }
        if self.roi == 0 || self.channels == 0 || self.dim == 0 {
            return Err(Error::Range("R, C and D must be positive".into()));
        }
        self.loss().map(|_| ())
    }

    pub fn loss(&self) -> Result<LossConfig> {
        LossConfig::new(self.alpha, self.gamma)
    }

    pub fn model(&self) -> ModelConfig {
        ModelConfig {
            channels: self.channels,
            dim: self.dim,
            roi: self.roi,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_all_keys() {
        let c = Config::parse("# run\nthreshold=0.4\n alpha = 0.5\ngamma=0\n\nR=2\nC=8\nD=16\n", "t").unwrap();
        assert_eq!(
            c,
            Config {
                threshold: 0.4,
                alpha: 0.5,
                gamma: 0.0,
                roi: 2,
                channels: 8,
                dim: 16
            }
        );
        assert_eq!(Config::parse("", "t").unwrap(), Config::default());
    }

    #[test]
    fn rejects_bad_lines() {
        for text in ["threshold", "beta=1", "C=abc", "threshold=1.5", "alpha=1", "R=0"] {
            assert!(Config::parse(text, "t").is_err(), "{text}");
        }
        match Config::parse("\n\nC=x", "cfg.txt") {
            Err(Error::Parse { path, .. }) => assert_eq!(path, "cfg.txt:3"),
            other => panic!("{other:?}"),
        }
    }
}
