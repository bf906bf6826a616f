//! Engine configuration.

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum ConfigError {
    #[error("step_days must satisfy 0 < step_days <= window_days (got step {step}, window {window})")]
    BadWindow { window: u32, step: u32 },
    #[error("{name} must lie in (0, 1], got {value}")]
    BadThreshold { name: &'static str, value: f64 },
    #[error("{name} must be at least 1")]
    ZeroCount { name: &'static str },
}

/// Tunable constants shared by every pipeline stage.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct EngineConfig {
    /// Sliding window length in days.
    pub window_days: u32,
    /// Distance in days between consecutive window starts.
    pub step_days: u32,
    /// Image-embedding cosine above which two stills are merged.
    pub dedup_threshold: f64,
    /// Top-k per retrieval source.
    pub retrieval_k: usize,
    /// Top-k for the caption-only baseline.
    pub baseline_k: usize,
    pub embedding_dim: usize,
    /// Name/statement cosine at or above which two contexts (or knowledge
    /// entries) are considered the same.
    pub name_merge_threshold: f64,
    /// Atomic-filter hits scoring below this cosine are discarded.
    pub atomic_noise_floor: f64,
}

impl Default for EngineConfig {
    fn default() -> Self {
        Self {
            window_days: 7,
            step_days: 4,
            dedup_threshold: 0.85,
            retrieval_k: 30,
            baseline_k: 50,
            embedding_dim: 256,
            name_merge_threshold: 0.80,
            atomic_noise_floor: 0.25,
        }
    }
}

impl EngineConfig {
    pub fn validate(&self) -> Result<(), ConfigError> {
        if self.step_days == 0 || self.step_days > self.window_days {
            return Err(ConfigError::BadWindow {
                window: self.window_days,
                step: self.step_days,
            });
        }
        for (name, value) in [
            ("dedup_threshold", self.dedup_threshold),
            ("name_merge_threshold", self.name_merge_threshold),
        ] {
            if !(value > 0.0 && value <= 1.0) {
                return Err(ConfigError::BadThreshold { name, value });
            }
        }
        if !(0.0..=1.0).contains(&self.atomic_noise_floor) {
            return Err(ConfigError::BadThreshold {
                name: "atomic_noise_floor",
                value: self.atomic_noise_floor,
            });
        }
        for (name, value) in [
            ("retrieval_k", self.retrieval_k),
            ("baseline_k", self.baseline_k),
            ("embedding_dim", self.embedding_dim),
        ] {
            if value == 0 {
                return Err(ConfigError::ZeroCount { name });
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_are_valid() {
        let cfg = EngineConfig::default();
        assert_eq!(cfg.window_days, 7);
        assert_eq!(cfg.step_days, 4);
        assert_eq!(cfg.dedup_threshold, 0.85);
        assert_eq!(cfg.baseline_k, 50);
        cfg.validate().unwrap();
    }

    #[test]
    fn rejects_step_larger_than_window() {
        let cfg = EngineConfig {
            step_days: 8,
            ..Default::default()
        };
        assert!(matches!(cfg.validate(), Err(ConfigError::BadWindow { .. })));
        let cfg = EngineConfig {
            step_days: 0,
            ..Default::default()
        };
        assert!(cfg.validate().is_err());
    }

    #[test]
    fn rejects_out_of_range_thresholds() {
        let cfg = EngineConfig {
            dedup_threshold: 0.0,
            ..Default::default()
        };
        assert!(cfg.validate().is_err());
        let cfg = EngineConfig {
            name_merge_threshold: 1.2,
            ..Default::default()
        };
        assert!(cfg.validate().is_err());
        let cfg = EngineConfig {
            retrieval_k: 0,
            ..Default::default()
        };
        assert_eq!(
            cfg.validate(),
            Err(ConfigError::ZeroCount { name: "retrieval_k" })
        );
    }
}
