//! Run configuration for the estimation pipeline, loadable from TOML.

use serde::{Deserialize, Serialize};
use std::path::Path;

use crate::Result;
use crate::cimp::{ArrayGeometry, ChannelMap, CimpConfig};
use crate::error::Error;
use crate::fusion::FusionConfig;
use crate::stft::StftConfig;
use crate::tdoa::FitConfig;
use crate::tracker::TrackerConfig;

#[derive(Debug, Clone, Copy, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct IoConfig {
    pub channel_map: ChannelMap,
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RunConfig {
    pub geometry: ArrayGeometry,
    pub stft: StftConfig,
    pub smoothing: CimpConfig,
    pub fit: FitConfig,
    pub fusion: FusionConfig,
    pub tracker: TrackerConfig,
    pub io: IoConfig,
}

impl RunConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        let mut cfg: RunConfig =
            toml::from_str(text).map_err(|e| Error::InvalidConfig(e.to_string()))?;
        // The geometry's channel map is the single source of truth for
        // channel routing; keep the io section in sync.
        cfg.geometry.channel_map = cfg.io.channel_map;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn from_path(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::InvalidConfig(format!("{}: {e}", path.display())))?;
        Self::from_toml(&text)
    }

    pub fn validate(&self) -> Result<()> {
        self.geometry.validate()?;
        self.stft.validate()?;
        self.smoothing.validate()?;
        self.fit.validate()?;
        self.fusion.validate()?;
        self.tracker.validate()?;
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_config_is_valid() {
        RunConfig::default().validate().unwrap();
    }

    #[test]
    fn parses_partial_toml_with_defaults() {
        let cfg = RunConfig::from_toml(
            r#"
            [stft]
            frame_len = 256
            hop = 128

            [fusion]
            alpha = 0.05
            "#,
        )
        .unwrap();
        assert_eq!(cfg.stft.frame_len, 256);
        assert_eq!(cfg.fusion.alpha, 0.05);
        assert_eq!(cfg.geometry.d_binaural, 0.16);
    }

    #[test]
    fn rejects_unknown_keys() {
        assert!(RunConfig::from_toml("[stft]\nframe_size = 256\n").is_err());
        assert!(RunConfig::from_toml("[nonsense]\nx = 1\n").is_err());
    }

    #[test]
    fn rejects_invalid_values() {
        assert!(RunConfig::from_toml("[fusion]\nalpha = 0.2\n").is_err());
        assert!(RunConfig::from_toml("[stft]\nframe_len = 100\n").is_err());
        assert!(RunConfig::from_toml("[geometry]\nd_binaural = 0.001\n").is_err());
    }

    #[test]
    fn channel_map_propagates_to_geometry() {
        let cfg = RunConfig::from_toml(
            "[io.channel_map]\nleft_front = 3\nleft_rear = 2\nright_front = 1\nright_rear = 0\n",
        )
        .unwrap();
        assert_eq!(cfg.geometry.channel_map.left_front, 3);
    }
}
