//! The scene/config file: a TOML document holding the scene plus sensor,
//! feedback and session settings. All quantities are SI unless the key name
//! says otherwise (`burst_ms`, `sampling_hz`).

use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::controller::{Condition, FeedbackConfig};
use crate::error::{invalid, Result};
use crate::geometry::{default_scene, Scene, MM};
use crate::harness::TouchMode;
use crate::sensing::{BeamModel, Thresholds};
use crate::LATENCY_BUDGET;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SensorConfig {
    /// LED to phototransistor distance.
    pub beam_span: f64,
    pub aperture_radius: f64,
    pub v_bright: f64,
    pub v_dark: f64,
    pub thresholds: Thresholds,
    pub finger_radius: f64,
    pub sampling_hz: f64,
}

impl Default for SensorConfig {
    fn default() -> Self {
        Self {
            beam_span: 200.0 * MM,
            aperture_radius: 0.5 * MM,
            v_bright: 5.0,
            v_dark: 0.0,
            thresholds: Thresholds {
                press: 2.0,
                release: 3.0,
            },
            finger_radius: 7.0 * MM,
            sampling_hz: 1000.0,
        }
    }
}

impl SensorConfig {
    pub fn beam(&self, scene: &Scene) -> BeamModel {
        BeamModel::horizontal(
            scene.beam_height,
            self.beam_span,
            self.aperture_radius,
            self.v_bright,
            self.v_dark,
        )
    }

    pub fn sampling_period(&self) -> f64 {
        1.0 / self.sampling_hz
    }

    pub fn validate(&self, scene: &Scene) -> Result<()> {
        self.beam(scene).validate()?;
        self.thresholds.validate()?;
        if !(self.finger_radius > 0.0) {
            return Err(invalid("finger radius must be positive"));
        }
        if !(self.sampling_hz > 0.0) {
            return Err(invalid("sampling rate must be positive"));
        }
        Ok(())
    }

    /// Fails when one sampling period exceeds the latency budget.
    pub fn check_latency_budget(&self) -> Result<()> {
        let period = self.sampling_period();
        if period > LATENCY_BUDGET {
            return Err(invalid(format!(
                "latency budget violation: sampling period {:.1} ms exceeds {:.0} ms",
                period * 1e3,
                LATENCY_BUDGET * 1e3
            )));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FeedbackSettings {
    pub condition: Condition,
    pub burst_ms: f64,
    pub focal_height: f64,
    pub focal_xy: [f64; 2],
    /// Burst lengths the CLI accepts.
    pub allowed_burst_ms: Vec<f64>,
}

impl Default for FeedbackSettings {
    fn default() -> Self {
        Self {
            condition: Condition::Both,
            burst_ms: 50.0,
            focal_height: 3.0 * MM,
            focal_xy: [0.0, 0.0],
            allowed_burst_ms: vec![50.0, 100.0],
        }
    }
}

impl FeedbackSettings {
    pub fn to_config(&self) -> FeedbackConfig {
        FeedbackConfig {
            condition: self.condition,
            burst_duration: self.burst_ms * 1e-3,
            focal_height: self.focal_height,
            focal_xy: self.focal_xy,
        }
    }
}

/// Default scripted finger motion.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SessionDefaults {
    pub cycles: usize,
    pub period_s: f64,
    pub amplitude: f64,
    pub touch_mode: TouchMode,
}

impl Default for SessionDefaults {
    fn default() -> Self {
        Self {
            cycles: 5,
            period_s: 2.0,
            amplitude: 10.0 * MM,
            touch_mode: TouchMode::TouchingPlate,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Config {
    pub scene: Scene,
    #[serde(default)]
    pub sensor: SensorConfig,
    #[serde(default)]
    pub feedback: FeedbackSettings,
    #[serde(default)]
    pub session: SessionDefaults,
}

impl Default for Config {
    fn default() -> Self {
        Self::paper_default()
    }
}

impl Config {
    pub fn paper_default() -> Self {
        Self {
            scene: default_scene(),
            sensor: SensorConfig::default(),
            feedback: FeedbackSettings::default(),
            session: SessionDefaults::default(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.scene.validate()?;
        self.sensor.validate(&self.scene)?;
        self.feedback.to_config().validate()?;
        Ok(())
    }

    pub fn from_toml_str(s: &str) -> Result<Self> {
        let cfg: Config = toml::from_str(s)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn to_toml_string(&self) -> Result<String> {
        Ok(toml::to_string_pretty(self)?)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_toml_str(&std::fs::read_to_string(path)?)
    }

    /// SHA-256 of the scene section re-serialised, hex encoded.
    pub fn scene_hash(&self) -> Result<String> {
        let text = toml::to_string(&self.scene)?;
        Ok(hex::encode(Sha256::digest(text.as_bytes())))
    }
}
