//! Tick-driven pipeline for interactive use. One owner advances the state
//! machines at a fixed simulated rate. Inputs only set the finger height for
//! the next tick, so a recorded input log replays to the same frames.

use serde::{Deserialize, Serialize};

use crate::config::{Config, SensorConfig};
use crate::controller::{ControllerState, FeedbackConfig};
use crate::error::{invalid, Result};
use crate::geometry::Scene;
use crate::sensing::{
    occlusion, photovoltage, BeamModel, ButtonEvent, DetectorState, FingerModel, Region, Thresholds,
};

pub const DEFAULT_TICK_HZ: f64 = 250.0;
/// Finger starts well clear of the beam.
pub const DEFAULT_INITIAL_HEIGHT: f64 = 0.020;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BurstStatus {
    pub remaining: f64,
    pub duration: f64,
}

/// State after one tick. Times in seconds, heights in metres.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TickFrame {
    pub tick: u64,
    pub time: f64,
    pub finger_height: f64,
    pub voltage: f64,
    pub region: Region,
    pub active_burst: Option<BurstStatus>,
    /// Event fired on this tick, if any.
    pub last_event: Option<ButtonEvent>,
    pub thresholds: Thresholds,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct InputMessage {
    pub finger_height_m: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub client_time: Option<f64>,
}

impl InputMessage {
    pub fn validate(&self) -> Result<()> {
        if !(self.finger_height_m >= 0.0 && self.finger_height_m.is_finite()) {
            return Err(invalid(format!(
                "finger height must be a non-negative number, got {}",
                self.finger_height_m
            )));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum ServerMessage {
    Frame(TickFrame),
    Error { message: String },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum ClientMessage {
    Input(InputMessage),
}

/// An input together with the tick it was applied on.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RecordedInput {
    pub tick: u64,
    pub finger_height_m: f64,
}

#[derive(Clone, Debug)]
pub struct LivePipeline {
    sensor: SensorConfig,
    beam: BeamModel,
    feedback: FeedbackConfig,
    detector: DetectorState,
    controller: ControllerState,
    tick_hz: f64,
    next_tick: u64,
    height: f64,
}

impl LivePipeline {
    pub fn new(config: &Config, tick_hz: f64, initial_height: f64) -> Result<Self> {
        config.validate()?;
        if !(tick_hz > 0.0) {
            return Err(invalid("tick rate must be positive"));
        }
        InputMessage {
            finger_height_m: initial_height,
            client_time: None,
        }
        .validate()?;
        let scene: &Scene = &config.scene;
        let beam = config.sensor.beam(scene);
        let feedback = config.feedback.to_config();
        let mut p = Self {
            sensor: config.sensor.clone(),
            beam,
            feedback,
            detector: DetectorState::new(config.sensor.thresholds)?,
            controller: ControllerState::new(feedback)?,
            tick_hz,
            next_tick: 0,
            height: initial_height,
        };
        p.detector = DetectorState::settled(config.sensor.thresholds, p.voltage(initial_height)?)?;
        Ok(p)
    }

    pub fn tick_hz(&self) -> f64 {
        self.tick_hz
    }

    pub fn thresholds(&self) -> Thresholds {
        self.sensor.thresholds
    }

    pub fn height(&self) -> f64 {
        self.height
    }

    fn voltage(&self, height: f64) -> Result<f64> {
        let finger = FingerModel::with_pad_height(self.feedback.focal_xy, height, self.sensor.finger_radius);
        photovoltage(occlusion(&finger, &self.beam), &self.beam)
    }

    /// Advance one tick, applying `input` first if given. Without input the
    /// previous height is held.
    pub fn step(&mut self, input: Option<&InputMessage>) -> Result<TickFrame> {
        if let Some(msg) = input {
            msg.validate()?;
            self.height = msg.finger_height_m;
        }
        let tick = self.next_tick;
        let time = tick as f64 / self.tick_hz;
        let voltage = self.voltage(self.height)?;
        let event = self.detector.step(voltage, time)?;
        self.controller.step(event.as_ref(), time)?;
        let active_burst = self.controller.active_burst.map(|b| BurstStatus {
            remaining: b.remaining(time),
            duration: b.duration,
        });
        self.next_tick += 1;
        Ok(TickFrame {
            tick,
            time,
            finger_height: self.height,
            voltage,
            region: self.detector.region,
            active_burst,
            last_event: event,
            thresholds: self.sensor.thresholds,
        })
    }
}

/// Run `ticks` ticks offline, applying each recorded input on its tick.
/// Several inputs on one tick collapse to the last.
pub fn replay(
    config: &Config,
    tick_hz: f64,
    initial_height: f64,
    inputs: &[RecordedInput],
    ticks: u64,
) -> Result<Vec<TickFrame>> {
    if inputs.windows(2).any(|w| w[1].tick < w[0].tick) {
        return Err(invalid("recorded inputs must be in tick order"));
    }
    let mut p = LivePipeline::new(config, tick_hz, initial_height)?;
    let mut pending = inputs.iter().peekable();
    let mut frames = Vec::with_capacity(ticks as usize);
    for tick in 0..ticks {
        let mut input = None;
        while let Some(r) = pending.next_if(|r| r.tick <= tick) {
            input = Some(InputMessage {
                finger_height_m: r.finger_height_m,
                client_time: None,
            });
        }
        frames.push(p.step(input.as_ref())?);
    }
    Ok(frames)
}
