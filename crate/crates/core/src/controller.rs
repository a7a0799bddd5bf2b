//! Two-stage burst scheduling: a focus burst on press, on release, or both.

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::geometry::{Vec3, MM};
use crate::sensing::{ButtonEvent, EventKind};

/// Which finger motions get a burst.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Condition {
    #[serde(rename = "down")]
    DownOnly,
    #[serde(rename = "up")]
    UpOnly,
    #[serde(rename = "both")]
    Both,
}

impl Condition {
    pub const ALL: [Condition; 3] = [Condition::DownOnly, Condition::UpOnly, Condition::Both];

    pub fn fires_on(self, kind: EventKind) -> bool {
        matches!(
            (self, kind),
            (Condition::Both, _)
                | (Condition::DownOnly, EventKind::Down)
                | (Condition::UpOnly, EventKind::Up)
        )
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Condition::DownOnly => "down",
            Condition::UpOnly => "up",
            Condition::Both => "both",
        }
    }

    /// Bursts per complete press/release cycle.
    pub fn bursts_per_cycle(self) -> usize {
        match self {
            Condition::Both => 2,
            _ => 1,
        }
    }
}

impl std::fmt::Display for Condition {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for Condition {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "down" | "down-only" | "i" => Ok(Condition::DownOnly),
            "up" | "up-only" | "ii" => Ok(Condition::UpOnly),
            "both" | "iii" => Ok(Condition::Both),
            other => Err(invalid(format!(
                "unknown condition {other:?}, expected down, up or both"
            ))),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct FeedbackConfig {
    pub condition: Condition,
    /// Seconds.
    pub burst_duration: f64,
    pub focal_height: f64,
    pub focal_xy: [f64; 2],
}

impl Default for FeedbackConfig {
    fn default() -> Self {
        Self {
            condition: Condition::Both,
            burst_duration: 0.050,
            focal_height: 3.0 * MM,
            focal_xy: [0.0, 0.0],
        }
    }
}

impl FeedbackConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.burst_duration > 0.0) {
            return Err(invalid("burst duration must be positive"));
        }
        if !(self.focal_height > 0.0) {
            return Err(invalid("focal height must be positive"));
        }
        Ok(())
    }

    pub fn focal_point(&self) -> Vec3 {
        Vec3::new(self.focal_xy[0], self.focal_xy[1], self.focal_height)
    }
}

/// A scheduled burst of unmodulated carrier focused at `target`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct FocusCommand {
    pub target: Vec3,
    pub start: f64,
    pub duration: f64,
    pub amplitude: f64,
}

impl FocusCommand {
    pub fn end(&self) -> f64 {
        self.start + self.duration
    }
}

/// Rectangular gate: full amplitude on `[start, start + duration)`.
pub fn burst_envelope(cmd: &FocusCommand, t: f64) -> f64 {
    if t >= cmd.start && t < cmd.end() {
        cmd.amplitude
    } else {
        0.0
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ActiveBurst {
    pub start: f64,
    pub duration: f64,
}

impl ActiveBurst {
    pub fn remaining(&self, now: f64) -> f64 {
        (self.start + self.duration - now).max(0.0)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ControllerState {
    pub config: FeedbackConfig,
    pub active_burst: Option<ActiveBurst>,
    pub last_time: Option<f64>,
}

impl ControllerState {
    pub fn new(config: FeedbackConfig) -> Result<Self> {
        config.validate()?;
        Ok(Self {
            config,
            active_burst: None,
            last_time: None,
        })
    }

    /// Advance to `now` and react to `event`. A burst starts in the same tick
    /// as its event. Events arriving while a burst is running are dropped.
    pub fn step(&mut self, event: Option<&ButtonEvent>, now: f64) -> Result<Option<FocusCommand>> {
        if let Some(prev) = self.last_time {
            if now < prev {
                return Err(Error::TimeRegression { prev, got: now });
            }
        }
        self.last_time = Some(now);
        if self
            .active_burst
            .is_some_and(|b| now >= b.start + b.duration)
        {
            self.active_burst = None;
        }
        let Some(event) = event else {
            return Ok(None);
        };
        if self.active_burst.is_some() || !self.config.condition.fires_on(event.kind) {
            return Ok(None);
        }
        let cmd = FocusCommand {
            target: self.config.focal_point(),
            start: now,
            duration: self.config.burst_duration,
            amplitude: 1.0,
        };
        self.active_burst = Some(ActiveBurst {
            start: cmd.start,
            duration: cmd.duration,
        });
        Ok(Some(cmd))
    }
}

pub fn controller_step(
    mut state: ControllerState,
    event: Option<&ButtonEvent>,
    now: f64,
) -> Result<(ControllerState, Option<FocusCommand>)> {
    let cmd = state.step(event, now)?;
    Ok((state, cmd))
}
