//! IR beam finger sensing and the hysteresis edge detector.
//!
//! The beam runs horizontally just above the plate. A lowered finger cuts into
//! the collimated aperture from above, which dims the phototransistor. The
//! detector compares the photovoltage against two thresholds: press when the
//! voltage falls to `press`, release when it climbs back to `release`.

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::geometry::Vec3;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BeamModel {
    pub emitter: Vec3,
    pub receiver: Vec3,
    /// Radius of the collimating hole in front of the LED.
    pub aperture_radius: f64,
    /// Output with the beam unobstructed.
    pub v_bright: f64,
    /// Output with the beam fully blocked.
    pub v_dark: f64,
}

impl BeamModel {
    /// LED and phototransistor `span` apart along x, centred over the origin.
    pub fn horizontal(height: f64, span: f64, aperture_radius: f64, v_bright: f64, v_dark: f64) -> Self {
        Self {
            emitter: Vec3::new(-span / 2.0, 0.0, height),
            receiver: Vec3::new(span / 2.0, 0.0, height),
            aperture_radius,
            v_bright,
            v_dark,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.aperture_radius > 0.0) {
            return Err(invalid("beam aperture radius must be positive"));
        }
        if !(self.v_dark >= 0.0 && self.v_bright > self.v_dark) {
            return Err(invalid("beam voltages need v_bright > v_dark >= 0"));
        }
        Ok(())
    }

    pub fn axis_height(&self) -> f64 {
        0.5 * (self.emitter.z + self.receiver.z)
    }

    /// Steepest photovoltage change per metre of finger travel, reached when
    /// the finger edge crosses the beam axis.
    pub fn max_voltage_slope(&self) -> f64 {
        (self.v_bright - self.v_dark) * 2.0 / (std::f64::consts::PI * self.aperture_radius)
    }
}

/// Fingertip as a horizontal cylinder.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct FingerModel {
    /// Axis position; `z` is the axis height above the plate.
    pub center: Vec3,
    pub radius: f64,
}

impl FingerModel {
    /// Finger whose lowest point is `height` above the plate.
    pub fn with_pad_height(xy: [f64; 2], height: f64, radius: f64) -> Self {
        Self {
            center: Vec3::new(xy[0], xy[1], height + radius),
            radius,
        }
    }

    pub fn bottom(&self) -> f64 {
        self.center.z - self.radius
    }
}

/// Fraction of the beam aperture blocked by the finger, treating the finger's
/// lower edge as a horizontal cut through the circular aperture.
pub fn occlusion(finger: &FingerModel, beam: &BeamModel) -> f64 {
    let a = beam.aperture_radius;
    let d = finger.bottom() - beam.axis_height();
    if d >= a {
        0.0
    } else if d <= -a {
        1.0
    } else {
        // Circular segment above the chord at offset d.
        let segment = a * a * (d / a).acos() - d * (a * a - d * d).sqrt();
        (segment / (std::f64::consts::PI * a * a)).clamp(0.0, 1.0)
    }
}

pub fn photovoltage(occ: f64, beam: &BeamModel) -> Result<f64> {
    if !(0.0..=1.0).contains(&occ) {
        return Err(invalid(format!("occlusion {occ} outside [0, 1]")));
    }
    Ok(beam.v_dark + (1.0 - occ) * (beam.v_bright - beam.v_dark))
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Thresholds {
    /// Down fires at or below this voltage.
    pub press: f64,
    /// Up fires at or above this voltage.
    pub release: f64,
}

impl Thresholds {
    pub fn new(press: f64, release: f64) -> Result<Self> {
        let t = Self { press, release };
        t.validate()?;
        Ok(t)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.release > self.press) {
            return Err(invalid(format!(
                "release threshold {} must exceed press threshold {}",
                self.release, self.press
            )));
        }
        Ok(())
    }

    pub fn band(&self) -> f64 {
        self.release - self.press
    }
}

/// Which side of the hysteresis band the detector last settled on.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Region {
    /// Beam clear, button up.
    Above,
    /// Beam blocked, button down.
    Below,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EventKind {
    Down,
    Up,
}

impl EventKind {
    pub fn as_str(self) -> &'static str {
        match self {
            EventKind::Down => "down",
            EventKind::Up => "up",
        }
    }
}

impl std::str::FromStr for EventKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "down" => Ok(EventKind::Down),
            "up" => Ok(EventKind::Up),
            other => Err(Error::Format(format!("unknown event kind {other:?}"))),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ButtonEvent {
    pub kind: EventKind,
    pub time: f64,
    pub voltage: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DetectorState {
    pub region: Region,
    pub thresholds: Thresholds,
    pub last_event_time: Option<f64>,
    pub last_sample_time: Option<f64>,
}

impl DetectorState {
    /// Starts in [`Region::Above`]: the button is up until a press is seen.
    pub fn new(thresholds: Thresholds) -> Result<Self> {
        thresholds.validate()?;
        Ok(Self {
            region: Region::Above,
            thresholds,
            last_event_time: None,
            last_sample_time: None,
        })
    }

    /// Starts in whichever region `voltage` already implies, without emitting.
    /// Voltages inside the band count as released.
    pub fn settled(thresholds: Thresholds, voltage: f64) -> Result<Self> {
        let mut s = Self::new(thresholds)?;
        if voltage <= thresholds.press {
            s.region = Region::Below;
        }
        Ok(s)
    }

    /// Feed one sample. Inclusive comparisons at both thresholds; nothing
    /// fires strictly inside the band.
    pub fn step(&mut self, voltage: f64, time: f64) -> Result<Option<ButtonEvent>> {
        if let Some(prev) = self.last_sample_time {
            if time < prev {
                return Err(Error::TimeRegression { prev, got: time });
            }
        }
        self.last_sample_time = Some(time);
        let kind = match self.region {
            Region::Above if voltage <= self.thresholds.press => {
                self.region = Region::Below;
                EventKind::Down
            }
            Region::Below if voltage >= self.thresholds.release => {
                self.region = Region::Above;
                EventKind::Up
            }
            _ => return Ok(None),
        };
        self.last_event_time = Some(time);
        Ok(Some(ButtonEvent {
            kind,
            time,
            voltage,
        }))
    }
}

pub fn detector_step(
    mut state: DetectorState,
    voltage: f64,
    time: f64,
) -> Result<(DetectorState, Option<ButtonEvent>)> {
    let event = state.step(voltage, time)?;
    Ok((state, event))
}
