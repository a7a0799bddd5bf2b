use serde::{Deserialize, Serialize};

use super::trajectory::Trajectory;
use crate::config::SensorConfig;
use crate::controller::{Condition, ControllerState, FeedbackConfig, FocusCommand};
use crate::error::{invalid, Error, Result};
use crate::geometry::Scene;
use crate::sensing::{occlusion, photovoltage, ButtonEvent, DetectorState, EventKind, FingerModel};
use crate::LATENCY_BUDGET;

/// Everything one scripted session produced.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct SessionLog {
    pub events: Vec<ButtonEvent>,
    pub commands: Vec<FocusCommand>,
    /// For each command, the index of the event that caused it.
    pub triggers: Vec<usize>,
    /// For each command, seconds from the threshold crossing to command start.
    pub latencies: Vec<f64>,
    /// Sampled photovoltage, (seconds, volts).
    pub trace: Vec<(f64, f64)>,
}

impl SessionLog {
    pub fn count(&self, kind: EventKind) -> usize {
        self.events.iter().filter(|e| e.kind == kind).count()
    }

    pub fn max_latency(&self) -> Option<f64> {
        self.latencies.iter().copied().reduce(f64::max)
    }

    /// Checks that every command has a causing event of a kind the condition
    /// reacts to, starting at that event's time, and that events alternate.
    pub fn check_consistency(&self, condition: Condition) -> Result<()> {
        if self.triggers.len() != self.commands.len() || self.latencies.len() != self.commands.len() {
            return Err(invalid("session log columns differ in length"));
        }
        for (cmd, &i) in self.commands.iter().zip(&self.triggers) {
            let ev = self
                .events
                .get(i)
                .ok_or_else(|| invalid(format!("command trigger {i} has no event")))?;
            if !condition.fires_on(ev.kind) || ev.time != cmd.start {
                return Err(invalid(format!(
                    "command at {} s does not match its {} event",
                    cmd.start,
                    ev.kind.as_str()
                )));
            }
        }
        for w in self.events.windows(2) {
            if w[0].kind == w[1].kind {
                return Err(invalid("events do not alternate"));
            }
        }
        Ok(())
    }
}

/// Drive the sensing and controller state machines with a trajectory.
/// The detector starts in the region implied by the first sample, so a
/// finger that begins below the beam does not produce a spurious press.
pub fn run_session(
    scene: &Scene,
    sensor: &SensorConfig,
    feedback: &FeedbackConfig,
    traj: &Trajectory,
) -> Result<SessionLog> {
    sensor.validate(scene)?;
    traj.validate()?;
    let beam = sensor.beam(scene);
    let voltage_at = |h: f64| {
        let finger = FingerModel::with_pad_height(feedback.focal_xy, h, sensor.finger_radius);
        photovoltage(occlusion(&finger, &beam), &beam)
    };
    let mut log = SessionLog::default();
    let Some(&(_, h0)) = traj.samples.first() else {
        return Ok(log);
    };
    let thresholds = sensor.thresholds;
    let mut detector = DetectorState::settled(thresholds, voltage_at(h0)?)?;
    let mut controller = ControllerState::new(*feedback)?;
    let mut prev: Option<(f64, f64)> = None;
    for &(t, h) in &traj.samples {
        let v = voltage_at(h)?;
        log.trace.push((t, v));
        let event = detector.step(v, t)?;
        if let Some(ev) = event {
            log.events.push(ev);
        }
        if let Some(cmd) = controller.step(event.as_ref(), t)? {
            let ev = event.expect("commands only follow events");
            let threshold = match ev.kind {
                EventKind::Down => thresholds.press,
                EventKind::Up => thresholds.release,
            };
            let crossing = match prev {
                Some((tp, vp)) if v != vp => tp + (threshold - vp) / (v - vp) * (t - tp),
                _ => t,
            };
            log.triggers.push(log.events.len() - 1);
            log.latencies.push((cmd.start - crossing).max(0.0));
            log.commands.push(cmd);
        }
        prev = Some((t, v));
    }
    Ok(log)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LatencyReport {
    pub latencies: Vec<f64>,
    pub max_latency: f64,
    pub sampling_period: f64,
    pub budget: f64,
    /// Sampling period within budget and every latency within one period.
    pub within_budget: bool,
}

pub fn measure_latency(log: &SessionLog, sampling_period: f64) -> Result<LatencyReport> {
    if !(sampling_period > 0.0) {
        return Err(invalid("sampling period must be positive"));
    }
    let Some(max_latency) = log.max_latency() else {
        return Err(Error::NoData);
    };
    Ok(LatencyReport {
        latencies: log.latencies.clone(),
        max_latency,
        sampling_period,
        budget: LATENCY_BUDGET,
        within_budget: sampling_period <= LATENCY_BUDGET
            && max_latency <= sampling_period * (1.0 + 1e-9),
    })
}
