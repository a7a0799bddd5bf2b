use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::geometry::MM;

/// Lowest fingertip height in airborne (non-touching) runs.
pub const AIRBORNE_MIN_HEIGHT: f64 = 1.0 * MM;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TouchMode {
    /// The finger comes down onto the plate.
    TouchingPlate,
    /// The finger stops short of the plate.
    Airborne,
}

impl TouchMode {
    pub const ALL: [TouchMode; 2] = [TouchMode::TouchingPlate, TouchMode::Airborne];

    pub fn min_height(self) -> f64 {
        match self {
            TouchMode::TouchingPlate => 0.0,
            TouchMode::Airborne => AIRBORNE_MIN_HEIGHT,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            TouchMode::TouchingPlate => "touching",
            TouchMode::Airborne => "airborne",
        }
    }
}

/// Fingertip (pad bottom) height over time.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Trajectory {
    /// (seconds, metres), time strictly increasing.
    pub samples: Vec<(f64, f64)>,
    pub touch_mode: TouchMode,
    pub sample_rate: f64,
}

impl Trajectory {
    pub fn validate(&self) -> Result<()> {
        if !(self.sample_rate > 0.0) {
            return Err(invalid("trajectory sample rate must be positive"));
        }
        for w in self.samples.windows(2) {
            if !(w[1].0 > w[0].0) {
                return Err(invalid("trajectory times must be strictly increasing"));
            }
        }
        if self.samples.iter().any(|s| !(s.1 >= 0.0)) {
            return Err(invalid("trajectory heights must be non-negative"));
        }
        Ok(())
    }

    pub fn sampling_period(&self) -> f64 {
        1.0 / self.sample_rate
    }

    pub fn heights(&self) -> impl Iterator<Item = f64> + '_ {
        self.samples.iter().map(|s| s.1)
    }
}

/// Raised-cosine press cycles. Each cycle starts and ends at the top of the
/// stroke, so a cycle is one press followed by one release:
/// `h(t) = min + amplitude / 2 * (1 + cos(2 pi t / period))`.
pub fn sinusoid_trajectory(
    cycles: usize,
    period: f64,
    amplitude: f64,
    touch_mode: TouchMode,
    sample_rate: f64,
) -> Result<Trajectory> {
    if cycles == 0 {
        return Err(invalid("trajectory needs at least one cycle"));
    }
    if !(period > 0.0 && amplitude > 0.0 && sample_rate > 0.0) {
        return Err(invalid("period, amplitude and sample rate must be positive"));
    }
    let offset = touch_mode.min_height();
    let n = (cycles as f64 * period * sample_rate).round() as usize;
    let samples = (0..=n)
        .map(|i| {
            let t = i as f64 / sample_rate;
            let phase = std::f64::consts::TAU * t / period;
            (t, offset + amplitude / 2.0 * (1.0 + phase.cos()))
        })
        .collect();
    Ok(Trajectory {
        samples,
        touch_mode,
        sample_rate,
    })
}

/// Uniform height jitter in `[-noise_amplitude, noise_amplitude]` per sample
/// from a seeded ChaCha8 stream. Heights are clamped at zero.
pub fn add_chatter(traj: &Trajectory, noise_amplitude: f64, seed: u64) -> Result<Trajectory> {
    if !(noise_amplitude >= 0.0) {
        return Err(invalid("noise amplitude must be non-negative"));
    }
    if noise_amplitude == 0.0 {
        return Ok(traj.clone());
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let samples = traj
        .samples
        .iter()
        .map(|&(t, h)| {
            let jitter = rng.random_range(-noise_amplitude..=noise_amplitude);
            (t, (h + jitter).max(0.0))
        })
        .collect();
    Ok(Trajectory {
        samples,
        ..traj.clone()
    })
}
