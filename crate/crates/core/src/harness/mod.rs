//! Scripted experiments: finger trajectories, full sensing-to-controller
//! sessions, the force-versus-gap sweep and its period estimate.

mod period;
mod session;
mod sweep;
mod trajectory;

use serde::{Deserialize, Serialize};

pub use period::dominant_period;
pub use session::{measure_latency, run_session, LatencyReport, SessionLog};
pub use sweep::{quantize_force, run_force_sweep, SweepOptions, SweepResult, SCALE_STEP};
pub use trajectory::{add_chatter, sinusoid_trajectory, TouchMode, Trajectory, AIRBORNE_MIN_HEIGHT};

use crate::controller::Condition;

/// One cell of the stimulus matrix.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MatrixEntry {
    pub condition: Condition,
    pub burst_ms: f64,
    pub touch_mode: TouchMode,
}

/// Every combination of condition, burst length and touch mode. With the
/// default burst set of 50 and 100 ms this gives 12 entries.
pub fn condition_matrix(burst_ms: &[f64]) -> Vec<MatrixEntry> {
    let mut out = Vec::with_capacity(Condition::ALL.len() * burst_ms.len() * 2);
    for condition in Condition::ALL {
        for &burst_ms in burst_ms {
            for touch_mode in TouchMode::ALL {
                out.push(MatrixEntry {
                    condition,
                    burst_ms,
                    touch_mode,
                });
            }
        }
    }
    out
}
