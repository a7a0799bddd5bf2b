use std::f64::consts::TAU;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::geometry::{Scene, Vec3};

/// Per-element drive. Element order follows [`Scene::transducers`].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DriveState {
    /// Radians, wrapped to [0, 2 pi).
    pub phases: Vec<f64>,
    /// Normalised, in [0, 1].
    pub amplitudes: Vec<f64>,
    /// Pressure amplitude times distance for a unit-amplitude element (Pa m).
    pub source_pressure: f64,
}

impl DriveState {
    pub fn uniform(n: usize, source_pressure: f64) -> Self {
        Self {
            phases: vec![0.0; n],
            amplitudes: vec![1.0; n],
            source_pressure,
        }
    }

    pub fn silent(n: usize, source_pressure: f64) -> Self {
        Self {
            phases: vec![0.0; n],
            amplitudes: vec![0.0; n],
            source_pressure,
        }
    }

    pub fn len(&self) -> usize {
        self.phases.len()
    }

    pub fn is_empty(&self) -> bool {
        self.phases.is_empty()
    }

    pub fn validate(&self) -> Result<()> {
        if self.phases.len() != self.amplitudes.len() {
            return Err(invalid("drive phase and amplitude counts differ"));
        }
        if !(self.source_pressure > 0.0) {
            return Err(invalid("source pressure must be positive"));
        }
        if let Some(a) = self.amplitudes.iter().find(|a| !(0.0..=1.0).contains(*a)) {
            return Err(invalid(format!("drive amplitude {a} outside [0, 1]")));
        }
        if let Some(p) = self.phases.iter().find(|p| !(0.0..TAU).contains(*p)) {
            return Err(invalid(format!("drive phase {p} not wrapped to [0, 2pi)")));
        }
        Ok(())
    }

    /// Same phases, every amplitude multiplied by `s`.
    pub fn with_amplitude_scale(&self, s: f64) -> Result<Self> {
        let out = Self {
            phases: self.phases.clone(),
            amplitudes: self.amplitudes.iter().map(|a| a * s).collect(),
            source_pressure: self.source_pressure,
        };
        out.validate()?;
        Ok(out)
    }

    /// Complex source strength `source_pressure * amplitude * exp(i phase)` per element.
    pub fn weights(&self) -> Vec<Complex64> {
        self.phases
            .iter()
            .zip(&self.amplitudes)
            .map(|(&ph, &a)| Complex64::from_polar(self.source_pressure * a, ph))
            .collect()
    }
}

/// Where the focus should form.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct FocusSpec {
    pub target: Vec3,
    /// Focus through the plate: aim at the target's mirror image so the
    /// reflected wave converges on the target.
    pub via_reflection: bool,
}

impl FocusSpec {
    pub fn reflected(target: Vec3) -> Self {
        Self {
            target,
            via_reflection: true,
        }
    }

    pub fn direct(target: Vec3) -> Self {
        Self {
            target,
            via_reflection: false,
        }
    }
}

#[inline]
pub(crate) fn wrap_phase(phi: f64) -> f64 {
    let w = phi.rem_euclid(TAU);
    // rem_euclid can round up to exactly TAU for tiny negative inputs.
    if w >= TAU {
        0.0
    } else {
        w
    }
}

/// Phase each element by `k * d mod 2 pi`, with `d` its distance to the aim
/// point, so that all contributions arrive in phase there.
pub fn focus_phases(scene: &Scene, focus: &FocusSpec) -> Result<DriveState> {
    scene.validate()?;
    let aim = if focus.via_reflection {
        if scene.plane.signed_distance(&focus.target) <= 0.0 {
            return Err(invalid("reflected focus target must lie strictly above the plate"));
        }
        scene.plane.mirror_point(&focus.target)
    } else {
        focus.target
    };
    let k = scene.wavenumber();
    let transducers = scene.transducers()?;
    let phases = transducers
        .iter()
        .map(|t| wrap_phase(k * (t.position - aim).norm()))
        .collect();
    Ok(DriveState {
        phases,
        amplitudes: vec![1.0; transducers.len()],
        source_pressure: scene.source_pressure,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{build_lattice, default_scene, ArrayPose, PosedArray, MM};
    use std::f64::consts::PI;

    fn single_element_scene(distance_to_target: f64) -> (Scene, Vec3) {
        let mut scene = default_scene();
        scene.arrays = vec![PosedArray {
            lattice: build_lattice(1, 1, 10.16 * MM, 4.5 * MM).unwrap(),
            pose: ArrayPose::new(Vec3::new(0.0, 0.0, 0.1), -Vec3::z(), Vec3::x()).unwrap(),
        }];
        (scene, Vec3::new(0.0, 0.0, 0.1 - distance_to_target))
    }

    fn circular_distance(a: f64, b: f64) -> f64 {
        let d = (a - b).rem_euclid(TAU);
        d.min(TAU - d)
    }

    #[test]
    fn integer_wavelengths_give_zero_phase() {
        let (scene, target) = single_element_scene(8.5 * MM);
        let d = focus_phases(&scene, &FocusSpec::direct(target)).unwrap();
        assert!(circular_distance(d.phases[0], 0.0) < 1e-9);
    }

    #[test]
    fn half_wavelength_gives_pi() {
        let (scene, target) = single_element_scene(4.25 * MM);
        let d = focus_phases(&scene, &FocusSpec::direct(target)).unwrap();
        assert!((d.phases[0] - PI).abs() < 1e-9);
    }

    #[test]
    fn reflected_target_on_or_below_plate_rejected() {
        let scene = default_scene();
        assert!(focus_phases(&scene, &FocusSpec::reflected(Vec3::zeros())).is_err());
        assert!(focus_phases(&scene, &FocusSpec::reflected(Vec3::new(0.0, 0.0, -1e-3))).is_err());
    }

    #[test]
    fn drive_is_wrapped_and_full_amplitude() {
        let scene = default_scene();
        let d = focus_phases(&scene, &FocusSpec::reflected(Vec3::new(0.0, 0.0, 3.0 * MM))).unwrap();
        d.validate().unwrap();
        assert_eq!(d.len(), scene.element_count());
        assert!(d.amplitudes.iter().all(|&a| a == 1.0));
    }

    #[test]
    fn wrap_handles_negative_zero_edge() {
        assert_eq!(wrap_phase(-1e-300), 0.0);
        assert!((wrap_phase(-PI) - PI).abs() < 1e-15);
    }
}
