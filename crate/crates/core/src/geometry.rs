//! Transducer lattices, array poses and the reflecting plate.

use nalgebra::{Matrix3, Rotation3};
use serde::{Deserialize, Serialize};

use crate::acoustics::Directivity;
use crate::error::{invalid, Result};

pub type Vec3 = nalgebra::Vector3<f64>;

const UNIT_TOL: f64 = 1e-12;

/// Millimetres to metres.
pub const MM: f64 = 1e-3;

/// Default lattice: 14 x 18 elements on a 10.16 mm pitch.
pub const DEFAULT_ROWS: usize = 14;
pub const DEFAULT_COLS: usize = 18;
pub const DEFAULT_PITCH: f64 = 10.16 * MM;
pub const DEFAULT_ELEMENT_RADIUS: f64 = 4.5e-3;

/// Per-element pressure amplitude at 1 m for unit drive (Pa m).
///
/// Calibrated with [`crate::acoustics::calibrate_source_pressure`] so that one
/// default array focused straight at 200 mm pushes a 10 mm disc with 20 mN.
pub const DEFAULT_SOURCE_PRESSURE: f64 = 6.581_758_500_065_308;

/// Regular rectangular lattice of circular pistons, centred on its local origin.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TransducerLattice {
    pub rows: usize,
    pub cols: usize,
    pub pitch: f64,
    /// Effective piston radius.
    pub element_radius: f64,
}

impl TransducerLattice {
    pub fn validate(&self) -> Result<()> {
        if self.rows == 0 || self.cols == 0 {
            return Err(invalid("lattice needs at least one row and one column"));
        }
        if !(self.pitch > 0.0 && self.pitch.is_finite()) {
            return Err(invalid(format!("lattice pitch must be positive, got {}", self.pitch)));
        }
        if !(self.element_radius > 0.0 && self.element_radius < self.pitch / 2.0) {
            return Err(invalid(format!(
                "element radius {} must lie in (0, pitch/2 = {})",
                self.element_radius,
                self.pitch / 2.0
            )));
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.rows * self.cols
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Element centres in the lattice frame (z = 0), row-major.
    pub fn local_positions(&self) -> Vec<Vec3> {
        let cu = (self.cols as f64 - 1.0) / 2.0;
        let cv = (self.rows as f64 - 1.0) / 2.0;
        (0..self.rows)
            .flat_map(|r| {
                (0..self.cols).map(move |c| {
                    Vec3::new((c as f64 - cu) * self.pitch, (r as f64 - cv) * self.pitch, 0.0)
                })
            })
            .collect()
    }

    /// Outer extent (cols direction, rows direction) between the extreme element centres.
    pub fn span(&self) -> (f64, f64) {
        (
            (self.cols as f64 - 1.0) * self.pitch,
            (self.rows as f64 - 1.0) * self.pitch,
        )
    }
}

pub fn build_lattice(
    rows: usize,
    cols: usize,
    pitch: f64,
    element_radius: f64,
) -> Result<TransducerLattice> {
    let lattice = TransducerLattice {
        rows,
        cols,
        pitch,
        element_radius,
    };
    lattice.validate()?;
    Ok(lattice)
}

/// Rigid placement of a lattice. Lattice columns run along `in_plane_axis`,
/// rows along `normal x in_plane_axis`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ArrayPose {
    /// Centre of the emission plane.
    pub origin: Vec3,
    /// Emission direction.
    pub normal: Vec3,
    pub in_plane_axis: Vec3,
}

impl ArrayPose {
    pub fn new(origin: Vec3, normal: Vec3, in_plane_axis: Vec3) -> Result<Self> {
        let pose = Self {
            origin,
            normal,
            in_plane_axis,
        };
        pose.validate()?;
        Ok(pose)
    }

    pub fn identity() -> Self {
        Self {
            origin: Vec3::zeros(),
            normal: Vec3::z(),
            in_plane_axis: Vec3::x(),
        }
    }

    /// Start from the identity orientation, rotate by `angle` about the x axis
    /// and translate to `origin`. The in-plane axis stays on x.
    pub fn tilted_about_in_plane_axis(origin: Vec3, angle: f64) -> Self {
        let rot = Rotation3::from_axis_angle(&Vec3::x_axis(), angle);
        Self {
            origin,
            normal: rot * Vec3::z(),
            in_plane_axis: Vec3::x(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if (self.normal.norm() - 1.0).abs() > UNIT_TOL {
            return Err(invalid(format!(
                "array normal must be unit length, |n| = {}",
                self.normal.norm()
            )));
        }
        if (self.in_plane_axis.norm() - 1.0).abs() > UNIT_TOL {
            return Err(invalid("array in-plane axis must be unit length"));
        }
        if self.normal.dot(&self.in_plane_axis).abs() > UNIT_TOL {
            return Err(invalid("array in-plane axis must be orthogonal to the normal"));
        }
        Ok(())
    }

    /// Columns are (in-plane axis, normal x in-plane axis, normal).
    pub fn rotation(&self) -> Matrix3<f64> {
        let second = self.normal.cross(&self.in_plane_axis);
        Matrix3::from_columns(&[self.in_plane_axis, second, self.normal])
    }
}

/// A single element in world coordinates.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Transducer {
    pub position: Vec3,
    pub normal: Vec3,
}

pub fn pose_array(lattice: &TransducerLattice, pose: &ArrayPose) -> Result<Vec<Transducer>> {
    lattice.validate()?;
    pose.validate()?;
    let rot = pose.rotation();
    Ok(lattice
        .local_positions()
        .into_iter()
        .map(|local| Transducer {
            position: pose.origin + rot * local,
            normal: pose.normal,
        })
        .collect())
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReflectingPlane {
    pub point: Vec3,
    pub normal: Vec3,
    pub reflection_coefficient: f64,
}

impl ReflectingPlane {
    /// Rigid plate at z = 0 facing +z.
    pub fn rigid_floor() -> Self {
        Self {
            point: Vec3::zeros(),
            normal: Vec3::z(),
            reflection_coefficient: 1.0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if (self.normal.norm() - 1.0).abs() > UNIT_TOL {
            return Err(invalid("plane normal must be unit length"));
        }
        if !(0.0..=1.0).contains(&self.reflection_coefficient) {
            return Err(invalid(format!(
                "reflection coefficient {} outside [0, 1]",
                self.reflection_coefficient
            )));
        }
        Ok(())
    }

    /// Positive on the emission side.
    pub fn signed_distance(&self, p: &Vec3) -> f64 {
        (p - self.point).dot(&self.normal)
    }

    pub fn mirror_point(&self, p: &Vec3) -> Vec3 {
        p - 2.0 * self.signed_distance(p) * self.normal
    }

    pub fn mirror_direction(&self, d: &Vec3) -> Vec3 {
        d - 2.0 * d.dot(&self.normal) * self.normal
    }

    /// Parallel plane offset by `distance` along the normal, same orientation.
    pub fn offset(&self, distance: f64, reflection_coefficient: f64) -> Self {
        Self {
            point: self.point + distance * self.normal,
            normal: self.normal,
            reflection_coefficient,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PosedArray {
    pub lattice: TransducerLattice,
    pub pose: ArrayPose,
}

impl PosedArray {
    pub fn transducers(&self) -> Result<Vec<Transducer>> {
        pose_array(&self.lattice, &self.pose)
    }
}

/// World geometry plus the medium.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Scene {
    pub frequency: f64,
    pub sound_speed: f64,
    pub air_density: f64,
    /// Height of the IR beam axis above the plate.
    pub beam_height: f64,
    /// See [`DEFAULT_SOURCE_PRESSURE`].
    pub source_pressure: f64,
    #[serde(default)]
    pub directivity: Directivity,
    /// Physical plate extent (x, y). Not used by the field model, which treats
    /// the plate as infinite.
    #[serde(default)]
    pub plate_size: Option<[f64; 2]>,
    pub plane: ReflectingPlane,
    pub arrays: Vec<PosedArray>,
}

impl Scene {
    pub fn validate(&self) -> Result<()> {
        if !(self.frequency > 0.0) {
            return Err(invalid("frequency must be positive"));
        }
        if !(self.sound_speed > 0.0) {
            return Err(invalid("sound speed must be positive"));
        }
        if !(self.air_density > 0.0) {
            return Err(invalid("air density must be positive"));
        }
        if !(self.source_pressure > 0.0) {
            return Err(invalid("source pressure must be positive"));
        }
        if !(self.beam_height >= 0.0) {
            return Err(invalid("beam height must be non-negative"));
        }
        self.plane.validate()?;
        if self.arrays.is_empty() {
            return Err(invalid("scene needs at least one array"));
        }
        for (i, array) in self.arrays.iter().enumerate() {
            array.lattice.validate()?;
            array.pose.validate()?;
            if self.plane.signed_distance(&array.pose.origin) <= 0.0 {
                return Err(invalid(format!(
                    "array {i} origin is not on the emission side of the plate"
                )));
            }
        }
        Ok(())
    }

    pub fn wavelength(&self) -> f64 {
        self.sound_speed / self.frequency
    }

    pub fn wavenumber(&self) -> f64 {
        2.0 * std::f64::consts::PI / self.wavelength()
    }

    /// All elements of all arrays, array by array.
    pub fn transducers(&self) -> Result<Vec<Transducer>> {
        let mut out = Vec::with_capacity(self.element_count());
        for array in &self.arrays {
            out.extend(array.transducers()?);
        }
        Ok(out)
    }

    pub fn element_count(&self) -> usize {
        self.arrays.iter().map(|a| a.lattice.len()).sum()
    }

    /// Common element radius. Scenes mixing radii use the first array's value.
    pub fn element_radius(&self) -> f64 {
        self.arrays[0].lattice.element_radius
    }
}

/// Reference apparatus: two arrays whose emission-plane centres sit 200 mm
/// above a rigid plate and 270 mm apart, each tilted 45 deg toward the
/// workspace centre; 40 kHz in 340 m/s air; IR beam 3 mm above the plate.
pub fn default_scene() -> Scene {
    let height = 200.0 * MM;
    let separation = 270.0 * MM;
    let lattice = TransducerLattice {
        rows: DEFAULT_ROWS,
        cols: DEFAULT_COLS,
        pitch: DEFAULT_PITCH,
        element_radius: DEFAULT_ELEMENT_RADIUS,
    };
    let arrays = [1.0, -1.0]
        .into_iter()
        .map(|side: f64| {
            let origin = Vec3::new(side * separation / 2.0, 0.0, height);
            // Straight-down emission tilted 45 deg about y toward the centre.
            let c = std::f64::consts::FRAC_1_SQRT_2;
            let normal = Vec3::new(-side * c, 0.0, -c);
            PosedArray {
                lattice: lattice.clone(),
                pose: ArrayPose {
                    origin,
                    normal,
                    in_plane_axis: Vec3::y(),
                },
            }
        })
        .collect();
    Scene {
        frequency: 40e3,
        sound_speed: 340.0,
        air_density: 1.2,
        beam_height: 3.0 * MM,
        source_pressure: DEFAULT_SOURCE_PRESSURE,
        directivity: Directivity::Piston,
        plate_size: Some([120.0 * MM, 120.0 * MM]),
        plane: ReflectingPlane::rigid_floor(),
        arrays,
    }
}
