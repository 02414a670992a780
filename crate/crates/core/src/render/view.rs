use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::linalg::{Mat3, Vec3};
use crate::rng::{uniform_cap, uniform_rotation};
use crate::scalar::Scalar;

pub const DEFAULT_IMAGE_SIZE: usize = 128;
/// Largest angle between the light and the viewing direction, in radians.
pub const MAX_LIGHT_ANGLE: f64 = std::f64::consts::FRAC_PI_3;

/// Orthographic camera plus directional light.
///
/// `rotation` maps world to camera coordinates; the camera looks along its
/// `−z` axis, so `+z` points back toward the viewer. `light` is the unit
/// direction toward the light in camera coordinates. The image spans
/// `[−half_extent, half_extent]²` in camera `x`/`y`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ViewSpec<S> {
    pub rotation: Mat3<S>,
    pub light: Vec3<S>,
    pub width: usize,
    pub height: usize,
    pub half_extent: S,
}

impl<S: Scalar> ViewSpec<S> {
    /// Window half-width covering the projection of `[−1, 1]³` from any direction.
    pub fn canonical_half_extent() -> S {
        S::lit(3.0f64.sqrt())
    }

    /// Camera aligned with the world axes, light along the view axis.
    pub fn axis_aligned(size: usize) -> Self {
        ViewSpec {
            rotation: Mat3::identity(),
            light: Vec3::new(S::zero(), S::zero(), S::one()),
            width: size,
            height: size,
            half_extent: Self::canonical_half_extent(),
        }
    }

    /// Angle between the light and the camera's `+z` axis.
    pub fn light_angle(&self) -> S {
        self.light.z().max(-S::one()).min(S::one()).acos()
    }

    /// Camera-space `(x, y)` of a pixel centre; row 0 is the top row.
    pub fn pixel_center(&self, row: usize, col: usize) -> (S, S) {
        let h = self.half_extent;
        let two = S::lit(2.0);
        let half = S::lit(0.5);
        let x = -h + (S::from_usize_lossy(col) + half) * two * h / S::from_usize_lossy(self.width);
        let y = h - (S::from_usize_lossy(row) + half) * two * h / S::from_usize_lossy(self.height);
        (x, y)
    }

    pub fn cast<T: Scalar>(&self) -> ViewSpec<T> {
        ViewSpec {
            rotation: self.rotation.cast(),
            light: self.light.cast(),
            width: self.width,
            height: self.height,
            half_extent: T::lit(self.half_extent.as_f64()),
        }
    }
}

/// Camera rotation uniform over SO(3); light uniform over the cap within
/// [`MAX_LIGHT_ANGLE`] of the viewing direction.
pub fn sample_view<R: Rng + ?Sized>(rng: &mut R, size: usize) -> ViewSpec<f64> {
    let rotation = uniform_rotation(rng);
    let light = uniform_cap(rng, MAX_LIGHT_ANGLE);
    ViewSpec {
        rotation,
        light,
        width: size,
        height: size,
        half_extent: ViewSpec::<f64>::canonical_half_extent(),
    }
}
