//! Voxelization, volumetric IoU, triviality checks and isosurface meshing.

mod marching;
mod mesh;
mod trivial;
mod voxel;

pub use marching::{marching_cubes, marching_cubes_field};
pub use mesh::{parse_obj, MeshStats, TriangleMesh};
pub use trivial::{classify_trivial, TrivialityThresholds, TrivialityVerdict};
pub use voxel::{iou, voxel_values, voxelize, Bounds, VoxelGrid};

use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum GeometryError {
    #[error("incompatible voxel grids: resolution {0} vs {1}, or different bounds")]
    IncompatibleGrids(usize, usize),
    #[error("resolution must be at least 2, got {0}")]
    Resolution(usize),
    #[error("malformed OBJ at line {line}: {message}")]
    Obj { line: usize, message: String },
}

/// Voxel resolution used for fitness and triviality tests.
pub const DEFAULT_VOXEL_RESOLUTION: usize = 32;
/// Marching-cubes lattice used for rendering.
pub const DEFAULT_MESH_RESOLUTION: usize = 64;
