use std::path::Path;

use thiserror::Error;

use crate::geometry::{parse_obj, voxelize, Bounds, GeometryError, VoxelGrid};
use crate::graph::{compose, from_json, transform, AffineTransform, CsgOp, GraphError, Primitive};
use crate::linalg::Vec3;
use crate::{Graph, Mesh};

/// Names accepted by [`TargetSpec::builtin`].
pub const BUILTIN_TARGETS: [&str; 3] = ["bite", "heart", "torus"];

#[derive(Debug, Error)]
pub enum TargetError {
    #[error("target `{0}` occupies no voxels")]
    Empty(String),
    #[error("unknown target `{0}`; expected a .obj or .json path or one of bite, heart, torus")]
    Unknown(String),
    #[error("cannot read target {path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error(transparent)]
    Geometry(#[from] GeometryError),
}

/// Occupancy of the shape that IoU fitness is measured against.
#[derive(Clone, Debug)]
pub struct TargetSpec {
    pub name: String,
    pub grid: VoxelGrid,
}

/// A sphere of radius 0.6 with a bite taken out by a sphere of radius 0.4
/// centred at `(0.5, 0, 0)`; reachable from two primitives in one step.
pub fn bite_graph() -> Graph {
    let body = Primitive::Sphere { radius: 0.6 }
        .graph()
        .expect("positive radius");
    let bite = Primitive::Sphere { radius: 0.4 }
        .graph()
        .expect("positive radius");
    let bite = transform(&bite, &AffineTransform::translate(Vec3::new(0.5, 0.0, 0.0)));
    compose(&body, &bite, CsgOp::Difference)
}

impl TargetSpec {
    pub fn new(name: impl Into<String>, grid: VoxelGrid) -> Result<Self, TargetError> {
        let name = name.into();
        if grid.occupied_count() == 0 {
            return Err(TargetError::Empty(name));
        }
        Ok(TargetSpec { name, grid })
    }

    pub fn from_graph(
        name: impl Into<String>,
        graph: &Graph,
        resolution: usize,
    ) -> Result<Self, TargetError> {
        Self::new(name, voxelize(graph, resolution, Bounds::canonical())?)
    }

    /// Occupancy by ray parity; the mesh should be closed.
    pub fn from_mesh(
        name: impl Into<String>,
        mesh: &Mesh,
        resolution: usize,
    ) -> Result<Self, TargetError> {
        if resolution < 2 {
            return Err(GeometryError::Resolution(resolution).into());
        }
        Self::new(name, mesh.voxelize(resolution, Bounds::canonical()))
    }

    /// Occupancy of `field(p) < 0` at cell centres.
    pub fn from_field(
        name: impl Into<String>,
        field: impl Fn(Vec3<f64>) -> f64,
        resolution: usize,
    ) -> Result<Self, TargetError> {
        if resolution < 2 {
            return Err(GeometryError::Resolution(resolution).into());
        }
        let bounds = Bounds::canonical();
        let r = resolution;
        let mut occupancy = Vec::with_capacity(r * r * r);
        for k in 0..r {
            for j in 0..r {
                for i in 0..r {
                    occupancy.push(field(bounds.cell_center(r, i, j, k)) < 0.0);
                }
            }
        }
        Self::new(name, VoxelGrid::new(r, bounds, occupancy))
    }

    /// `bite`, a heart scaled by 0.75 to fit the canonical cube, or a torus
    /// with radii 0.6 and 0.25 around `z`.
    pub fn builtin(name: &str, resolution: usize) -> Result<Self, TargetError> {
        match name {
            "bite" => Self::from_graph(name, &bite_graph(), resolution),
            "heart" => Self::from_field(
                name,
                |p| {
                    let [x, y, z] = (p * (1.0 / 0.75)).0;
                    let a = x * x + 2.25 * y * y + z * z - 1.0;
                    a * a * a - x * x * z.powi(3) - 0.1125 * y * y * z.powi(3)
                },
                resolution,
            ),
            "torus" => Self::from_field(
                name,
                |p| {
                    let [x, y, z] = p.0;
                    let q = (x * x + y * y).sqrt() - 0.6;
                    q * q + z * z - 0.25 * 0.25
                },
                resolution,
            ),
            _ => Err(TargetError::Unknown(name.to_string())),
        }
    }

    /// Loads a `.obj` mesh or `.json` graph, or falls back to a builtin name
    /// when no such file exists.
    pub fn load(spec: &str, resolution: usize) -> Result<Self, TargetError> {
        let path = Path::new(spec);
        if !path.exists() {
            return Self::builtin(spec, resolution);
        }
        let text = std::fs::read_to_string(path).map_err(|source| TargetError::Io {
            path: spec.to_string(),
            source,
        })?;
        let name = path
            .file_stem()
            .map_or(spec.to_string(), |s| s.to_string_lossy().into_owned());
        match path.extension().and_then(|e| e.to_str()) {
            Some("obj") => Self::from_mesh(name, &parse_obj(&text)?, resolution),
            Some("json") => Self::from_graph(name, &from_json(&text)?, resolution),
            _ => Err(TargetError::Unknown(spec.to_string())),
        }
    }
}
