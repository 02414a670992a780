//! Evolution of 3D shapes encoded as implicit-surface computation graphs.
//!
//! Shapes are graphs over `(x, y, z)` whose output `F` is negative inside the
//! solid. New shapes come from randomly transforming two existing shapes and
//! combining them with a set operation; a genetic algorithm keeps the fittest
//! ones, with fitness supplied either by volumetric IoU against a target or
//! by an external learner that trains on rendered images of each candidate.
//!
//! The geometry kernels are generic over [`Scalar`] (`f32` or `f64`); the
//! aliases below fix the scalar used by the evolution engine.

pub mod evolution;
pub mod fitness;
pub mod geometry;
pub mod graph;
pub mod linalg;
pub mod render;
pub mod rng;
pub mod scalar;

pub use scalar::Scalar;

/// Scalar used by the evolution engine and the CLI.
pub type Real = f64;

pub type Graph = graph::ShapeGraph<f64>;
pub type GraphF32 = graph::ShapeGraph<f32>;
pub type Mesh = geometry::TriangleMesh<f64>;
pub type MeshF32 = geometry::TriangleMesh<f32>;
pub type Transform = graph::AffineTransform<f64>;
pub type Vector3 = linalg::Vec3<f64>;
pub type Matrix3 = linalg::Mat3<f64>;
