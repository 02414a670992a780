use serde::{Deserialize, Serialize};

use super::{iou, GeometryError, VoxelGrid};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TrivialityVerdict {
    Ok,
    Empty,
    DegenerateEqualToParent,
    Full,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct TrivialityThresholds {
    /// Fewer occupied voxels than this is empty.
    pub min_voxels: usize,
    /// Fill fraction above this is full.
    pub full_fraction: f64,
    /// IoU with either parent above this is a copy of that parent.
    pub parent_iou: f64,
}

impl Default for TrivialityThresholds {
    fn default() -> Self {
        TrivialityThresholds {
            min_voxels: 4,
            full_fraction: 0.999,
            parent_iou: 0.99,
        }
    }
}

/// Classifies a composed child against the two shapes it was composed from.
pub fn classify_trivial(
    child: &VoxelGrid,
    parent_a: &VoxelGrid,
    parent_b: &VoxelGrid,
    thresholds: &TrivialityThresholds,
) -> Result<TrivialityVerdict, GeometryError> {
    if !child.is_compatible(parent_a) || !child.is_compatible(parent_b) {
        let other = if child.is_compatible(parent_a) {
            parent_b
        } else {
            parent_a
        };
        return Err(GeometryError::IncompatibleGrids(
            child.resolution(),
            other.resolution(),
        ));
    }
    if child.occupied_count() < thresholds.min_voxels {
        return Ok(TrivialityVerdict::Empty);
    }
    if child.fill_fraction() > thresholds.full_fraction {
        return Ok(TrivialityVerdict::Full);
    }
    if iou(child, parent_a)? > thresholds.parent_iou
        || iou(child, parent_b)? > thresholds.parent_iou
    {
        return Ok(TrivialityVerdict::DegenerateEqualToParent);
    }
    Ok(TrivialityVerdict::Ok)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{voxelize, Bounds};
    use crate::graph::{compose, transform, AffineTransform, CsgOp, Primitive, ShapeGraph};
    use crate::linalg::Vec3;

    fn sphere_at(r: f64, x: f64) -> ShapeGraph<f64> {
        let s = Primitive::Sphere { radius: r }.graph().unwrap();
        transform(&s, &AffineTransform::translate(Vec3::new(x, 0.0, 0.0)))
    }

    fn grid(g: &ShapeGraph<f64>) -> VoxelGrid {
        voxelize(g, 32, Bounds::canonical()).unwrap()
    }

    fn verdict(a: &ShapeGraph<f64>, b: &ShapeGraph<f64>, op: CsgOp) -> TrivialityVerdict {
        let child = grid(&compose(a, b, op));
        let th = TrivialityThresholds::default();
        let v = classify_trivial(&child, &grid(a), &grid(b), &th).unwrap();
        // Parent order does not matter.
        assert_eq!(
            v,
            classify_trivial(&child, &grid(b), &grid(a), &th).unwrap()
        );
        v
    }

    #[test]
    fn disjoint_intersection_is_empty() {
        assert_eq!(
            verdict(
                &sphere_at(0.3, -0.6),
                &sphere_at(0.3, 0.6),
                CsgOp::Intersection
            ),
            TrivialityVerdict::Empty
        );
    }

    #[test]
    fn union_with_contained_shape_is_degenerate() {
        assert_eq!(
            verdict(&sphere_at(0.8, 0.0), &sphere_at(0.2, 0.1), CsgOp::Union),
            TrivialityVerdict::DegenerateEqualToParent
        );
    }

    #[test]
    fn half_overlapping_union_is_ok() {
        let (a, b) = (sphere_at(0.4, -0.2), sphere_at(0.4, 0.2));
        let child = grid(&compose(&a, &b, CsgOp::Union));
        assert!(iou(&child, &grid(&a)).unwrap() < 0.99);
        assert_eq!(verdict(&a, &b, CsgOp::Union), TrivialityVerdict::Ok);
    }

    #[test]
    fn whole_domain_is_full() {
        let big = Primitive::Cube { side: 2.5 }.graph().unwrap();
        assert_eq!(
            verdict(&big, &sphere_at(0.3, 0.0), CsgOp::Union),
            TrivialityVerdict::Full
        );
    }
}
