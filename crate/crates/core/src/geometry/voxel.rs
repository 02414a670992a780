use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::GeometryError;
use crate::graph::ShapeGraph;
use crate::linalg::Vec3;
use crate::scalar::Scalar;

/// Axis-aligned cube `[lo, hi]³`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Bounds<S> {
    pub lo: S,
    pub hi: S,
}

impl<S: Scalar> Bounds<S> {
    /// The canonical domain `[-1, 1]³` every shape is confined to.
    pub fn canonical() -> Self {
        Bounds {
            lo: -S::one(),
            hi: S::one(),
        }
    }

    pub fn extent(&self) -> S {
        self.hi - self.lo
    }

    /// Centre of cell `(i, j, k)` when the cube is split into `res³` cells.
    #[inline]
    pub fn cell_center(&self, res: usize, i: usize, j: usize, k: usize) -> Vec3<S> {
        let h = self.extent() / S::from_usize_lossy(res);
        let half = S::lit(0.5);
        let c = |n: usize| self.lo + (S::from_usize_lossy(n) + half) * h;
        Vec3::new(c(i), c(j), c(k))
    }

    /// Lattice point `(i, j, k)` of a `res³` sample lattice including both faces.
    #[inline]
    pub fn lattice_point(&self, res: usize, i: usize, j: usize, k: usize) -> Vec3<S> {
        let h = self.extent() / S::from_usize_lossy(res - 1);
        let c = |n: usize| self.lo + S::from_usize_lossy(n) * h;
        Vec3::new(c(i), c(j), c(k))
    }
}

/// Boolean occupancy over `res³` cells; index `i + res·(j + res·k)` with
/// `i` along x.
#[derive(Clone, Debug, PartialEq)]
pub struct VoxelGrid {
    resolution: usize,
    bounds: Bounds<f64>,
    occupancy: Vec<bool>,
}

impl VoxelGrid {
    pub fn new(resolution: usize, bounds: Bounds<f64>, occupancy: Vec<bool>) -> Self {
        assert_eq!(
            occupancy.len(),
            resolution.pow(3),
            "occupancy length must be resolution³"
        );
        assert!(bounds.hi > bounds.lo, "degenerate bounds");
        VoxelGrid {
            resolution,
            bounds,
            occupancy,
        }
    }

    /// Occupancy `value < 0` for values laid out in grid order.
    pub fn from_values<S: Scalar>(resolution: usize, bounds: Bounds<f64>, values: &[S]) -> Self {
        Self::new(
            resolution,
            bounds,
            values.iter().map(|v| *v < S::zero()).collect(),
        )
    }

    pub fn empty(resolution: usize, bounds: Bounds<f64>) -> Self {
        Self::new(resolution, bounds, vec![false; resolution.pow(3)])
    }

    pub fn resolution(&self) -> usize {
        self.resolution
    }

    pub fn bounds(&self) -> Bounds<f64> {
        self.bounds
    }

    pub fn occupancy(&self) -> &[bool] {
        &self.occupancy
    }

    #[inline]
    pub fn index(&self, i: usize, j: usize, k: usize) -> usize {
        i + self.resolution * (j + self.resolution * k)
    }

    pub fn get(&self, i: usize, j: usize, k: usize) -> bool {
        self.occupancy[self.index(i, j, k)]
    }

    pub fn occupied_count(&self) -> usize {
        self.occupancy.iter().filter(|b| **b).count()
    }

    pub fn fill_fraction(&self) -> f64 {
        self.occupied_count() as f64 / self.occupancy.len() as f64
    }

    pub fn is_compatible(&self, other: &VoxelGrid) -> bool {
        self.resolution == other.resolution && self.bounds == other.bounds
    }

    /// Min/max cell indices of occupied voxels, or `None` if empty.
    pub fn occupied_extent(&self) -> Option<([usize; 3], [usize; 3])> {
        let r = self.resolution;
        let mut lo = [usize::MAX; 3];
        let mut hi = [0usize; 3];
        let mut any = false;
        for (idx, _) in self.occupancy.iter().enumerate().filter(|(_, b)| **b) {
            let ijk = [idx % r, (idx / r) % r, idx / (r * r)];
            for a in 0..3 {
                lo[a] = lo[a].min(ijk[a]);
                hi[a] = hi[a].max(ijk[a]);
            }
            any = true;
        }
        any.then_some((lo, hi))
    }

    /// Run-length dump for diagnostics: `res=<n> <count>x<0|1> ...` in index order.
    pub fn to_rle_string(&self) -> String {
        let mut out = format!("res={}", self.resolution);
        let mut iter = self.occupancy.iter().peekable();
        while let Some(&v) = iter.next() {
            let mut n = 1;
            while iter.peek() == Some(&&v) {
                iter.next();
                n += 1;
            }
            out.push_str(&format!(" {n}x{}", u8::from(v)));
        }
        out
    }
}

/// Implicit values at every cell centre, in grid order.
pub fn voxel_values<S: Scalar>(
    graph: &ShapeGraph<S>,
    resolution: usize,
    bounds: Bounds<S>,
) -> Vec<S> {
    let r = resolution;
    let mut values = vec![S::zero(); r * r * r];
    values
        .par_chunks_mut(r * r)
        .enumerate()
        .for_each(|(k, slab)| {
            let points: Vec<Vec3<S>> = (0..r * r)
                .map(|idx| bounds.cell_center(r, idx % r, idx / r, k))
                .collect();
            graph.evaluate_batch_into(&points, slab);
        });
    values
}

/// Voxel `(i, j, k)` is occupied iff `F(center) < 0`.
pub fn voxelize<S: Scalar>(
    graph: &ShapeGraph<S>,
    resolution: usize,
    bounds: Bounds<S>,
) -> Result<VoxelGrid, GeometryError> {
    if resolution < 2 {
        return Err(GeometryError::Resolution(resolution));
    }
    let values = voxel_values(graph, resolution, bounds);
    let b = Bounds {
        lo: bounds.lo.as_f64(),
        hi: bounds.hi.as_f64(),
    };
    Ok(VoxelGrid::from_values(resolution, b, &values))
}

/// `|a ∩ b| / |a ∪ b|`, and 0 when both grids are empty.
pub fn iou(a: &VoxelGrid, b: &VoxelGrid) -> Result<f64, GeometryError> {
    if !a.is_compatible(b) {
        return Err(GeometryError::IncompatibleGrids(a.resolution, b.resolution));
    }
    let (mut inter, mut union) = (0usize, 0usize);
    for (x, y) in a.occupancy.iter().zip(&b.occupancy) {
        inter += usize::from(*x && *y);
        union += usize::from(*x || *y);
    }
    Ok(if union == 0 {
        0.0
    } else {
        inter as f64 / union as f64
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{compose, transform, AffineTransform, CsgOp, Primitive};

    fn sphere(r: f64) -> ShapeGraph<f64> {
        Primitive::Sphere { radius: r }.graph().unwrap()
    }

    #[test]
    fn full_cube_and_empty_intersection() {
        let cube = Primitive::Cube { side: 2.0 }.graph().unwrap();
        let g = voxelize(&cube, 32, Bounds::canonical()).unwrap();
        assert_eq!(g.occupied_count(), 32 * 32 * 32);

        let far = transform(
            &sphere(0.3),
            &AffineTransform::translate(Vec3::new(0.6, 0.0, 0.0)),
        );
        let near = transform(
            &sphere(0.3),
            &AffineTransform::translate(Vec3::new(-0.6, 0.0, 0.0)),
        );
        let g = voxelize(
            &compose(&far, &near, CsgOp::Intersection),
            32,
            Bounds::canonical(),
        )
        .unwrap();
        assert_eq!(g.occupied_count(), 0);
    }

    #[test]
    fn iou_edge_cases() {
        let b = Bounds::canonical();
        let e = VoxelGrid::empty(4, b);
        assert_eq!(iou(&e, &e).unwrap(), 0.0);
        let a = voxelize(&sphere(0.5), 8, Bounds::canonical()).unwrap();
        assert_eq!(iou(&a, &a).unwrap(), 1.0);
        let c = voxelize(&sphere(0.5), 16, Bounds::canonical()).unwrap();
        assert_eq!(iou(&a, &c), Err(GeometryError::IncompatibleGrids(8, 16)));
    }

    #[test]
    fn resolution_must_be_at_least_two() {
        assert_eq!(
            voxelize(&sphere(1.0), 1, Bounds::canonical()),
            Err(GeometryError::Resolution(1))
        );
    }

    #[test]
    fn rle_dump() {
        let g = VoxelGrid::new(
            2,
            Bounds::canonical(),
            vec![false, false, true, true, true, false, false, false],
        );
        assert_eq!(g.to_rle_string(), "res=2 2x0 3x1 3x0");
    }
}
