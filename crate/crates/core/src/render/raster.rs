use rayon::prelude::*;

use super::caster::ParallelCaster;
use super::view::ViewSpec;
use crate::geometry::TriangleMesh;
use crate::linalg::Vec3;
use crate::scalar::Scalar;

/// One rendered view. All buffers are row-major with row 0 at the top.
#[derive(Clone, Debug, PartialEq)]
pub struct RenderSample<S> {
    pub width: usize,
    pub height: usize,
    /// Intensities in `[0, 1]`.
    pub image: Vec<S>,
    /// Camera-space unit normals; zero where `mask` is false.
    pub normals: Vec<Vec3<S>>,
    pub mask: Vec<bool>,
    /// Pixels whose shadow ray toward the light was blocked.
    pub shadowed: Vec<bool>,
}

impl<S: Scalar> RenderSample<S> {
    pub fn covered_pixels(&self) -> usize {
        self.mask.iter().filter(|m| **m).count()
    }
}

/// Intensity, camera-space normal, coverage and shadow flag for one pixel.
type Pixel<S> = (S, Vec3<S>, bool, bool);

fn mean_edge<S: Scalar>(tris: &[[Vec3<S>; 3]]) -> S {
    if tris.is_empty() {
        return S::zero();
    }
    let total: S = tris
        .iter()
        .map(|t| (t[1] - t[0]).norm() + (t[2] - t[1]).norm() + (t[0] - t[2]).norm())
        .sum();
    total / S::from_usize_lossy(3 * tris.len())
}

/// Casts one orthographic primary ray per pixel and one shadow ray toward
/// the light from every visible point. Occluders closer than two mean edge
/// lengths are ignored: on a faceted surface lit at a grazing angle they are
/// the point's own neighbouring facets, not a cast shadow.
pub fn render<S: Scalar>(mesh: &TriangleMesh<S>, view: &ViewSpec<S>) -> RenderSample<S> {
    let rot = view.rotation;
    let verts: Vec<Vec3<S>> = mesh.vertices.iter().map(|v| rot * *v).collect();
    let normals: Vec<Vec3<S>> = mesh.normals.iter().map(|n| rot * *n).collect();
    let tris: Vec<[Vec3<S>; 3]> = mesh
        .triangles
        .iter()
        .map(|t| t.map(|i| verts[i as usize]))
        .collect();
    let primary = ParallelCaster::new(&tris, Vec3::new(S::zero(), S::zero(), -S::one()));
    let shadow = ParallelCaster::new(&tris, view.light);
    let z_start = verts.iter().fold(S::zero(), |m, v| m.max(v.z())) + S::one();
    let t_min = S::epsilon().sqrt().max(S::lit(2.0) * mean_edge(&tris));
    let up = Vec3::new(S::zero(), S::zero(), S::one());

    let rows: Vec<Vec<Pixel<S>>> = (0..view.height)
        .into_par_iter()
        .map(|row| {
            (0..view.width)
                .map(|col| {
                    let (x, y) = view.pixel_center(row, col);
                    let origin = Vec3::new(x, y, z_start);
                    let Some(hit) = primary.nearest(origin, S::zero(), None) else {
                        return (S::zero(), Vec3::zero(), false, false);
                    };
                    let tri = mesh.triangles[hit.tri];
                    let b0 = S::one() - hit.b1 - hit.b2;
                    let [n0, n1, n2] = tri.map(|i| normals[i as usize]);
                    let t = &tris[hit.tri];
                    let geometric = (t[1] - t[0])
                        .cross(&(t[2] - t[0]))
                        .normalized()
                        .unwrap_or(up);
                    let mut n = (n0 * b0 + n1 * hit.b1 + n2 * hit.b2)
                        .normalized()
                        .unwrap_or(geometric);
                    if geometric.z() < S::zero() {
                        n = -n;
                    }
                    if n.z() < S::zero() {
                        n = Vec3::new(n.x(), n.y(), S::zero())
                            .normalized()
                            .unwrap_or(up);
                    }
                    let lambert = n.dot(&view.light).max(S::zero());
                    let point = origin + Vec3::new(S::zero(), S::zero(), -hit.t);
                    let blocked = lambert > S::zero()
                        && shadow.nearest(point, t_min, Some(hit.tri)).is_some();
                    let intensity = if blocked {
                        S::zero()
                    } else {
                        lambert.min(S::one())
                    };
                    (intensity, n, true, blocked)
                })
                .collect()
        })
        .collect();

    let mut sample = RenderSample {
        width: view.width,
        height: view.height,
        image: Vec::with_capacity(view.width * view.height),
        normals: Vec::with_capacity(view.width * view.height),
        mask: Vec::with_capacity(view.width * view.height),
        shadowed: Vec::with_capacity(view.width * view.height),
    };
    for (i, n, m, s) in rows.into_iter().flatten() {
        sample.image.push(i);
        sample.normals.push(n);
        sample.mask.push(m);
        sample.shadowed.push(s);
    }
    sample
}
