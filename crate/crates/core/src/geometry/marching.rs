//! Marching cubes over a sampled lattice.
//!
//! The 256-case triangulation table is generated on first use from the cube
//! topology instead of being transcribed: on each cube face the crossing
//! edges are joined by segments (on ambiguous faces the segments cut off the
//! interior corners), segments chain into closed loops, and each loop is
//! fanned into triangles. Adjacent cells see identical face configurations,
//! so the resulting surface is watertight and consistently wound, with
//! triangles counter-clockwise seen from the exterior (`F > 0`).

use std::collections::HashMap;
use std::sync::OnceLock;

use super::{Bounds, GeometryError, TriangleMesh};
use crate::graph::ShapeGraph;
use crate::linalg::Vec3;
use crate::scalar::Scalar;

/// Corner `c` sits at `(c & 1, (c >> 1) & 1, (c >> 2) & 1)`.
fn corner_pos(c: usize) -> [f64; 3] {
    [(c & 1) as f64, ((c >> 1) & 1) as f64, ((c >> 2) & 1) as f64]
}

/// Edge `4·axis + k` joins the `k`-th corner with a zero `axis` bit to its
/// neighbour along `axis`.
fn edges() -> [(usize, usize, usize); 12] {
    let mut out = [(0, 0, 0); 12];
    for axis in 0..3 {
        let lows: Vec<usize> = (0..8).filter(|c| c & (1 << axis) == 0).collect();
        for (k, &c) in lows.iter().enumerate() {
            out[axis * 4 + k] = (c, c | (1 << axis), axis);
        }
    }
    out
}

fn edge_between(a: usize, b: usize) -> usize {
    edges()
        .iter()
        .position(|(p, q, _)| (*p == a && *q == b) || (*p == b && *q == a))
        .expect("corners are adjacent")
}

fn sub(a: [f64; 3], b: [f64; 3]) -> [f64; 3] {
    [a[0] - b[0], a[1] - b[1], a[2] - b[2]]
}

fn cross(a: [f64; 3], b: [f64; 3]) -> [f64; 3] {
    [
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    ]
}

fn dot(a: [f64; 3], b: [f64; 3]) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

fn build_case(mask: usize) -> Vec<[u8; 3]> {
    let inside = |c: usize| mask & (1 << c) != 0;
    let edge_list = edges();
    let midpoint = |e: usize| {
        let (a, b, _) = edge_list[e];
        let (pa, pb) = (corner_pos(a), corner_pos(b));
        [
            (pa[0] + pb[0]) / 2.0,
            (pa[1] + pb[1]) / 2.0,
            (pa[2] + pb[2]) / 2.0,
        ]
    };
    let mut next = [usize::MAX; 12];
    for axis in 0..3 {
        let (u, v) = ((axis + 1) % 3, (axis + 2) % 3);
        for side in 0..2 {
            let base = side << axis;
            let ring = [
                base,
                base | (1 << u),
                base | (1 << u) | (1 << v),
                base | (1 << v),
            ];
            let mut normal = [0.0; 3];
            normal[axis] = if side == 0 { -1.0 } else { 1.0 };
            let crossing: Vec<usize> = (0..4)
                .filter(|k| inside(ring[*k]) != inside(ring[(k + 1) % 4]))
                .collect();
            let mut segments: Vec<(usize, usize, usize)> = Vec::new();
            match crossing.len() {
                0 => {}
                2 => {
                    let e0 = edge_between(ring[crossing[0]], ring[(crossing[0] + 1) % 4]);
                    let e1 = edge_between(ring[crossing[1]], ring[(crossing[1] + 1) % 4]);
                    let corner = *ring
                        .iter()
                        .find(|c| inside(**c))
                        .expect("an interior corner");
                    segments.push((e0, e1, corner));
                }
                4 => {
                    for k in (0..4).filter(|k| inside(ring[*k])) {
                        let before = edge_between(ring[(k + 3) % 4], ring[k]);
                        let after = edge_between(ring[k], ring[(k + 1) % 4]);
                        segments.push((before, after, ring[k]));
                    }
                }
                _ => unreachable!("a face has an even number of crossings"),
            }
            for (a, b, corner) in segments {
                let (ma, mb) = (midpoint(a), midpoint(b));
                let mid = [
                    (ma[0] + mb[0]) / 2.0,
                    (ma[1] + mb[1]) / 2.0,
                    (ma[2] + mb[2]) / 2.0,
                ];
                let side_test = dot(cross(sub(mb, ma), normal), sub(corner_pos(corner), mid));
                let (from, to) = if side_test > 0.0 { (a, b) } else { (b, a) };
                debug_assert_eq!(next[from], usize::MAX);
                next[from] = to;
            }
        }
    }
    let mut seen = [false; 12];
    let mut tris = Vec::new();
    for start in 0..12 {
        if next[start] == usize::MAX || seen[start] {
            continue;
        }
        let mut ring = vec![start];
        seen[start] = true;
        let mut e = next[start];
        while e != start {
            seen[e] = true;
            ring.push(e);
            e = next[e];
        }
        for k in 1..ring.len() - 1 {
            tris.push([ring[0] as u8, ring[k] as u8, ring[k + 1] as u8]);
        }
    }
    tris
}

fn case_table() -> &'static Vec<Vec<[u8; 3]>> {
    static TABLE: OnceLock<Vec<Vec<[u8; 3]>>> = OnceLock::new();
    TABLE.get_or_init(|| (0..256).map(build_case).collect())
}

/// Extracts the `F = 0` isosurface of a batched scalar field sampled on a
/// `res³` lattice spanning `bounds` (both faces included).
///
/// Vertices are linearly interpolated along lattice edges; normals are the
/// normalized central-difference gradient of the field and point toward
/// `F > 0`.
pub fn marching_cubes_field<S, F>(
    field: F,
    resolution: usize,
    bounds: Bounds<S>,
) -> Result<TriangleMesh<S>, GeometryError>
where
    S: Scalar,
    F: Fn(&[Vec3<S>]) -> Vec<S>,
{
    if resolution < 2 {
        return Err(GeometryError::Resolution(resolution));
    }
    let n = resolution;
    let lattice: Vec<Vec3<S>> = (0..n * n * n)
        .map(|idx| bounds.lattice_point(n, idx % n, (idx / n) % n, idx / (n * n)))
        .collect();
    let values = field(&lattice);
    let at = |i: usize, j: usize, k: usize| i + n * (j + n * k);

    let table = case_table();
    let edge_list = edges();
    let mut mesh = TriangleMesh::default();
    let mut vertex_of: HashMap<(usize, usize), u32> = HashMap::new();

    for k in 0..n - 1 {
        for j in 0..n - 1 {
            for i in 0..n - 1 {
                let corner_index =
                    |c: usize| at(i + (c & 1), j + ((c >> 1) & 1), k + ((c >> 2) & 1));
                let mut mask = 0usize;
                for c in 0..8 {
                    if values[corner_index(c)] < S::zero() {
                        mask |= 1 << c;
                    }
                }
                if mask == 0 || mask == 255 {
                    continue;
                }
                for tri in &table[mask] {
                    let ids = tri.map(|e| {
                        let (a, b, axis) = edge_list[e as usize];
                        let (ia, ib) = (corner_index(a), corner_index(b));
                        *vertex_of.entry((ia, axis)).or_insert_with(|| {
                            let (fa, fb) = (values[ia], values[ib]);
                            let t = fa / (fa - fb);
                            let p = lattice[ia] + (lattice[ib] - lattice[ia]) * t;
                            mesh.vertices.push(p);
                            (mesh.vertices.len() - 1) as u32
                        })
                    });
                    mesh.triangles.push(ids);
                }
            }
        }
    }
    weld_coincident(&mut mesh);

    let h = bounds.extent() / S::from_usize_lossy(n - 1) * S::lit(0.05);
    let mut probes = Vec::with_capacity(mesh.vertices.len() * 6);
    for v in &mesh.vertices {
        for axis in 0..3 {
            let mut plus = *v;
            let mut minus = *v;
            plus.0[axis] = plus.0[axis] + h;
            minus.0[axis] = minus.0[axis] - h;
            probes.push(plus);
            probes.push(minus);
        }
    }
    let samples = field(&probes);
    let mut fallback = vec![Vec3::<S>::zero(); mesh.vertices.len()];
    for t in 0..mesh.triangles.len() {
        if let Some(nrm) = mesh.face_normal(t) {
            for &i in &mesh.triangles[t] {
                fallback[i as usize] += nrm;
            }
        }
    }
    mesh.normals = samples
        .chunks(6)
        .zip(&fallback)
        .map(|(s, fb)| {
            let g = Vec3::new(s[0] - s[1], s[2] - s[3], s[4] - s[5]);
            g.normalized()
                .or_else(|| fb.normalized())
                .unwrap_or(Vec3::new(S::zero(), S::zero(), S::one()))
        })
        .collect();
    Ok(mesh)
}

/// Merges vertices with identical coordinates (lattice values of exactly
/// zero put several edge vertices on one corner) and drops triangles that
/// collapse.
fn weld_coincident<S: Scalar>(mesh: &mut TriangleMesh<S>) {
    let mut first: HashMap<[u64; 3], u32> = HashMap::new();
    let mut remap = Vec::with_capacity(mesh.vertices.len());
    let mut kept = Vec::with_capacity(mesh.vertices.len());
    for v in &mesh.vertices {
        let key = v.0.map(|c| (c + S::zero()).as_f64().to_bits());
        let id = *first.entry(key).or_insert_with(|| {
            kept.push(*v);
            (kept.len() - 1) as u32
        });
        remap.push(id);
    }
    if kept.len() == mesh.vertices.len() {
        return;
    }
    mesh.vertices = kept;
    mesh.triangles = mesh
        .triangles
        .iter()
        .map(|t| t.map(|i| remap[i as usize]))
        .filter(|[a, b, c]| a != b && b != c && a != c)
        .collect();
}

/// Meshes a graph confined to the canonical cube: the sampled field is
/// `max(F(p), max|pᵢ| − 1)`, so shapes touching the domain boundary are
/// closed off there.
pub fn marching_cubes<S: Scalar>(
    graph: &ShapeGraph<S>,
    resolution: usize,
    bounds: Bounds<S>,
) -> Result<TriangleMesh<S>, GeometryError> {
    marching_cubes_field(
        |pts: &[Vec3<S>]| {
            let mut out = graph.evaluate_batch(pts);
            for (v, p) in out.iter_mut().zip(pts) {
                let confine = p.0.iter().fold(S::zero(), |m, c| m.max(c.abs())) - S::one();
                *v = v.max(confine);
            }
            out
        },
        resolution,
        bounds,
    )
}
