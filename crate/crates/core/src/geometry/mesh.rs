use std::collections::HashMap;
use std::fmt::Write as _;

use super::{Bounds, GeometryError, VoxelGrid};
use crate::linalg::Vec3;
use crate::scalar::Scalar;

/// Indexed triangle mesh with per-vertex unit normals.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct TriangleMesh<S> {
    pub vertices: Vec<Vec3<S>>,
    pub normals: Vec<Vec3<S>>,
    pub triangles: Vec<[u32; 3]>,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MeshStats {
    pub vertices: usize,
    pub edges: usize,
    pub triangles: usize,
    /// Undirected edges used by exactly one triangle.
    pub boundary_edges: usize,
    /// Undirected edges used by more than two triangles.
    pub nonmanifold_edges: usize,
    /// Directed edges used twice, i.e. neighbouring triangles with clashing winding.
    pub misoriented_edges: usize,
}

impl MeshStats {
    pub fn is_watertight(&self) -> bool {
        self.boundary_edges == 0 && self.nonmanifold_edges == 0
    }

    pub fn euler_characteristic(&self) -> i64 {
        self.vertices as i64 - self.edges as i64 + self.triangles as i64
    }
}

impl<S: Scalar> TriangleMesh<S> {
    pub fn is_empty(&self) -> bool {
        self.triangles.is_empty()
    }

    pub fn triangle(&self, t: usize) -> [Vec3<S>; 3] {
        self.triangles[t].map(|i| self.vertices[i as usize])
    }

    pub fn triangle_area(&self, t: usize) -> S {
        let [a, b, c] = self.triangle(t);
        (b - a).cross(&(c - a)).norm() * S::lit(0.5)
    }

    pub fn area(&self) -> S {
        (0..self.triangles.len())
            .map(|t| self.triangle_area(t))
            .sum()
    }

    /// Geometric normal of a triangle following its winding.
    pub fn face_normal(&self, t: usize) -> Option<Vec3<S>> {
        let [a, b, c] = self.triangle(t);
        (b - a).cross(&(c - a)).normalized()
    }

    /// Edge-incidence statistics. Only referenced vertices are counted.
    pub fn stats(&self) -> MeshStats {
        let mut undirected: HashMap<(u32, u32), usize> = HashMap::new();
        let mut directed: HashMap<(u32, u32), usize> = HashMap::new();
        let mut used = vec![false; self.vertices.len()];
        for tri in &self.triangles {
            for e in 0..3 {
                let (a, b) = (tri[e], tri[(e + 1) % 3]);
                used[a as usize] = true;
                *undirected.entry((a.min(b), a.max(b))).or_default() += 1;
                *directed.entry((a, b)).or_default() += 1;
            }
        }
        MeshStats {
            vertices: used.iter().filter(|u| **u).count(),
            edges: undirected.len(),
            triangles: self.triangles.len(),
            boundary_edges: undirected.values().filter(|c| **c == 1).count(),
            nonmanifold_edges: undirected.values().filter(|c| **c > 2).count(),
            misoriented_edges: directed.values().filter(|c| **c > 1).count(),
        }
    }

    pub fn bounding_box(&self) -> Option<(Vec3<S>, Vec3<S>)> {
        let first = *self.vertices.first()?;
        Some(self.vertices.iter().fold((first, first), |(lo, hi), v| {
            (
                Vec3::new(lo.x().min(v.x()), lo.y().min(v.y()), lo.z().min(v.z())),
                Vec3::new(hi.x().max(v.x()), hi.y().max(v.y()), hi.z().max(v.z())),
            )
        }))
    }

    /// Wavefront OBJ with `v`, `vn` and `f v//vn` records.
    pub fn to_obj(&self) -> String {
        let mut out = String::from("# shapevo mesh\n");
        for v in &self.vertices {
            let _ = writeln!(out, "v {} {} {}", v.x(), v.y(), v.z());
        }
        for n in &self.normals {
            let _ = writeln!(out, "vn {} {} {}", n.x(), n.y(), n.z());
        }
        for t in &self.triangles {
            let [a, b, c] = t.map(|i| i + 1);
            let _ = writeln!(out, "f {a}//{a} {b}//{b} {c}//{c}");
        }
        out
    }

    /// Occupancy by ray parity along +z through each cell centre. The mesh
    /// should be closed; open meshes give undefined interiors.
    pub fn voxelize(&self, resolution: usize, bounds: Bounds<f64>) -> VoxelGrid {
        let r = resolution;
        let h = bounds.extent() / r as f64;
        let cell_of = |v: f64| (((v - bounds.lo) / h - 0.5).floor()).clamp(-1.0, r as f64) as i64;
        let mut columns: Vec<Vec<usize>> = vec![Vec::new(); r * r];
        for t in 0..self.triangles.len() {
            let tri = self.triangle(t).map(|v| v.cast::<f64>());
            let (mut lo, mut hi) = ([f64::MAX; 2], [f64::MIN; 2]);
            for v in &tri {
                for a in 0..2 {
                    lo[a] = lo[a].min(v[a]);
                    hi[a] = hi[a].max(v[a]);
                }
            }
            let (i0, i1) = (
                cell_of(lo[0]).max(0),
                (cell_of(hi[0]) + 1).min(r as i64 - 1),
            );
            let (j0, j1) = (
                cell_of(lo[1]).max(0),
                (cell_of(hi[1]) + 1).min(r as i64 - 1),
            );
            for j in j0..=j1 {
                for i in i0..=i1 {
                    columns[i as usize + r * j as usize].push(t);
                }
            }
        }
        let mut occupancy = vec![false; r * r * r];
        let mut hits = Vec::new();
        for j in 0..r {
            for i in 0..r {
                let c = bounds.cell_center(r, i, j, 0);
                hits.clear();
                for &t in &columns[i + r * j] {
                    let [a, b, cc] = self.triangle(t).map(|v| v.cast::<f64>());
                    if let Some(z) = vertical_hit(a, b, cc, c.x(), c.y()) {
                        hits.push(z);
                    }
                }
                hits.sort_by(f64::total_cmp);
                for k in 0..r {
                    let z = bounds.cell_center(r, i, j, k).z();
                    let below = hits.partition_point(|hz| *hz < z);
                    occupancy[i + r * (j + r * k)] = below % 2 == 1;
                }
            }
        }
        VoxelGrid::new(r, bounds, occupancy)
    }
}

/// Height at which the vertical line through `(x, y)` crosses the triangle.
fn vertical_hit(a: Vec3<f64>, b: Vec3<f64>, c: Vec3<f64>, x: f64, y: f64) -> Option<f64> {
    let d = (b.y() - c.y()) * (a.x() - c.x()) + (c.x() - b.x()) * (a.y() - c.y());
    if d == 0.0 {
        return None;
    }
    let l1 = ((b.y() - c.y()) * (x - c.x()) + (c.x() - b.x()) * (y - c.y())) / d;
    let l2 = ((c.y() - a.y()) * (x - c.x()) + (a.x() - c.x()) * (y - c.y())) / d;
    let l3 = 1.0 - l1 - l2;
    (l1 > 0.0 && l2 > 0.0 && l3 > 0.0).then(|| l1 * a.z() + l2 * b.z() + l3 * c.z())
}

/// Reads `v`, `vn` and triangular or polygonal `f` records (fans are
/// triangulated). Normals are taken per vertex from the first face that
/// references them; missing normals are left zero.
pub fn parse_obj(text: &str) -> Result<TriangleMesh<f64>, GeometryError> {
    let mut mesh = TriangleMesh::<f64>::default();
    let mut file_normals = Vec::new();
    let mut assigned: Vec<Option<Vec3<f64>>> = Vec::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        let err = |message: String| GeometryError::Obj {
            line: lineno + 1,
            message,
        };
        let mut parts = line.split_whitespace();
        let floats = |parts: std::str::SplitWhitespace| -> Result<Vec3<f64>, GeometryError> {
            let vals: Vec<f64> = parts
                .take(3)
                .map(|p| {
                    p.parse::<f64>()
                        .map_err(|e| err(format!("bad number `{p}`: {e}")))
                })
                .collect::<Result<_, _>>()?;
            if vals.len() != 3 {
                return Err(err("expected three coordinates".into()));
            }
            Ok(Vec3::new(vals[0], vals[1], vals[2]))
        };
        match parts.next() {
            Some("v") => {
                mesh.vertices.push(floats(parts)?);
                assigned.push(None);
            }
            Some("vn") => file_normals.push(floats(parts)?),
            Some("f") => {
                let mut corners = Vec::new();
                for p in parts {
                    let mut fields = p.split('/');
                    let v =
                        resolve(fields.next().unwrap_or(""), mesh.vertices.len()).map_err(&err)?;
                    let n = match fields.nth(1) {
                        Some(s) if !s.is_empty() => {
                            Some(resolve(s, file_normals.len()).map_err(&err)?)
                        }
                        _ => None,
                    };
                    if let Some(n) = n {
                        assigned[v].get_or_insert(file_normals[n]);
                    }
                    corners.push(v as u32);
                }
                if corners.len() < 3 {
                    return Err(err("face needs at least three vertices".into()));
                }
                for k in 1..corners.len() - 1 {
                    mesh.triangles
                        .push([corners[0], corners[k], corners[k + 1]]);
                }
            }
            _ => {}
        }
    }
    mesh.normals = assigned
        .into_iter()
        .map(|n| n.unwrap_or_default())
        .collect();
    Ok(mesh)
}

fn resolve(token: &str, len: usize) -> Result<usize, String> {
    let i: i64 = token.parse().map_err(|_| format!("bad index `{token}`"))?;
    let idx = if i < 0 { len as i64 + i } else { i - 1 };
    if idx < 0 || idx as usize >= len {
        return Err(format!("index {i} out of range"));
    }
    Ok(idx as usize)
}
