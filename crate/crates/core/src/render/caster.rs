use crate::linalg::Vec3;
use crate::scalar::Scalar;

/// Ray/triangle queries for a bundle of parallel rays sharing one direction.
///
/// Triangles are projected onto the plane orthogonal to the direction and
/// binned into a uniform 2D grid; a ray only needs the triangles binned in
/// the cell containing its own projection.
pub(crate) struct ParallelCaster<'a, S> {
    tris: &'a [[Vec3<S>; 3]],
    dir: Vec3<S>,
    u: Vec3<S>,
    v: Vec3<S>,
    lo: [S; 2],
    cell: [S; 2],
    dims: usize,
    bins: Vec<Vec<u32>>,
}

#[derive(Clone, Copy, Debug)]
pub(crate) struct Hit<S> {
    pub t: S,
    pub tri: usize,
    /// Barycentric weights of vertices 1 and 2.
    pub b1: S,
    pub b2: S,
}

impl<'a, S: Scalar> ParallelCaster<'a, S> {
    pub fn new(tris: &'a [[Vec3<S>; 3]], dir: Vec3<S>) -> Self {
        let helper = if dir.x().abs() < S::lit(0.9) {
            Vec3::new(S::one(), S::zero(), S::zero())
        } else {
            Vec3::new(S::zero(), S::one(), S::zero())
        };
        let u = dir
            .cross(&helper)
            .normalized()
            .expect("non-degenerate basis");
        let v = dir.cross(&u);
        let dims = ((tris.len() as f64).sqrt().ceil() as usize).clamp(1, 256);
        let proj = |p: &Vec3<S>| [p.dot(&u), p.dot(&v)];
        let mut lo = [S::infinity(); 2];
        let mut hi = [S::neg_infinity(); 2];
        for t in tris {
            for p in t {
                let q = proj(p);
                for a in 0..2 {
                    lo[a] = lo[a].min(q[a]);
                    hi[a] = hi[a].max(q[a]);
                }
            }
        }
        if tris.is_empty() {
            lo = [S::zero(); 2];
            hi = [S::one(); 2];
        }
        let n = S::from_usize_lossy(dims);
        let cell = [0, 1].map(|a| ((hi[a] - lo[a]) / n).max(S::epsilon()));
        let mut caster = ParallelCaster {
            tris,
            dir,
            u,
            v,
            lo,
            cell,
            dims,
            bins: vec![Vec::new(); dims * dims],
        };
        for (i, t) in tris.iter().enumerate() {
            let qs = t.map(|p| proj(&p));
            let cmin = [0, 1]
                .map(|a| caster.cell_coord(qs.iter().map(|q| q[a]).fold(S::infinity(), S::min), a));
            let cmax = [0, 1].map(|a| {
                caster.cell_coord(qs.iter().map(|q| q[a]).fold(S::neg_infinity(), S::max), a)
            });
            for cy in cmin[1]..=cmax[1] {
                for cx in cmin[0]..=cmax[0] {
                    caster.bins[cx + dims * cy].push(i as u32);
                }
            }
        }
        caster
    }

    fn cell_coord(&self, q: S, axis: usize) -> usize {
        let c = ((q - self.lo[axis]) / self.cell[axis]).floor();
        c.max(S::zero())
            .min(S::from_usize_lossy(self.dims - 1))
            .to_usize()
            .unwrap_or(0)
    }

    /// Nearest hit with `t > t_min` along `origin + t·dir`, skipping `skip`.
    pub fn nearest(&self, origin: Vec3<S>, t_min: S, skip: Option<usize>) -> Option<Hit<S>> {
        let (pu, pv) = (origin.dot(&self.u), origin.dot(&self.v));
        let span = |q: S, a: usize| {
            q >= self.lo[a] - self.cell[a]
                && q <= self.lo[a] + self.cell[a] * S::from_usize_lossy(self.dims + 1)
        };
        if self.tris.is_empty() || !span(pu, 0) || !span(pv, 1) {
            return None;
        }
        let bin = &self.bins[self.cell_coord(pu, 0) + self.dims * self.cell_coord(pv, 1)];
        let mut best: Option<Hit<S>> = None;
        for &i in bin {
            let i = i as usize;
            if Some(i) == skip {
                continue;
            }
            if let Some((t, b1, b2)) = intersect(origin, self.dir, &self.tris[i]) {
                if t > t_min && best.is_none_or(|h| t < h.t || (t == h.t && i < h.tri)) {
                    best = Some(Hit { t, tri: i, b1, b2 });
                }
            }
        }
        best
    }
}

/// Möller–Trumbore; returns `(t, b1, b2)` with closed barycentric bounds.
fn intersect<S: Scalar>(o: Vec3<S>, d: Vec3<S>, tri: &[Vec3<S>; 3]) -> Option<(S, S, S)> {
    let e1 = tri[1] - tri[0];
    let e2 = tri[2] - tri[0];
    let p = d.cross(&e2);
    let det = e1.dot(&p);
    if det == S::zero() {
        return None;
    }
    let inv = S::one() / det;
    let s = o - tri[0];
    let b1 = s.dot(&p) * inv;
    if b1 < S::zero() || b1 > S::one() {
        return None;
    }
    let q = s.cross(&e1);
    let b2 = d.dot(&q) * inv;
    if b2 < S::zero() || b1 + b2 > S::one() {
        return None;
    }
    Some((e2.dot(&q) * inv, b1, b2))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn hits_nearest_of_two_layers() {
        let tri = |z: f64| {
            [
                Vec3::new(-1.0, -1.0, z),
                Vec3::new(1.0, -1.0, z),
                Vec3::new(0.0, 1.0, z),
            ]
        };
        let tris = vec![tri(0.0), tri(0.5)];
        let c = ParallelCaster::new(&tris, Vec3::new(0.0, 0.0, -1.0));
        let h = c.nearest(Vec3::new(0.0, 0.0, 5.0), 0.0, None).unwrap();
        assert_eq!(h.tri, 1);
        assert!((h.t - 4.5).abs() < 1e-12);
        assert!(c.nearest(Vec3::new(5.0, 5.0, 5.0), 0.0, None).is_none());
        assert_eq!(
            c.nearest(Vec3::new(0.0, 0.0, 5.0), 0.0, Some(1))
                .unwrap()
                .tri,
            0
        );
    }
}
