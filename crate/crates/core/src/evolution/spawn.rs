use std::sync::Arc;

use rand::Rng as _;
use rayon::prelude::*;

use super::config::{EvolutionConfig, TransformRanges};
use super::individual::{Individual, Population};
use super::{resource_cap, tags};
use crate::geometry::{classify_trivial, voxel_values, Bounds, TrivialityVerdict, VoxelGrid};
use crate::graph::{compose, transform, CsgOp};
use crate::linalg::Vec3;
use crate::rng::{derived, uniform_in, uniform_rotation};
use crate::{Graph, Transform};

/// Random similarity transform: Haar rotation, log-uniform scale and
/// uniform translation.
pub fn random_transform<R: rand::Rng + ?Sized>(rng: &mut R, ranges: &TransformRanges) -> Transform {
    let rotation = uniform_rotation(rng);
    let scale = uniform_in(rng, ranges.scale_min.ln(), ranges.scale_max.ln()).exp();
    let h = ranges.translation;
    let translation = Vec3::new(
        uniform_in(rng, -h, h),
        uniform_in(rng, -h, h),
        uniform_in(rng, -h, h),
    );
    Transform {
        rotation,
        scale,
        translation,
    }
}

struct Attempt {
    genotype: Graph,
    parents: [u64; 2],
    op: CsgOp,
    grid: Option<VoxelGrid>,
    fits_cap: bool,
}

/// Spawns `config.children` children for iteration `t`.
///
/// Each child draws from its own stream derived from `(seed, id)`, so the
/// result does not depend on the worker count. Each attempt picks two
/// distinct parents, transforms both, and combines them; attempts that break
/// the node cap or (with trivial discard on) yield a trivial shape are
/// retried. After `spawn_attempts` failures the last attempt is kept and
/// flagged trivial.
pub fn spawn_children(
    population: &Population,
    t: u64,
    config: &EvolutionConfig,
) -> Vec<Individual> {
    if population.survivors.len() < 2 {
        return Vec::new();
    }
    let cap = resource_cap(config, t);
    (0..config.children)
        .into_par_iter()
        .map(|slot| {
            let id = population.next_id + slot as u64;
            let mut rng = derived(config.seed, &[tags::SPAWN, id]);
            let mut last = None;
            let mut accepted = false;
            for _ in 0..config.spawn_attempts {
                let attempt = try_spawn(&mut rng, population, cap, config);
                let ok = attempt.fits_cap && (!config.trivial_discard || attempt.grid.is_some());
                last = Some(attempt);
                if ok {
                    accepted = true;
                    break;
                }
            }
            let attempt = last.expect("spawn_attempts > 0");
            Individual {
                parents: Some(attempt.parents),
                op: Some(attempt.op),
                grid: attempt.grid.map(Arc::new),
                trivial: !accepted,
                ..Individual::new(id, attempt.genotype, t)
            }
        })
        .collect()
}

/// One spawn attempt. `grid` is set only when the child passed the cap
/// and, with trivial discard on, was classified non-trivial; the
/// comparison is against the transformed parents.
fn try_spawn(
    rng: &mut crate::rng::Rng,
    population: &Population,
    cap: usize,
    config: &EvolutionConfig,
) -> Attempt {
    let n = population.survivors.len();
    let i = rng.random_range(0..n);
    let j = (i + rng.random_range(1..n)) % n;
    let (pa, pb) = (&population.survivors[i], &population.survivors[j]);
    let ta = random_transform(rng, &config.transform);
    let tb = random_transform(rng, &config.transform);
    let op = CsgOp::ALL[rng.random_range(0..CsgOp::ALL.len())];
    let a = transform(&pa.genotype, &ta);
    let b = transform(&pb.genotype, &tb);
    let genotype = compose(&a, &b, op);
    let parents = [pa.id, pb.id];
    if genotype.node_count() > cap {
        return Attempt {
            genotype,
            parents,
            op,
            grid: None,
            fits_cap: false,
        };
    }

    let res = config.voxel_resolution;
    let bounds = Bounds::canonical();
    let va = voxel_values(&a, res, bounds);
    let vb = voxel_values(&b, res, bounds);
    let values: Vec<f64> = va
        .iter()
        .zip(&vb)
        .map(|(&x, &y)| op.combine(x, y))
        .collect();
    let grid = VoxelGrid::from_values(res, bounds, &values);
    let keep = !config.trivial_discard || {
        let ga = VoxelGrid::from_values(res, bounds, &va);
        let gb = VoxelGrid::from_values(res, bounds, &vb);
        classify_trivial(&grid, &ga, &gb, &config.triviality).expect("same resolution")
            == TrivialityVerdict::Ok
    };
    Attempt {
        genotype,
        parents,
        op,
        grid: keep.then_some(grid),
        fits_cap: true,
    }
}
