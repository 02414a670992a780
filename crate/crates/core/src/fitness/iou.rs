use rayon::prelude::*;
use serde_json::Value;

use super::{EvaluatorError, FitnessEvaluator, Score, TargetSpec};
use crate::evolution::Individual;
use crate::geometry::{iou, voxelize};

/// IoU between the individual's occupancy and the target's, reusing the
/// cached grid when it matches the target's resolution and bounds.
pub fn iou_fitness(individual: &Individual, target: &TargetSpec) -> f64 {
    let grid = &target.grid;
    match &individual.grid {
        Some(cached) if cached.is_compatible(grid) => iou(cached, grid),
        _ => {
            let b = grid.bounds();
            let own = voxelize(&individual.genotype, grid.resolution(), b)
                .expect("target resolution is valid");
            iou(&own, grid)
        }
    }
    .expect("grids share resolution")
}

/// Standalone fitness: volumetric IoU against a fixed target. Asks the run
/// to stop once a candidate matches the target exactly.
pub struct IouEvaluator {
    pub target: TargetSpec,
}

impl IouEvaluator {
    pub fn new(target: TargetSpec) -> Self {
        IouEvaluator { target }
    }
}

impl FitnessEvaluator for IouEvaluator {
    fn evaluate(
        &mut self,
        candidates: &[&Individual],
        _iteration: u64,
    ) -> Result<Vec<Score>, EvaluatorError> {
        Ok(candidates
            .par_iter()
            .map(|c| Score {
                id: c.id,
                fitness: iou_fitness(c, &self.target),
                aux: Value::Null,
            })
            .collect())
    }

    fn should_stop(&self, best_fitness: f64) -> bool {
        best_fitness >= 1.0
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{Primitive, ShapeGraph};

    fn individual(g: ShapeGraph<f64>) -> Individual {
        Individual::new(0, g, 0)
    }

    #[test]
    fn exact_target_scores_one() {
        let target = TargetSpec::builtin("bite", 32).unwrap();
        assert_eq!(
            iou_fitness(&individual(super::super::bite_graph()), &target),
            1.0
        );
    }

    #[test]
    fn empty_genotype_scores_zero() {
        let target = TargetSpec::builtin("torus", 32).unwrap();
        let empty = Primitive::Sphere { radius: 0.001 }.graph().unwrap();
        assert_eq!(iou_fitness(&individual(empty), &target), 0.0);
    }

    #[test]
    fn sphere_against_cube_target() {
        let cube = Primitive::Cube { side: 2.0 }.graph().unwrap();
        let target = TargetSpec::from_graph("cube", &cube, 32).unwrap();
        let sphere = Primitive::Sphere { radius: 1.0 }.graph().unwrap();
        let f = iou_fitness(&individual(sphere), &target);
        assert!((f - std::f64::consts::PI / 6.0).abs() < 0.02, "{f}");
    }
}
