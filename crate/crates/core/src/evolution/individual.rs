use std::sync::Arc;

use serde_json::{json, Value};

use super::config::EvolutionConfig;
use super::tags;
use crate::geometry::VoxelGrid;
use crate::graph::{CsgOp, Primitive, PrimitiveKind};
use crate::rng::derived;
use crate::Graph;

pub type IndividualId = u64;

#[derive(Clone, Debug)]
pub struct Individual {
    pub id: IndividualId,
    pub genotype: Arc<Graph>,
    /// Raw score from the evaluator; `None` until evaluated.
    pub fitness: Option<f64>,
    /// Both parents for children, `None` for the initial population.
    pub parents: Option<[IndividualId; 2]>,
    /// Set operation that produced a child.
    pub op: Option<CsgOp>,
    pub birth: u64,
    /// Occupancy at the run's voxel resolution, cached when known.
    pub grid: Option<Arc<VoxelGrid>>,
    /// Spawned after every attempt failed the triviality or cap checks;
    /// such individuals never survive selection.
    pub trivial: bool,
    /// Set on survivors duplicated to fill an undersized pool.
    pub clone_of: Option<IndividualId>,
}

impl Individual {
    pub fn new(id: IndividualId, genotype: Graph, birth: u64) -> Self {
        Individual {
            id,
            genotype: Arc::new(genotype),
            fitness: None,
            parents: None,
            op: None,
            birth,
            grid: None,
            trivial: false,
            clone_of: None,
        }
    }

    pub fn node_count(&self) -> usize {
        self.genotype.node_count()
    }

    pub fn to_json(&self) -> Value {
        json!({
            "id": self.id,
            "fitness": self.fitness,
            "parents": self.parents,
            "op": self.op,
            "birth": self.birth,
            "node_count": self.node_count(),
            "trivial": self.trivial,
            "clone_of": self.clone_of,
            "genotype": crate::graph::to_value(&self.genotype),
        })
    }
}

#[derive(Clone, Debug)]
pub struct Population {
    pub survivors: Vec<Individual>,
    pub iteration: u64,
    /// Next unused individual id.
    pub next_id: IndividualId,
}

impl Population {
    pub fn best(&self) -> Option<&Individual> {
        self.survivors
            .iter()
            .filter(|i| i.fitness.is_some())
            .max_by(|a, b| {
                a.fitness
                    .partial_cmp(&b.fitness)
                    .unwrap()
                    .then(b.id.cmp(&a.id))
            })
    }

    pub fn to_json(&self, cap: usize) -> Value {
        json!({
            "iteration": self.iteration,
            "node_cap": cap,
            "individuals": self.survivors.iter().map(Individual::to_json).collect::<Vec<_>>(),
        })
    }
}

/// `n` primitives cycling sphere, cylinder, cube, cone with parameters drawn
/// from the default ranges.
pub fn init_population(config: &EvolutionConfig) -> Population {
    let mut rng = derived(config.seed, &[tags::INIT]);
    let survivors = (0..config.population_size)
        .map(|i| {
            let kind = PrimitiveKind::ALL[i % PrimitiveKind::ALL.len()];
            let graph = Primitive::sample(kind, &mut rng)
                .graph()
                .expect("default ranges are positive");
            Individual::new(i as IndividualId, graph, 0)
        })
        .collect();
    Population {
        survivors,
        iteration: 0,
        next_id: config.population_size as IndividualId,
    }
}
