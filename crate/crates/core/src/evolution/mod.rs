//! The genetic algorithm over shape graphs.
//!
//! Each iteration spawns `m` children by randomly transforming two parents
//! and combining them with a random set operation, scores the new
//! individuals, propagates child scores back to parents, and selects `n`
//! survivors: elites first, then a fitness-driven share and a size-driven
//! diversity share, both sampled without replacement.

mod config;
mod engine;
mod individual;
mod propagate;
mod select;
mod spawn;

pub use config::{ConfigError, EvolutionConfig, SelectionMode, TransformRanges};
pub use engine::{
    curves_csv, evolve, CurveRow, EvolutionError, EvolutionResult, IterationBest, CURVES_HEADER,
};
pub use individual::{init_population, Individual, IndividualId, Population};
pub use propagate::propagate_fitness;
pub use select::{rank_weights, sample_without_replacement, select, SelectionReport};
pub use spawn::{random_transform, spawn_children};

/// Node cap at iteration `t`: `C₀ + β·t`.
pub fn resource_cap(config: &EvolutionConfig, t: u64) -> usize {
    (config.cap_base as f64 + config.cap_slope * t as f64).floor() as usize
}

/// `true` iff the genotype fits the node cap at iteration `t`.
pub fn enforce_resource_cap(individual: &Individual, t: u64, config: &EvolutionConfig) -> bool {
    individual.genotype.node_count() <= resource_cap(config, t)
}

/// Stream tags for [`crate::rng::derived`].
pub(crate) mod tags {
    pub const INIT: u64 = 1;
    pub const SPAWN: u64 = 2;
    pub const SELECT: u64 = 3;
}
