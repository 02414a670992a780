use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geometry::{TrivialityThresholds, DEFAULT_MESH_RESOLUTION, DEFAULT_VOXEL_RESOLUTION};
use crate::render::DEFAULT_IMAGE_SIZE;

#[derive(Debug, Error, PartialEq)]
#[error("invalid config field `{field}`: {message}")]
pub struct ConfigError {
    pub field: &'static str,
    pub message: String,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SelectionMode {
    /// Probability ∝ `rank_base^r` over fitness rank `r` (0 = best).
    Rank,
    /// Probability ∝ fitness.
    Roulette,
}

/// Ranges of the random similarity transform applied to each parent.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct TransformRanges {
    /// Scale is log-uniform in `[scale_min, scale_max]`.
    pub scale_min: f64,
    pub scale_max: f64,
    /// Translation is uniform in `[-translation, translation]³`.
    pub translation: f64,
}

impl Default for TransformRanges {
    fn default() -> Self {
        TransformRanges {
            scale_min: 0.5,
            scale_max: 2.0,
            translation: 0.5,
        }
    }
}

/// Run configuration; the JSON run-config file deserializes into this, with
/// missing fields taking the standalone defaults.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct EvolutionConfig {
    /// `n`: survivors kept after each selection.
    pub population_size: usize,
    /// `m`: children spawned per iteration.
    pub children: usize,
    /// `β`: node-cap growth per iteration.
    pub cap_slope: f64,
    /// `C₀`: node cap at iteration 0.
    pub cap_base: usize,
    pub selection: SelectionMode,
    pub rank_base: f64,
    pub diversity_base: f64,
    /// Share of non-elite survivors drawn by graph size instead of fitness.
    pub diversity_fraction: f64,
    pub transform: TransformRanges,
    pub elitism: usize,
    pub max_iterations: u64,
    pub seed: u64,
    /// Reassign each parent the best score among itself and its children.
    pub fitness_propagation: bool,
    /// Reject empty, full and parent-copy children at spawn time.
    pub trivial_discard: bool,
    pub triviality: TrivialityThresholds,
    pub spawn_attempts: usize,
    pub voxel_resolution: usize,
    pub mesh_resolution: usize,
    pub views_per_shape: usize,
    pub image_size: usize,
    /// Write a checkpoint every `k` iterations; 0 writes only the final one.
    pub checkpoint_every: u64,
    /// Stop once the best raw fitness reaches this value.
    pub target_fitness: Option<f64>,
    /// Worker threads for spawning and evaluation; 0 uses all cores.
    pub workers: usize,
    /// Record elapsed time in the curves; when false the column is zero.
    pub record_wall_clock: bool,
}

impl Default for EvolutionConfig {
    fn default() -> Self {
        Self::standalone()
    }
}

impl EvolutionConfig {
    /// Target-shape evolution with IoU fitness: rank selection with base
    /// 0.2 and half of the survivors drawn by graph size with base 0.2.
    pub fn standalone() -> Self {
        EvolutionConfig {
            population_size: 100,
            children: 100,
            cap_slope: 16.0,
            cap_base: 64,
            selection: SelectionMode::Rank,
            rank_base: 0.2,
            diversity_base: 0.2,
            diversity_fraction: 0.5,
            transform: TransformRanges::default(),
            elitism: 1,
            max_iterations: 150,
            seed: 0,
            fitness_propagation: true,
            trivial_discard: true,
            triviality: TrivialityThresholds::default(),
            spawn_attempts: 20,
            voxel_resolution: DEFAULT_VOXEL_RESOLUTION,
            mesh_resolution: DEFAULT_MESH_RESOLUTION,
            views_per_shape: 8,
            image_size: DEFAULT_IMAGE_SIZE,
            checkpoint_every: 10,
            target_fitness: None,
            workers: 0,
            record_wall_clock: true,
        }
    }

    /// Evolution driven by an external learner: roulette selection on
    /// 90% of survivors, the remaining 10% by graph size with base 0.5.
    pub fn joint() -> Self {
        EvolutionConfig {
            selection: SelectionMode::Roulette,
            diversity_base: 0.5,
            diversity_fraction: 0.1,
            ..Self::standalone()
        }
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        let fail = |field, message: &str| {
            Err(ConfigError {
                field,
                message: message.to_string(),
            })
        };
        if self.population_size < 2 {
            return fail(
                "population_size",
                "need at least two individuals to pick distinct parents",
            );
        }
        if self.children == 0 {
            return fail("children", "must be positive");
        }
        if self.elitism > self.population_size {
            return fail("elitism", "cannot exceed population_size");
        }
        if !(0.0..=1.0).contains(&self.diversity_fraction) {
            return fail("diversity_fraction", "must lie in [0, 1]");
        }
        for (field, q) in [
            ("rank_base", self.rank_base),
            ("diversity_base", self.diversity_base),
        ] {
            if !(q > 0.0 && q <= 1.0) {
                return fail(field, "must lie in (0, 1]");
            }
        }
        if !(self.cap_slope >= 0.0 && self.cap_slope.is_finite()) {
            return fail("cap_slope", "must be non-negative");
        }
        let t = &self.transform;
        if !(t.scale_min > 0.0 && t.scale_max >= t.scale_min && t.scale_max.is_finite()) {
            return fail("transform", "scale range must be positive and ordered");
        }
        if !(t.translation >= 0.0 && t.translation.is_finite()) {
            return fail("transform", "translation must be non-negative");
        }
        if self.spawn_attempts == 0 {
            return fail("spawn_attempts", "must be positive");
        }
        if self.voxel_resolution < 2 || self.mesh_resolution < 2 {
            return fail("voxel_resolution", "resolutions must be at least 2");
        }
        if self.views_per_shape == 0 || self.image_size == 0 {
            return fail("views_per_shape", "views and image size must be positive");
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn presets_are_valid() {
        assert!(EvolutionConfig::standalone().validate().is_ok());
        let j = EvolutionConfig::joint();
        assert!(j.validate().is_ok());
        assert_eq!(
            (j.selection, j.diversity_base, j.diversity_fraction),
            (SelectionMode::Roulette, 0.5, 0.1)
        );
    }

    #[test]
    fn partial_json_takes_defaults() {
        let c: EvolutionConfig =
            serde_json::from_str(r#"{"population_size": 8, "selection": "roulette"}"#).unwrap();
        assert_eq!(c.population_size, 8);
        assert_eq!(c.children, 100);
        assert_eq!(c.selection, SelectionMode::Roulette);
    }

    #[test]
    fn rejects_bad_fractions() {
        let c = EvolutionConfig {
            diversity_fraction: 1.5,
            ..EvolutionConfig::standalone()
        };
        assert_eq!(c.validate().unwrap_err().field, "diversity_fraction");
    }
}
