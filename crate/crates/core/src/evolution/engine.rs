use std::fmt::Write as _;
use std::path::Path;
use std::sync::Arc;
use std::time::Instant;

use thiserror::Error;

use super::config::{ConfigError, EvolutionConfig};
use super::individual::{init_population, Individual, IndividualId, Population};
use super::{propagate_fitness, resource_cap, select, spawn_children, tags};
use crate::fitness::{EvaluatorError, FitnessEvaluator};
use crate::geometry::{marching_cubes, Bounds, GeometryError};
use crate::rng::derived;
use crate::Graph;

#[derive(Debug, Error)]
pub enum EvolutionError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("evaluator failed at iteration {iteration}: {source}")]
    Evaluator {
        iteration: u64,
        #[source]
        source: EvaluatorError,
    },
    #[error("writing checkpoint: {0}")]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Geometry(#[from] GeometryError),
    #[error("could not start worker pool: {0}")]
    Workers(String),
}

/// One line of `curves.csv`, describing the survivors after iteration `t`.
#[derive(Clone, Debug, PartialEq)]
pub struct CurveRow {
    pub iteration: u64,
    /// Best raw fitness; propagated scores are never reported.
    pub best_fitness: f64,
    pub mean_fitness: f64,
    pub mean_node_count: f64,
    pub wall_seconds: f64,
}

#[derive(Clone, Debug)]
pub struct IterationBest {
    pub iteration: u64,
    pub id: IndividualId,
    pub fitness: f64,
    pub genotype: Arc<Graph>,
}

#[derive(Debug)]
pub struct EvolutionResult {
    pub curves: Vec<CurveRow>,
    pub best: Vec<IterationBest>,
    pub population: Population,
    /// `(iteration, id)` of the candidate committed after each iteration.
    pub commits: Vec<(u64, IndividualId)>,
    /// Ended before `max_iterations` on a stop signal.
    pub stopped_early: bool,
}

pub const CURVES_HEADER: &str = "iteration,best_fitness,mean_fitness,mean_node_count,wall_seconds";

pub fn curves_csv(rows: &[CurveRow]) -> String {
    let mut out = format!("{CURVES_HEADER}\n");
    for r in rows {
        let _ = writeln!(
            out,
            "{},{:.6},{:.6},{:.3},{:.3}",
            r.iteration, r.best_fitness, r.mean_fitness, r.mean_node_count, r.wall_seconds
        );
    }
    out
}

/// Runs the genetic algorithm.
///
/// The initial population is scored at iteration 0. Each iteration `t ≥ 1`
/// spawns children, scores them, propagates child scores to parents,
/// selects survivors and commits the best newly scored child. The run ends
/// after `max_iterations`, when the best raw fitness reaches
/// `target_fitness`, or when the evaluator asks to stop. With a checkpoint
/// directory, a checkpoint is written every `checkpoint_every` iterations,
/// at the end of the run, and before returning an evaluator failure.
pub fn evolve(
    config: &EvolutionConfig,
    evaluator: &mut dyn FitnessEvaluator,
    checkpoint_dir: Option<&Path>,
) -> Result<EvolutionResult, EvolutionError> {
    config.validate()?;
    if config.workers == 0 {
        return run(config, evaluator, checkpoint_dir);
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(config.workers)
        .build()
        .map_err(|e| EvolutionError::Workers(e.to_string()))?;
    pool.install(|| run(config, evaluator, checkpoint_dir))
}

struct Run<'a> {
    config: &'a EvolutionConfig,
    dir: Option<&'a Path>,
    start: Instant,
    curves: Vec<CurveRow>,
    best: Vec<IterationBest>,
    last_checkpoint: Option<u64>,
}

impl Run<'_> {
    fn record(&mut self, pop: &Population) {
        let n = pop.survivors.len() as f64;
        let fitness = |i: &Individual| i.fitness.unwrap_or(0.0);
        let best = pop.best().expect("survivors are scored");
        self.curves.push(CurveRow {
            iteration: pop.iteration,
            best_fitness: fitness(best),
            mean_fitness: pop.survivors.iter().map(fitness).sum::<f64>() / n,
            mean_node_count: pop
                .survivors
                .iter()
                .map(|i| i.node_count() as f64)
                .sum::<f64>()
                / n,
            wall_seconds: if self.config.record_wall_clock {
                self.start.elapsed().as_secs_f64()
            } else {
                0.0
            },
        });
        self.best.push(IterationBest {
            iteration: pop.iteration,
            id: best.id,
            fitness: fitness(best),
            genotype: best.genotype.clone(),
        });
    }

    fn checkpoint(&mut self, pop: &Population) -> Result<(), EvolutionError> {
        let Some(dir) = self.dir else { return Ok(()) };
        if self.last_checkpoint == Some(pop.iteration) {
            return Ok(());
        }
        let t = pop.iteration;
        std::fs::create_dir_all(dir)?;
        let cap = resource_cap(self.config, t);
        let json = serde_json::to_string_pretty(&pop.to_json(cap)).expect("population serializes");
        std::fs::write(dir.join(format!("population-{t}.json")), json + "\n")?;
        std::fs::write(dir.join("curves.csv"), curves_csv(&self.curves))?;
        if let Some(best) = pop.best() {
            let mesh = marching_cubes(
                &best.genotype,
                self.config.mesh_resolution,
                Bounds::canonical(),
            )?;
            std::fs::write(dir.join(format!("best-{t}.obj")), mesh.to_obj())?;
        }
        self.last_checkpoint = Some(t);
        Ok(())
    }

    fn due(&self, t: u64) -> bool {
        self.config.checkpoint_every > 0 && t.is_multiple_of(self.config.checkpoint_every)
    }
}

/// Scores every unscored individual in `group`, checking the evaluator's
/// answers line up with the request.
fn score(
    evaluator: &mut dyn FitnessEvaluator,
    group: &mut [Individual],
    t: u64,
) -> Result<(), EvaluatorError> {
    let todo: Vec<usize> = (0..group.len())
        .filter(|&i| group[i].fitness.is_none())
        .collect();
    if todo.is_empty() {
        return Ok(());
    }
    let refs: Vec<&Individual> = todo.iter().map(|&i| &group[i]).collect();
    let scores = evaluator.evaluate(&refs, t)?;
    if scores.len() != todo.len() {
        return Err(EvaluatorError::Protocol(format!(
            "{} scores for {} candidates",
            scores.len(),
            todo.len()
        )));
    }
    for (&i, s) in todo.iter().zip(&scores) {
        if s.id != group[i].id || !(s.fitness.is_finite() && s.fitness >= 0.0) {
            return Err(EvaluatorError::Protocol(format!(
                "bad score {:?} for candidate {}",
                s.fitness, group[i].id
            )));
        }
    }
    for (&i, s) in todo.iter().zip(scores) {
        group[i].fitness = Some(s.fitness);
    }
    Ok(())
}

fn run(
    config: &EvolutionConfig,
    evaluator: &mut dyn FitnessEvaluator,
    dir: Option<&Path>,
) -> Result<EvolutionResult, EvolutionError> {
    let mut run = Run {
        config,
        dir,
        start: Instant::now(),
        curves: Vec::new(),
        best: Vec::new(),
        last_checkpoint: None,
    };
    let mut pop = init_population(config);
    let mut commits = Vec::new();
    let fail = |run: &mut Run, pop: &Population, iteration, source| {
        log::error!("evaluator failed at iteration {iteration}: {source}");
        run.checkpoint(pop)?;
        Err(EvolutionError::Evaluator { iteration, source })
    };

    if let Err(e) = score(evaluator, &mut pop.survivors, 0) {
        return fail(&mut run, &pop, 0, e);
    }
    run.record(&pop);
    if run.due(0) {
        run.checkpoint(&pop)?;
    }

    let mut stopped_early = stop_now(&run, config, &*evaluator);
    let mut t = 0;
    while !stopped_early && t < config.max_iterations {
        t += 1;
        let mut children = spawn_children(&pop, t, config);
        if let Err(e) = score(evaluator, &mut children, t) {
            return fail(&mut run, &pop, t, e);
        }
        let round_best = children
            .iter()
            .max_by(|a, b| {
                a.fitness
                    .partial_cmp(&b.fitness)
                    .unwrap()
                    .then(b.id.cmp(&a.id))
            })
            .map(|c| c.id);

        let raw = |i: &Individual| i.fitness.expect("scored");
        let mut scores: Vec<f64> = if config.fitness_propagation {
            let parents: Vec<(IndividualId, f64)> =
                pop.survivors.iter().map(|i| (i.id, raw(i))).collect();
            let kids: Vec<(f64, [IndividualId; 2])> = children
                .iter()
                .map(|c| (raw(c), c.parents.expect("children have parents")))
                .collect();
            propagate_fitness(&parents, &kids)
        } else {
            pop.survivors.iter().map(raw).collect()
        };
        scores.extend(children.iter().map(raw));

        let mut next_id = pop.next_id + children.len() as IndividualId;
        let pool: Vec<Individual> = pop.survivors.drain(..).chain(children).collect();
        let mut rng = derived(config.seed, &[tags::SELECT, t]);
        let (survivors, report) = select(pool, &scores, t, config, &mut rng, &mut next_id);
        log::debug!(
            "iteration {t}: dropped {}, cloned {}, elites {:?}",
            report.filtered_out,
            report.clones,
            report.elites
        );
        pop = Population {
            survivors,
            iteration: t,
            next_id,
        };

        if let Some(id) = round_best {
            if let Err(e) = evaluator.commit(id, t) {
                return fail(&mut run, &pop, t, e);
            }
            commits.push((t, id));
        }
        run.record(&pop);
        let row = run.curves.last().expect("recorded");
        log::info!(
            "iteration {t}: best {:.4} mean {:.4} nodes {:.1}",
            row.best_fitness,
            row.mean_fitness,
            row.mean_node_count
        );
        if run.due(t) {
            run.checkpoint(&pop)?;
        }
        stopped_early = stop_now(&run, config, &*evaluator);
    }
    run.checkpoint(&pop)?;
    if let Err(e) = evaluator.finish() {
        return Err(EvolutionError::Evaluator {
            iteration: t,
            source: e,
        });
    }
    Ok(EvolutionResult {
        curves: run.curves,
        best: run.best,
        population: pop,
        commits,
        stopped_early,
    })
}

fn stop_now(run: &Run, config: &EvolutionConfig, evaluator: &dyn FitnessEvaluator) -> bool {
    let best = run.curves.last().expect("recorded").best_fitness;
    config.target_fitness.is_some_and(|f| best >= f) || evaluator.should_stop(best)
}
