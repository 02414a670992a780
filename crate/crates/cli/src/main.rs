//! `shapevo` command-line driver.
//!
//! Exit codes: 0 success, 2 config or parse error, 3 evaluator failure,
//! 4 degenerate geometry.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Duration;

use clap::{Args, Parser, Subcommand};
use serde_json::json;

use shapevo::evolution::{curves_csv, evolve, EvolutionConfig, EvolutionError};
use shapevo::fitness::{
    ExternalEvaluator, ExternalOptions, FitnessEvaluator, IouEvaluator, TargetSpec,
};
use shapevo::geometry::{
    marching_cubes, voxelize, Bounds, DEFAULT_MESH_RESOLUTION, DEFAULT_VOXEL_RESOLUTION,
};
use shapevo::render::{write_shape_dataset, RenderError, DEFAULT_IMAGE_SIZE};
use shapevo::Graph;

const EXIT_CONFIG: u8 = 2;
const EXIT_EVALUATOR: u8 = 3;
const EXIT_GEOMETRY: u8 = 4;

#[derive(Parser)]
#[command(
    name = "shapevo",
    version,
    about = "Evolve 3D shapes encoded as implicit-surface graphs"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the genetic algorithm against a target shape or an external evaluator.
    Evolve(EvolveArgs),
    /// Render a graph to the dataset layout.
    Render(RenderArgs),
    /// Print statistics about a graph.
    Inspect(InspectArgs),
}

#[derive(Args)]
#[command(group(clap::ArgGroup::new("mode").required(true).args(["target", "evaluator"])))]
struct EvolveArgs {
    /// Run config (JSON); missing fields take the preset for the chosen mode.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    out: PathBuf,
    #[arg(long)]
    seed: Option<u64>,
    /// Worker threads; 0 uses every core.
    #[arg(long)]
    workers: Option<usize>,
    /// Target as a .obj mesh, a graph .json, or one of bite, heart, torus.
    #[arg(long)]
    target: Option<String>,
    /// Shell command starting an external evaluator.
    #[arg(long)]
    evaluator: Option<String>,
    /// Seconds to wait for each evaluator response.
    #[arg(long, default_value_t = 3600)]
    evaluator_timeout: u64,
    /// Validation directory passed to the evaluator instead of a synthetic set.
    #[arg(long)]
    validation: Option<PathBuf>,
    #[arg(long)]
    max_iterations: Option<u64>,
    #[arg(long)]
    no_fitness_propagation: bool,
    #[arg(long)]
    no_diversity: bool,
    #[arg(long)]
    no_trivial_discard: bool,
    /// Write 0 to the wall_seconds column so reruns are byte-identical.
    #[arg(long)]
    no_wall_clock: bool,
}

#[derive(Args)]
struct RenderArgs {
    #[arg(long)]
    graph: PathBuf,
    #[arg(long, default_value_t = 8)]
    views: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: PathBuf,
    #[arg(long, default_value_t = DEFAULT_IMAGE_SIZE)]
    size: usize,
    #[arg(long, default_value_t = DEFAULT_MESH_RESOLUTION)]
    mesh_resolution: usize,
}

#[derive(Args)]
struct InspectArgs {
    #[arg(long)]
    graph: PathBuf,
    /// Also export the 64³ isosurface as OBJ.
    #[arg(long)]
    obj: Option<PathBuf>,
}

struct Failure(u8, String);

impl Failure {
    fn config(message: impl std::fmt::Display) -> Self {
        Failure(EXIT_CONFIG, message.to_string())
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Evolve(args) => cmd_evolve(args),
        Command::Render(args) => cmd_render(args),
        Command::Inspect(args) => cmd_inspect(args),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure(code, message)) => {
            eprintln!("shapevo: {message}");
            ExitCode::from(code)
        }
    }
}

fn read_graph(path: &Path) -> Result<Graph, Failure> {
    let text = fs::read_to_string(path)
        .map_err(|e| Failure::config(format!("cannot read {}: {e}", path.display())))?;
    shapevo::graph::from_json(&text)
        .map_err(|e| Failure::config(format!("{}: {e}", path.display())))
}

fn load_config(args: &EvolveArgs) -> Result<EvolutionConfig, Failure> {
    let preset = if args.evaluator.is_some() {
        EvolutionConfig::joint()
    } else {
        EvolutionConfig::standalone()
    };
    let mut config = match &args.config {
        None => preset,
        Some(path) => {
            let text = fs::read_to_string(path)
                .map_err(|e| Failure::config(format!("cannot read {}: {e}", path.display())))?;
            let mut value: serde_json::Value = serde_json::from_str(&text)
                .map_err(|e| Failure::config(format!("{}: {e}", path.display())))?;
            let mut merged = serde_json::to_value(&preset).expect("config serializes");
            if let (Some(base), Some(over)) = (merged.as_object_mut(), value.as_object_mut()) {
                base.append(over);
            } else {
                return Err(Failure::config(format!(
                    "{}: expected a JSON object",
                    path.display()
                )));
            }
            serde_json::from_value(merged)
                .map_err(|e| Failure::config(format!("{}: {e}", path.display())))?
        }
    };
    if let Some(seed) = args.seed {
        config.seed = seed;
    }
    if let Some(workers) = args.workers {
        config.workers = workers;
    }
    if let Some(iters) = args.max_iterations {
        config.max_iterations = iters;
    }
    if args.no_fitness_propagation {
        config.fitness_propagation = false;
    }
    if args.no_diversity {
        config.diversity_fraction = 0.0;
    }
    if args.no_trivial_discard {
        config.trivial_discard = false;
    }
    if args.no_wall_clock {
        config.record_wall_clock = false;
    }
    config.validate().map_err(Failure::config)?;
    Ok(config)
}

fn cmd_evolve(args: EvolveArgs) -> Result<(), Failure> {
    let config = load_config(&args)?;
    fs::create_dir_all(&args.out)
        .map_err(|e| Failure::config(format!("cannot create {}: {e}", args.out.display())))?;
    let out = args.out.as_path();

    let (mode, mut evaluator): (&str, Box<dyn FitnessEvaluator>) =
        match (&args.target, &args.evaluator) {
            (Some(target), _) => {
                let spec =
                    TargetSpec::load(target, config.voxel_resolution).map_err(Failure::config)?;
                ("standalone-iou", Box::new(IouEvaluator::new(spec)))
            }
            (None, Some(command)) => {
                let options = ExternalOptions {
                    views_per_shape: config.views_per_shape,
                    image_size: config.image_size,
                    mesh_resolution: config.mesh_resolution,
                    seed: config.seed,
                    timeout: Duration::from_secs(args.evaluator_timeout),
                    validation: args.validation.clone(),
                    ..ExternalOptions::new(out.join("evaluator"))
                };
                let ev = ExternalEvaluator::spawn(command, options)
                    .map_err(|e| Failure(EXIT_EVALUATOR, format!("starting evaluator: {e}")))?;
                ("external", Box::new(ev))
            }
            (None, None) => unreachable!("clap requires a mode"),
        };

    let manifest = json!({
        "mode": mode,
        "config_path": args.config,
        "target": args.target,
        "evaluator": args.evaluator,
        "seed": config.seed,
        "config": config,
    });
    write(
        out.join("run.json"),
        serde_json::to_string_pretty(&manifest).expect("manifest serializes") + "\n",
    )?;

    let result = match evolve(&config, evaluator.as_mut(), Some(out)) {
        Ok(r) => r,
        Err(e @ EvolutionError::Evaluator { .. }) => {
            return Err(Failure(EXIT_EVALUATOR, e.to_string()))
        }
        Err(e @ EvolutionError::Config(_)) => return Err(Failure::config(e)),
        Err(e) => return Err(Failure(1, e.to_string())),
    };
    write(out.join("curves.csv"), curves_csv(&result.curves))?;
    let best = result
        .best
        .last()
        .expect("at least the initial population is recorded");
    write(
        out.join("best.json"),
        shapevo::graph::to_json(&best.genotype) + "\n",
    )?;
    let mesh = marching_cubes(&best.genotype, config.mesh_resolution, Bounds::canonical())
        .map_err(|e| Failure(1, e.to_string()))?;
    write(out.join("best.obj"), mesh.to_obj())?;
    println!(
        "best fitness {:.4} (individual {}, {} nodes) after {} iterations{}",
        best.fitness,
        best.id,
        best.genotype.node_count(),
        best.iteration,
        if result.stopped_early {
            ", stopped early"
        } else {
            ""
        }
    );
    Ok(())
}

fn write(path: PathBuf, contents: String) -> Result<(), Failure> {
    fs::write(&path, contents)
        .map_err(|e| Failure(1, format!("cannot write {}: {e}", path.display())))
}

fn cmd_render(args: RenderArgs) -> Result<(), Failure> {
    let graph = read_graph(&args.graph)?;
    if args.size == 0 || args.mesh_resolution < 2 {
        return Err(Failure::config(
            "size must be positive and mesh resolution at least 2",
        ));
    }
    match write_shape_dataset(
        &graph,
        &args.out,
        args.views,
        args.seed,
        args.size,
        args.mesh_resolution,
    ) {
        Ok(views) => {
            println!("wrote {} views to {}", views.len(), args.out.display());
            Ok(())
        }
        Err(RenderError::EmptyShape) => Err(Failure(EXIT_GEOMETRY, "empty shape".into())),
        Err(e) => Err(Failure(1, e.to_string())),
    }
}

fn cmd_inspect(args: InspectArgs) -> Result<(), Failure> {
    let graph = read_graph(&args.graph)?;
    let res = DEFAULT_VOXEL_RESOLUTION;
    let grid = voxelize(&graph, res, Bounds::canonical()).expect("default resolution is valid");
    println!("nodes {}", graph.node_count());
    println!("edges {}", graph.edge_count());
    println!("occupancy {:.4} at {res}^3", grid.fill_fraction());
    match grid.occupied_extent() {
        Some((lo, hi)) => {
            let b = grid.bounds();
            let cell = b.extent() / res as f64;
            let lo: Vec<String> = lo
                .iter()
                .map(|&i| format!("{:.4}", b.lo + i as f64 * cell))
                .collect();
            let hi: Vec<String> = hi
                .iter()
                .map(|&i| format!("{:.4}", b.lo + (i + 1) as f64 * cell))
                .collect();
            println!("bounds [{}] .. [{}]", lo.join(", "), hi.join(", "));
        }
        None => println!("bounds empty"),
    }
    if let Some(path) = args.obj {
        let mesh = marching_cubes(&graph, DEFAULT_MESH_RESOLUTION, Bounds::canonical())
            .map_err(|e| Failure(1, e.to_string()))?;
        let stats = mesh.stats();
        println!(
            "mesh {} vertices, {} triangles, area {:.4}, watertight {}",
            mesh.vertices.len(),
            mesh.triangles.len(),
            mesh.area(),
            stats.is_watertight()
        );
        write(path, mesh.to_obj())?;
    }
    Ok(())
}
