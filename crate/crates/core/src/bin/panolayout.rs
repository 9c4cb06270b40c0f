use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use pano_layout::config::RunConfig;
use pano_layout::models::ModelLibrary;
use pano_layout::pipeline::dataset::{generate_dataset, Manifest};
use pano_layout::pipeline::estimate::{estimate_dataset, Estimator};
use pano_layout::pipeline::eval::{evaluate_dataset, save_report};
use pano_layout::pipeline::floormap::floormap_svg;
use pano_layout::pipeline::render_scene;
use pano_layout::scene::SceneParameters;

#[derive(Parser)]
#[command(name = "panolayout", version, about = "Room layout, object pose and scale from one orientation panorama")]
struct Cli {
    /// JSON run configuration; missing sections take their defaults.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Master seed, overriding the configuration.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Output directory (or file for floormap).
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Number of rooms, overriding the configuration.
    #[arg(long, global = true)]
    rooms: Option<usize>,
    /// Worker threads; defaults to all cores.
    #[arg(long, global = true)]
    jobs: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Synthesize a dataset of ground-truth rooms and observations.
    Generate,
    /// Estimate every room of a dataset.
    Estimate {
        /// Dataset directory written by `generate`.
        dataset: PathBuf,
    },
    /// Compare estimates with ground truth.
    Eval {
        dataset: PathBuf,
        /// Results directory written by `estimate`.
        results: PathBuf,
    },
    /// Draw a top-down SVG map of a scene file.
    Floormap { scene: PathBuf },
    /// Render a scene file to orientation and object-mask panoramas.
    Render {
        scene: PathBuf,
        #[arg(long, default_value_t = 1024)]
        width: usize,
        #[arg(long, default_value_t = 512)]
        height: usize,
    },
}

fn load_config(cli: &Cli, fallback: Option<RunConfig>) -> pano_layout::Result<RunConfig> {
    let mut cfg = match &cli.config {
        Some(path) => RunConfig::load(path)?,
        None => fallback.unwrap_or_default(),
    };
    if let Some(seed) = cli.seed {
        cfg.dataset.master_seed = seed;
    }
    if let Some(rooms) = cli.rooms {
        cfg.dataset.rooms = rooms;
    }
    cfg.validate()?;
    Ok(cfg)
}

fn out_dir(cli: &Cli, default: &str) -> PathBuf {
    cli.out.clone().unwrap_or_else(|| PathBuf::from(default))
}

fn run(cli: &Cli) -> pano_layout::Result<()> {
    let models = ModelLibrary::default();
    match &cli.command {
        Command::Generate => {
            let cfg = load_config(cli, None)?;
            let out = out_dir(cli, "dataset");
            let manifest = generate_dataset(&cfg, &out, &models)?;
            println!("wrote {} rooms to {}", manifest.rooms.len(), out.display());
        }
        Command::Estimate { dataset } => {
            let manifest = Manifest::load(dataset)?;
            let cfg = load_config(cli, Some(manifest.config))?;
            let out = out_dir(cli, "results");
            let estimator = Estimator::new(cfg, models)?;
            let status = estimate_dataset(dataset, &out, &estimator)?;
            let failed: Vec<_> = status.iter().filter(|s| !s.ok).collect();
            for s in &failed {
                eprintln!("{}: {}", s.id, s.error.as_deref().unwrap_or("failed"));
            }
            println!("estimated {} of {} rooms into {}", status.len() - failed.len(), status.len(), out.display());
        }
        Command::Eval { dataset, results } => {
            let report = evaluate_dataset(dataset, results, &models)?;
            save_report(&report, &out_dir(cli, &results.display().to_string()))?;
            print!("{}", report.to_table());
        }
        Command::Floormap { scene } => {
            let scene = SceneParameters::load(scene, &models)?;
            let out = cli.out.clone().unwrap_or_else(|| PathBuf::from("floormap.svg"));
            write_file(&out, &floormap_svg(&scene))?;
            println!("wrote {}", out.display());
        }
        Command::Render { scene, width, height } => {
            let scene = SceneParameters::load(scene, &models)?;
            let out = out_dir(cli, "render");
            render_scene(&scene, pano_layout::projection::PanoSize::new(*width, *height), &models, &out)?;
            println!("wrote renders to {}", out.display());
        }
    }
    Ok(())
}

fn write_file(path: &Path, text: &str) -> pano_layout::Result<()> {
    std::fs::write(path, text).map_err(|e| pano_layout::Error::Io { path: path.to_path_buf(), source: e })
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(jobs) = cli.jobs {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(jobs.max(1)).build_global() {
            eprintln!("error: {e}");
            return ExitCode::FAILURE;
        }
    }
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
