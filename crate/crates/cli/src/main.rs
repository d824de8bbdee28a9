//! `semvox`: annotate scenes, check the annotator against brute force,
//! compute visibility, fuse agents, evaluate and run benchmark sweeps.

mod sweep;

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand, ValueEnum};
use semvox_core::annotate::{annotate, brute_force_annotate, AnnotationStats, BruteForceOptions, VoxelGrid};
use semvox_core::fusion::{
    evaluate, fuse_cell, prepare_views, run_benchmark, BenchConfig, FusionMode, GtSource, NoiseModel,
};
use semvox_core::geometry::Vec3;
use semvox_core::grid_ops::{compute_visibility, downsample, observed_grid};
use semvox_core::io::{load_config, load_scene, read_grid, write_grid, Encoding};
use semvox_core::scene::{evaluated_classes, GridSpec, Scene, SemanticLabel, BENCHMARK_Z_MIN};

const THREADS_VAR: &str = "SEMVOX_THREADS";

#[derive(Parser)]
#[command(
    name = "semvox",
    version,
    about = "Semantic voxel ground truth, visibility, fusion and benchmarks"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum EncodingArg {
    Dense,
    Rle,
}

impl From<EncodingArg> for Encoding {
    fn from(e: EncodingArg) -> Self {
        match e {
            EncodingArg::Dense => Encoding::Dense,
            EncodingArg::Rle => Encoding::Rle,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum ModeArg {
    FirstValid,
    Vote,
}

impl From<ModeArg> for FusionMode {
    fn from(m: ModeArg) -> Self {
        match m {
            ModeArg::FirstValid => FusionMode::FirstValid,
            ModeArg::Vote => FusionMode::Vote,
        }
    }
}

/// Grid placement shared by `annotate` and `oracle-check`.
#[derive(clap::Args)]
struct GridArgs {
    #[arg(long)]
    scene: PathBuf,
    /// Grid size in metres, `X,Y,Z`.
    #[arg(long, value_parser = sweep::vec3)]
    extent: [f64; 3],
    /// Voxel edge length in metres.
    #[arg(long)]
    res: f64,
    /// Minimum corner `X,Y,Z`; by default the grid is centred on the frame
    /// origin horizontally and starts at z = -2.
    #[arg(long, value_parser = sweep::vec3)]
    origin: Option<[f64; 3]>,
    /// Annotate in this agent's frame instead of the world frame.
    #[arg(long)]
    agent: Option<u32>,
}

impl GridArgs {
    fn load(&self) -> Result<(Scene, GridSpec)> {
        let scene = load_scene(&self.scene)?;
        let scene = match self.agent {
            Some(id) => scene.in_agent_frame(id)?,
            None => scene,
        };
        let extent = Vec3::from(self.extent);
        let spec = match self.origin {
            Some(o) => GridSpec::new(Vec3::from(o), extent, self.res)?,
            None => GridSpec::centered(extent, BENCHMARK_Z_MIN, self.res)?,
        };
        Ok((scene, spec))
    }
}

#[derive(Subcommand)]
enum Command {
    /// Label every voxel of a grid from the scene's objects.
    Annotate {
        #[command(flatten)]
        grid: GridArgs,
        #[arg(long)]
        out: PathBuf,
        /// Write work counters as JSON.
        #[arg(long)]
        stats: Option<PathBuf>,
        #[arg(long, value_enum, default_value = "rle")]
        encoding: EncodingArg,
    },
    /// Annotate twice, fast and exhaustively, and report any difference.
    OracleCheck {
        #[command(flatten)]
        grid: GridArgs,
        /// Allow exhaustive runs above the voxel budget.
        #[arg(long)]
        force: bool,
    },
    /// Mark the voxels an agent's sensor can see in a ground-truth grid
    /// expressed in that agent's frame. The output grid holds 1 for visible
    /// voxels and 0 elsewhere.
    Visibility {
        #[arg(long)]
        scene: PathBuf,
        #[arg(long)]
        grid: PathBuf,
        #[arg(long)]
        agent: u32,
        #[arg(long)]
        out: PathBuf,
        /// Also write the ground truth restricted to visible voxels.
        #[arg(long)]
        observed: Option<PathBuf>,
    },
    /// Fuse an ego agent's observation with its nearest collaborators.
    Fuse {
        #[arg(long)]
        scene: PathBuf,
        #[arg(long)]
        ego: u32,
        #[arg(long)]
        k: usize,
        #[arg(long, default_value_t = 0.0)]
        mu: f64,
        #[arg(long, default_value_t = 0.0)]
        sigma: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Side of the square range in metres.
        #[arg(long)]
        range: f64,
        /// Voxel size; 1/256 of the range by default.
        #[arg(long)]
        res: Option<f64>,
        /// Annotate ground truth directly at the range resolution instead
        /// of deriving it from a finer grid.
        #[arg(long)]
        reannotate: bool,
        #[arg(long, value_enum, default_value = "first-valid")]
        mode: ModeArg,
        #[arg(long)]
        out: PathBuf,
    },
    /// Per-class IoU of a predicted grid against ground truth.
    Eval {
        #[arg(long)]
        pred: PathBuf,
        #[arg(long)]
        gt: PathBuf,
        /// Comma-separated label names or codes; the evaluated classes by default.
        #[arg(long)]
        classes: Option<String>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Sweep ego × range × collaborators × pose noise over one scene.
    Bench {
        #[arg(long)]
        scene: PathBuf,
        /// JSON configuration; flags given on the command line override it.
        #[arg(long)]
        config: Option<PathBuf>,
        /// Range sides in metres, each at 256 columns.
        #[arg(long)]
        ranges: Option<String>,
        #[arg(long)]
        k: Option<String>,
        #[arg(long)]
        mu: Option<String>,
        #[arg(long)]
        sigma: Option<String>,
        #[arg(long)]
        seed: Option<u64>,
        /// Ego agent ids, comma-separated; every agent by default.
        #[arg(long)]
        egos: Option<String>,
        #[arg(long)]
        reannotate: bool,
        #[arg(long, value_enum)]
        mode: Option<ModeArg>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Coarsen a grid by an integer factor using the majority label.
    Downsample {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        factor: usize,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, value_enum, default_value = "rle")]
        encoding: EncodingArg,
    },
}

fn stats_json(s: &AnnotationStats) -> serde_json::Value {
    serde_json::json!({
        "fine_checks_performed": s.fine_checks_performed,
        "voxel_visits": s.voxel_visits,
        "voxels_occupied": s.voxels_occupied,
        "wall_time_seconds": s.wall_time.as_secs_f64(),
        "objects": s.objects.iter().map(|o| serde_json::json!({
            "id": o.object_id,
            "seeds": o.seeds,
            "fine_checks": o.fine_checks,
            "occupied": o.occupied,
        })).collect::<Vec<_>>(),
    })
}

fn write_json(path: &Path, value: &impl serde::Serialize) -> Result<()> {
    let text = serde_json::to_string_pretty(value)? + "\n";
    fs::write(path, text).with_context(|| format!("writing {}", path.display()))
}

fn parse_classes(list: &str) -> Result<Vec<SemanticLabel>> {
    list.split(',')
        .map(|t| {
            let t = t.trim();
            t.parse::<u8>()
                .ok()
                .and_then(SemanticLabel::new)
                .or_else(|| SemanticLabel::parse(t))
                .with_context(|| format!("unknown class {t:?}"))
        })
        .collect()
}

fn configure_threads() -> Result<()> {
    let Ok(v) = std::env::var(THREADS_VAR) else {
        return Ok(());
    };
    let n: usize = v
        .trim()
        .parse()
        .ok()
        .filter(|n| *n > 0)
        .with_context(|| format!("{THREADS_VAR} must be a positive integer, got {v:?}"))?;
    rayon::ThreadPoolBuilder::new().num_threads(n).build_global()?;
    Ok(())
}

fn run(cli: Cli) -> Result<()> {
    configure_threads()?;
    match cli.command {
        Command::Annotate {
            grid,
            out,
            stats,
            encoding,
        } => {
            let (scene, spec) = grid.load()?;
            let (g, s) = annotate(&scene, &spec);
            write_grid(&g, &out, encoding.into())?;
            if let Some(p) = stats {
                write_json(&p, &stats_json(&s))?;
            }
            println!(
                "{} voxels, {} occupied, {} fine checks",
                g.len(),
                s.voxels_occupied,
                s.fine_checks_performed
            );
        }
        Command::OracleCheck { grid, force } => {
            let (scene, spec) = grid.load()?;
            let (fast, fs) = annotate(&scene, &spec);
            let (slow, ss) = brute_force_annotate(
                &scene,
                &spec,
                BruteForceOptions {
                    force,
                    ..Default::default()
                },
            )?;
            let mismatches = fast.labels().iter().zip(slow.labels()).filter(|(a, b)| a != b).count();
            println!(
                "{}",
                serde_json::json!({
                    "voxels": spec.voxel_count(),
                    "mismatches": mismatches,
                    "fine_checks": fs.fine_checks_performed,
                    "brute_force_fine_checks": ss.fine_checks_performed,
                })
            );
            if mismatches > 0 {
                bail!("{mismatches} voxel(s) differ from the exhaustive annotation");
            }
        }
        Command::Visibility {
            scene,
            grid,
            agent,
            out,
            observed,
        } => {
            let scene = load_scene(&scene)?.in_agent_frame(agent)?;
            let gt = read_grid(&grid)?;
            let vis = compute_visibility(&gt, scene.agent(agent)?);
            let codes: Vec<u8> = vis.bits().iter().map(|&b| b as u8).collect();
            write_grid(&VoxelGrid::from_codes(*gt.spec(), &codes)?, &out, Encoding::Rle)?;
            if let Some(p) = observed {
                write_grid(&observed_grid(&gt, &vis)?.0, &p, Encoding::Rle)?;
            }
            println!("{} of {} voxels visible", vis.count(), gt.len());
        }
        Command::Fuse {
            scene,
            ego,
            k,
            mu,
            sigma,
            seed,
            range,
            res,
            reannotate,
            mode,
            out,
        } => {
            let scene = load_scene(&scene)?;
            let res = res.unwrap_or_else(|| GridSpec::benchmark_resolution(range));
            let config = BenchConfig {
                ranges: vec![GridSpec::benchmark(range, res)?],
                seed,
                gt_source: if reannotate {
                    GtSource::Reannotate
                } else {
                    GtSource::Derived
                },
                ..Default::default()
            };
            scene.agent(ego)?;
            let noise = NoiseModel::new(mu, sigma, seed)?;
            let (views, _) = prepare_views(&scene, &config)?;
            let (fused, ids) = fuse_cell(&views, ego, 0, k, &noise, mode.into()).map_err(anyhow::Error::msg)?;
            write_grid(&fused.grid, &out, Encoding::Rle)?;
            println!("fused ego {ego} with {ids:?}");
        }
        Command::Eval { pred, gt, classes, out } => {
            let classes = match classes {
                Some(c) => parse_classes(&c)?,
                None => evaluated_classes(),
            };
            let report = evaluate(&read_grid(&pred)?, &read_grid(&gt)?, &classes)?;
            write_json(&out, &report)?;
            match report.miou {
                Some(m) => println!("mIoU {:.4}", m),
                None => println!("mIoU undefined: no evaluated class present"),
            }
        }
        Command::Bench {
            scene,
            config,
            ranges,
            k,
            mu,
            sigma,
            seed,
            egos,
            reannotate,
            mode,
            out,
        } => {
            let scene = load_scene(&scene)?;
            let mut c = match config {
                Some(p) => load_config(p)?,
                None => BenchConfig::default(),
            };
            if let Some(r) = ranges {
                c.ranges = semvox_core::fusion::ranges_from_extents(&sweep::floats(&r).context("--ranges")?)?;
            }
            if let Some(k) = k {
                c.k_values = sweep::counts(&k).context("--k")?;
            }
            if mu.is_some() || sigma.is_some() {
                let list = |v: Option<String>, flag: &str| match v {
                    Some(t) => sweep::floats(&t).with_context(|| flag.to_string()),
                    None => Ok(vec![0.0]),
                };
                let mus = list(mu, "--mu")?;
                let sigmas = list(sigma, "--sigma")?;
                c.noise = mus.iter().flat_map(|&m| sigmas.iter().map(move |&s| (m, s))).collect();
            }
            if let Some(s) = seed {
                c.seed = s;
            }
            if let Some(e) = egos {
                let ids = sweep::counts(&e).context("--egos")?;
                c.egos = Some(ids.into_iter().map(u32::try_from).collect::<Result<_, _>>()?);
            }
            if reannotate {
                c.gt_source = GtSource::Reannotate;
            }
            if let Some(m) = mode {
                c.mode = m.into();
            }
            let run = run_benchmark(&scene, &c)?;
            fs::create_dir_all(&out).with_context(|| format!("creating {}", out.display()))?;
            fs::write(out.join("report.json"), run.report.to_json())?;
            let table = run.report.table();
            fs::write(out.join("table.txt"), &table)?;
            write_json(
                &out.join("timings.json"),
                &serde_json::json!({ "prepare": run.prep, "cells": run.cells }),
            )?;
            print!("{table}");
        }
        Command::Downsample {
            input,
            factor,
            out,
            encoding,
        } => {
            let g = downsample(&read_grid(&input)?, factor)?;
            write_grid(&g, &out, encoding.into())?;
            let [nx, ny, nz] = g.shape();
            println!("{nx}x{ny}x{nz}");
        }
    }
    Ok(())
}

fn one_line(s: &str) -> String {
    s.split_whitespace().collect::<Vec<_>>().join(" ")
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) if !e.use_stderr() => {
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            let text = e.to_string();
            let first = text
                .lines()
                .find(|l| !l.trim().is_empty())
                .unwrap_or("invalid arguments");
            eprintln!("semvox: {}", one_line(first.trim_start_matches("error: ")));
            return ExitCode::from(2);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("semvox: {}", one_line(&format!("{e:#}")));
            ExitCode::FAILURE
        }
    }
}
