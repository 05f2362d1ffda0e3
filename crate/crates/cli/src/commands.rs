use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicUsize, Ordering};
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use geoshadow::io::{read_geotiff, read_rpc, CrsSpec, RunConfig};
use geoshadow::projection::{finalize_with, project_shadows, FinalizeOptions, DEFAULT_MIN_REGION_PX};
use geoshadow::shadowcast::DEFAULT_UPSCALE;
use geoshadow::{cast_shadows, SunGeometry};
use rayon::prelude::*;

use crate::manifest::{read_manifest, TileJob, TileStatus};
use crate::tile::{run_tile, write_mask, TileReport};
use crate::{CliError, EXIT_OK, EXIT_PARTIAL};

#[derive(Debug, Parser)]
#[command(name = "geoshadow", version, about = "Geometric shadow masks for satellite images")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Cast shadows over a DSM and write the DSM-space mask.
    Cast(CastArgs),
    /// Project a DSM-space shadow mask into image space.
    Project(ProjectArgs),
    /// Run every tile of a manifest through the full pipeline.
    Pipeline(PipelineArgs),
}

#[derive(Debug, Args)]
pub struct CastArgs {
    #[arg(long)]
    pub dsm: PathBuf,
    /// Sun azimuth, degrees clockwise from north.
    #[arg(long, allow_hyphen_values = true)]
    pub azimuth: f64,
    /// Sun elevation above the horizon, degrees.
    #[arg(long, allow_hyphen_values = true)]
    pub elevation: f64,
    #[arg(long, default_value_t = DEFAULT_UPSCALE)]
    pub upscale: usize,
    #[arg(long)]
    pub out: PathBuf,
    /// Worker threads (default: all cores).
    #[arg(long, value_parser = clap::value_parser!(u16).range(1..))]
    pub jobs: Option<u16>,
}

#[derive(Debug, Args)]
pub struct ProjectArgs {
    #[arg(long)]
    pub dsm: PathBuf,
    /// DSM-space mask; may be an integer upsampling of the DSM grid.
    #[arg(long)]
    pub shadows: PathBuf,
    #[arg(long)]
    pub rpc: PathBuf,
    #[arg(long)]
    pub width: usize,
    #[arg(long)]
    pub height: usize,
    #[arg(long, default_value_t = DEFAULT_MIN_REGION_PX)]
    pub min_region: usize,
    /// Fill enclosed holes up to this many pixels (0 = off).
    #[arg(long, default_value_t = 0)]
    pub fill_holes: usize,
    /// World frame of the DSM: `geographic` or `utm:<zone><N|S>`.
    #[arg(long, default_value = "geographic")]
    pub crs: CrsSpec,
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long)]
    pub out_uncertainty: PathBuf,
    #[arg(long, value_parser = clap::value_parser!(u16).range(1..))]
    pub jobs: Option<u16>,
}

#[derive(Debug, Args)]
pub struct PipelineArgs {
    #[arg(long)]
    pub manifest: PathBuf,
    /// Tiles processed concurrently (default: all cores).
    #[arg(long, env = "GEOSHADOW_JOBS", value_parser = clap::value_parser!(u16).range(1..))]
    pub jobs: Option<u16>,
    /// Write one JSON object per tile to this file.
    #[arg(long)]
    pub summary_json: Option<PathBuf>,
}

/// Dispatch and map the outcome to an exit code, reporting failures on stderr.
pub fn run(cli: Cli) -> u8 {
    let outcome = match cli.command {
        Command::Cast(a) => cmd_cast(&a),
        Command::Project(a) => cmd_project(&a),
        Command::Pipeline(a) => cmd_pipeline(&a),
    };
    match outcome {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            e.code
        }
    }
}

fn pool(jobs: Option<u16>) -> Result<rayon::ThreadPool, CliError> {
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(n) = jobs {
        builder = builder.num_threads(usize::from(n));
    }
    builder
        .build()
        .map_err(|e| CliError::input(format!("cannot start {} worker threads: {e}", jobs.unwrap_or(0))))
}

pub fn cmd_cast(args: &CastArgs) -> Result<u8, CliError> {
    let sun = SunGeometry::new(args.azimuth, args.elevation)
        .map_err(|e| CliError::input(format!("invalid sun position: {e}")))?;
    let dsm = read_geotiff(&args.dsm)?;
    let cast = pool(args.jobs)?.install(|| cast_shadows(&dsm, &sun, args.upscale))?;
    write_mask(&cast.shadow, &args.out)?;
    Ok(EXIT_OK)
}

pub fn cmd_project(args: &ProjectArgs) -> Result<u8, CliError> {
    let rpc = read_rpc(&args.rpc)?;
    let mut dsm = read_geotiff(&args.dsm)?;
    dsm.crs = args.crs.0;
    let shadows = read_geotiff(&args.shadows)?;
    let (dw, dh) = dsm.dims();
    let (sw, sh) = shadows.dims();
    let factor = sw / dw;
    if factor == 0 || sw != dw * factor || sh != dh * factor {
        return Err(CliError::input(format!(
            "shadow mask {sw}x{sh} is not an integer upsampling of the {dw}x{dh} DSM"
        )));
    }
    let dsm = dsm.upsample(factor)?;
    let product = pool(args.jobs)?.install(|| project_shadows(&dsm, &shadows, &rpc, args.height, args.width))?;
    let product = finalize_with(
        &product,
        FinalizeOptions {
            min_region_px: args.min_region,
            fill_holes_px: args.fill_holes,
        },
    )?;
    write_mask(&product.shadow, &args.out)?;
    write_mask(&product.uncertainty, &args.out_uncertainty)?;
    Ok(EXIT_OK)
}

struct Outcome {
    status: TileStatus,
    report: Option<TileReport>,
    seconds: f64,
}

fn run_job(job: &TileJob) -> Outcome {
    let start = Instant::now();
    let result = catch_unwind(AssertUnwindSafe(|| RunConfig::load(&job.config).and_then(|cfg| run_tile(&cfg))));
    let (status, report) = match result {
        Ok(Ok(report)) => (TileStatus::Done, Some(report)),
        Ok(Err(e)) => (TileStatus::Failed(e.to_string()), None),
        Err(_) => (TileStatus::Failed("internal error (panic); see stderr".into()), None),
    };
    Outcome {
        status,
        report,
        seconds: start.elapsed().as_secs_f64(),
    }
}

pub fn cmd_pipeline(args: &PipelineArgs) -> Result<u8, CliError> {
    let mut jobs = read_manifest(&args.manifest)?;
    let total = jobs.len();
    let finished = AtomicUsize::new(0);
    let outcomes: Vec<Outcome> = pool(args.jobs)?.install(|| {
        jobs.par_iter()
            .map(|job| {
                let out = run_job(job);
                let k = finished.fetch_add(1, Ordering::Relaxed) + 1;
                match &out.status {
                    TileStatus::Failed(reason) => eprintln!("[{k}/{total}] {} failed: {reason}", job.id),
                    status => eprintln!("[{k}/{total}] {} {status} ({:.2} s)", job.id, out.seconds),
                }
                out
            })
            .collect()
    });
    for (job, out) in jobs.iter_mut().zip(&outcomes) {
        job.status = out.status.clone();
    }

    print!("{}", summary_table(&jobs, &outcomes));
    if let Some(path) = &args.summary_json {
        write_summary_json(path, &jobs, &outcomes)?;
    }
    let failed = jobs.iter().filter(|j| matches!(j.status, TileStatus::Failed(_))).count();
    if failed > 0 {
        eprintln!("{failed} of {total} tiles failed");
        return Ok(EXIT_PARTIAL);
    }
    Ok(EXIT_OK)
}

fn summary_table(jobs: &[TileJob], outcomes: &[Outcome]) -> String {
    let id_w = jobs.iter().map(|j| j.id.len()).max().unwrap_or(4).max(4);
    let mut s = format!(
        "{:<id_w$}  {:<6}  {:>10}  {:>10}  {:>10}  {:>8}  reason\n",
        "tile", "status", "shadow_dsm", "shadow_img", "uncertain", "seconds"
    );
    for (job, out) in jobs.iter().zip(outcomes) {
        let (a, b, c) = match &out.report {
            Some(r) => (r.shadow_dsm_px.to_string(), r.shadow_img_px.to_string(), r.uncertain_px.to_string()),
            None => ("-".into(), "-".into(), "-".into()),
        };
        let reason = match &job.status {
            TileStatus::Failed(r) => r.as_str(),
            _ => "",
        };
        s.push_str(&format!(
            "{:<id_w$}  {:<6}  {a:>10}  {b:>10}  {c:>10}  {:>8.2}  {reason}\n",
            job.id,
            job.status.to_string(),
            out.seconds
        ));
    }
    s
}

fn write_summary_json(path: &Path, jobs: &[TileJob], outcomes: &[Outcome]) -> Result<(), CliError> {
    let mut text = String::new();
    for (job, out) in jobs.iter().zip(outcomes) {
        let mut obj = serde_json::json!({
            "tile": job.id,
            "config": job.config,
            "status": job.status.to_string(),
            "seconds": out.seconds,
        });
        if let TileStatus::Failed(reason) = &job.status {
            obj["reason"] = reason.clone().into();
        }
        if let Some(report) = &out.report {
            obj["products"] = serde_json::to_value(report).expect("report serializes");
        }
        text.push_str(&obj.to_string());
        text.push('\n');
    }
    std::fs::write(path, text).map_err(|e| CliError::input(format!("{}: {e}", path.display())))
}
