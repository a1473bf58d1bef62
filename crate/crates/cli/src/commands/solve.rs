//! `solve`: run the forward scattering solver and derive the exposure map.

use std::path::{Path, PathBuf};
use std::time::Instant;

use emfield_core::exposure::field_to_pathloss;
use emfield_core::solver::{solve_forward, SolverConfig};

use crate::error::{CliError, Result};
use crate::format::PortableGrid;
use crate::images::Colormap;
use crate::record::OutputSet;

use super::{ensure_out_dir, finish, save_grid, save_heatmap, SceneContext};

/// Solves one scene: writes the total field (c64), the normalized exposure
/// map (f32 grid + heatmap), and a record with the solver report.
pub fn cmd_solve(
    manifest_path: &Path,
    out: &Path,
    tol: f64,
    max_iter: usize,
    colormap: Colormap,
) -> Result<()> {
    let t_load = Instant::now();
    let ctx = SceneContext::load(manifest_path)?;
    let loaded = t_load.elapsed();

    let config = SolverConfig {
        tolerance: tol,
        max_iterations: max_iter,
        ..SolverConfig::default()
    };
    let (e_tot, report) = solve_forward(&ctx.kernel, &ctx.chi, &ctx.e_inc, &config)?;

    let cfg = ctx.manifest.pathloss_config()?;
    let level = field_to_pathloss(&e_tot, &cfg);

    ensure_out_dir(out)?;
    let mut rec = ctx.start_record("solve")?;
    rec.config("manifest", ctx.manifest_path.display());
    rec.config("out", out.display());
    rec.config("tol", tol);
    rec.config("max_iter", max_iter);
    rec.config("colormap", format!("{colormap:?}"));
    let (lo, hi) = cfg.norm_window_db();
    rec.config("norm_window_db", format!("[{lo}, {hi}]"));
    rec.timing("load", loaded);
    rec.timing("solve", report.wall_time);
    rec.report_line(format!("iterations = {}", report.iterations));
    rec.report_line(format!("final_residual = {:.6e}", report.final_residual));
    rec.report_line(format!("converged = {}", report.converged));
    rec.report_line(format!("restarts = {}", report.restarts));
    rec.report_line(format!(
        "samples_per_wavelength = {:.3}",
        report.samples_per_wavelength
    ));
    if report.samples_per_wavelength < 10.0 {
        rec.report_line(format!(
            "warning = only {:.1} samples per wavelength; accuracy degrades below ~10",
            report.samples_per_wavelength
        ));
    }

    let mut outputs = OutputSet::new();
    save_grid(
        &PortableGrid::from_complex_field(&e_tot),
        &out.join("total.emg"),
        &mut rec,
        &mut outputs,
    )?;
    save_grid(
        &PortableGrid::from_real_map(&level),
        &out.join("pathloss.emg"),
        &mut rec,
        &mut outputs,
    )?;
    save_heatmap(
        &level,
        &out.join("pathloss.png"),
        colormap,
        &mut rec,
        &mut outputs,
    )?;
    finish(rec, &out.join("solve.run.txt"), outputs)
}

/// Solves every `*.txt` manifest in `dir`, one scene per worker, each into
/// `out/<manifest-stem>/`. `EMFIELD_THREADS` caps the pool. All scenes are
/// attempted; the first failure's code is returned after the batch ends, and
/// failed scenes leave no partial outputs.
pub fn cmd_solve_batch(
    dir: &Path,
    out: &Path,
    tol: f64,
    max_iter: usize,
    colormap: Colormap,
) -> Result<()> {
    let mut manifests: Vec<PathBuf> = std::fs::read_dir(dir)
        .map_err(|e| CliError::io(dir, e))?
        .filter_map(|entry| entry.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|ext| ext == "txt"))
        .collect();
    manifests.sort();
    if manifests.is_empty() {
        return Err(CliError::invalid(format!(
            "no .txt manifests found in {}",
            dir.display()
        )));
    }

    let pool = worker_pool()?;
    let results: Vec<(PathBuf, Result<()>)> = pool.install(|| {
        use rayon::prelude::*;
        manifests
            .par_iter()
            .map(|manifest| {
                let stem = manifest
                    .file_stem()
                    .map(|s| s.to_string_lossy().into_owned())
                    .unwrap_or_else(|| "scene".to_string());
                let scene_out = out.join(stem);
                let result = cmd_solve(manifest, &scene_out, tol, max_iter, colormap);
                (manifest.clone(), result)
            })
            .collect()
    });

    let mut first_failure = None;
    for (manifest, result) in results {
        match result {
            Ok(()) => println!("ok    {}", manifest.display()),
            Err(e) => {
                eprintln!("error {}: {e}", manifest.display());
                if first_failure.is_none() {
                    first_failure = Some(e);
                }
            }
        }
    }
    match first_failure {
        None => Ok(()),
        Some(e) => Err(e),
    }
}

/// Builds the batch worker pool, sized by `EMFIELD_THREADS` when set.
fn worker_pool() -> Result<rayon::ThreadPool> {
    let threads = match std::env::var("EMFIELD_THREADS") {
        Ok(v) => v.parse::<usize>().ok().filter(|&n| n >= 1).ok_or_else(|| {
            CliError::invalid(format!(
                "EMFIELD_THREADS must be a positive integer, got {v:?}"
            ))
        })?,
        Err(_) => 0, // rayon default: available cores
    };
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| CliError::invalid(format!("could not build worker pool: {e}")))
}
