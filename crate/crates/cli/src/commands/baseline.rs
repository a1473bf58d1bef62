//! `baseline`: closed-form path-loss reference models for comparison.

use std::path::Path;
use std::time::Instant;

use emfield_core::exposure::{baseline_free_space, baseline_log_distance};

use crate::error::Result;
use crate::format::PortableGrid;
use crate::images::{normalize_db_map, Colormap};
use crate::record::OutputSet;

use super::{ensure_out_dir, finish, save_grid, save_heatmap, SceneContext};

/// Which closed-form model to evaluate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum BaselineModel {
    /// Free-space propagation loss at the scene's frequency.
    FreeSpace,
    /// `PL0 + 10 n log10(d / d0)` with a fitted exponent.
    LogDistance,
}

/// Evaluates a building-independent path-loss model over the scene: writes
/// the dB map (f32 grid) plus a heatmap normalized into the dB window.
#[allow(clippy::too_many_arguments)]
pub fn cmd_baseline(
    manifest_path: &Path,
    out: &Path,
    model: BaselineModel,
    exponent: f64,
    pl0_db: f64,
    d0_m: f64,
    norm_window: Option<(f64, f64)>,
    colormap: Colormap,
) -> Result<()> {
    let t_load = Instant::now();
    let ctx = SceneContext::load(manifest_path)?;
    let loaded = t_load.elapsed();

    let map_db = match model {
        BaselineModel::FreeSpace => baseline_free_space(&ctx.scene),
        BaselineModel::LogDistance => {
            baseline_log_distance(&ctx.scene, exponent, d0_m, pl0_db)?
        }
    };
    let (lo, hi) =
        norm_window.unwrap_or((ctx.manifest.norm_min_db, ctx.manifest.norm_max_db));
    let normalized = normalize_db_map(&map_db, lo, hi)?;

    ensure_out_dir(out)?;
    let mut rec = ctx.start_record("baseline")?;
    rec.config("manifest", ctx.manifest_path.display());
    rec.config("out", out.display());
    rec.config("model", format!("{model:?}"));
    if model == BaselineModel::LogDistance {
        rec.config("n", exponent);
        rec.config("pl0", pl0_db);
        rec.config("d0", d0_m);
    }
    rec.config("norm_window_db", format!("[{lo}, {hi}]"));
    rec.config("colormap", format!("{colormap:?}"));
    rec.timing("load", loaded);

    let mut outputs = OutputSet::new();
    save_grid(
        &PortableGrid::from_real_map(&map_db),
        &out.join("baseline.emg"),
        &mut rec,
        &mut outputs,
    )?;
    save_heatmap(
        &normalized,
        &out.join("baseline.png"),
        colormap,
        &mut rec,
        &mut outputs,
    )?;
    finish(rec, &out.join("baseline.run.txt"), outputs)
}
