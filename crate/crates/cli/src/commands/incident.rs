//! `incident`: compute the source's free-space field for a scene.

use std::path::Path;
use std::time::Instant;

use emfield_core::exposure::field_to_pathloss;

use crate::error::Result;
use crate::format::PortableGrid;
use crate::images::Colormap;
use crate::record::OutputSet;

use super::{ensure_out_dir, finish, save_grid, save_heatmap, SceneContext};

/// Writes the incident field as a c64 grid plus a normalized heatmap of its
/// magnitude in the manifest's dB window.
pub fn cmd_incident(manifest_path: &Path, out: &Path, colormap: Colormap) -> Result<()> {
    let t_load = Instant::now();
    let ctx = SceneContext::load(manifest_path)?;
    let loaded = t_load.elapsed();

    let cfg = ctx.manifest.pathloss_config()?;
    let t_map = Instant::now();
    let level = field_to_pathloss(&ctx.e_inc, &cfg);
    let mapped = t_map.elapsed();

    ensure_out_dir(out)?;
    let mut rec = ctx.start_record("incident")?;
    rec.config("manifest", ctx.manifest_path.display());
    rec.config("out", out.display());
    rec.config("colormap", format!("{colormap:?}"));
    let (lo, hi) = cfg.norm_window_db();
    rec.config("norm_window_db", format!("[{lo}, {hi}]"));
    rec.timing("load", loaded);
    rec.timing("pathloss", mapped);

    let mut outputs = OutputSet::new();
    save_grid(
        &PortableGrid::from_complex_field(&ctx.e_inc),
        &out.join("incident.emg"),
        &mut rec,
        &mut outputs,
    )?;
    save_heatmap(
        &level,
        &out.join("incident.png"),
        colormap,
        &mut rec,
        &mut outputs,
    )?;
    finish(rec, &out.join("incident.run.txt"), outputs)
}
