//! Command implementations behind the CLI surface.
//!
//! Every command follows the same discipline: load and validate all inputs
//! first, compute, then write outputs through an [`OutputSet`] so a failure
//! part-way through leaves no partial files, and finish by writing a
//! [`RunRecord`](crate::record::RunRecord) naming everything it read,
//! resolved, produced, and measured.

mod baseline;
mod incident;
mod loss;
mod metrics;
mod reconstruct;
mod solve;

pub use baseline::{cmd_baseline, BaselineModel};
pub use incident::cmd_incident;
pub use loss::cmd_loss;
pub use metrics::cmd_metrics;
pub use reconstruct::cmd_reconstruct;
pub use solve::{cmd_solve, cmd_solve_batch};

use std::fs;
use std::path::{Path, PathBuf};

use emfield_core::greens::{incident_field, WKernel};
use emfield_core::grid::{ComplexField, ContrastMap, GridSpec, RealMap, Scene};

use crate::error::{CliError, Result};
use crate::format::PortableGrid;
use crate::images::{export_heatmap, Colormap};
use crate::manifest::SceneManifest;
use crate::record::{OutputSet, RunRecord};

/// Everything the field commands need for one scene, loaded and validated
/// up front.
pub struct SceneContext {
    pub manifest: SceneManifest,
    pub manifest_path: PathBuf,
    pub scene: Scene,
    pub grid: GridSpec,
    pub kernel: WKernel,
    pub chi: ContrastMap,
    pub e_inc: ComplexField,
}

impl SceneContext {
    /// Loads the manifest, mask, operator kernel, contrast, and incident
    /// field for the scene at `manifest_path`.
    pub fn load(manifest_path: &Path) -> Result<Self> {
        let manifest = SceneManifest::load(manifest_path)?;
        let scene = manifest.scene()?;
        let grid = *scene.grid();
        let kernel = WKernel::build(grid)?;
        let chi = manifest.contrast(&scene);
        let (tx_row, tx_col) = scene.tx();
        let e_inc = incident_field(grid, tx_row, tx_col)?;
        Ok(SceneContext {
            manifest,
            manifest_path: manifest_path.to_path_buf(),
            scene,
            grid,
            kernel,
            chi,
            e_inc,
        })
    }

    /// Starts a record pre-populated with the scene's input digests.
    pub fn start_record(&self, command: &str) -> Result<RunRecord> {
        let mut rec = RunRecord::new(command);
        rec.input(&self.manifest_path)?;
        rec.input(&self.manifest.mask_path)?;
        if let Some(truth) = &self.manifest.truth_path {
            rec.input(truth)?;
        }
        Ok(rec)
    }
}

/// Creates the output directory if needed.
pub(crate) fn ensure_out_dir(out: &Path) -> Result<()> {
    fs::create_dir_all(out).map_err(|e| CliError::io(out, e))
}

/// Saves a portable grid file, tracking it for cleanup-on-failure.
pub(crate) fn save_grid(
    grid: &PortableGrid,
    path: &Path,
    rec: &mut RunRecord,
    outputs: &mut OutputSet,
) -> Result<()> {
    grid.save(path)?;
    outputs.track(path);
    rec.output(path);
    Ok(())
}

/// Saves a heatmap image, tracking it for cleanup-on-failure.
pub(crate) fn save_heatmap(
    map: &RealMap,
    path: &Path,
    colormap: Colormap,
    rec: &mut RunRecord,
    outputs: &mut OutputSet,
) -> Result<()> {
    export_heatmap(map, path, colormap)?;
    outputs.track(path);
    rec.output(path);
    Ok(())
}

/// Writes the record itself (also listed as an output) and commits the set.
pub(crate) fn finish(mut rec: RunRecord, path: &Path, mut outputs: OutputSet) -> Result<()> {
    rec.output(path);
    rec.write(path)?;
    outputs.track(path);
    outputs.commit();
    Ok(())
}
