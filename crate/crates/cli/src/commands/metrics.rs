//! `metrics`: compare a predicted map against a reference map.

use std::path::Path;

use emfield_core::grid::{MapUnit, RealMap};
use emfield_core::metrics::{MetricsReport, SsimMode};

use crate::error::Result;
use crate::format::PortableGrid;
use crate::images;
use crate::record::RunRecord;

/// Loads a map for comparison: `.png` files come in as normalized 8-bit
/// grayscale images (values `v/255`); anything else must be an f32 portable
/// grid and is taken at face value.
fn load_map(path: &Path) -> Result<RealMap> {
    let is_png = path
        .extension()
        .is_some_and(|e| e.eq_ignore_ascii_case("png"));
    if is_png {
        images::load_normalized_image(path)
    } else {
        let grid = PortableGrid::load(path)?;
        let spec = images::neutral_grid(grid.height() as usize, grid.width() as usize)?;
        grid.to_real_map(spec, MapUnit::Linear)
    }
}

/// Prints all map-comparison metrics for a (prediction, truth) pair;
/// optionally persists the record.
pub fn cmd_metrics(
    pred_path: &Path,
    truth_path: &Path,
    mode: SsimMode,
    record_path: Option<&Path>,
) -> Result<()> {
    let pred = load_map(pred_path)?;
    let truth = load_map(truth_path)?;
    let report = MetricsReport::compute(&pred, &truth, mode)?;

    let mut rec = RunRecord::new("metrics");
    rec.input(pred_path)?;
    rec.input(truth_path)?;
    rec.config("pred", pred_path.display());
    rec.config("truth", truth_path.display());
    rec.config("ssim_mode", format!("{mode:?}"));
    rec.report_line(format!("nmse = {:.9e}", report.nmse));
    rec.report_line(format!("nmse_db = {:.6}", report.nmse_db));
    rec.report_line(format!("rmse = {:.9e}", report.rmse));
    rec.report_line(format!("mae = {:.9e}", report.mae));
    rec.report_line(format!("ssim = {:.9}", report.ssim));

    print!("{}", rec.render());
    if let Some(path) = record_path {
        rec.write(path)?;
    }
    Ok(())
}
