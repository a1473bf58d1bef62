//! `reconstruct`: recover the total field by minimizing the physics losses.

use std::fmt::Write as _;
use std::path::Path;
use std::time::Instant;

use emfield_core::exposure::field_to_pathloss;
use emfield_core::loss::LossWeights;
use emfield_core::reconstruct::{reconstruct_field, OptimizerConfig};

use crate::error::{CliError, Result};
use crate::format::PortableGrid;
use crate::images::Colormap;
use crate::record::OutputSet;

use super::{ensure_out_dir, finish, save_grid, save_heatmap, SceneContext};

/// Runs the gradient-descent reconstruction and writes the recovered field,
/// a per-iteration loss table, and the exposure map it implies.
#[allow(clippy::too_many_arguments)]
pub fn cmd_reconstruct(
    manifest_path: &Path,
    out: &Path,
    lambda_pde: f64,
    lambda_vie: f64,
    beta: f64,
    pde_sign: f64,
    max_iters: usize,
    colormap: Colormap,
) -> Result<()> {
    let t_load = Instant::now();
    let ctx = SceneContext::load(manifest_path)?;
    let loaded = t_load.elapsed();

    let weights = LossWeights::new(lambda_pde, lambda_vie, beta, pde_sign)?;
    let config = OptimizerConfig {
        max_iters,
        ..OptimizerConfig::default()
    };
    let t_opt = Instant::now();
    let (e_rec, report) = reconstruct_field(&ctx.kernel, &ctx.chi, &ctx.e_inc, &weights, &config)?;
    let optimized = t_opt.elapsed();

    let cfg = ctx.manifest.pathloss_config()?;
    let level = field_to_pathloss(&e_rec, &cfg);

    ensure_out_dir(out)?;
    let mut rec = ctx.start_record("reconstruct")?;
    rec.config("manifest", ctx.manifest_path.display());
    rec.config("out", out.display());
    rec.config("lambda_pde", lambda_pde);
    rec.config("lambda_vie", lambda_vie);
    rec.config("beta", beta);
    rec.config("pde_sign", pde_sign);
    rec.config("max_iters", max_iters);
    rec.config("colormap", format!("{colormap:?}"));
    rec.timing("load", loaded);
    rec.timing("reconstruct", optimized);
    rec.report_line(format!("iterations = {}", report.iterations));
    rec.report_line(format!("converged = {}", report.converged));
    rec.report_line(format!("final_grad_norm = {:.6e}", report.final_grad_norm));
    if let Some(last) = report.loss_history.last() {
        rec.report_line(format!("final_composite_loss = {:.6e}", last.composite));
    }

    // One breakdown per line: iteration, each term, and the weighted total.
    let mut table = String::from("# iter\tpde\tvie\tdata\tcomposite\n");
    for (i, b) in report.loss_history.iter().enumerate() {
        let data = b.data.map_or_else(|| "-".to_string(), |d| format!("{d:.9e}"));
        let _ = writeln!(
            table,
            "{i}\t{:.9e}\t{:.9e}\t{data}\t{:.9e}",
            b.pde, b.vie, b.composite
        );
    }

    let mut outputs = OutputSet::new();
    save_grid(
        &PortableGrid::from_complex_field(&e_rec),
        &out.join("reconstructed.emg"),
        &mut rec,
        &mut outputs,
    )?;
    let history_path = out.join("loss_history.txt");
    std::fs::write(&history_path, table).map_err(|e| CliError::io(&history_path, e))?;
    outputs.track(&history_path);
    rec.output(&history_path);
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
    finish(rec, &out.join("reconstruct.run.txt"), outputs)
}
