//! `loss`: evaluate the physics losses of a stored field against a scene.

use std::path::Path;

use emfield_core::loss::{loss_composite, LossWeights};

use crate::error::Result;
use crate::format::PortableGrid;

use super::SceneContext;

/// Prints the loss breakdown of the field stored at `field_path` for the
/// given scene and weights; optionally persists the record.
#[allow(clippy::too_many_arguments)]
pub fn cmd_loss(
    manifest_path: &Path,
    field_path: &Path,
    lambda_pde: f64,
    lambda_vie: f64,
    beta: f64,
    pde_sign: f64,
    record_path: Option<&Path>,
) -> Result<()> {
    let ctx = SceneContext::load(manifest_path)?;
    let field = PortableGrid::load(field_path)?.to_complex_field(ctx.grid)?;
    let weights = LossWeights::new(lambda_pde, lambda_vie, beta, pde_sign)?;
    let breakdown = loss_composite(
        &ctx.kernel,
        &ctx.chi,
        &field,
        &ctx.e_inc,
        &weights,
        None,
        None,
    )?;

    let mut rec = ctx.start_record("loss")?;
    rec.input(field_path)?;
    rec.config("manifest", ctx.manifest_path.display());
    rec.config("field", field_path.display());
    rec.config("lambda_pde", lambda_pde);
    rec.config("lambda_vie", lambda_vie);
    rec.config("beta", beta);
    rec.config("pde_sign", pde_sign);
    rec.report_line(format!("loss_pde = {:.9e}", breakdown.pde));
    rec.report_line(format!("loss_vie = {:.9e}", breakdown.vie));
    rec.report_line(format!("loss_composite = {:.9e}", breakdown.composite));

    print!("{}", rec.render());
    if let Some(path) = record_path {
        rec.write(path)?;
    }
    Ok(())
}
