//! Physics losses over candidate total fields, with analytic gradients.
//!
//! Two physics terms are provided:
//!
//! * the *propagation* loss — the mean squared residual of the discrete
//!   Helmholtz relation `lap(E) + s*beta*E ~ 0`, applied to the real and
//!   imaginary parts separately with a five-point stencil in pixel units;
//! * the *coupling* loss — the mean squared norm of the volume-integral
//!   residual `(I + W chi) E - E_inc`, evaluated through the FFT operator.
//!
//! Gradients are exact for the discrete objectives. The stencil uses
//! replicate padding at the boundary; its adjoint is implemented as an
//! explicit scatter rather than assumed equal to the forward stencil. (For
//! this particular stencil the two coincide — a clamped unit-offset read
//! always lands back on the center cell — and the tests pin that fact
//! instead of assuming it.)
//!
//! Sign convention: `pde_sign` selects between penalizing
//! `(lap - beta)E` (the default, `-1`) and `(lap + beta)E` (`+1`); both
//! appear in the literature depending on how the time-harmonic phase factor
//! is folded into the effective coefficient.

use num_complex::Complex64;

use crate::error::{CoreError, Result};
use crate::greens::WKernel;
use crate::grid::{ComplexField, ContrastMap, GridSpec, MapUnit, RealMap};
use crate::solver::{apply_forward, check_grids};

/// Weights and coefficients of the composite physics objective.
///
/// Construction validates the invariants (finite, non-negative weights,
/// `pde_sign` exactly +1 or -1), so every consumer can rely on them.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LossWeights {
    lambda_pde: f64,
    lambda_vie: f64,
    beta: f64,
    pde_sign: f64,
}

impl Default for LossWeights {
    /// The reference configuration: equal physics weights 0.5/0.5,
    /// effective Helmholtz coefficient 0.1, and the `-1` sign convention.
    fn default() -> Self {
        LossWeights {
            lambda_pde: 0.5,
            lambda_vie: 0.5,
            beta: 0.1,
            pde_sign: -1.0,
        }
    }
}

impl LossWeights {
    pub fn new(lambda_pde: f64, lambda_vie: f64, beta: f64, pde_sign: f64) -> Result<Self> {
        for (name, v) in [
            ("lambda_pde", lambda_pde),
            ("lambda_vie", lambda_vie),
            ("beta", beta),
        ] {
            if !(v.is_finite() && v >= 0.0) {
                return Err(CoreError::invalid(
                    name,
                    format!("must be finite and >= 0, got {v}"),
                ));
            }
        }
        if pde_sign != 1.0 && pde_sign != -1.0 {
            return Err(CoreError::invalid(
                "pde_sign",
                format!("must be exactly +1 or -1, got {pde_sign}"),
            ));
        }
        Ok(LossWeights {
            lambda_pde,
            lambda_vie,
            beta,
            pde_sign,
        })
    }

    pub fn lambda_pde(&self) -> f64 {
        self.lambda_pde
    }

    pub fn lambda_vie(&self) -> f64 {
        self.lambda_vie
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn pde_sign(&self) -> f64 {
        self.pde_sign
    }

    /// Same weights with the two physics multipliers replaced.
    pub fn with_lambdas(self, lambda_pde: f64, lambda_vie: f64) -> Result<Self> {
        LossWeights::new(lambda_pde, lambda_vie, self.beta, self.pde_sign)
    }
}

/// One evaluation of the composite objective, split by term.
///
/// `composite` is always exactly
/// `lambda_pde * pde + lambda_vie * vie (+ data if present)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LossBreakdown {
    pub pde: f64,
    pub vie: f64,
    pub data: Option<f64>,
    pub composite: f64,
}

impl LossBreakdown {
    fn assemble(weights: &LossWeights, pde: f64, vie: f64, data: Option<f64>) -> Self {
        let composite =
            weights.lambda_pde * pde + weights.lambda_vie * vie + data.unwrap_or(0.0);
        LossBreakdown {
            pde,
            vie,
            data,
            composite,
        }
    }
}

/// Five-point discrete Laplacian in pixel units (no division by the pixel
/// length squared), with replicate padding: out-of-range neighbors read the
/// nearest edge cell, so constant maps go to zero everywhere.
fn laplacian_raw(grid: &GridSpec, v: &[f64]) -> Vec<f64> {
    let (h, w) = (grid.height(), grid.width());
    let mut out = vec![0.0; v.len()];
    for r in 0..h {
        let up = r.saturating_sub(1);
        let down = if r + 1 < h { r + 1 } else { r };
        for c in 0..w {
            let left = c.saturating_sub(1);
            let right = if c + 1 < w { c + 1 } else { c };
            out[grid.idx(r, c)] = v[grid.idx(up, c)]
                + v[grid.idx(down, c)]
                + v[grid.idx(r, left)]
                + v[grid.idx(r, right)]
                - 4.0 * v[grid.idx(r, c)];
        }
    }
    out
}

/// Exact adjoint of [`laplacian_raw`]: each forward read becomes a scatter.
/// Built independently of the forward stencil so gradient correctness never
/// rests on a symmetry assumption; the tests then verify that the two maps
/// agree (replicate-padded unit-offset reads clamp onto the center cell, so
/// the stencil happens to be self-adjoint).
fn laplacian_adjoint_raw(grid: &GridSpec, u: &[f64]) -> Vec<f64> {
    let (h, w) = (grid.height(), grid.width());
    let mut out: Vec<f64> = u.iter().map(|x| -4.0 * x).collect();
    for r in 0..h {
        let up = r.saturating_sub(1);
        let down = if r + 1 < h { r + 1 } else { r };
        for c in 0..w {
            let left = c.saturating_sub(1);
            let right = if c + 1 < w { c + 1 } else { c };
            let val = u[grid.idx(r, c)];
            out[grid.idx(up, c)] += val;
            out[grid.idx(down, c)] += val;
            out[grid.idx(r, left)] += val;
            out[grid.idx(r, right)] += val;
        }
    }
    out
}

/// Five-point Laplacian of a real map (pixel units, replicate padding).
pub fn laplacian_5pt(map: &RealMap) -> RealMap {
    let values = laplacian_raw(map.grid(), map.values());
    RealMap::from_values_unchecked(*map.grid(), values, MapUnit::Linear)
}

/// Per-cell squared Helmholtz residual
/// `(lap(Re E) + s*beta*Re E)^2 + (lap(Im E) + s*beta*Im E)^2`.
pub fn pde_residual_map(e: &ComplexField, weights: &LossWeights) -> RealMap {
    let grid = *e.grid();
    let n = grid.n_cells();
    let re: Vec<f64> = e.values().iter().map(|z| z.re).collect();
    let im: Vec<f64> = e.values().iter().map(|z| z.im).collect();
    let lap_re = laplacian_raw(&grid, &re);
    let lap_im = laplacian_raw(&grid, &im);
    let sb = weights.pde_sign * weights.beta;
    let mut out = vec![0.0; n];
    for i in 0..n {
        let rr = lap_re[i] + sb * re[i];
        let ri = lap_im[i] + sb * im[i];
        out[i] = rr * rr + ri * ri;
    }
    RealMap::from_values_unchecked(grid, out, MapUnit::Linear)
}

/// Mean of the per-cell Helmholtz residual over all cells.
pub fn loss_pde(e: &ComplexField, weights: &LossWeights) -> f64 {
    let map = pde_residual_map(e, weights);
    let n = map.values().len() as f64;
    map.values().iter().sum::<f64>() / n
}

/// Mean Helmholtz residual restricted to the cells where `include` is true —
/// typically the free-space cells, where the homogeneous relation actually
/// holds. Errors when the mask shape mismatches or selects nothing.
pub fn loss_pde_masked(e: &ComplexField, weights: &LossWeights, include: &[bool]) -> Result<f64> {
    if include.len() != e.grid().n_cells() {
        return Err(CoreError::invalid(
            "include",
            format!(
                "mask has {} entries for a grid of {} cells",
                include.len(),
                e.grid().n_cells()
            ),
        ));
    }
    let selected = include.iter().filter(|b| **b).count();
    if selected == 0 {
        return Err(CoreError::invalid("include", "mask selects no cells"));
    }
    let map = pde_residual_map(e, weights);
    let sum: f64 = map
        .values()
        .iter()
        .zip(include)
        .filter(|(_, keep)| **keep)
        .map(|(v, _)| v)
        .sum();
    Ok(sum / selected as f64)
}

/// Coupling residual `R = (I + W diag(chi)) E - E_inc`, via the FFT path.
pub fn vie_residual_field(
    kernel: &WKernel,
    chi: &ContrastMap,
    e: &ComplexField,
    e_inc: &ComplexField,
) -> Result<ComplexField> {
    check_grids(kernel, chi, e)?;
    check_grids(kernel, chi, e_inc)?;
    let ax = apply_forward(kernel, chi, e)?;
    ComplexField::from_values(
        *e.grid(),
        ax.values()
            .iter()
            .zip(e_inc.values())
            .map(|(a, b)| a - b)
            .collect(),
    )
}

/// Mean squared coupling residual `(1/N) * ||R||^2`.
pub fn loss_vie(
    kernel: &WKernel,
    chi: &ContrastMap,
    e: &ComplexField,
    e_inc: &ComplexField,
) -> Result<f64> {
    let r = vie_residual_field(kernel, chi, e, e_inc)?;
    let n = r.grid().n_cells() as f64;
    Ok(r.values().iter().map(|z| z.norm_sqr()).sum::<f64>() / n)
}

/// Gradient of [`loss_vie`] with respect to the field, packed as a complex
/// map whose real/imaginary parts are the derivatives with respect to
/// `Re E` / `Im E`: `(2/N) * (I + W chi)^H R = (2/N) * (R + conj(chi) .* W^H R)`.
pub fn grad_loss_vie(
    kernel: &WKernel,
    chi: &ContrastMap,
    e: &ComplexField,
    e_inc: &ComplexField,
) -> Result<ComplexField> {
    let r = vie_residual_field(kernel, chi, e, e_inc)?;
    let wh_r = kernel.apply_adjoint(&r)?;
    let n = r.grid().n_cells() as f64;
    let scale = 2.0 / n;
    ComplexField::from_values(
        *e.grid(),
        r.values()
            .iter()
            .zip(wh_r.values())
            .zip(chi.values())
            .map(|((ri, wi), ci)| scale * (ri + ci.conj() * wi))
            .collect(),
    )
}

/// Gradient of [`loss_pde`] with respect to the field, same packing as
/// [`grad_loss_vie`]. With `D = L + s*beta*I` acting per real component,
/// the gradient is `(2/N) * D^T (D u)` using the exact scatter adjoint of
/// the padded stencil.
pub fn grad_loss_pde(e: &ComplexField, weights: &LossWeights) -> ComplexField {
    let grid = *e.grid();
    let n = grid.n_cells();
    let sb = weights.pde_sign * weights.beta;
    let scale = 2.0 / n as f64;

    let channel = |component: Vec<f64>| -> Vec<f64> {
        let mut d = laplacian_raw(&grid, &component);
        for (di, ui) in d.iter_mut().zip(&component) {
            *di += sb * ui;
        }
        let mut g = laplacian_adjoint_raw(&grid, &d);
        for (gi, di) in g.iter_mut().zip(&d) {
            *gi = scale * (*gi + sb * di);
        }
        g
    };

    let g_re = channel(e.values().iter().map(|z| z.re).collect());
    let g_im = channel(e.values().iter().map(|z| z.im).collect());
    let values = g_re
        .into_iter()
        .zip(g_im)
        .map(|(re, im)| Complex64::new(re, im))
        .collect();
    ComplexField::from_values(grid, values).expect("gradient of finite field is finite")
}

/// Full objective: `lambda_pde * L_pde + lambda_vie * L_vie`, plus a
/// mean-squared data term when a (prediction, target) map pair is supplied.
/// Supplying only one of the pair is rejected.
pub fn loss_composite(
    kernel: &WKernel,
    chi: &ContrastMap,
    e: &ComplexField,
    e_inc: &ComplexField,
    weights: &LossWeights,
    prediction: Option<&RealMap>,
    target: Option<&RealMap>,
) -> Result<LossBreakdown> {
    let data = match (prediction, target) {
        (None, None) => None,
        (Some(p), Some(t)) => {
            e.grid().check_same_shape(p.grid(), "data prediction vs field")?;
            e.grid().check_same_shape(t.grid(), "data target vs field")?;
            let n = p.values().len() as f64;
            Some(
                p.values()
                    .iter()
                    .zip(t.values())
                    .map(|(a, b)| (a - b) * (a - b))
                    .sum::<f64>()
                    / n,
            )
        }
        _ => {
            return Err(CoreError::invalid(
                "prediction/target",
                "data term needs both maps or neither",
            ));
        }
    };
    let pde = loss_pde(e, weights);
    let vie = loss_vie(kernel, chi, e, e_inc)?;
    Ok(LossBreakdown::assemble(weights, pde, vie, data))
}
