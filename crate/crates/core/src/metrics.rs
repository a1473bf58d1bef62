//! Map-comparison metrics: normalized MSE (linear and dB), RMSE, MAE, and
//! SSIM in a whole-map-moments mode (the default) and a sliding-window mode
//! (side 11, uniform weights) for comparability with common practice.

use crate::error::{CoreError, Result};
use crate::grid::RealMap;

/// Which statistics feed the SSIM formula.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SsimMode {
    /// Single whole-map means/variances/covariance.
    Global,
    /// Mean of per-window SSIM over all fully contained 11x11 windows.
    Windowed,
}

/// Sliding-window side for [`SsimMode::Windowed`].
pub const SSIM_WINDOW_SIDE: usize = 11;
/// Default luminance stabilizer `(0.01 * L)^2` for maps on a unit range.
pub const SSIM_DEFAULT_C1: f64 = 1e-4;
/// Default contrast stabilizer `(0.03 * L)^2` for maps on a unit range.
pub const SSIM_DEFAULT_C2: f64 = 9e-4;

fn check_pair(pred: &RealMap, truth: &RealMap) -> Result<()> {
    pred.grid()
        .check_same_shape(truth.grid(), "prediction vs truth")
}

/// Squared error normalized by the energy of the truth:
/// `sum((pred - truth)^2) / sum(truth^2)`. An identically zero truth map has
/// no energy to normalize by and is rejected.
pub fn nmse(pred: &RealMap, truth: &RealMap) -> Result<f64> {
    check_pair(pred, truth)?;
    let energy: f64 = truth.values().iter().map(|y| y * y).sum();
    if energy == 0.0 {
        return Err(CoreError::AllZeroReference);
    }
    let err: f64 = pred
        .values()
        .iter()
        .zip(truth.values())
        .map(|(a, b)| (a - b) * (a - b))
        .sum();
    Ok(err / energy)
}

/// [`nmse`] in decibels, `10*log10(nmse)`; an exact-zero NMSE maps to the
/// `f64::NEG_INFINITY` sentinel rather than erroring.
pub fn nmse_db(pred: &RealMap, truth: &RealMap) -> Result<f64> {
    let v = nmse(pred, truth)?;
    Ok(if v == 0.0 {
        f64::NEG_INFINITY
    } else {
        10.0 * v.log10()
    })
}

/// Root of the mean squared error.
pub fn rmse(pred: &RealMap, truth: &RealMap) -> Result<f64> {
    check_pair(pred, truth)?;
    let n = pred.values().len() as f64;
    let mse: f64 = pred
        .values()
        .iter()
        .zip(truth.values())
        .map(|(a, b)| (a - b) * (a - b))
        .sum::<f64>()
        / n;
    Ok(mse.sqrt())
}

/// Mean absolute error.
pub fn mae(pred: &RealMap, truth: &RealMap) -> Result<f64> {
    check_pair(pred, truth)?;
    let n = pred.values().len() as f64;
    Ok(pred
        .values()
        .iter()
        .zip(truth.values())
        .map(|(a, b)| (a - b).abs())
        .sum::<f64>()
        / n)
}

/// One SSIM evaluation from raw moment sums over `n` samples.
///
/// Variances are computed through the *same* expression as the covariance
/// (`cov(a, a)`), so identical inputs cancel exactly and yield 1.0.
fn ssim_from_sums(n: f64, sx: f64, sy: f64, sxx: f64, syy: f64, sxy: f64, c1: f64, c2: f64) -> f64 {
    let mu_x = sx / n;
    let mu_y = sy / n;
    let cov = |sab: f64, mu_a: f64, mu_b: f64| sab / n - mu_a * mu_b;
    let var_x = cov(sxx, mu_x, mu_x);
    let var_y = cov(syy, mu_y, mu_y);
    let cov_xy = cov(sxy, mu_x, mu_y);
    let num = (2.0 * mu_x * mu_y + c1) * (2.0 * cov_xy + c2);
    let den = (mu_x * mu_x + mu_y * mu_y + c1) * (var_x + var_y + c2);
    num / den
}

/// Structural similarity with stabilizers `c1`, `c2` (both required > 0).
///
/// `Global` computes one score from whole-map population moments; `Windowed`
/// averages the same formula over every fully contained
/// [`SSIM_WINDOW_SIDE`]-sided square. Maps smaller than the window are
/// rejected in windowed mode.
pub fn ssim(pred: &RealMap, truth: &RealMap, c1: f64, c2: f64, mode: SsimMode) -> Result<f64> {
    check_pair(pred, truth)?;
    for (name, v) in [("c1", c1), ("c2", c2)] {
        if !(v.is_finite() && v > 0.0) {
            return Err(CoreError::invalid(
                name,
                format!("must be finite and > 0, got {v}"),
            ));
        }
    }
    let x = pred.values();
    let y = truth.values();
    match mode {
        SsimMode::Global => {
            let n = x.len() as f64;
            let sx: f64 = x.iter().sum();
            let sy: f64 = y.iter().sum();
            let sxx: f64 = x.iter().map(|a| a * a).sum();
            let syy: f64 = y.iter().map(|a| a * a).sum();
            let sxy: f64 = x.iter().zip(y).map(|(a, b)| a * b).sum();
            Ok(ssim_from_sums(n, sx, sy, sxx, syy, sxy, c1, c2))
        }
        SsimMode::Windowed => {
            let (h, w) = (pred.grid().height(), pred.grid().width());
            let side = SSIM_WINDOW_SIDE;
            if h < side || w < side {
                return Err(CoreError::WindowExceedsMap { h, w, side });
            }
            // Summed-area tables of x, y, x^2, y^2, xy; one pass each.
            let sat = |f: &dyn Fn(usize) -> f64| -> Vec<f64> {
                let mut s = vec![0.0; (h + 1) * (w + 1)];
                for r in 0..h {
                    let mut row_acc = 0.0;
                    for c in 0..w {
                        row_acc += f(r * w + c);
                        s[(r + 1) * (w + 1) + (c + 1)] = s[r * (w + 1) + (c + 1)] + row_acc;
                    }
                }
                s
            };
            let sat_x = sat(&|i| x[i]);
            let sat_y = sat(&|i| y[i]);
            let sat_xx = sat(&|i| x[i] * x[i]);
            let sat_yy = sat(&|i| y[i] * y[i]);
            let sat_xy = sat(&|i| x[i] * y[i]);
            let rect = |s: &[f64], r0: usize, c0: usize| -> f64 {
                let (r1, c1_) = (r0 + side, c0 + side);
                s[r1 * (w + 1) + c1_] - s[r0 * (w + 1) + c1_] - s[r1 * (w + 1) + c0]
                    + s[r0 * (w + 1) + c0]
            };
            let n_win = (side * side) as f64;
            let mut total = 0.0;
            let mut count = 0.0;
            for r0 in 0..=h - side {
                for c0 in 0..=w - side {
                    total += ssim_from_sums(
                        n_win,
                        rect(&sat_x, r0, c0),
                        rect(&sat_y, r0, c0),
                        rect(&sat_xx, r0, c0),
                        rect(&sat_yy, r0, c0),
                        rect(&sat_xy, r0, c0),
                        c1,
                        c2,
                    );
                    count += 1.0;
                }
            }
            Ok(total / count)
        }
    }
}

/// All five metrics for one prediction/truth pair.
#[derive(Debug, Clone, Copy)]
pub struct MetricsReport {
    pub nmse: f64,
    /// `10*log10(nmse)`; `f64::NEG_INFINITY` when the NMSE is exactly zero.
    pub nmse_db: f64,
    pub rmse: f64,
    pub mae: f64,
    pub ssim: f64,
    pub ssim_mode: SsimMode,
}

impl MetricsReport {
    /// Computes every metric with the default SSIM stabilizers.
    pub fn compute(pred: &RealMap, truth: &RealMap, mode: SsimMode) -> Result<Self> {
        Self::compute_with(pred, truth, SSIM_DEFAULT_C1, SSIM_DEFAULT_C2, mode)
    }

    pub fn compute_with(
        pred: &RealMap,
        truth: &RealMap,
        c1: f64,
        c2: f64,
        mode: SsimMode,
    ) -> Result<Self> {
        Ok(MetricsReport {
            nmse: nmse(pred, truth)?,
            nmse_db: nmse_db(pred, truth)?,
            rmse: rmse(pred, truth)?,
            mae: mae(pred, truth)?,
            ssim: ssim(pred, truth, c1, c2, mode)?,
            ssim_mode: mode,
        })
    }
}
