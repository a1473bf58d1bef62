//! 2-D electromagnetic field engine for radio exposure mapping.
//!
//! The crate models time-harmonic TM-polarized wave propagation over a
//! uniform pixel grid. A line source illuminates a scene of lossy dielectric
//! buildings; the total field obeys a volume integral equation
//!
//! ```text
//!     (I + W·diag(chi)) e_tot = e_inc
//! ```
//!
//! where `W` is the discretized free-space Green's operator, `chi` the
//! complex contrast of the materials, and `e_inc` the incident field of the
//! source. The crate provides:
//!
//! * [`grid`] — grid geometry, fields, scenes, materials, and contrast maps;
//! * [`special`] — the cylindrical Bessel/Hankel functions the kernel needs;
//! * [`greens`] — the Green's operator: FFT-accelerated and dense forms;
//! * [`solver`] — an iterative forward solver plus a dense direct reference;
//! * [`loss`] — differentiable Helmholtz- and integral-equation residual losses;
//! * [`reconstruct`] — gradient-descent field reconstruction from those losses;
//! * [`exposure`] — conversion of fields to path-loss maps and closed-form baselines;
//! * [`metrics`] — map comparison metrics (NMSE, RMSE, MAE, SSIM).
//!
//! All numerics are `f64`; fields are row-major [`num_complex::Complex64`]
//! buffers. Operators and solvers are deterministic: the same inputs produce
//! bit-identical outputs on a given platform.

pub mod error;
pub mod exposure;
mod fft2;
pub mod greens;
pub mod grid;
pub mod loss;
pub mod metrics;
pub mod reconstruct;
pub mod solver;
pub mod special;

pub use error::{CoreError, Result};
pub use grid::{
    ComplexField, ContrastMap, GridSpec, MapUnit, MaterialParams, RealMap, Scene,
    SPEED_OF_LIGHT, VACUUM_PERMITTIVITY,
};
