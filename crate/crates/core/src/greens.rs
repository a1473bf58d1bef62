//! The discretized free-space Green's operator `W` and the incident field.
//!
//! On a uniform grid the scattered-field integral couples every pair of
//! cells through the 2-D free-space Green's function
//!
//! ```text
//!     G(r) = -(j/4) H0^(2)(k0 r)
//! ```
//!
//! Integrating `G` over a source pixel — replaced by the equal-area disk of
//! radius `a` — gives the operator entries in closed form (Richmond's
//! classical TM cell model):
//!
//! ```text
//!     W[n][n] = (j/2)   [ pi k0 a H1^(2)(k0 a) - 2j ]
//!     W[n][s] = (j pi k0 a / 2) J1(k0 a) H0^(2)(k0 |p_n - p_s|),   n != s
//! ```
//!
//! Entries depend on the cell offset only, so `W` is a 2-D convolution: the
//! FFT form applies it in `O(N log N)` using a zero-padded kernel of shape
//! `(2H-1) x (2W-1)`. A dense form materializes the full matrix for small
//! grids; it is the correctness oracle for the FFT path and the basis of the
//! direct reference solver.
//!
//! # Thread safety
//!
//! [`WKernel`] is immutable after construction (frequency-domain kernels and
//! FFT plans are read-only), so one kernel may be shared across threads and
//! applied concurrently; every application allocates its own work buffers.

use num_complex::Complex64;

use crate::error::{CoreError, Result};
use crate::fft2::{next_fast_len, Fft2};
use crate::grid::{ComplexField, GridSpec};
use crate::special::{bessel_j1, hankel2_0, hankel2_1};

/// Cell-count cap for materializing the dense operator (a 4096-cell matrix
/// is 4096^2 complex entries = 256 MiB; anything larger is a mistake).
pub const DENSE_CELL_CAP: usize = 4096;

/// Offset-indexed table of operator entries: `stamps[(dr + H - 1) * (2W - 1)
/// + (dc + W - 1)]` is the coupling between two cells whose row/column
/// offsets are `(dr, dc)`.
fn stamp_table(grid: &GridSpec) -> Result<Vec<Complex64>> {
    let (h, w) = (grid.height() as isize, grid.width() as isize);
    let k0 = grid.wavenumber();
    let a = grid.equivalent_radius();
    let k0a = k0 * a;
    let pixel = grid.pixel_length();

    let self_term = w_self_term(k0a);
    // (j pi k0 a / 2) J1(k0 a), multiplied by H0^(2)(k0 d) per offset.
    let mutual_coeff =
        Complex64::new(0.0, 0.5 * std::f64::consts::PI * k0a) * bessel_j1(k0a);

    let (sh, sw) = ((2 * h - 1) as usize, (2 * w - 1) as usize);
    let mut stamps = vec![Complex64::ZERO; sh * sw];
    for dr in -(h - 1)..=(h - 1) {
        for dc in -(w - 1)..=(w - 1) {
            let idx = ((dr + h - 1) as usize) * sw + (dc + w - 1) as usize;
            stamps[idx] = if dr == 0 && dc == 0 {
                self_term
            } else {
                // Integer squared distance keeps equidistant offsets
                // bit-identical regardless of sign or axis order.
                let d = ((dr * dr + dc * dc) as f64).sqrt() * pixel;
                mutual_coeff * hankel2_0(k0 * d)?
            };
        }
    }
    Ok(stamps)
}

/// Self-interaction entry `(j/2) [pi k0 a H1^(2)(k0 a) - 2j]`.
fn w_self_term(k0a: f64) -> Complex64 {
    let h1 = hankel2_1(k0a).expect("k0 a > 0 for any valid grid");
    Complex64::new(0.0, 0.5)
        * (std::f64::consts::PI * k0a * h1 - Complex64::new(0.0, 2.0))
}

/// FFT-accelerated form of the Green's operator for one grid.
pub struct WKernel {
    grid: GridSpec,
    stamps: Vec<Complex64>,
    pad_h: usize,
    pad_w: usize,
    /// Frequency-domain kernel of `W`.
    freq_fwd: Vec<Complex64>,
    /// Frequency-domain kernel of the adjoint: the conjugated,
    /// index-reversed stamp table.
    freq_adj: Vec<Complex64>,
    fft: Fft2,
}

impl WKernel {
    /// Precomputes the offset kernel and its frequency-domain forms.
    ///
    /// The padded transform shape is the smallest 2-3-smooth size holding the
    /// full `(2H-1) x (2W-1)` linear-convolution support, so applying the
    /// operator is exact (no circular aliasing).
    pub fn build(grid: GridSpec) -> Result<Self> {
        let (h, w) = (grid.height(), grid.width());
        let stamps = stamp_table(&grid)?;
        let pad_h = next_fast_len(2 * h - 1);
        let pad_w = next_fast_len(2 * w - 1);
        let fft = Fft2::new(pad_h, pad_w);

        let sw = 2 * w - 1;
        let place = |value_of: &dyn Fn(isize, isize) -> Complex64| -> Vec<Complex64> {
            let mut buf = vec![Complex64::ZERO; pad_h * pad_w];
            for dr in -(h as isize - 1)..=(h as isize - 1) {
                for dc in -(w as isize - 1)..=(w as isize - 1) {
                    let r = dr.rem_euclid(pad_h as isize) as usize;
                    let c = dc.rem_euclid(pad_w as isize) as usize;
                    buf[r * pad_w + c] = value_of(dr, dc);
                }
            }
            buf
        };

        let stamp_at = |dr: isize, dc: isize| -> Complex64 {
            let idx = ((dr + h as isize - 1) as usize) * sw + (dc + w as isize - 1) as usize;
            stamps[idx]
        };

        let mut freq_fwd = place(&|dr, dc| stamp_at(dr, dc));
        fft.forward(&mut freq_fwd);
        // Adjoint = conjugate transpose; for an offset kernel the transpose
        // reverses the offset, so the adjoint stamp is conj(K[-dr, -dc]).
        let mut freq_adj = place(&|dr, dc| stamp_at(-dr, -dc).conj());
        fft.forward(&mut freq_adj);

        Ok(WKernel {
            grid,
            stamps,
            pad_h,
            pad_w,
            freq_fwd,
            freq_adj,
            fft,
        })
    }

    pub fn grid(&self) -> &GridSpec {
        &self.grid
    }

    /// Operator entry for a cell-offset `(dr, dc)`; `None` outside the
    /// `(2H-1) x (2W-1)` support.
    pub fn stamp(&self, dr: isize, dc: isize) -> Option<Complex64> {
        let (h, w) = (self.grid.height() as isize, self.grid.width() as isize);
        if dr.abs() > h - 1 || dc.abs() > w - 1 {
            return None;
        }
        let sw = (2 * w - 1) as usize;
        Some(self.stamps[((dr + h - 1) as usize) * sw + (dc + w - 1) as usize])
    }

    /// Applies `W` to a field via padded FFT convolution.
    pub fn apply(&self, x: &ComplexField) -> Result<ComplexField> {
        self.convolve(x, &self.freq_fwd, "apply")
    }

    /// Applies the adjoint `W^H` via the conjugated, index-reversed kernel.
    pub fn apply_adjoint(&self, y: &ComplexField) -> Result<ComplexField> {
        self.convolve(y, &self.freq_adj, "apply_adjoint")
    }

    fn convolve(
        &self,
        x: &ComplexField,
        freq_kernel: &[Complex64],
        context: &'static str,
    ) -> Result<ComplexField> {
        if *x.grid() != self.grid {
            return Err(CoreError::ShapeMismatch {
                context,
                expected_h: self.grid.height(),
                expected_w: self.grid.width(),
                got_h: x.grid().height(),
                got_w: x.grid().width(),
            });
        }
        let (h, w) = (self.grid.height(), self.grid.width());
        let mut buf = vec![Complex64::ZERO; self.pad_h * self.pad_w];
        for r in 0..h {
            let src = &x.values()[r * w..(r + 1) * w];
            buf[r * self.pad_w..r * self.pad_w + w].copy_from_slice(src);
        }
        self.fft.forward(&mut buf);
        for (b, k) in buf.iter_mut().zip(freq_kernel) {
            *b *= k;
        }
        self.fft.inverse(&mut buf);
        let scale = 1.0 / self.fft.len() as f64;
        let mut out = Vec::with_capacity(h * w);
        for r in 0..h {
            for c in 0..w {
                out.push(buf[r * self.pad_w + c] * scale);
            }
        }
        ComplexField::from_values(self.grid, out)
    }
}

/// Densely materialized Green's operator (small grids only).
#[derive(Debug)]
pub struct DenseW {
    grid: GridSpec,
    entries: Vec<Complex64>,
}

impl DenseW {
    /// Materializes the full `N x N` matrix. Fails with
    /// [`CoreError::DenseCap`] when the grid has more than
    /// [`DENSE_CELL_CAP`] cells.
    pub fn build(grid: GridSpec) -> Result<Self> {
        let n = grid.n_cells();
        if n > DENSE_CELL_CAP {
            return Err(CoreError::DenseCap {
                cells: n,
                cap: DENSE_CELL_CAP,
            });
        }
        let (h, w) = (grid.height(), grid.width());
        let stamps = stamp_table(&grid)?;
        let sw = 2 * w - 1;
        let mut entries = vec![Complex64::ZERO; n * n];
        for rn in 0..h {
            for cn in 0..w {
                let row = rn * w + cn;
                for rs in 0..h {
                    for cs in 0..w {
                        let col = rs * w + cs;
                        let dr = rn as isize - rs as isize;
                        let dc = cn as isize - cs as isize;
                        let idx =
                            ((dr + h as isize - 1) as usize) * sw + (dc + w as isize - 1) as usize;
                        entries[row * n + col] = stamps[idx];
                    }
                }
            }
        }
        Ok(DenseW { grid, entries })
    }

    pub fn grid(&self) -> &GridSpec {
        &self.grid
    }

    /// Matrix entry coupling observation cell `n` to source cell `s`
    /// (row-major linear cell indices).
    pub fn entry(&self, n: usize, s: usize) -> Complex64 {
        self.entries[n * self.grid.n_cells() + s]
    }

    /// Dense matrix-vector application — the oracle for the FFT path.
    pub fn apply_dense(&self, x: &ComplexField) -> Result<ComplexField> {
        if *x.grid() != self.grid {
            return Err(CoreError::ShapeMismatch {
                context: "apply_dense",
                expected_h: self.grid.height(),
                expected_w: self.grid.width(),
                got_h: x.grid().height(),
                got_w: x.grid().width(),
            });
        }
        let n = self.grid.n_cells();
        let xv = x.values();
        let mut out = vec![Complex64::ZERO; n];
        for r in 0..n {
            let row = &self.entries[r * n..(r + 1) * n];
            let mut acc = Complex64::ZERO;
            for (a, b) in row.iter().zip(xv) {
                acc += a * b;
            }
            out[r] = acc;
        }
        ComplexField::from_values(self.grid, out)
    }
}

/// Incident field of a line source at cell `(tx_row, tx_col)`:
///
/// ```text
///     e_inc(p) = -(j/4) H0^(2)(k0 |p_tx - p|)
/// ```
///
/// with the cell-averaged value `(j/(2 k0^2 A)) [pi k0 a H1^(2)(k0 a) - 2j]`
/// on the source cell itself (the disk average of `G`, which keeps the
/// logarithmic singularity integrable).
pub fn incident_field(grid: GridSpec, tx_row: usize, tx_col: usize) -> Result<ComplexField> {
    if tx_row >= grid.height() || tx_col >= grid.width() {
        return Err(CoreError::invalid(
            "transmitter",
            format!(
                "position ({tx_row}, {tx_col}) outside {}x{} grid",
                grid.height(),
                grid.width()
            ),
        ));
    }
    let k0 = grid.wavenumber();
    let a = grid.equivalent_radius();
    let k0a = k0 * a;
    let pixel = grid.pixel_length();
    let self_value = w_self_term(k0a) / (k0 * k0 * grid.cell_area());

    let mut values = Vec::with_capacity(grid.n_cells());
    for r in 0..grid.height() {
        for c in 0..grid.width() {
            if r == tx_row && c == tx_col {
                values.push(self_value);
            } else {
                let dr = r as isize - tx_row as isize;
                let dc = c as isize - tx_col as isize;
                let d = ((dr * dr + dc * dc) as f64).sqrt() * pixel;
                values.push(Complex64::new(0.0, -0.25) * hankel2_0(k0 * d)?);
            }
        }
    }
    ComplexField::from_values(grid, values)
}
