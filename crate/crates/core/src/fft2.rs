//! Minimal 2-D FFT on row-major complex buffers, built on 1-D plans.
//!
//! Plans are created once and shared; they are immutable and thread-safe, so
//! a value of [`Fft2`] can be used concurrently from many threads. Scratch
//! buffers are allocated per call, never shared.

use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

/// Smallest `m >= n` whose prime factors are only 2 and 3 — sizes the 1-D
/// transforms handle at full speed.
pub(crate) fn next_fast_len(n: usize) -> usize {
    if n <= 1 {
        return 1;
    }
    let mut best = n.next_power_of_two();
    let mut p3 = 1usize;
    while p3 < best {
        let mut m = p3;
        while m < n {
            m *= 2;
        }
        if m < best {
            best = m;
        }
        p3 *= 3;
    }
    best
}

/// Forward/inverse 2-D FFT of fixed shape `h x w` (unnormalized: a forward
/// followed by an inverse multiplies the data by `h * w`).
pub(crate) struct Fft2 {
    h: usize,
    w: usize,
    row_fwd: Arc<dyn Fft<f64>>,
    row_inv: Arc<dyn Fft<f64>>,
    col_fwd: Arc<dyn Fft<f64>>,
    col_inv: Arc<dyn Fft<f64>>,
}

impl Fft2 {
    pub fn new(h: usize, w: usize) -> Self {
        let mut planner = FftPlanner::new();
        Fft2 {
            h,
            w,
            row_fwd: planner.plan_fft_forward(w),
            row_inv: planner.plan_fft_inverse(w),
            col_fwd: planner.plan_fft_forward(h),
            col_inv: planner.plan_fft_inverse(h),
        }
    }

    pub fn len(&self) -> usize {
        self.h * self.w
    }

    pub fn forward(&self, data: &mut [Complex64]) {
        self.pass(data, &self.row_fwd, &self.col_fwd);
    }

    pub fn inverse(&self, data: &mut [Complex64]) {
        self.pass(data, &self.row_inv, &self.col_inv);
    }

    fn pass(&self, data: &mut [Complex64], row: &Arc<dyn Fft<f64>>, col: &Arc<dyn Fft<f64>>) {
        assert_eq!(data.len(), self.h * self.w, "buffer shape mismatch");
        let mut scratch = vec![Complex64::ZERO; row.get_inplace_scratch_len()];
        for r in data.chunks_exact_mut(self.w) {
            row.process_with_scratch(r, &mut scratch);
        }
        // Columns: transpose, transform as rows, transpose back.
        let mut t = vec![Complex64::ZERO; self.h * self.w];
        transpose(data, &mut t, self.h, self.w);
        let mut scratch_c = vec![Complex64::ZERO; col.get_inplace_scratch_len()];
        for c in t.chunks_exact_mut(self.h) {
            col.process_with_scratch(c, &mut scratch_c);
        }
        transpose(&t, data, self.w, self.h);
    }
}

/// `dst` (shape `cols x rows`) becomes the transpose of `src` (shape `rows x cols`).
fn transpose(src: &[Complex64], dst: &mut [Complex64], rows: usize, cols: usize) {
    for i in 0..rows {
        for j in 0..cols {
            dst[j * rows + i] = src[i * cols + j];
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fast_lengths_are_minimal_2_3_smooth_bounds() {
        assert_eq!(next_fast_len(1), 1);
        assert_eq!(next_fast_len(2), 2);
        assert_eq!(next_fast_len(47), 48);
        assert_eq!(next_fast_len(127), 128);
        assert_eq!(next_fast_len(255), 256);
        assert_eq!(next_fast_len(441), 486);
        assert_eq!(next_fast_len(512), 512);
    }

    #[test]
    fn forward_then_inverse_scales_by_len() {
        let (h, w) = (6, 8);
        let fft = Fft2::new(h, w);
        let orig: Vec<Complex64> = (0..h * w)
            .map(|i| Complex64::new(i as f64 * 0.37 - 3.0, (i as f64).sin()))
            .collect();
        let mut buf = orig.clone();
        fft.forward(&mut buf);
        fft.inverse(&mut buf);
        let scale = (h * w) as f64;
        for (a, b) in buf.iter().zip(&orig) {
            assert!((a / scale - b).norm() < 1e-12);
        }
    }

    #[test]
    fn impulse_transforms_to_constant_spectrum() {
        let (h, w) = (4, 3);
        let fft = Fft2::new(h, w);
        let mut buf = vec![Complex64::ZERO; h * w];
        buf[0] = Complex64::new(1.0, 0.0);
        fft.forward(&mut buf);
        for v in &buf {
            assert!((v - Complex64::new(1.0, 0.0)).norm() < 1e-13);
        }
    }
}
