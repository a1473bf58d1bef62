//! FFT-path Green's operator against the dense reference, plus adjoint,
//! linearity, and thread-safety contracts.

use std::time::Instant;

use emfield_core::greens::{DenseW, WKernel};
use emfield_core::grid::{ComplexField, GridSpec, SPEED_OF_LIGHT};
use num_complex::Complex64;
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

/// Grid with unit pixels and k0 * pixel = 0.5.
fn grid(h: usize, w: usize) -> GridSpec {
    let f = 0.5 * SPEED_OF_LIGHT / (2.0 * std::f64::consts::PI);
    GridSpec::new(h, w, 1.0, f).unwrap()
}

fn random_field(g: GridSpec, rng: &mut StdRng) -> ComplexField {
    ComplexField::from_values(
        g,
        (0..g.n_cells())
            .map(|_| Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))
            .collect(),
    )
    .unwrap()
}

fn rel_l2(a: &[Complex64], b: &[Complex64]) -> f64 {
    let diff: f64 = a.iter().zip(b).map(|(x, y)| (x - y).norm_sqr()).sum();
    let scale: f64 = b.iter().map(|y| y.norm_sqr()).sum();
    (diff / scale.max(f64::MIN_POSITIVE)).sqrt()
}

fn cdot(a: &[Complex64], b: &[Complex64]) -> Complex64 {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

#[test]
fn fft_apply_matches_dense_matvec_on_two_grid_sizes() {
    // 20 random inputs per grid, relative L2 <= 1e-10, and the whole sweep
    // stays under one second.
    let start = Instant::now();
    let mut rng = StdRng::seed_from_u64(101);
    for (h, w) in [(12, 12), (24, 24)] {
        let g = grid(h, w);
        let kernel = WKernel::build(g).unwrap();
        let dense = DenseW::build(g).unwrap();
        for trial in 0..20 {
            let x = random_field(g, &mut rng);
            let fft = kernel.apply(&x).unwrap();
            let direct = dense.apply_dense(&x).unwrap();
            let err = rel_l2(fft.values(), direct.values());
            assert!(
                err <= 1e-10,
                "grid {h}x{w} trial {trial}: rel L2 {err:.3e}"
            );
        }
    }
    assert!(
        start.elapsed().as_secs_f64() < 1.0,
        "operator sweep took {:?}",
        start.elapsed()
    );
}

#[test]
fn fft_apply_matches_dense_on_rectangular_grids() {
    let mut rng = StdRng::seed_from_u64(102);
    for (h, w) in [(5, 17), (16, 9), (3, 40)] {
        let g = grid(h, w);
        let kernel = WKernel::build(g).unwrap();
        let dense = DenseW::build(g).unwrap();
        for _ in 0..5 {
            let x = random_field(g, &mut rng);
            let err = rel_l2(
                kernel.apply(&x).unwrap().values(),
                dense.apply_dense(&x).unwrap().values(),
            );
            assert!(err <= 1e-10, "grid {h}x{w}: rel L2 {err:.3e}");
        }
    }
}

#[test]
fn adjoint_satisfies_inner_product_identity_and_matches_dense() {
    let mut rng = StdRng::seed_from_u64(103);
    for (h, w) in [(12, 12), (10, 15)] {
        let g = grid(h, w);
        let kernel = WKernel::build(g).unwrap();
        let dense = DenseW::build(g).unwrap();
        let n = g.n_cells();
        for _ in 0..10 {
            let x = random_field(g, &mut rng);
            let y = random_field(g, &mut rng);
            let wx = kernel.apply(&x).unwrap();
            let why = kernel.apply_adjoint(&y).unwrap();
            // <W x, y> = <x, W^H y>.
            let lhs = cdot(wx.values(), y.values());
            let rhs = cdot(x.values(), why.values());
            assert!(
                (lhs - rhs).norm() <= 1e-12 * lhs.norm().max(1.0),
                "inner-product identity on {h}x{w}: {lhs} vs {rhs}"
            );
            // W^H y against the explicit conjugate-transposed dense matvec.
            let mut direct = vec![Complex64::ZERO; n];
            for (row, d) in direct.iter_mut().enumerate() {
                for (col, yv) in y.values().iter().enumerate() {
                    *d += dense.entry(col, row).conj() * yv;
                }
            }
            let err = rel_l2(why.values(), &direct);
            assert!(err <= 1e-10, "adjoint vs dense on {h}x{w}: {err:.3e}");
        }
    }
}

#[test]
fn apply_is_linear() {
    let g = grid(14, 11);
    let kernel = WKernel::build(g).unwrap();
    let mut rng = StdRng::seed_from_u64(104);
    let x = random_field(g, &mut rng);
    let y = random_field(g, &mut rng);
    let alpha = Complex64::new(1.3, -0.7);
    let beta = Complex64::new(-0.4, 2.1);
    let combo = ComplexField::from_values(
        g,
        x.values()
            .iter()
            .zip(y.values())
            .map(|(a, b)| alpha * a + beta * b)
            .collect(),
    )
    .unwrap();
    let w_combo = kernel.apply(&combo).unwrap();
    let wx = kernel.apply(&x).unwrap();
    let wy = kernel.apply(&y).unwrap();
    let direct: Vec<Complex64> = wx
        .values()
        .iter()
        .zip(wy.values())
        .map(|(a, b)| alpha * a + beta * b)
        .collect();
    assert!(rel_l2(w_combo.values(), &direct) <= 1e-12);
}

#[test]
fn shared_kernel_is_deterministic_across_threads() {
    // One kernel, eight threads, each applying to its own input four times:
    // every result must be bit-identical to the sequential reference.
    let g = grid(24, 24);
    let kernel = WKernel::build(g).unwrap();
    let mut rng = StdRng::seed_from_u64(105);
    let inputs: Vec<ComplexField> = (0..8).map(|_| random_field(g, &mut rng)).collect();
    let references: Vec<Vec<Complex64>> = inputs
        .iter()
        .map(|x| kernel.apply(x).unwrap().into_values())
        .collect();

    std::thread::scope(|scope| {
        for (x, want) in inputs.iter().zip(&references) {
            scope.spawn(|| {
                for _ in 0..4 {
                    let got = kernel.apply(x).unwrap();
                    assert_eq!(got.values(), want.as_slice(), "bit-exact repeat");
                }
            });
        }
    });
}
