//! Cylinder-function values against a frozen high-precision oracle.
//!
//! The table below was produced by a 50-digit arbitrary-precision evaluation
//! (mpmath) *before* the Rust implementation existed, rounded to 17
//! significant digits, and is pinned here verbatim. Twenty abscissae span
//! (0.01, 100], covering the power-series region, the series/asymptotic
//! switch, and the far asymptotic regime.

use emfield_core::special::{bessel_j0, bessel_j1, bessel_y0, bessel_y1, hankel2_0, hankel2_1};

/// (x, J0, J1, Y0, Y1) — 50-digit arbitrary-precision values.
const ORACLE: [(f64, f64, f64, f64, f64); 20] = [
    (0.010000000000000000, 0.99997500015624957, 0.0049999375002604161, -3.0054556370836460, -63.678596282060656),
    (0.030000000000000000, 0.99977501265593360, 0.014998312563280063, -2.3054863039306798, -21.260020718712392),
    (0.10000000000000000, 0.99750156206604003, 0.049937526036241998, -1.5342386513503668, -6.4589510947020270),
    (0.25000000000000000, 0.98443592929585270, 0.12402597732272692, -0.93157302493005869, -2.7041052293152824),
    (0.50000000000000000, 0.93846980724081290, 0.24226845767487389, -0.44451873350670656, -1.4714723926702431),
    (0.75000000000000000, 0.86424227516664862, 0.34924360217486219, -0.13717276938577240, -1.0375945507692854),
    (1.0000000000000000, 0.76519768655796655, 0.44005058574493352, 0.088256964215676958, -0.78121282130028872),
    (1.5000000000000000, 0.51182767173591813, 0.55793650791009964, 0.38244892379775884, -0.41230862697391130),
    (2.0000000000000000, 0.22389077914123567, 0.57672480775687339, 0.51037567264974512, -0.10703243154093755),
    (3.0000000000000000, -0.26005195490193344, 0.33905895852593646, 0.37685001001279038, 0.32467442479179998),
    (4.5000000000000000, -0.32054250898512142, -0.23106043192337063, -0.19470500862950453, 0.30099732306965462),
    (6.2000000000000000, 0.20174722294890424, -0.23291656707322266, -0.24830995051601428, -0.22228364062007435),
    (8.0000000000000000, 0.17165080713755391, 0.23463634685391462, 0.22352148938756622, -0.15806046173124749),
    (10.000000000000000, -0.24593576445134834, 0.043472746168861437, 0.055671167283599391, 0.24901542420695388),
    (12.000000000000000, 0.047689310796833537, -0.22344710449062761, -0.22523731263436143, -0.057099218260896521),
    (15.500000000000000, -0.10923065090005017, 0.16721318035174714, 0.17064491122943462, 0.11478614251334233),
    (20.000000000000000, 0.16702466434058315, 0.066833124175850046, 0.062640596809383831, -0.16551161436252130),
    (35.500000000000000, -0.13233156389133001, -0.022347970208817343, -0.020482485069601729, 0.13205624458961742),
    (60.500000000000000, -0.10255272478099084, -0.0031323643677641963, -0.0022848010305739883, 0.10253734416809377),
    (100.00000000000000, 0.019985850304223122, -0.077145352014112158, -0.077244313365083152, -0.020372312002759793),
];

const REL_TOL: f64 = 1e-10;

fn assert_rel(got: f64, want: f64, what: &str, x: f64) {
    let err = (got - want).abs();
    assert!(
        err <= REL_TOL * want.abs(),
        "{what}({x}): got {got:.17e}, want {want:.17e}, rel err {:.3e}",
        err / want.abs()
    );
}

#[test]
fn twenty_point_table_matches_to_1e10_relative() {
    for &(x, j0, j1, y0, y1) in &ORACLE {
        assert_rel(bessel_j0(x), j0, "J0", x);
        assert_rel(bessel_j1(x), j1, "J1", x);
        assert_rel(bessel_y0(x).unwrap(), y0, "Y0", x);
        assert_rel(bessel_y1(x).unwrap(), y1, "Y1", x);
    }
}

#[test]
fn hankel_functions_are_j_minus_i_y_at_table_points() {
    for &(x, j0, j1, y0, y1) in &ORACLE {
        let h0 = hankel2_0(x).unwrap();
        let h1 = hankel2_1(x).unwrap();
        assert_rel(h0.re, j0, "Re H0", x);
        assert_rel(-h0.im, y0, "-Im H0", x);
        assert_rel(h1.re, j1, "Re H1", x);
        assert_rel(-h1.im, y1, "-Im H1", x);
    }
}

#[test]
fn wronskian_identity_on_a_dense_log_grid() {
    // J1(x) Y0(x) - J0(x) Y1(x) = 2 / (pi x)  (DLMF 10.5.2).
    let n = 80;
    for k in 0..n {
        let t = k as f64 / (n - 1) as f64;
        // Log-spaced from 0.01 to 100.
        let x = 10f64.powf(-2.0 + 4.0 * t);
        let lhs = bessel_j1(x) * bessel_y0(x).unwrap() - bessel_j0(x) * bessel_y1(x).unwrap();
        let rhs = 2.0 / (std::f64::consts::PI * x);
        let rel = (lhs - rhs).abs() / rhs;
        assert!(rel <= 1e-10, "Wronskian at x = {x}: rel err {rel:.3e}");
    }
}

#[test]
fn small_argument_logarithmic_and_cubic_regimes() {
    // Y0, Y1 near zero: frozen high-precision references.
    let y0 = bessel_y0(1e-6).unwrap();
    assert_rel(y0, -8.8690314816594437, "Y0", 1e-6);
    let y1 = bessel_y1(1e-6).unwrap();
    assert_rel(y1, -636619.77237217501, "Y1", 1e-6);
    // J1(x) = x/2 - x^3/16 + O(x^5); frozen value at 1e-4.
    assert_rel(bessel_j1(1e-4), 4.9999999937500000e-5, "J1", 1e-4);
}

#[test]
fn derivative_identities_by_central_differences() {
    // J0' = -J1 and (x J1)' = x J0, sampled across both evaluation regimes.
    // Step 1e-4 balances O(h^2) truncation (~3e-10) against the ~1e-13
    // evaluation noise amplified by 1/(2h) (~5e-10).
    let h = 1e-4;
    for &x in &[0.4, 2.3, 7.7, 11.9, 12.1, 25.0, 80.0] {
        let dj0 = (bessel_j0(x + h) - bessel_j0(x - h)) / (2.0 * h);
        assert!(
            (dj0 + bessel_j1(x)).abs() <= 5e-9,
            "J0'(x) vs -J1(x) at {x}"
        );
        let xj1 = |t: f64| t * bessel_j1(t);
        let dxj1 = (xj1(x + h) - xj1(x - h)) / (2.0 * h);
        assert!(
            (dxj1 - x * bessel_j0(x)).abs() <= 5e-9 * x.max(1.0),
            "(x J1)' vs x J0 at {x}"
        );
    }
}

#[test]
fn domain_errors_and_edge_cases() {
    assert!(bessel_y0(0.0).is_err());
    assert!(bessel_y0(-1.0).is_err());
    assert!(bessel_y1(f64::NAN).is_err());
    assert!(hankel2_0(-2.0).is_err());
    assert!(hankel2_1(0.0).is_err());
    assert!(bessel_j0(f64::NAN).is_nan());
    assert_eq!(bessel_j0(f64::INFINITY), 0.0);
    // Evenness / oddness.
    assert_eq!(bessel_j0(-3.7), bessel_j0(3.7));
    assert_eq!(bessel_j1(-3.7), -bessel_j1(3.7));
}
