//! Grid geometry, field containers, materials, and contrast maps.
//!
//! Every map in the engine lives on a uniform rectangular grid of square
//! pixels. [`GridSpec`] carries the geometry (rows, columns, pixel edge
//! length) together with the operating frequency, from which the free-space
//! wavenumber and the equivalent-disk radius of a pixel follow:
//!
//! ```text
//!     k0 = 2 pi f / c          (rad/m)
//!     a  = sqrt(A / pi)        (disk with the pixel's area A)
//! ```
//!
//! The equivalent disk is what makes the singular self-interaction of the
//! Green's operator integrable in closed form.

use num_complex::Complex64;

use crate::error::{CoreError, Result};

/// Speed of light in vacuum, m/s (exact by SI definition).
pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;

/// Vacuum permittivity, F/m (CODATA 2018).
pub const VACUUM_PERMITTIVITY: f64 = 8.854_187_812_8e-12;

/// Geometry and operating frequency of a pixel grid.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridSpec {
    height: usize,
    width: usize,
    pixel_length: f64,
    frequency: f64,
}

impl GridSpec {
    /// Builds a grid of `height` x `width` square pixels with edge length
    /// `pixel_length` (meters) at operating frequency `frequency` (Hz).
    ///
    /// Both dimensions must be at least 1; pixel length and frequency must be
    /// finite and strictly positive.
    pub fn new(height: usize, width: usize, pixel_length: f64, frequency: f64) -> Result<Self> {
        if height == 0 {
            return Err(CoreError::invalid("height", "must be at least 1"));
        }
        if width == 0 {
            return Err(CoreError::invalid("width", "must be at least 1"));
        }
        if !(pixel_length.is_finite() && pixel_length > 0.0) {
            return Err(CoreError::invalid(
                "pixel_length",
                format!("must be finite and positive, got {pixel_length}"),
            ));
        }
        if !(frequency.is_finite() && frequency > 0.0) {
            return Err(CoreError::invalid(
                "frequency",
                format!("must be finite and positive, got {frequency}"),
            ));
        }
        Ok(GridSpec {
            height,
            width,
            pixel_length,
            frequency,
        })
    }

    /// Number of rows.
    pub fn height(&self) -> usize {
        self.height
    }

    /// Number of columns.
    pub fn width(&self) -> usize {
        self.width
    }

    /// Pixel edge length in meters.
    pub fn pixel_length(&self) -> f64 {
        self.pixel_length
    }

    /// Operating frequency in Hz.
    pub fn frequency(&self) -> f64 {
        self.frequency
    }

    /// Total number of cells.
    pub fn n_cells(&self) -> usize {
        self.height * self.width
    }

    /// Free-space wavenumber `k0 = 2 pi f / c` in rad/m.
    pub fn wavenumber(&self) -> f64 {
        2.0 * std::f64::consts::PI * self.frequency / SPEED_OF_LIGHT
    }

    /// Area of one pixel in m^2.
    pub fn cell_area(&self) -> f64 {
        self.pixel_length * self.pixel_length
    }

    /// Radius of the disk with the same area as one pixel, `a = sqrt(A/pi)`.
    pub fn equivalent_radius(&self) -> f64 {
        (self.cell_area() / std::f64::consts::PI).sqrt()
    }

    /// Electrical size of a pixel, `k0 * pixel_length` (radians per pixel).
    pub fn pixel_phase(&self) -> f64 {
        self.wavenumber() * self.pixel_length
    }

    /// Pixels per free-space wavelength, `2 pi / (k0 * pixel_length)`.
    pub fn samples_per_wavelength(&self) -> f64 {
        2.0 * std::f64::consts::PI / self.pixel_phase()
    }

    /// Row-major linear index of cell `(row, col)`.
    #[inline]
    pub fn idx(&self, row: usize, col: usize) -> usize {
        debug_assert!(row < self.height && col < self.width);
        row * self.width + col
    }

    /// True when `other` has the same shape (rows and columns).
    pub fn same_shape(&self, other: &GridSpec) -> bool {
        self.height == other.height && self.width == other.width
    }

    pub(crate) fn check_same_shape(&self, other: &GridSpec, context: &'static str) -> Result<()> {
        if self.same_shape(other) {
            Ok(())
        } else {
            Err(CoreError::ShapeMismatch {
                context,
                expected_h: self.height,
                expected_w: self.width,
                got_h: other.height,
                got_w: other.width,
            })
        }
    }
}

/// Electromagnetic material description of a building interior.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MaterialParams {
    /// Relative permittivity (>= 1).
    pub relative_permittivity: f64,
    /// Conductivity in S/m (>= 0).
    pub conductivity: f64,
}

impl MaterialParams {
    /// Validating constructor.
    pub fn new(relative_permittivity: f64, conductivity: f64) -> Result<Self> {
        if !(relative_permittivity.is_finite() && relative_permittivity >= 1.0) {
            return Err(CoreError::invalid(
                "relative_permittivity",
                format!("must be finite and >= 1, got {relative_permittivity}"),
            ));
        }
        if !(conductivity.is_finite() && conductivity >= 0.0) {
            return Err(CoreError::invalid(
                "conductivity",
                format!("must be finite and >= 0, got {conductivity}"),
            ));
        }
        Ok(MaterialParams {
            relative_permittivity,
            conductivity,
        })
    }

    /// Complex contrast of the material relative to vacuum at `frequency`:
    ///
    /// ```text
    ///     chi = (eps_c - eps0)/eps0 = (eps_r - 1) - j sigma/(omega eps0)
    /// ```
    ///
    /// The imaginary part is non-positive for passive (lossy) media under the
    /// `exp(+j omega t)` time convention used throughout the engine.
    pub fn contrast(&self, frequency: f64) -> Complex64 {
        let omega = 2.0 * std::f64::consts::PI * frequency;
        Complex64::new(
            self.relative_permittivity - 1.0,
            -self.conductivity / (omega * VACUUM_PERMITTIVITY),
        )
    }
}

impl Default for MaterialParams {
    /// Generic lossy building material: `eps_r` = 5.0, `sigma` = 0.1 S/m.
    fn default() -> Self {
        MaterialParams {
            relative_permittivity: 5.0,
            conductivity: 0.1,
        }
    }
}

/// A propagation scene: grid, building occupancy, transmitter, and material.
#[derive(Debug, Clone)]
pub struct Scene {
    grid: GridSpec,
    building_mask: Vec<bool>,
    tx_row: usize,
    tx_col: usize,
    material: MaterialParams,
}

impl Scene {
    /// Builds a scene, validating that the mask matches the grid and the
    /// transmitter lies inside it. `building_mask` is row-major; `true`
    /// marks a building cell.
    pub fn new(
        grid: GridSpec,
        building_mask: Vec<bool>,
        tx_row: usize,
        tx_col: usize,
        material: MaterialParams,
    ) -> Result<Self> {
        if building_mask.len() != grid.n_cells() {
            return Err(CoreError::invalid(
                "building_mask",
                format!(
                    "length {} does not match grid with {} cells",
                    building_mask.len(),
                    grid.n_cells()
                ),
            ));
        }
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
        Ok(Scene {
            grid,
            building_mask,
            tx_row,
            tx_col,
            material,
        })
    }

    pub fn grid(&self) -> &GridSpec {
        &self.grid
    }

    pub fn building_mask(&self) -> &[bool] {
        &self.building_mask
    }

    pub fn tx(&self) -> (usize, usize) {
        (self.tx_row, self.tx_col)
    }

    pub fn material(&self) -> MaterialParams {
        self.material
    }
}

/// Complex-valued map over a grid (a field or a residual), row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct ComplexField {
    grid: GridSpec,
    values: Vec<Complex64>,
}

impl ComplexField {
    /// All-zero field on `grid`.
    pub fn zeros(grid: GridSpec) -> Self {
        ComplexField {
            grid,
            values: vec![Complex64::ZERO; grid.n_cells()],
        }
    }

    /// Wraps row-major `values`, which must have exactly one entry per cell.
    pub fn from_values(grid: GridSpec, values: Vec<Complex64>) -> Result<Self> {
        if values.len() != grid.n_cells() {
            return Err(CoreError::invalid(
                "values",
                format!(
                    "length {} does not match grid with {} cells",
                    values.len(),
                    grid.n_cells()
                ),
            ));
        }
        Ok(ComplexField { grid, values })
    }

    pub fn grid(&self) -> &GridSpec {
        &self.grid
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [Complex64] {
        &mut self.values
    }

    pub fn into_values(self) -> Vec<Complex64> {
        self.values
    }

    /// Value at `(row, col)`.
    #[inline]
    pub fn at(&self, row: usize, col: usize) -> Complex64 {
        self.values[self.grid.idx(row, col)]
    }

    /// Euclidean norm `sqrt(sum |v|^2)`.
    pub fn norm_l2(&self) -> f64 {
        self.values.iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt()
    }

    /// True if any entry is NaN or infinite.
    pub fn has_non_finite(&self) -> bool {
        self.values
            .iter()
            .any(|v| !v.re.is_finite() || !v.im.is_finite())
    }
}

/// Complex contrast map `chi`: zero in free space, the material contrast
/// inside buildings. The imaginary part is non-positive everywhere (passive
/// media only).
#[derive(Debug, Clone, PartialEq)]
pub struct ContrastMap {
    grid: GridSpec,
    values: Vec<Complex64>,
}

impl ContrastMap {
    /// Contrast of a scene: `chi = 0` on free-space cells and
    /// `material.contrast(f)` on building cells.
    pub fn from_scene(scene: &Scene) -> Self {
        let chi = scene.material.contrast(scene.grid.frequency());
        let values = scene
            .building_mask
            .iter()
            .map(|&b| if b { chi } else { Complex64::ZERO })
            .collect();
        ContrastMap {
            grid: scene.grid,
            values,
        }
    }

    /// Wraps an explicit per-cell contrast map, enforcing passivity
    /// (`Im(chi) <= 0` everywhere) and finiteness.
    pub fn from_values(grid: GridSpec, values: Vec<Complex64>) -> Result<Self> {
        if values.len() != grid.n_cells() {
            return Err(CoreError::invalid(
                "values",
                format!(
                    "length {} does not match grid with {} cells",
                    values.len(),
                    grid.n_cells()
                ),
            ));
        }
        for (i, v) in values.iter().enumerate() {
            if !v.re.is_finite() || !v.im.is_finite() {
                return Err(CoreError::invalid(
                    "values",
                    format!("non-finite contrast at cell {i}"),
                ));
            }
            if v.im > 0.0 {
                return Err(CoreError::invalid(
                    "values",
                    format!("contrast at cell {i} has Im = {} > 0 (active medium)", v.im),
                ));
            }
        }
        Ok(ContrastMap { grid, values })
    }

    /// The all-zero (free space) contrast.
    pub fn free_space(grid: GridSpec) -> Self {
        ContrastMap {
            grid,
            values: vec![Complex64::ZERO; grid.n_cells()],
        }
    }

    pub fn grid(&self) -> &GridSpec {
        &self.grid
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    /// True when every cell is exactly zero.
    pub fn is_free_space(&self) -> bool {
        self.values.iter().all(|v| *v == Complex64::ZERO)
    }
}

/// Physical interpretation of a real-valued map.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MapUnit {
    /// Decibel levels (e.g. path loss or received level).
    Db,
    /// Dimensionless values normalized to `[0, 1]`.
    Normalized,
    /// Raw linear values (magnitudes, residuals, synthetic test data).
    Linear,
}

/// Real-valued map over a grid, row-major, tagged with its unit.
#[derive(Debug, Clone, PartialEq)]
pub struct RealMap {
    grid: GridSpec,
    values: Vec<f64>,
    unit: MapUnit,
}

impl RealMap {
    /// Wraps row-major `values`; length must match the grid.
    pub fn from_values(grid: GridSpec, values: Vec<f64>, unit: MapUnit) -> Result<Self> {
        if values.len() != grid.n_cells() {
            return Err(CoreError::invalid(
                "values",
                format!(
                    "length {} does not match grid with {} cells",
                    values.len(),
                    grid.n_cells()
                ),
            ));
        }
        if unit == MapUnit::Normalized {
            for (i, v) in values.iter().enumerate() {
                if !(*v >= 0.0 && *v <= 1.0) {
                    return Err(CoreError::invalid(
                        "values",
                        format!("normalized map has {v} at cell {i}, outside [0, 1]"),
                    ));
                }
            }
        }
        Ok(RealMap { grid, values, unit })
    }

    /// All-zero linear map.
    pub fn zeros(grid: GridSpec) -> Self {
        RealMap {
            grid,
            values: vec![0.0; grid.n_cells()],
            unit: MapUnit::Linear,
        }
    }

    pub fn grid(&self) -> &GridSpec {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn unit(&self) -> MapUnit {
        self.unit
    }

    #[inline]
    pub fn at(&self, row: usize, col: usize) -> f64 {
        self.values[self.grid.idx(row, col)]
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub(crate) fn from_values_unchecked(grid: GridSpec, values: Vec<f64>, unit: MapUnit) -> Self {
        debug_assert_eq!(values.len(), grid.n_cells());
        RealMap { grid, values, unit }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn grid_derives_wavenumber_and_disk_radius() {
        // 256 x 256 map of 1 m pixels at 5.9 GHz. Expected values computed
        // with a 50-digit arbitrary-precision evaluation of 2*pi*f/c and
        // 1/sqrt(pi).
        let g = GridSpec::new(256, 256, 1.0, 5.9e9).unwrap();
        assert_relative_eq!(g.wavenumber(), 123.65485629514923, max_relative = 1e-12);
        assert_relative_eq!(g.equivalent_radius(), 0.56418958354775629, max_relative = 1e-12);
        assert_eq!(g.n_cells(), 65536);
    }

    #[test]
    fn grid_rejects_degenerate_parameters() {
        assert!(GridSpec::new(0, 4, 1.0, 1e9).is_err());
        assert!(GridSpec::new(4, 0, 1.0, 1e9).is_err());
        assert!(GridSpec::new(4, 4, 0.0, 1e9).is_err());
        assert!(GridSpec::new(4, 4, -1.0, 1e9).is_err());
        assert!(GridSpec::new(4, 4, f64::NAN, 1e9).is_err());
        assert!(GridSpec::new(4, 4, 1.0, 0.0).is_err());
        assert!(GridSpec::new(4, 4, 1.0, f64::INFINITY).is_err());
    }

    #[test]
    fn default_material_contrast_at_5_9_ghz() {
        // Real part is exactly eps_r - 1; imaginary part -sigma/(omega eps0)
        // frozen from an independent arbitrary-precision evaluation.
        let m = MaterialParams::default();
        let chi = m.contrast(5.9e9);
        assert_eq!(chi.re, 4.0);
        assert_relative_eq!(chi.im, -0.30466277261902279, max_relative = 1e-12);
        assert!(chi.im <= 0.0);
    }

    #[test]
    fn material_rejects_unphysical_parameters() {
        assert!(MaterialParams::new(0.5, 0.1).is_err());
        assert!(MaterialParams::new(5.0, -0.1).is_err());
        assert!(MaterialParams::new(f64::NAN, 0.1).is_err());
        assert!(MaterialParams::new(5.0, 0.1).is_ok());
    }

    #[test]
    fn contrast_map_is_zero_off_buildings() {
        let g = GridSpec::new(2, 3, 1.0, 5.9e9).unwrap();
        let mask = vec![false, true, false, false, false, true];
        let scene = Scene::new(g, mask, 0, 0, MaterialParams::default()).unwrap();
        let chi = ContrastMap::from_scene(&scene);
        let expected = MaterialParams::default().contrast(5.9e9);
        assert_eq!(chi.values()[0], Complex64::ZERO);
        assert_eq!(chi.values()[1], expected);
        assert_eq!(chi.values()[5], expected);
        assert!(!chi.is_free_space());
        assert!(ContrastMap::free_space(g).is_free_space());
    }

    #[test]
    fn contrast_map_rejects_active_media() {
        let g = GridSpec::new(1, 2, 1.0, 5.9e9).unwrap();
        let bad = vec![Complex64::ZERO, Complex64::new(1.0, 0.5)];
        assert!(ContrastMap::from_values(g, bad).is_err());
        let ok = vec![Complex64::ZERO, Complex64::new(1.0, -0.5)];
        assert!(ContrastMap::from_values(g, ok).is_ok());
    }

    #[test]
    fn scene_rejects_out_of_bounds_transmitter_and_bad_mask() {
        let g = GridSpec::new(4, 4, 1.0, 1e9).unwrap();
        assert!(Scene::new(g, vec![false; 16], 4, 0, MaterialParams::default()).is_err());
        assert!(Scene::new(g, vec![false; 15], 0, 0, MaterialParams::default()).is_err());
        assert!(Scene::new(g, vec![false; 16], 3, 3, MaterialParams::default()).is_ok());
    }

    #[test]
    fn normalized_maps_must_stay_in_unit_interval() {
        let g = GridSpec::new(1, 3, 1.0, 1e9).unwrap();
        assert!(RealMap::from_values(g, vec![0.0, 0.5, 1.0], MapUnit::Normalized).is_ok());
        assert!(RealMap::from_values(g, vec![0.0, 1.5, 1.0], MapUnit::Normalized).is_err());
        assert!(RealMap::from_values(g, vec![0.0, f64::NAN, 1.0], MapUnit::Normalized).is_err());
        // dB maps may hold any finite values
        assert!(RealMap::from_values(g, vec![-120.0, 3.0, 90.0], MapUnit::Db).is_ok());
    }

    #[test]
    fn sampling_ratio_reports_pixels_per_wavelength() {
        // k0 * pixel = 0.5 -> 4 pi pixels per wavelength
        let f = 0.5 * SPEED_OF_LIGHT / (2.0 * std::f64::consts::PI);
        let g = GridSpec::new(8, 8, 1.0, f).unwrap();
        assert_relative_eq!(g.pixel_phase(), 0.5, max_relative = 1e-12);
        assert_relative_eq!(
            g.samples_per_wavelength(),
            4.0 * std::f64::consts::PI,
            max_relative = 1e-12
        );
    }
}
