//! Field magnitude to signal-level / path-loss maps, plus empirical
//! distance-based baseline map generators to compare the physics pipeline
//! against.

use crate::error::{CoreError, Result};
use crate::grid::{ComplexField, MapUnit, RealMap, Scene, SPEED_OF_LIGHT};

/// How complex field magnitudes become a dB-scale (optionally normalized)
/// map. Constructed through [`PathLossConfig::new`], which enforces
/// `floor_db <= norm_min_db < norm_max_db` and a positive reference.
#[derive(Debug, Clone, Copy)]
pub struct PathLossConfig {
    floor_db: f64,
    reference: f64,
    normalize: bool,
    norm_min_db: f64,
    norm_max_db: f64,
}

impl Default for PathLossConfig {
    /// Unit reference magnitude, a -150 dB clamp floor, and normalization
    /// over the window [-150, 0] dB.
    fn default() -> Self {
        PathLossConfig {
            floor_db: -150.0,
            reference: 1.0,
            normalize: true,
            norm_min_db: -150.0,
            norm_max_db: 0.0,
        }
    }
}

impl PathLossConfig {
    /// `reference` is the linear magnitude that maps to 0 dB; `floor_db`
    /// clamps the level of vanishing magnitudes so maps stay finite;
    /// the `[norm_min_db, norm_max_db]` window is stretched to [0, 1] when
    /// `normalize` is set.
    pub fn new(
        floor_db: f64,
        reference: f64,
        normalize: bool,
        norm_min_db: f64,
        norm_max_db: f64,
    ) -> Result<Self> {
        if !(reference.is_finite() && reference > 0.0) {
            return Err(CoreError::invalid(
                "reference",
                format!("must be finite and > 0, got {reference}"),
            ));
        }
        for (name, v) in [
            ("floor_db", floor_db),
            ("norm_min_db", norm_min_db),
            ("norm_max_db", norm_max_db),
        ] {
            if !v.is_finite() {
                return Err(CoreError::invalid(name, format!("must be finite, got {v}")));
            }
        }
        if !(norm_min_db < norm_max_db) {
            return Err(CoreError::invalid(
                "norm_min_db/norm_max_db",
                format!("window must satisfy min < max, got [{norm_min_db}, {norm_max_db}]"),
            ));
        }
        if floor_db > norm_min_db {
            return Err(CoreError::invalid(
                "floor_db",
                format!("must be <= norm_min_db, got {floor_db} > {norm_min_db}"),
            ));
        }
        Ok(PathLossConfig {
            floor_db,
            reference,
            normalize,
            norm_min_db,
            norm_max_db,
        })
    }

    pub fn floor_db(&self) -> f64 {
        self.floor_db
    }

    pub fn reference(&self) -> f64 {
        self.reference
    }

    pub fn normalize(&self) -> bool {
        self.normalize
    }

    pub fn norm_window_db(&self) -> (f64, f64) {
        (self.norm_min_db, self.norm_max_db)
    }

    /// Same config with normalization switched on or off.
    pub fn with_normalize(mut self, normalize: bool) -> Self {
        self.normalize = normalize;
        self
    }
}

/// Converts a complex field to a signal-level map: per cell
/// `20 * log10(|E| / reference)` clamped below at the floor, then, when
/// normalization is on, mapped through the window to [0, 1] with clipping.
/// Zero magnitudes clamp to the floor rather than producing -inf.
pub fn field_to_pathloss(e: &ComplexField, cfg: &PathLossConfig) -> RealMap {
    let span = cfg.norm_max_db - cfg.norm_min_db;
    let values: Vec<f64> = e
        .values()
        .iter()
        .map(|z| {
            let mag = z.norm();
            let level = if mag > 0.0 {
                (20.0 * (mag / cfg.reference).log10()).max(cfg.floor_db)
            } else {
                cfg.floor_db
            };
            if cfg.normalize {
                ((level - cfg.norm_min_db) / span).clamp(0.0, 1.0)
            } else {
                level
            }
        })
        .collect();
    let unit = if cfg.normalize {
        MapUnit::Normalized
    } else {
        MapUnit::Db
    };
    RealMap::from_values_unchecked(*e.grid(), values, unit)
}

/// Per-cell center distance to the transmitter cell, in meters. Equidistant
/// cells get bit-identical values (integer squared distance first).
fn distance_map(scene: &Scene) -> Vec<f64> {
    let grid = scene.grid();
    let (tx_r, tx_c) = scene.tx();
    let mut out = vec![0.0; grid.n_cells()];
    for r in 0..grid.height() {
        for c in 0..grid.width() {
            let dr = r.abs_diff(tx_r);
            let dc = c.abs_diff(tx_c);
            let d2 = (dr * dr + dc * dc) as f64;
            out[grid.idx(r, c)] = d2.sqrt() * grid.pixel_length();
        }
    }
    out
}

/// Log-distance path-loss surrogate:
/// `PL(p) = pl0_db + 10 n log10(max(d, d0) / d0)` with `d` the cell-center
/// distance to the transmitter in meters. Building-independent by design —
/// it is the comparison class, not the physics.
pub fn baseline_log_distance(
    scene: &Scene,
    exponent: f64,
    ref_distance: f64,
    pl0_db: f64,
) -> Result<RealMap> {
    if !(exponent.is_finite() && exponent > 0.0) {
        return Err(CoreError::invalid(
            "exponent",
            format!("must be finite and > 0, got {exponent}"),
        ));
    }
    if !(ref_distance.is_finite() && ref_distance > 0.0) {
        return Err(CoreError::invalid(
            "ref_distance",
            format!("must be finite and > 0, got {ref_distance}"),
        ));
    }
    if !pl0_db.is_finite() {
        return Err(CoreError::invalid(
            "pl0_db",
            format!("must be finite, got {pl0_db}"),
        ));
    }
    let values = distance_map(scene)
        .into_iter()
        .map(|d| pl0_db + 10.0 * exponent * (d.max(ref_distance) / ref_distance).log10())
        .collect();
    Ok(RealMap::from_values_unchecked(
        *scene.grid(),
        values,
        MapUnit::Db,
    ))
}

/// Free-space path loss `20 log10(4 pi d f / c)` at the grid's frequency,
/// with the distance clamped to half a pixel so the transmitter cell stays
/// finite.
pub fn baseline_free_space(scene: &Scene) -> RealMap {
    let grid = scene.grid();
    let f = grid.frequency();
    let d_min = 0.5 * grid.pixel_length();
    let values = distance_map(scene)
        .into_iter()
        .map(|d| {
            let d = d.max(d_min);
            20.0 * (4.0 * std::f64::consts::PI * d * f / SPEED_OF_LIGHT).log10()
        })
        .collect();
    RealMap::from_values_unchecked(*grid, values, MapUnit::Db)
}
