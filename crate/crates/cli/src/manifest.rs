//! Scene manifests: plain UTF-8 `key = value` text files describing one
//! scene — grid geometry, operating frequency, transmitter cell, building
//! material, the mask image, an optional ground-truth map, and the dB
//! normalization window for exposure maps.
//!
//! ```text
//! # 64x64 demo scene
//! height         = 64
//! width          = 64
//! pixel_length_m = 0.004
//! frequency_hz   = 5.9e9
//! tx_row         = 16
//! tx_col         = 16
//! eps_r          = 5.0
//! sigma_s_per_m  = 0.1
//! mask_path      = mask.png
//! truth_path     = truth.png
//! norm_min_db    = -60
//! norm_max_db    = 0
//! ```
//!
//! Lines starting with `#` and blank lines are ignored. Every key except
//! `truth_path` is required; unknown or duplicate keys are rejected.
//! Relative paths resolve against the manifest's directory, and referenced
//! files must exist at load time.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use emfield_core::exposure::PathLossConfig;
use emfield_core::grid::{ContrastMap, GridSpec, MaterialParams, Scene};

use crate::error::{CliError, Result};
use crate::images;

/// Per-scene configuration parsed from a manifest file.
#[derive(Debug, Clone, PartialEq)]
pub struct SceneManifest {
    pub height: usize,
    pub width: usize,
    pub pixel_length_m: f64,
    pub frequency_hz: f64,
    pub tx_row: usize,
    pub tx_col: usize,
    pub eps_r: f64,
    pub sigma_s_per_m: f64,
    /// Resolved (manifest-relative) path of the building mask image.
    pub mask_path: PathBuf,
    /// Resolved path of the ground-truth map image, when the scene has one.
    pub truth_path: Option<PathBuf>,
    pub norm_min_db: f64,
    pub norm_max_db: f64,
}

const REQUIRED_KEYS: [&str; 11] = [
    "height",
    "width",
    "pixel_length_m",
    "frequency_hz",
    "tx_row",
    "tx_col",
    "eps_r",
    "sigma_s_per_m",
    "mask_path",
    "norm_min_db",
    "norm_max_db",
];

impl SceneManifest {
    /// Parses the manifest at `path`, resolves its file references, and
    /// checks that every referenced file exists.
    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        let base = path.parent().unwrap_or(Path::new("."));
        Self::parse(&text, base).map_err(|e| match e {
            CliError::Validation(msg) => {
                CliError::Validation(format!("{}: {msg}", path.display()))
            }
            other => other,
        })
    }

    /// Parses manifest text; relative paths resolve against `base`.
    pub fn parse(text: &str, base: &Path) -> Result<Self> {
        let mut seen: BTreeMap<&str, String> = BTreeMap::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let Some((key, value)) = line.split_once('=') else {
                return Err(CliError::invalid(format!(
                    "line {}: expected `key = value`, got {line:?}",
                    lineno + 1
                )));
            };
            let key = key.trim();
            let value = value.trim();
            let canonical = REQUIRED_KEYS
                .iter()
                .chain(std::iter::once(&"truth_path"))
                .find(|k| **k == key);
            let Some(&canonical) = canonical else {
                return Err(CliError::invalid(format!(
                    "line {}: unknown key {key:?}",
                    lineno + 1
                )));
            };
            if value.is_empty() {
                return Err(CliError::invalid(format!(
                    "line {}: key {key:?} has an empty value",
                    lineno + 1
                )));
            }
            if seen.insert(canonical, value.to_string()).is_some() {
                return Err(CliError::invalid(format!(
                    "line {}: duplicate key {key:?}",
                    lineno + 1
                )));
            }
        }
        for key in REQUIRED_KEYS {
            if !seen.contains_key(key) {
                return Err(CliError::invalid(format!("missing required key {key:?}")));
            }
        }

        let parse_usize = |key: &str| -> Result<usize> {
            seen[key].parse().map_err(|_| {
                CliError::invalid(format!(
                    "key {key:?}: expected a non-negative integer, got {:?}",
                    seen[key]
                ))
            })
        };
        let parse_f64 = |key: &str| -> Result<f64> {
            seen[key].parse().map_err(|_| {
                CliError::invalid(format!(
                    "key {key:?}: expected a number, got {:?}",
                    seen[key]
                ))
            })
        };

        let manifest = SceneManifest {
            height: parse_usize("height")?,
            width: parse_usize("width")?,
            pixel_length_m: parse_f64("pixel_length_m")?,
            frequency_hz: parse_f64("frequency_hz")?,
            tx_row: parse_usize("tx_row")?,
            tx_col: parse_usize("tx_col")?,
            eps_r: parse_f64("eps_r")?,
            sigma_s_per_m: parse_f64("sigma_s_per_m")?,
            mask_path: base.join(&seen["mask_path"]),
            truth_path: seen.get("truth_path").map(|p| base.join(p)),
            norm_min_db: parse_f64("norm_min_db")?,
            norm_max_db: parse_f64("norm_max_db")?,
        };

        if !manifest.mask_path.is_file() {
            return Err(CliError::Io(format!(
                "referenced mask file does not exist: {}",
                manifest.mask_path.display()
            )));
        }
        if let Some(truth) = &manifest.truth_path {
            if !truth.is_file() {
                return Err(CliError::Io(format!(
                    "referenced truth file does not exist: {}",
                    truth.display()
                )));
            }
        }
        Ok(manifest)
    }

    /// Grid geometry of the scene.
    pub fn grid(&self) -> Result<GridSpec> {
        Ok(GridSpec::new(
            self.height,
            self.width,
            self.pixel_length_m,
            self.frequency_hz,
        )?)
    }

    /// Loads the mask image and assembles the full scene, checking that the
    /// image dimensions match the manifest before anything is computed.
    pub fn scene(&self) -> Result<Scene> {
        let grid = self.grid()?;
        let (mask, h, w) = images::load_building_mask(&self.mask_path, images::MASK_THRESHOLD)?;
        if (h as usize, w as usize) != (self.height, self.width) {
            return Err(CliError::invalid(format!(
                "mask image {} is {h}x{w} but the manifest declares {}x{}",
                self.mask_path.display(),
                self.height,
                self.width
            )));
        }
        let material = MaterialParams::new(self.eps_r, self.sigma_s_per_m)?;
        Ok(Scene::new(grid, mask, self.tx_row, self.tx_col, material)?)
    }

    /// The scene's contrast map (zero outside buildings).
    pub fn contrast(&self, scene: &Scene) -> ContrastMap {
        ContrastMap::from_scene(scene)
    }

    /// Loads the ground-truth map (values scaled to `[0, 1]`), checking its
    /// dimensions against the manifest. Errors if the scene declares none.
    pub fn truth_map(&self) -> Result<emfield_core::grid::RealMap> {
        let Some(path) = &self.truth_path else {
            return Err(CliError::invalid(
                "this manifest declares no truth_path".to_string(),
            ));
        };
        let grid = self.grid()?;
        images::load_groundtruth_map(path, grid)
    }

    /// Exposure-map conversion settings implied by the normalization window.
    ///
    /// The dB floor is tied to the window bottom: anything at or below
    /// `norm_min_db` normalizes to 0 regardless, so no information is lost
    /// and any window the manifest declares is self-consistent.
    pub fn pathloss_config(&self) -> Result<PathLossConfig> {
        Ok(PathLossConfig::new(
            self.norm_min_db,
            1.0,
            true,
            self.norm_min_db,
            self.norm_max_db,
        )?)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const DEMO: &str = "\
# demo scene
height         = 4
width          = 5
pixel_length_m = 0.01
frequency_hz   = 5.9e9
tx_row         = 1
tx_col         = 2
eps_r          = 5.0
sigma_s_per_m  = 0.1
mask_path      = mask.png
norm_min_db    = -60
norm_max_db    = 0
";

    fn write_mask(dir: &Path, name: &str, h: u32, w: u32) {
        let img = image::GrayImage::from_pixel(w, h, image::Luma([0u8]));
        img.save(dir.join(name)).unwrap();
    }

    #[test]
    fn parses_a_complete_manifest() {
        let dir = tempfile::tempdir().unwrap();
        write_mask(dir.path(), "mask.png", 4, 5);
        let m = SceneManifest::parse(DEMO, dir.path()).unwrap();
        assert_eq!((m.height, m.width), (4, 5));
        assert_eq!((m.tx_row, m.tx_col), (1, 2));
        assert_eq!(m.truth_path, None);
        assert_eq!(m.mask_path, dir.path().join("mask.png"));
        let scene = m.scene().unwrap();
        assert_eq!(scene.grid().height(), 4);
    }

    #[test]
    fn unknown_duplicate_and_missing_keys_are_rejected() {
        let dir = tempfile::tempdir().unwrap();
        write_mask(dir.path(), "mask.png", 4, 5);
        let unknown = format!("{DEMO}mystery = 1\n");
        let err = SceneManifest::parse(&unknown, dir.path()).unwrap_err();
        assert!(err.to_string().contains("unknown key"), "{err}");

        let duplicate = format!("{DEMO}height = 4\n");
        let err = SceneManifest::parse(&duplicate, dir.path()).unwrap_err();
        assert!(err.to_string().contains("duplicate key"), "{err}");

        let missing = DEMO.replace("width          = 5\n", "");
        let err = SceneManifest::parse(&missing, dir.path()).unwrap_err();
        assert!(err.to_string().contains("missing required key"), "{err}");
    }

    #[test]
    fn malformed_values_are_validation_errors() {
        let dir = tempfile::tempdir().unwrap();
        write_mask(dir.path(), "mask.png", 4, 5);
        let bad = DEMO.replace("tx_row         = 1", "tx_row         = 1.5");
        let err = SceneManifest::parse(&bad, dir.path()).unwrap_err();
        assert_eq!(err.exit_code(), 1);
    }

    #[test]
    fn missing_mask_file_is_an_io_error() {
        let dir = tempfile::tempdir().unwrap();
        let err = SceneManifest::parse(DEMO, dir.path()).unwrap_err();
        assert_eq!(err.exit_code(), 2, "{err}");
    }

    #[test]
    fn mask_dimension_mismatch_is_detected_before_compute() {
        let dir = tempfile::tempdir().unwrap();
        write_mask(dir.path(), "mask.png", 7, 7);
        let m = SceneManifest::parse(DEMO, dir.path()).unwrap();
        let err = m.scene().unwrap_err();
        assert!(err.to_string().contains("7x7"), "{err}");
    }
}
