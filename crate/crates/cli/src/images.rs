//! Image I/O: building masks and ground-truth maps come in as 8-bit
//! grayscale images; exposure maps go out as 8-bit heatmaps.

use std::path::Path;

use emfield_core::grid::{GridSpec, MapUnit, RealMap};
use image::{DynamicImage, GrayImage, Rgb, RgbImage};

use crate::error::{CliError, Result};

/// Default binarization threshold: datasets ship saturated masks (0/255),
/// so any mid-range cut gives the same result.
pub const MASK_THRESHOLD: u8 = 128;

fn open_luma8(path: &Path) -> Result<GrayImage> {
    let img = image::open(path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
    let luma = match img {
        DynamicImage::ImageLuma8(buf) => buf,
        other => {
            return Err(CliError::invalid(format!(
                "{}: expected an 8-bit single-channel image, got {:?} — reduce it to \
                 grayscale explicitly before use",
                path.display(),
                other.color()
            )))
        }
    };
    if luma.width() == 0 || luma.height() == 0 {
        return Err(CliError::invalid(format!(
            "{}: zero-size image",
            path.display()
        )));
    }
    Ok(luma)
}

/// Loads an 8-bit grayscale mask: pixel `>= threshold` marks a building
/// cell. Returns the row-major mask plus the image dimensions.
pub fn load_building_mask(path: &Path, threshold: u8) -> Result<(Vec<bool>, u32, u32)> {
    let img = open_luma8(path)?;
    let (w, h) = img.dimensions();
    let mut mask = Vec::with_capacity((w * h) as usize);
    for y in 0..h {
        for x in 0..w {
            mask.push(img.get_pixel(x, y).0[0] >= threshold);
        }
    }
    Ok((mask, h, w))
}

/// Loads an 8-bit grayscale ground-truth map, scaling pixel values to
/// `[0, 1]` by `v / 255`. The image must match `grid`'s dimensions.
pub fn load_groundtruth_map(path: &Path, grid: GridSpec) -> Result<RealMap> {
    let img = open_luma8(path)?;
    let (w, h) = img.dimensions();
    if (h as usize, w as usize) != (grid.height(), grid.width()) {
        return Err(CliError::invalid(format!(
            "truth image {} is {h}x{w} but the scene is {}x{}",
            path.display(),
            grid.height(),
            grid.width()
        )));
    }
    let mut values = Vec::with_capacity((w * h) as usize);
    for y in 0..h {
        for x in 0..w {
            values.push(f64::from(img.get_pixel(x, y).0[0]) / 255.0);
        }
    }
    Ok(RealMap::from_values(grid, values, MapUnit::Normalized)?)
}

/// A placeholder geometry for maps whose file carries no physical metadata
/// (pure map comparisons): 1 m pixels at the frequency whose wavenumber is 1.
pub(crate) fn neutral_grid(height: usize, width: usize) -> Result<GridSpec> {
    use emfield_core::grid::SPEED_OF_LIGHT;
    Ok(GridSpec::new(
        height,
        width,
        1.0,
        SPEED_OF_LIGHT / (2.0 * std::f64::consts::PI),
    )?)
}

/// Loads an 8-bit grayscale image as a normalized map on a neutral grid
/// derived from the image's own dimensions.
pub fn load_normalized_image(path: &Path) -> Result<RealMap> {
    let img = open_luma8(path)?;
    let (w, h) = img.dimensions();
    load_groundtruth_map(path, neutral_grid(h as usize, w as usize)?)
}

/// Output color scheme for heatmaps.
#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Colormap {
    /// `round(255 * v)` gray levels; invertible to `1/255` resolution.
    Grayscale,
    /// A perceptually ordered dark-violet-to-yellow ramp.
    Viridis,
}

/// Anchors of the viridis-like ramp, evenly spaced on `[0, 1]`.
const VIRIDIS_ANCHORS: [[u8; 3]; 9] = [
    [68, 1, 84],
    [71, 44, 122],
    [59, 81, 139],
    [44, 113, 142],
    [33, 144, 141],
    [39, 173, 129],
    [92, 200, 99],
    [170, 220, 50],
    [253, 231, 37],
];

fn viridis(v: f64) -> Rgb<u8> {
    let scaled = v.clamp(0.0, 1.0) * (VIRIDIS_ANCHORS.len() - 1) as f64;
    let lo = (scaled.floor() as usize).min(VIRIDIS_ANCHORS.len() - 2);
    let t = scaled - lo as f64;
    let a = VIRIDIS_ANCHORS[lo];
    let b = VIRIDIS_ANCHORS[lo + 1];
    let mix = |x: u8, y: u8| -> u8 {
        (f64::from(x) + t * (f64::from(y) - f64::from(x))).round() as u8
    };
    Rgb([mix(a[0], b[0]), mix(a[1], b[1]), mix(a[2], b[2])])
}

/// Writes a normalized map as an 8-bit heatmap image. Maps in any other
/// unit are rejected — normalize first so the quantization is meaningful.
pub fn export_heatmap(map: &RealMap, path: &Path, colormap: Colormap) -> Result<()> {
    if map.unit() != MapUnit::Normalized {
        return Err(CliError::invalid(format!(
            "heatmap export requires a normalized map, got unit {:?}",
            map.unit()
        )));
    }
    let (h, w) = (map.grid().height() as u32, map.grid().width() as u32);
    let save_err = |e: image::ImageError| CliError::Io(format!("{}: {e}", path.display()));
    match colormap {
        Colormap::Grayscale => {
            let img = GrayImage::from_fn(w, h, |x, y| {
                image::Luma([(255.0 * map.at(y as usize, x as usize)).round() as u8])
            });
            img.save(path).map_err(save_err)
        }
        Colormap::Viridis => {
            let img =
                RgbImage::from_fn(w, h, |x, y| viridis(map.at(y as usize, x as usize)));
            img.save(path).map_err(save_err)
        }
    }
}

/// Rescales a dB map onto `[0, 1]` with the window `[min_db, max_db]`
/// stretched across the unit interval and everything outside clipped.
pub fn normalize_db_map(map: &RealMap, min_db: f64, max_db: f64) -> Result<RealMap> {
    if map.unit() != MapUnit::Db {
        return Err(CliError::invalid(format!(
            "normalization window applies to dB maps, got unit {:?}",
            map.unit()
        )));
    }
    if !(min_db.is_finite() && max_db.is_finite() && min_db < max_db) {
        return Err(CliError::invalid(format!(
            "normalization window must satisfy min < max, got [{min_db}, {max_db}]"
        )));
    }
    let span = max_db - min_db;
    let values = map
        .values()
        .iter()
        .map(|&v| ((v - min_db) / span).clamp(0.0, 1.0))
        .collect();
    Ok(RealMap::from_values(
        *map.grid(),
        values,
        MapUnit::Normalized,
    )?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use emfield_core::grid::SPEED_OF_LIGHT;

    fn grid(h: usize, w: usize) -> GridSpec {
        GridSpec::new(h, w, 1.0, SPEED_OF_LIGHT).unwrap()
    }

    #[test]
    fn all_black_and_all_white_masks() {
        let dir = tempfile::tempdir().unwrap();
        let black = dir.path().join("black.png");
        GrayImage::from_pixel(5, 3, image::Luma([0])).save(&black).unwrap();
        let (mask, h, w) = load_building_mask(&black, MASK_THRESHOLD).unwrap();
        assert_eq!((h, w), (3, 5));
        assert!(mask.iter().all(|&b| !b));

        let white = dir.path().join("white.png");
        GrayImage::from_pixel(5, 3, image::Luma([255])).save(&white).unwrap();
        let (mask, _, _) = load_building_mask(&white, MASK_THRESHOLD).unwrap();
        assert!(mask.iter().all(|&b| b));
    }

    #[test]
    fn known_block_binarizes_to_exactly_that_block() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("block.png");
        let mut img = GrayImage::from_pixel(4, 4, image::Luma([0]));
        for y in 1..3 {
            for x in 2..4 {
                img.put_pixel(x, y, image::Luma([255]));
            }
        }
        img.save(&path).unwrap();
        let (mask, _, _) = load_building_mask(&path, MASK_THRESHOLD).unwrap();
        for y in 0..4 {
            for x in 0..4 {
                let expected = (1..3).contains(&y) && (2..4).contains(&x);
                assert_eq!(mask[y * 4 + x], expected, "({y}, {x})");
            }
        }
    }

    #[test]
    fn threshold_is_inclusive() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("edge.png");
        let mut img = GrayImage::from_pixel(2, 1, image::Luma([127]));
        img.put_pixel(1, 0, image::Luma([128]));
        img.save(&path).unwrap();
        let (mask, _, _) = load_building_mask(&path, 128).unwrap();
        assert_eq!(mask, vec![false, true]);
    }

    #[test]
    fn truth_map_scales_by_255() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("truth.png");
        let mut img = GrayImage::from_pixel(2, 1, image::Luma([0]));
        img.put_pixel(0, 0, image::Luma([255]));
        img.put_pixel(1, 0, image::Luma([128]));
        img.save(&path).unwrap();
        let map = load_groundtruth_map(&path, grid(1, 2)).unwrap();
        assert_eq!(map.values()[0], 1.0);
        assert_eq!(map.values()[1], 128.0 / 255.0);
    }

    #[test]
    fn multi_channel_images_are_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("rgb.png");
        RgbImage::from_pixel(2, 2, Rgb([1, 2, 3])).save(&path).unwrap();
        let err = load_building_mask(&path, MASK_THRESHOLD).unwrap_err();
        assert_eq!(err.exit_code(), 1, "{err}");
        let err = load_groundtruth_map(&path, grid(2, 2)).unwrap_err();
        assert_eq!(err.exit_code(), 1, "{err}");
    }

    #[test]
    fn heatmap_constants_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        for (value, expected) in [(1.0, 255u8), (0.0, 0u8)] {
            let path = dir.path().join(format!("const_{expected}.png"));
            let map =
                RealMap::from_values(grid(3, 4), vec![value; 12], MapUnit::Normalized).unwrap();
            export_heatmap(&map, &path, Colormap::Grayscale).unwrap();
            let img = image::open(&path).unwrap().into_luma8();
            assert!(img.pixels().all(|p| p.0[0] == expected));
        }
    }

    #[test]
    fn grayscale_export_then_reload_is_within_one_quantum() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("roundtrip.png");
        let g = grid(4, 4);
        let values: Vec<f64> = (0..16).map(|i| i as f64 / 15.0).collect();
        let map = RealMap::from_values(g, values.clone(), MapUnit::Normalized).unwrap();
        export_heatmap(&map, &path, Colormap::Grayscale).unwrap();
        let back = load_groundtruth_map(&path, g).unwrap();
        for (a, b) in back.values().iter().zip(&values) {
            assert!((a - b).abs() <= 1.0 / 255.0, "{a} vs {b}");
        }
    }

    #[test]
    fn unnormalized_heatmap_input_is_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let map = RealMap::from_values(grid(2, 2), vec![-30.0; 4], MapUnit::Db).unwrap();
        let err =
            export_heatmap(&map, &dir.path().join("x.png"), Colormap::Grayscale).unwrap_err();
        assert_eq!(err.exit_code(), 1);
    }

    #[test]
    fn db_window_normalization_clips_and_scales() {
        let map = RealMap::from_values(
            grid(1, 4),
            vec![-90.0, -60.0, -30.0, 10.0],
            MapUnit::Db,
        )
        .unwrap();
        let norm = normalize_db_map(&map, -60.0, 0.0).unwrap();
        assert_eq!(norm.values(), &[0.0, 0.0, 0.5, 1.0]);
        assert_eq!(norm.unit(), MapUnit::Normalized);
    }

    #[test]
    fn viridis_endpoints_hit_the_anchor_colors() {
        assert_eq!(viridis(0.0), Rgb([68, 1, 84]));
        assert_eq!(viridis(1.0), Rgb([253, 231, 37]));
        assert_eq!(viridis(0.5), Rgb([33, 144, 141]));
    }
}
