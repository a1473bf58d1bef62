//! Portable binary grid files.
//!
//! The layout is deliberately minimal so any language can read and write it
//! from this description alone:
//!
//! ```text
//! offset  size        field
//! 0       8           magic, the ASCII bytes "EMFGRID1"
//! 8       1           dtype: 1 = f32, 2 = c64 (two f32 per cell: re, im)
//! 9       4           H, u32 little-endian
//! 13      4           W, u32 little-endian
//! 17      H*W*size    payload, row-major little-endian values
//!                     (size = 4 for f32, 8 for c64)
//! end-4   4           CRC-32 (IEEE) of the payload bytes, u32 little-endian
//! ```
//!
//! The payload length must be exactly `H*W*size`; shorter files are
//! truncation errors, longer files are trailing-garbage errors, and a stored
//! CRC that does not match the payload is a checksum error. Each failure is
//! a distinct [`FormatError`] variant so corruption is never misreported.

use std::fs;
use std::path::Path;

use emfield_core::grid::{ComplexField, GridSpec, MapUnit, RealMap};
use num_complex::Complex64;
use thiserror::Error;

/// Leading tag of every portable grid file.
pub const MAGIC: [u8; 8] = *b"EMFGRID1";

/// Fixed byte cost of magic + dtype + two dimensions.
const HEADER_LEN: usize = 8 + 1 + 4 + 4;

/// Decoding failures, one variant per distinct corruption mode.
#[derive(Debug, Error)]
pub enum FormatError {
    /// The file does not start with the expected tag.
    #[error("not a portable grid file: bad or missing magic tag")]
    BadMagic,

    /// The dtype byte is not one of the defined codes.
    #[error("unknown dtype code {0} (expected 1 = f32 or 2 = c64)")]
    UnknownDtype(u8),

    /// The file ends before the declared payload and checksum.
    #[error("truncated file: expected {expected} bytes, got {got}")]
    Truncated { expected: usize, got: usize },

    /// The file continues past the declared payload and checksum.
    #[error("trailing bytes: file has {got} bytes, layout needs exactly {expected}")]
    TrailingBytes { expected: usize, got: usize },

    /// The stored checksum does not match the payload.
    #[error("checksum mismatch: stored {stored:#010x}, computed {computed:#010x}")]
    CrcMismatch { stored: u32, computed: u32 },

    /// The underlying file could not be read or written.
    #[error("{path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
}

/// Cell values of a portable grid.
#[derive(Debug, Clone, PartialEq)]
pub enum Payload {
    /// One `f32` per cell.
    F32(Vec<f32>),
    /// Two `f32` per cell: real then imaginary.
    C64(Vec<[f32; 2]>),
}

impl Payload {
    fn dtype_code(&self) -> u8 {
        match self {
            Payload::F32(_) => 1,
            Payload::C64(_) => 2,
        }
    }

    fn len(&self) -> usize {
        match self {
            Payload::F32(v) => v.len(),
            Payload::C64(v) => v.len(),
        }
    }
}

/// An in-memory portable grid: dimensions plus a typed payload.
#[derive(Debug, Clone, PartialEq)]
pub struct PortableGrid {
    height: u32,
    width: u32,
    payload: Payload,
}

impl PortableGrid {
    /// Wraps a payload, checking that its length is `height * width`.
    pub fn new(height: u32, width: u32, payload: Payload) -> Result<Self, FormatError> {
        let cells = height as usize * width as usize;
        if payload.len() != cells {
            return Err(FormatError::Truncated {
                expected: cells,
                got: payload.len(),
            });
        }
        Ok(PortableGrid {
            height,
            width,
            payload,
        })
    }

    /// Grid rows.
    pub fn height(&self) -> u32 {
        self.height
    }

    /// Grid columns.
    pub fn width(&self) -> u32 {
        self.width
    }

    /// Cell values.
    pub fn payload(&self) -> &Payload {
        &self.payload
    }

    /// Captures a real map, narrowing values to `f32`.
    pub fn from_real_map(map: &RealMap) -> Self {
        PortableGrid {
            height: map.grid().height() as u32,
            width: map.grid().width() as u32,
            payload: Payload::F32(map.values().iter().map(|&v| v as f32).collect()),
        }
    }

    /// Captures a complex field, narrowing values to `f32` pairs.
    pub fn from_complex_field(field: &ComplexField) -> Self {
        PortableGrid {
            height: field.grid().height() as u32,
            width: field.grid().width() as u32,
            payload: Payload::C64(
                field
                    .values()
                    .iter()
                    .map(|z| [z.re as f32, z.im as f32])
                    .collect(),
            ),
        }
    }

    /// Widens an `f32` payload back into a real map on `grid`.
    ///
    /// Fails if the payload is complex or the dimensions disagree.
    pub fn to_real_map(&self, grid: GridSpec, unit: MapUnit) -> crate::error::Result<RealMap> {
        self.check_grid(grid)?;
        match &self.payload {
            Payload::F32(v) => Ok(RealMap::from_values(
                grid,
                v.iter().map(|&x| f64::from(x)).collect(),
                unit,
            )?),
            Payload::C64(_) => Err(crate::error::CliError::invalid(
                "expected an f32 grid, found a c64 field",
            )),
        }
    }

    /// Widens a `c64` payload back into a complex field on `grid`.
    pub fn to_complex_field(&self, grid: GridSpec) -> crate::error::Result<ComplexField> {
        self.check_grid(grid)?;
        match &self.payload {
            Payload::C64(v) => Ok(ComplexField::from_values(
                grid,
                v.iter()
                    .map(|[re, im]| Complex64::new(f64::from(*re), f64::from(*im)))
                    .collect(),
            )?),
            Payload::F32(_) => Err(crate::error::CliError::invalid(
                "expected a c64 field, found an f32 grid",
            )),
        }
    }

    fn check_grid(&self, grid: GridSpec) -> crate::error::Result<()> {
        if grid.height() != self.height as usize || grid.width() != self.width as usize {
            return Err(crate::error::CliError::invalid(format!(
                "grid file is {}x{} but the scene is {}x{}",
                self.height,
                self.width,
                grid.height(),
                grid.width()
            )));
        }
        Ok(())
    }

    /// Serializes to the exact byte layout.
    pub fn encode(&self) -> Vec<u8> {
        let payload_bytes = match &self.payload {
            Payload::F32(v) => {
                let mut b = Vec::with_capacity(v.len() * 4);
                for x in v {
                    b.extend_from_slice(&x.to_le_bytes());
                }
                b
            }
            Payload::C64(v) => {
                let mut b = Vec::with_capacity(v.len() * 8);
                for [re, im] in v {
                    b.extend_from_slice(&re.to_le_bytes());
                    b.extend_from_slice(&im.to_le_bytes());
                }
                b
            }
        };
        let mut out = Vec::with_capacity(HEADER_LEN + payload_bytes.len() + 4);
        out.extend_from_slice(&MAGIC);
        out.push(self.payload.dtype_code());
        out.extend_from_slice(&self.height.to_le_bytes());
        out.extend_from_slice(&self.width.to_le_bytes());
        let crc = crc32fast::hash(&payload_bytes);
        out.extend_from_slice(&payload_bytes);
        out.extend_from_slice(&crc.to_le_bytes());
        out
    }

    /// Parses the exact byte layout, reporting each corruption mode
    /// distinctly.
    pub fn decode(bytes: &[u8]) -> Result<Self, FormatError> {
        if bytes.len() < 8 || bytes[..8] != MAGIC {
            return Err(FormatError::BadMagic);
        }
        if bytes.len() < HEADER_LEN {
            return Err(FormatError::Truncated {
                expected: HEADER_LEN,
                got: bytes.len(),
            });
        }
        let dtype = bytes[8];
        let cell_size = match dtype {
            1 => 4usize,
            2 => 8usize,
            other => return Err(FormatError::UnknownDtype(other)),
        };
        let height = u32::from_le_bytes(bytes[9..13].try_into().unwrap());
        let width = u32::from_le_bytes(bytes[13..17].try_into().unwrap());
        // Header-claimed size in u128 so a hostile height*width cannot
        // overflow; saturate to usize::MAX, which any real buffer undershoots.
        let claimed =
            HEADER_LEN as u128 + height as u128 * width as u128 * cell_size as u128 + 4;
        let expected = usize::try_from(claimed).unwrap_or(usize::MAX);
        if bytes.len() < expected {
            return Err(FormatError::Truncated {
                expected,
                got: bytes.len(),
            });
        }
        if bytes.len() > expected {
            return Err(FormatError::TrailingBytes {
                expected,
                got: bytes.len(),
            });
        }
        let payload_bytes = &bytes[HEADER_LEN..expected - 4];
        let stored = u32::from_le_bytes(bytes[expected - 4..].try_into().unwrap());
        let computed = crc32fast::hash(payload_bytes);
        if stored != computed {
            return Err(FormatError::CrcMismatch { stored, computed });
        }
        let payload = match dtype {
            1 => Payload::F32(
                payload_bytes
                    .chunks_exact(4)
                    .map(|c| f32::from_le_bytes(c.try_into().unwrap()))
                    .collect(),
            ),
            _ => Payload::C64(
                payload_bytes
                    .chunks_exact(8)
                    .map(|c| {
                        [
                            f32::from_le_bytes(c[0..4].try_into().unwrap()),
                            f32::from_le_bytes(c[4..8].try_into().unwrap()),
                        ]
                    })
                    .collect(),
            ),
        };
        Ok(PortableGrid {
            height,
            width,
            payload,
        })
    }

    /// Writes the encoded bytes to `path`.
    pub fn save(&self, path: &Path) -> Result<(), FormatError> {
        fs::write(path, self.encode()).map_err(|source| FormatError::Io {
            path: path.display().to_string(),
            source,
        })
    }

    /// Reads and decodes the file at `path`.
    pub fn load(path: &Path) -> Result<Self, FormatError> {
        let bytes = fs::read(path).map_err(|source| FormatError::Io {
            path: path.display().to_string(),
            source,
        })?;
        Self::decode(&bytes)
    }
}
